#include "convtail/selfcheck.hpp"

#include <cmath>
#include <cstdarg>
#include <cstdio>

#include "convtail/expansion.hpp"
#include "convtail/numeric.hpp"
#include "convtail/oracle.hpp"
#include "convtail/rv_function.hpp"
#include "convtail/sweep.hpp"

namespace convtail::selfcheck {

namespace {

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

double erlang_log_tail(int shape, double rate, double t) {
    double lrt = std::log(rate * t);
    double m = kNegInf;
    for (int k = 0; k < shape; ++k) m = std::max(m, k * lrt - std::lgamma(k + 1.0));
    double s = 0;
    for (int k = 0; k < shape; ++k) s += std::exp(k * lrt - std::lgamma(k + 1.0) - m);
    return -rate * t + m + std::log(s);
}

double slope_of(const std::vector<double>& ts, const std::vector<double>& errs) {
    std::vector<double> lx, ly;
    for (size_t i = 0; i < ts.size(); ++i) {
        lx.push_back(std::log(ts[i]));
        ly.push_back(std::log(std::abs(errs[i])));
    }
    return fit_line(lx, ly).slope;
}

}  // namespace

std::vector<CheckOutcome> check_a1_oracle_exactness(double oracle_rel_tol) {
    std::vector<CheckOutcome> out;
    struct Case {
        const char* spec;
        int sum_shape;
    };
    for (const Case& c : {Case{"gamma:shape=2,rate=1", 4}, Case{"gamma:shape=1,rate=1", 2}}) {
        LightTailModel g = make_model(c.spec);
        for (double t : {1.0, 5.0, 10.0, 20.0, 40.0}) {
            double exact = erlang_log_tail(c.sum_shape, 1.0, t);
            double got = conv_tail(g, g, t, oracle_rel_tol).log_value;
            double rel = std::abs(std::expm1(got - exact));
            out.push_back({fmt("A1 %s self-conv t=%g", c.spec, t), rel <= 1e-8,
                           fmt("rel err %.3e (bound 1e-8)", rel)});
        }
    }
    return out;
}

std::vector<CheckOutcome> check_a2_gamma_self_convolution() {
    std::vector<CheckOutcome> out;
    LightTailModel g = make_model("gamma:shape=2,rate=1");
    std::vector<double> ts{20, 40, 80, 160}, e1, e2;
    for (double t : ts) {
        double exact = erlang_log_tail(4, 1.0, t);
        ExpansionResult p = thm4_predict(g, g, t);
        double r2 = std::abs(std::expm1(p.predicted_log_tail - exact));
        double r1 = std::abs(std::expm1(p.first_order_log_tail - exact));
        e1.push_back(r1);
        e2.push_back(r2);
        double bound = 6.0 / (t * t);
        out.push_back({fmt("A2 second-order rel err t=%g", t), r2 <= bound,
                       fmt("rel err %.3e (bound %.3e)", r2, bound)});
    }
    double s2 = slope_of(ts, e2), s1 = slope_of(ts, e1);
    out.push_back({"A2 second-order error slope", std::abs(s2 + 2.0) <= 0.15,
                   fmt("slope %.3f (want -2 +- 0.15)", s2)});
    out.push_back({"A2 first-order error slope", std::abs(s1 + 1.0) <= 0.1,
                   fmt("slope %.3f (want -1 +- 0.1)", s1)});
    return out;
}

std::vector<CheckOutcome> check_a3_weibull_self_convolution() {
    std::vector<CheckOutcome> out;
    LightTailModel f = make_model("weibull:rate=1,rho=0.5");
    const auto& chi = f.factor();
    std::vector<double> ts, ds;
    for (int k = 10; k <= 14; ++k) {
        double t = std::pow(2.0, k);
        double conv = conv_tail(f, f, t, 1e-10).log_value;
        double lratio = 0.5 * std::log(chi.evaluate(t / 2)) + conv - std::log(t) -
                        2.0 * f.log_survival(t / 2);
        ExpansionResult p = thm1_predict(f, t);
        double d = std::exp(lratio) - p.leading;  // leading = sqrt(pi) here
        ts.push_back(t);
        ds.push_back(d);
        if (t == 4096.0) {
            double corr = p.corrections[0].second + p.corrections[1].second;
            double ratio = d / corr;
            out.push_back({"A3 deficit vs corrections at t=4096",
                           ratio >= 0.85 && ratio <= 1.15,
                           fmt("D/(c1+c2) = %.4f (want within [0.85, 1.15])", ratio)});
        }
    }
    double s = slope_of(ts, ds);
    out.push_back({"A3 deficit slope over 2^10..2^14", std::abs(s + 0.5) <= 0.05,
                   fmt("slope %.4f (want -1/2 +- 0.05)", s)});
    return out;
}

std::vector<CheckOutcome> check_a4_branch_suite() {
    std::vector<CheckOutcome> out;
    LightTailModel F = make_model("tilted:rate=1,beta=-3,rho2=-4");
    const char* gspecs[] = {
        "shifted:rate=1,gamma=-1", "logdamped:rate=1",      "shifted:rate=1,gamma=-1.5",
        "shifted:rate=1,gamma=-2", "shifted:rate=1,gamma=-3", "gamma:shape=2,rate=1",
    };
    std::vector<double> ts{100, 200, 400};
    for (const char* gs : gspecs) {
        LightTailModel G = make_model(gs);
        std::vector<double> res1, res2;
        bool closer = true;
        std::string worst;
        for (double t : ts) {
            double r = std::exp(partial_conv_integral(F, G, t, 1e-10) - F.log_survival(t));
            ExpansionResult m1 = m1_predict(F, G, t);
            double m_first = m1.leading;
            double m_second = m1.leading;
            for (auto& [_, v] : m1.corrections) m_second += v;
            res1.push_back(std::abs(r - m_first));
            res2.push_back(std::abs(r - m_second));
            if (!(res2.back() < res1.back())) {
                closer = false;
                worst = fmt(" (t=%g: |r2|=%.3e vs |r1|=%.3e)", t, res2.back(), res1.back());
            }
        }
        out.push_back({fmt("A4 %s second order closer at all t", gs), closer,
                       closer ? fmt("res2/res1 at t=400: %.3f", res2.back() / res1.back())
                              : "second order not strictly closer" + worst});
        double s1 = slope_of(ts, res1), s2 = slope_of(ts, res2);
        out.push_back({fmt("A4 %s residual slope gap", gs), s2 <= s1 - 0.3,
                       fmt("slope1 %.3f slope2 %.3f gap %.3f (want >= 0.3)", s1, s2, s1 - s2)});
    }
    return out;
}

namespace {

void a5_karamata(std::vector<CheckOutcome>& out) {
    auto sq = [](double t) { return t * t; };
    double head = karamata_index_estimate(sq, 0.0, 50.0, KaramataSide::Head);
    out.push_back({"A5 karamata head t^2", std::abs(head - 3.0) <= 1e-8,
                   fmt("got %.12f want 3", head)});
    auto inv_sq = [](double t) { return 1.0 / (t * t); };
    double tail = karamata_index_estimate(inv_sq, 0.0, 50.0, KaramataSide::Tail);
    out.push_back({"A5 karamata tail t^-2", std::abs(tail - 1.0) <= 1e-8,
                   fmt("got %.12f want 1", tail)});
    auto chi = hua_joe_construct(1.0, 0.5, -2.0, -1.0);
    double h2 = karamata_index_estimate(chi.evaluate, 1.0, 1e6, KaramataSide::Head);
    out.push_back({"A5 karamata head chi at t=1e6", std::abs(h2 - 1.5) <= 1e-3,
                   fmt("got %.6f want 1.5 +- 1e-3", h2)});
}

void a5_hua_joe_ratio(std::vector<CheckOutcome>& out) {
    struct P {
        double scale, index, second, aux;
    };
    for (const P& p : {P{1, 0.5, -2, -1}, P{1, -3, -4, -1}, P{2, 1.2, -1, 1}}) {
        auto f = hua_joe_construct(p.scale, p.index, p.second, p.aux);
        double worst = 0;
        for (double x : {0.25, 0.5, 2.0, 4.0}) {
            double got = second_order_ratio(f, 1e4, x);
            double want = second_order_limit(p.index, p.second, x);
            worst = std::max(worst, std::abs(got - want));
        }
        out.push_back({fmt("A5 2RV ratio idx=%g rho=%g at t=1e4", p.index, p.second),
                       worst <= 1e-3, fmt("max dev %.3e (bound 1e-3)", worst)});
    }
}

void a5_drees(std::vector<CheckOutcome>& out) {
    std::vector<std::pair<double, double>> grid;
    for (double t = 1e3; t <= 1.0000001e6; t *= std::sqrt(10.0))
        for (double x : {0.125, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0}) grid.push_back({t, x});
    struct Named {
        const char* name;
        SecondOrderRVFunction f;
    };
    std::vector<Named> fns;
    fns.push_back({"chi(0.5,-2)", hua_joe_construct(1.0, 0.5, -2.0, -1.0)});
    fns.push_back({"b(-3,-4)", hua_joe_construct(1.0, -3.0, -4.0, -1.0)});
    fns.push_back({"shifted(-1.5)", make_model("shifted:rate=1,gamma=-1.5").factor()});
    fns.push_back({"gamma2 factor", make_model("gamma:shape=2,rate=1").factor()});
    for (const auto& [name, f] : fns) {
        DreesReport rep = drees_bound_check(f, grid, 0.1, 0.1);
        out.push_back({fmt("A5 drees bounds %s", name), rep.ok(),
                       rep.ok() ? "no violations"
                                : fmt("%zu violations, first at t=%g x=%g",
                                      rep.violations.size(), rep.violations[0].t,
                                      rep.violations[0].x)});
    }
}

void a5_oracle_properties(std::vector<CheckOutcome>& out) {
    LightTailModel g2 = make_model("gamma:shape=2,rate=1");
    LightTailModel tb3 = make_model("tilted:rate=1,beta=-3,rho2=-4");
    double worst_sym = 0;
    for (double t : {10.0, 50.0}) {
        double a = conv_tail(g2, tb3, t, 1e-10).log_value;
        double b = conv_tail(tb3, g2, t, 1e-10).log_value;
        worst_sym = std::max(worst_sym, std::abs(std::expm1(a - b)));
    }
    out.push_back({"A5 oracle symmetry", worst_sym <= 2e-10,
                   fmt("max rel asymmetry %.3e (bound 2e-10)", worst_sym)});

    bool lower_ok = true, mono_ok = true;
    for (auto pair : {std::pair{&g2, &g2}, std::pair{&g2, &tb3}}) {
        double prev = kInf;
        for (double t : {1.0, 2.0, 5.0, 10.0, 20.0, 50.0}) {
            double lv = conv_tail(*pair.first, *pair.second, t, 1e-10).log_value;
            double lo = std::max(pair.first->log_survival(t), pair.second->log_survival(t));
            if (lv < lo - 1e-9) lower_ok = false;
            if (lv > prev + 1e-12) mono_ok = false;
            prev = lv;
        }
    }
    out.push_back({"A5 conv tail >= max of component tails", lower_ok, ""});
    out.push_back({"A5 conv tail monotone in t", mono_ok, ""});
}

void a5_l_alpha(std::vector<CheckOutcome>& out) {
    for (const std::string& spec : standard_catalog()) {
        LightTailModel m = make_model(spec);
        double t = 300.0 / m.rate();
        double worst = 0;
        for (double u = 0.5; u <= 5.0; u += 0.5) {
            double dev = std::abs(
                std::expm1(m.log_survival(t - u) - m.log_survival(t) - m.rate() * u));
            worst = std::max(worst, dev);
        }
        out.push_back({fmt("A5 L_alpha ratio %s", spec.c_str()), worst <= 1e-3,
                       fmt("max dev %.3e at t=%g (bound 1e-3)", worst, t)});
    }
}

void a5_eq315(std::vector<CheckOutcome>& out) {
    LightTailModel f = make_model("weibull:rate=1,rho=0.5");
    double t = 4096, rho = 0.5, alpha = 1.0;
    double i1 = partial_conv_integral(f, f, t, 1e-10);
    double lhs = 2.0 * f.log_survival(t / 2) - i1;
    double rhs = std::log(std::pow(2.0, 2.0 - rho / 2) * std::sqrt(rho * (1 - rho)) *
                          std::sqrt(f.factor().evaluate(t))) -
                 std::log(alpha * std::sqrt(3.14159265358979323846) * t);
    double ratio = std::exp(lhs - rhs);
    out.push_back({"A5 boundary-to-integral ratio at t=4096", std::abs(ratio - 1.0) <= 0.05,
                   fmt("ratio %.4f (want 1 +- 0.05)", ratio)});
}

void a5_truncated_moment(std::vector<CheckOutcome>& out) {
    struct Case {
        const char* spec;
        double theta;  // 0 -> model rate
    };
    for (const Case& c : {Case{"tilted:rate=1,beta=-3,rho2=-4", 0.0},
                          Case{"shifted:rate=1,gamma=-1", 0.0},
                          Case{"gamma:shape=2,rate=2", 1.0}}) {
        LightTailModel m = make_model(c.spec);
        bool ok = true;
        std::string note = "direct and identity agree within 1e-8";
        for (double t : {2.0, 10.0, 40.0}) {
            try {
                truncated_exp_moment(m, t, c.theta == 0.0 ? std::optional<double>{}
                                                          : std::optional<double>{c.theta});
            } catch (const std::exception& e) {
                ok = false;
                note = e.what();
            }
        }
        out.push_back({fmt("A5 truncated-moment identity %s", c.spec), ok, note});
    }
}

}  // namespace

std::vector<CheckOutcome> check_a5_property_suite() {
    std::vector<CheckOutcome> out;
    a5_karamata(out);
    a5_hua_joe_ratio(out);
    a5_drees(out);
    a5_oracle_properties(out);
    a5_l_alpha(out);
    a5_eq315(out);
    a5_truncated_moment(out);
    return out;
}

bool SuiteReport::all_passed() const {
    for (const auto& o : outcomes)
        if (!o.pass) return false;
    return true;
}

SuiteReport run_acceptance_suite() {
    SuiteReport rep;
    for (auto f : {&check_a1_oracle_exactness}) {
        auto v = (*f)(1e-10);
        rep.outcomes.insert(rep.outcomes.end(), v.begin(), v.end());
    }
    for (auto f : {&check_a2_gamma_self_convolution, &check_a3_weibull_self_convolution,
                   &check_a4_branch_suite, &check_a5_property_suite}) {
        auto v = (*f)();
        rep.outcomes.insert(rep.outcomes.end(), v.begin(), v.end());
    }
    return rep;
}

}  // namespace convtail::selfcheck
