#include "convtail/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace convtail::quad {
namespace {

// 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK dqk15).
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
};
constexpr double kWgk[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
};
constexpr double kWg[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
};

std::vector<double> panel_edges(double a, double b, const std::vector<double>& seeds) {
    std::vector<double> edges{a, b};
    for (double s : seeds)
        if (s > a && s < b) edges.push_back(s);
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    return edges;
}

struct Panel {
    double a, b;
    double value;  // plain: Kronrod value; log: log of Kronrod value
    double error;  // plain: |K-G|;        log: log of |K-G|
};

Panel eval_panel_plain(const Fn& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    CompensatedSum k, g;
    for (int i = 0; i < 7; ++i) {
        double v = f(c - h * kXgk[i]) + f(c + h * kXgk[i]);
        k.add(kWgk[i] * v);
        if (i % 2 == 1) g.add(kWg[i / 2] * v);
    }
    double f0 = f(c);
    k.add(kWgk[7] * f0);
    g.add(kWg[3] * f0);
    double kv = k.value() * h, gv = g.value() * h;
    return {a, b, kv, std::abs(kv - gv)};
}

Panel eval_panel_log(const Fn& lf, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    double vals[15];
    for (int i = 0; i < 7; ++i) {
        vals[2 * i] = lf(c - h * kXgk[i]);
        vals[2 * i + 1] = lf(c + h * kXgk[i]);
    }
    vals[14] = lf(c);
    double m = kNegInf;
    for (double v : vals) m = std::max(m, v);
    if (m == kNegInf) return {a, b, kNegInf, kNegInf};
    CompensatedSum k, g;
    for (int i = 0; i < 7; ++i) {
        double v = std::exp(vals[2 * i] - m) + std::exp(vals[2 * i + 1] - m);
        k.add(kWgk[i] * v);
        if (i % 2 == 1) g.add(kWg[i / 2] * v);
    }
    double f0 = std::exp(vals[14] - m);
    k.add(kWgk[7] * f0);
    g.add(kWg[3] * f0);
    double kv = k.value(), gv = g.value();
    double lval = (kv > 0) ? m + std::log(kv * h) : kNegInf;
    double diff = std::abs(kv - gv);
    double lerr = (diff > 0) ? m + std::log(diff * h) : kNegInf;
    return {a, b, lval, lerr};
}

// Worst-panel-first refinement; identical control flow for both modes, only
// the combination of panel contributions differs. Heap keys are snapshots of
// the panel error (stale entries skipped on pop), ties broken by index so the
// subdivision sequence is deterministic.
template <typename EvalFn, typename DoneFn>
std::vector<Panel> refine(const EvalFn& eval, std::vector<Panel> panels, const Options& opt,
                          double min_width, double zero_error, const DoneFn& done, long& evals) {
    std::priority_queue<std::pair<double, size_t>> heap;
    for (size_t i = 0; i < panels.size(); ++i) heap.push({panels[i].error, i});
    while (!done(panels) && (int)panels.size() < opt.max_panels && !heap.empty()) {
        auto [err, worst] = heap.top();
        heap.pop();
        if (panels[worst].error != err) continue;  // stale entry
        const Panel p = panels[worst];
        if (p.b - p.a <= min_width || p.error == zero_error) continue;
        double mid = 0.5 * (p.a + p.b);
        Panel left = eval(p.a, mid), right = eval(mid, p.b);
        evals += 30;
        panels[worst] = left;
        panels.push_back(right);
        heap.push({left.error, worst});
        heap.push({right.error, panels.size() - 1});
    }
    std::sort(panels.begin(), panels.end(), [](const Panel& x, const Panel& y) { return x.a < y.a; });
    return panels;
}

}  // namespace

Result integrate(const Fn& f, double a, double b, Options opt) {
    Result res;
    if (a == b) {
        res.converged = true;
        return res;
    }
    auto edges = panel_edges(a, b, opt.seeds);
    std::vector<Panel> panels;
    long evals = 0;
    for (size_t i = 0; i + 1 < edges.size(); ++i) {
        panels.push_back(eval_panel_plain(f, edges[i], edges[i + 1]));
        evals += 15;
    }
    const double min_width = (b - a) * 1e-13;
    auto totals = [](const std::vector<Panel>& ps) {
        std::vector<double> vs, es;
        vs.reserve(ps.size());
        es.reserve(ps.size());
        for (const Panel& p : ps) {
            vs.push_back(p.value);
            es.push_back(p.error);
        }
        return std::pair{pairwise_compensated_sum(vs), pairwise_compensated_sum(es)};
    };
    auto done = [&](const std::vector<Panel>& ps) {
        auto [v, e] = totals(ps);
        return e <= std::max(opt.abs_tol, opt.rel_tol * std::abs(v));
    };
    panels = refine([&](double x, double y) { return eval_panel_plain(f, x, y); }, std::move(panels),
                    opt, min_width, 0.0, done, evals);
    auto [v, e] = totals(panels);
    res.value = v;
    res.abs_error = e;
    res.evaluations = evals;
    res.converged = e <= std::max(opt.abs_tol, opt.rel_tol * std::abs(v));
    return res;
}

LogResult integrate_log(const Fn& log_f, double a, double b, Options opt) {
    LogResult res;
    if (a == b) {
        res.converged = true;
        return res;
    }
    auto edges = panel_edges(a, b, opt.seeds);
    std::vector<Panel> panels;
    long evals = 0;
    for (size_t i = 0; i + 1 < edges.size(); ++i) {
        panels.push_back(eval_panel_log(log_f, edges[i], edges[i + 1]));
        evals += 15;
    }
    const double min_width = (b - a) * 1e-13;
    auto totals = [](const std::vector<Panel>& ps) {
        double mv = kNegInf, me = kNegInf;
        for (const Panel& p : ps) {
            mv = std::max(mv, p.value);
            me = std::max(me, p.error);
        }
        if (mv == kNegInf) return std::pair{kNegInf, kNegInf};
        std::vector<double> vs, es;
        for (const Panel& p : ps) {
            vs.push_back(p.value == kNegInf ? 0.0 : std::exp(p.value - mv));
            if (me != kNegInf) es.push_back(p.error == kNegInf ? 0.0 : std::exp(p.error - me));
        }
        double lv = mv + std::log(pairwise_compensated_sum(vs));
        double le = me == kNegInf ? kNegInf : me + std::log(pairwise_compensated_sum(es));
        return std::pair{lv, le};
    };
    auto done = [&](const std::vector<Panel>& ps) {
        auto [lv, le] = totals(ps);
        if (lv == kNegInf) return true;
        return le == kNegInf || le - lv <= std::log(opt.rel_tol);
    };
    panels = refine([&](double x, double y) { return eval_panel_log(log_f, x, y); },
                    std::move(panels), opt, min_width, kNegInf, done, evals);
    auto [lv, le] = totals(panels);
    res.log_value = lv;
    res.rel_error = (lv == kNegInf || le == kNegInf) ? 0.0 : std::exp(le - lv);
    res.evaluations = evals;
    res.converged = lv == kNegInf || le == kNegInf || le - lv <= std::log(opt.rel_tol);
    return res;
}

namespace {

Options tail_seed_options(const Options& opt, double a) {
    Options inner = opt;
    inner.seeds.clear();
    for (double s : {0.125, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 48.0})
        inner.seeds.push_back(s / (1.0 + s));
    for (double s : opt.seeds) {  // caller seeds given on the u axis
        if (s > a) {
            double sv = std::log(s / a);
            inner.seeds.push_back(sv / (1.0 + sv));
        }
    }
    return inner;
}

}  // namespace

LogResult integrate_tail_log(const Fn& log_f, double a, Options opt) {
    if (!(a > 0)) throw std::invalid_argument("integrate_tail_log: lower limit must be positive");
    const double log_a = std::log(a);
    auto transformed = [&](double v) {
        if (v >= 1.0) return kNegInf;
        double s = v / (1.0 - v);
        double u = a * std::exp(s);
        if (!std::isfinite(u)) return kNegInf;
        double lf = log_f(u);
        if (lf == kNegInf) return kNegInf;
        return lf + log_a + s - 2.0 * std::log1p(-v);
    };
    LogResult res = integrate_log(transformed, 0.0, 1.0, tail_seed_options(opt, a));
    // Probe the integrand where e^s is about to overflow; mass beyond that
    // point is invisible on this axis, so flag it instead of dropping it.
    double s_edge = 700.0 - log_a;
    if (res.log_value != kNegInf && s_edge > 0) {
        double v_edge = s_edge / (1.0 + s_edge);
        double chop = transformed(v_edge) + std::log1p(-v_edge);
        if (chop > std::log(opt.rel_tol) + res.log_value - 2.3) res.converged = false;
    }
    return res;
}

LogResult integrate_tail_log_arg(const Fn& log_f_at_log_arg, double a, Options opt) {
    if (!(a > 0))
        throw std::invalid_argument("integrate_tail_log_arg: lower limit must be positive");
    const double log_a = std::log(a);
    auto transformed = [&](double v) {
        if (v >= 1.0) return kNegInf;
        double s = v / (1.0 - v);
        double lf = log_f_at_log_arg(log_a + s);
        if (lf == kNegInf) return kNegInf;
        return lf + log_a + s - 2.0 * std::log1p(-v);
    };
    return integrate_log(transformed, 0.0, 1.0, tail_seed_options(opt, a));
}

}  // namespace convtail::quad
