#include "convtail/rv_function.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "convtail/quadrature.hpp"

namespace convtail {

double SecondOrderRVFunction::log_value(double t) const {
    if (log_evaluate) return log_evaluate(t);
    return std::log(evaluate(t));
}

double SecondOrderRVFunction::deviation(double t, double x) const {
    if (ratio_deviation) return ratio_deviation(t, x);
    return evaluate(t * x) / evaluate(t) - std::pow(x, index);
}

namespace {

void check_second_index(double second_index) {
    if (!(second_index < 0))
        throw std::invalid_argument(
            "hua_joe_construct: representation requires a negative second-order index");
}

void check_vanishing(const std::function<double(double)>& aux) {
    double first = std::abs(aux(1e2)), prev = first;
    for (double t : {1e3, 1e4, 1e5, 1e6, 1e7}) {
        double a = std::abs(aux(t));
        if (a > prev * (1 + 1e-12))
            throw std::invalid_argument("hua_joe_construct: |auxiliary| must decrease toward 0");
        prev = a;
    }
    if (!(prev < 0.9 * first))
        throw std::invalid_argument("hua_joe_construct: auxiliary does not vanish at infinity");
}

}  // namespace

SecondOrderRVFunction hua_joe_construct(double scale, double index, double second_index,
                                        double aux_coef) {
    check_second_index(second_index);
    if (!(scale > 0)) throw std::invalid_argument("hua_joe_construct: scale must be positive");
    SecondOrderRVFunction f;
    f.index = index;
    f.second_index = second_index;
    f.scale = scale;
    const double a = scale, al = index, rho = second_index, c = aux_coef;
    // f(t) = a t^al + (a c / rho) t^(al+rho); both exponents give exact power terms
    f.evaluate = [=](double t) {
        return a * std::pow(t, al) * (1.0 + (c / rho) * std::pow(t, rho));
    };
    f.derivative = [=](double t) {
        return a * al * std::pow(t, al - 1.0) +
               (a * c * (al + rho) / rho) * std::pow(t, al + rho - 1.0);
    };
    if (aux_coef == 0.0) {
        f.auxiliary = [](double) { return 0.0; };
        f.second_index = 0.0;
        f.ratio_deviation = [](double, double) { return 0.0; };
    } else {
        f.auxiliary = [=](double t) { return c * std::pow(t, rho); };
        check_vanishing(f.auxiliary);
        // x^al (A(tx) - A(t)) / (rho (1 + A(t)/rho)): exact, no cancellation
        f.ratio_deviation = [=](double t, double x) {
            double at = c * std::pow(t, rho);
            return std::pow(x, al) * at * (std::pow(x, rho) - 1.0) /
                   (rho * (1.0 + at / rho));
        };
    }
    f.log_evaluate = [=](double t) {
        return std::log(a) + al * std::log(t) + std::log1p((c / rho) * std::pow(t, rho));
    };
    f.log_evaluate_at_log_arg = [=](double s) {
        return std::log(a) + al * s + std::log1p((c / rho) * std::exp(rho * s));
    };
    return f;
}

SecondOrderRVFunction hua_joe_construct(double scale, double index, double second_index,
                                        std::function<double(double)> auxiliary) {
    check_second_index(second_index);
    if (!(scale > 0)) throw std::invalid_argument("hua_joe_construct: scale must be positive");
    check_vanishing(auxiliary);
    SecondOrderRVFunction f;
    f.index = index;
    f.second_index = second_index;
    f.scale = scale;
    const double a = scale, al = index, rho = second_index;
    auto aux = std::move(auxiliary);
    f.evaluate = [=](double t) { return a * std::pow(t, al) * (1.0 + aux(t) / rho); };
    f.log_evaluate = [=](double t) {
        return std::log(a) + al * std::log(t) + std::log1p(aux(t) / rho);
    };
    f.auxiliary = aux;
    return f;
}

SecondOrderRVFunction pure_power(double scale, double index) {
    SecondOrderRVFunction f;
    f.index = index;
    f.second_index = 0.0;
    f.scale = scale;
    f.evaluate = [=](double t) { return scale * std::pow(t, index); };
    f.derivative = [=](double t) { return scale * index * std::pow(t, index - 1.0); };
    f.log_evaluate = [=](double t) { return std::log(scale) + index * std::log(t); };
    f.log_evaluate_at_log_arg = [=](double s) { return std::log(scale) + index * s; };
    f.auxiliary = [](double) { return 0.0; };
    f.ratio_deviation = [](double, double) { return 0.0; };
    return f;
}

double second_order_limit(double index, double rho, double x) {
    if (rho == 0.0) return std::pow(x, index) * std::log(x);
    return std::pow(x, index) * (std::pow(x, rho) - 1.0) / rho;
}

double second_order_ratio(const SecondOrderRVFunction& f, double t, double x) {
    if (x == 1.0) return 0.0;
    double a = f.auxiliary(t);
    if (a == 0.0)
        throw std::domain_error("second_order_ratio: auxiliary vanishes at this t");
    return f.deviation(t, x) / a;
}

double karamata_index_estimate(const std::function<double(double)>& f, double t0, double t,
                               KaramataSide side, double rel_tol) {
    if (!(t > t0 && t > 0)) throw std::invalid_argument("karamata_index_estimate: need t > t0, t > 0");
    quad::Options opt;
    opt.rel_tol = rel_tol;
    if (side == KaramataSide::Head) {
        // geometric seeds cope with wide [t0, t] spans
        for (double s = std::max(t0, 1e-6) * 2; s < t; s *= 4) opt.seeds.push_back(s);
        auto r = quad::integrate(f, t0, t, opt);
        if (!r.converged)
            throw quad::ToleranceError("karamata head integral did not converge",
                                       r.abs_error / std::abs(r.value));
        return t * f(t) / r.value;
    }
    auto r = quad::integrate_tail_log([&](double u) { return std::log(f(u)); }, t, opt);
    if (!r.converged)
        throw quad::ToleranceError(
            "karamata tail integral did not converge (integral may diverge)", r.rel_error);
    return t * f(t) / std::exp(r.log_value);
}

DreesReport drees_bound_check(const SecondOrderRVFunction& f,
                              std::span<const std::pair<double, double>> grid, double eps,
                              double delta) {
    DreesReport rep;
    double max_bad_t = 0.0, max_t = 0.0;
    for (auto [t, x] : grid) {
        max_t = std::max(max_t, t);
        double xa = std::pow(x, f.index);
        double xd = std::max(std::pow(x, delta), std::pow(x, -delta));
        double dev = f.deviation(t, x);
        double lhs1 = std::abs(dev);
        double rhs1 = eps * xa * xd;
        if (lhs1 > rhs1) {
            rep.violations.push_back({t, x, lhs1, rhs1, false});
            max_bad_t = std::max(max_bad_t, t);
        }
        double a = f.auxiliary(t);
        if (a != 0.0) {
            double lhs2 = std::abs(dev / a - second_order_limit(f.index, f.second_index, x));
            double rhs2 = eps * std::pow(x, f.index + f.second_index) * xd;
            if (lhs2 > rhs2) {
                rep.violations.push_back({t, x, lhs2, rhs2, true});
                max_bad_t = std::max(max_bad_t, t);
            }
        }
    }
    rep.clean_from_t = max_bad_t == max_t ? kInf : std::nextafter(max_bad_t, kInf);
    return rep;
}

double measure_rv_index(const std::function<double(double)>& f, double t, int points) {
    std::vector<double> lx(points), ly(points);
    for (int i = 0; i < points; ++i) {
        double s = t * std::pow(10.0, double(i) / (points - 1));
        lx[i] = std::log(s);
        ly[i] = std::log(f(s));
    }
    return fit_line(lx, ly).slope;
}

}  // namespace convtail
