#pragma once

#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "convtail/numeric.hpp"

namespace convtail {

/// An evaluable, eventually-positive function together with its regular
/// variation data: first-order index, second-order index, the auxiliary
/// function A(t) governing the speed of the first-order limit, and (when
/// available) an analytic derivative. Immutable after construction and safe
/// to evaluate from multiple threads.
struct SecondOrderRVFunction {
    std::function<double(double)> evaluate;
    std::function<double(double)> derivative;    // empty when not available
    std::function<double(double)> auxiliary;     // A(t); identically 0 for exact powers
    std::function<double(double)> log_evaluate;  // empty -> log(evaluate(t))
    // log f(e^s) as a function of s, usable where e^s overflows a double;
    // what lets tail integrals account for mass beyond the double range
    std::function<double(double)> log_evaluate_at_log_arg;
    // f(tx)/f(t) - x^index evaluated without cancellation; the naive
    // difference drowns in rounding once the auxiliary is below ~1e-12
    std::function<double(double, double)> ratio_deviation;

    double index = 0.0;
    double second_index = 0.0;  // <= 0
    double scale = 1.0;         // the constant a of the representation
    double valid_from = 1.0;    // positivity guaranteed for t >= valid_from

    bool has_derivative() const { return static_cast<bool>(derivative); }
    double log_value(double t) const;
    double deviation(double t, double x) const;  // ratio_deviation or the naive difference
};

/// Builds f(t) = scale * t^index * (1 + A(t)/second_index) with the slack
/// term of the representation fixed to zero. The power-auxiliary overload
/// takes A(t) = aux_coef * t^second_index and yields an analytic derivative.
SecondOrderRVFunction hua_joe_construct(double scale, double index, double second_index,
                                        double aux_coef);
SecondOrderRVFunction hua_joe_construct(double scale, double index, double second_index,
                                        std::function<double(double)> auxiliary);

/// An exact power scale * t^index (zero second-order deviation, A == 0).
SecondOrderRVFunction pure_power(double scale, double index);

/// (f(tx)/f(t) - x^index) / A(t). Throws when A(t) == 0.
double second_order_ratio(const SecondOrderRVFunction& f, double t, double x);

/// The limiting value x^index * (x^rho - 1)/rho, with the rho = 0 branch
/// read as x^index * log x.
double second_order_limit(double index, double rho, double x);

enum class KaramataSide { Head, Tail };

/// t*f(t) / int_{t0}^{t} f (head) or t*f(t) / int_t^inf f (tail), computed by
/// adaptive quadrature. Head tends to index+1, tail to -index-1. A diverging
/// tail integral is reported as non-convergence.
double karamata_index_estimate(const std::function<double(double)>& f, double t0, double t,
                               KaramataSide side, double rel_tol = 1e-9);

struct DreesViolation {
    double t, x;
    double lhs, rhs;
    bool second_order;  // false: the plain RV bound, true: the 2RV bound
};

struct DreesReport {
    std::vector<DreesViolation> violations;
    // Smallest grid t with no violation at or above it; +inf when none such.
    double clean_from_t = 0.0;
    bool ok() const { return violations.empty(); }
};

/// Checks the uniform inequalities pointwise on the grid:
///   |f(tx)/f(t) - x^a|                     <= eps * x^a     * max(x^d, x^-d)
///   |(f(tx)/f(t) - x^a)/A(t) - limit(x)|   <= eps * x^(a+r) * max(x^d, x^-d)
/// The second-order row is skipped where A(t) == 0.
DreesReport drees_bound_check(const SecondOrderRVFunction& f,
                              std::span<const std::pair<double, double>> grid, double eps,
                              double delta);

/// Least-squares slope of log f over one decade above t, sampled at `points`
/// geometric nodes.
double measure_rv_index(const std::function<double(double)>& f, double t, int points = 32);

}  // namespace convtail
