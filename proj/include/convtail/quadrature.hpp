#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "convtail/numeric.hpp"

namespace convtail::quad {

using Fn = std::function<double(double)>;

struct Options {
    double rel_tol = 1e-10;
    double abs_tol = 0.0;  // plain mode only; log mode is purely relative
    int max_panels = 4000;
    std::vector<double> seeds;  // interior subdivision hints, need not be sorted
};

struct Result {
    double value = 0.0;
    double abs_error = 0.0;
    long evaluations = 0;
    bool converged = false;
};

struct LogResult {
    double log_value = kNegInf;
    double rel_error = 0.0;
    long evaluations = 0;
    bool converged = false;
};

// Adaptive bisection with a nested 15-point Kronrod / 7-point Gauss rule per
// panel; panel error taken from the embedded lower-order rule. Panel sums use
// a compensated accumulator and the final reduction is a deterministic
// pairwise tree over panels sorted by position.
Result integrate(const Fn& f, double a, double b, Options opt = {});

// Same scheme with the integrand supplied as log f; each panel is shifted by
// its own maximum before exponentiating, so values like exp(-8000) survive.
// The integrand must be (the log of) a nonnegative function.
LogResult integrate_log(const Fn& log_f, double a, double b, Options opt = {});

// Integral of exp(log_f) over [a, inf), a > 0. The axis is first mapped to
// u = a*exp(s) and then s is compactified with s = v/(1-v), which keeps
// slowly decaying integrands (u^-1 * log^-2 u and the like) tractable.
// u is still formed as a double; if the integrand is not negligible where
// e^s overflows, the result is reported as non-converged (the mass beyond
// the representable range cannot be seen on this axis).
LogResult integrate_tail_log(const Fn& log_f, double a, Options opt = {});

// Same integral with the integrand supplied as log f(e^s), a function of
// s = log u; no representable-range limit. Returns int_a^inf f(u) du.
LogResult integrate_tail_log_arg(const Fn& log_f_at_log_arg, double a, Options opt = {});

struct ToleranceError : std::runtime_error {
    double achieved;
    ToleranceError(const std::string& what, double achieved_)
        : std::runtime_error(what), achieved(achieved_) {}
};

}  // namespace convtail::quad
