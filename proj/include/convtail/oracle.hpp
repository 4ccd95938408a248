#pragma once

#include "convtail/models.hpp"

namespace convtail {

struct ConvTailResult {
    double log_value = 0.0;          // log of the convolution tail
    double rel_error_estimate = 0.0;
    long evaluations = 0;
    double split_point = 0.0;        // the u = t/2 decomposition point used
};

/// Exact convolution tail P(X+Y > t) via the decomposition
///   int_0^{t/2} Fbar(t-u) dG(u) + int_0^{t/2} Gbar(t-u) dF(u)
///   + Fbar(t/2) Gbar(t/2),
/// every integrand assembled in log form and exponentiated only after the
/// panel maximum has been subtracted, so the result stays meaningful at t
/// where exp(-rate t) underflows. Symmetric in (F, G) by construction.
/// Throws quad::ToleranceError (carrying the achieved estimate) when the
/// requested tolerance cannot be met.
ConvTailResult conv_tail(const LightTailModel& F, const LightTailModel& G, double t,
                         double rel_tol = 1e-10);

/// Log of the first decomposition term int_0^{t/2} Fbar(t-u) dG(u) alone
/// (the quantity M1 normalizes); -inf at t = 0.
double partial_conv_integral(const LightTailModel& F, const LightTailModel& G, double t,
                             double rel_tol = 1e-10);

}  // namespace convtail
