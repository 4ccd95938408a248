#pragma once

#include <string>
#include <utility>
#include <vector>

#include "convtail/models.hpp"

namespace convtail {

/// The fixed integrals over (0, 1/2) appearing in the expansion branches.
enum class ShapeIntegralKind {
    Base,               // (1-u)^beta u^gamma
    PowDiffWeight,      // ((1-u)^rho - 1) (1-u)^beta u^gamma
    DerivTwoUMinusOne,  // (1-u)^(beta-1) u^gamma (2u-1)
    SecondIndexPower,   // (1-u)^(beta-1) u^(gamma+1) ((2u)^rho - 1)
    LogWeight,          // (1-u)^(beta-1) log u            [gamma unused]
    BetaDiff,           // ((1-u)^beta - 1) u^gamma        [rho unused]
};

/// Closed forms (polynomial antiderivatives) when the exponents are
/// nonnegative integers, adaptive quadrature with endpoint-singularity
/// substitution otherwise; relative accuracy 1e-12. Non-integrable parameter
/// combinations are rejected.
double compute_shape_integral(ShapeIntegralKind kind, double beta, double gamma, double rho = 0.0);

/// Term-by-term breakdown of an asymptotic prediction. Dropping every entry
/// of `corrections` from the assembly reproduces the first-order prediction
/// exactly; `first_order_log_tail` is that value. For thm4 results `leading`
/// holds exp(first_order_log_tail) (0 when that underflows) since the two
/// decomposition sides carry different normalizers.
struct ExpansionResult {
    BranchLabel branch;
    double leading;
    std::vector<std::pair<std::string, double>> corrections;
    double predicted_log_tail;
    double first_order_log_tail;
    std::string error_order;
};

/// Second-order expansion of the Weibull-type self-convolution tail:
/// predicted Fbar*Fbar(t) = (leading + corrections) * t * Fbar(t/2)^2 /
/// chi(t/2)^{1/2}.
ExpansionResult thm1_predict(const LightTailModel& F, double t);

/// The M1(beta, gamma, t) expansion: predicted_log_tail approximates
/// log int_0^{t/2} Fbar(t-u) dG(u); branch selected by G's factor.
ExpansionResult m1_predict(const LightTailModel& F, const LightTailModel& G, double t);

/// The M2 expansion (mirror branches in F's index, boundary product folded
/// in); predicted_log_tail approximates log of the remaining two
/// decomposition terms normalized the same way.
ExpansionResult m2_predict(const LightTailModel& F, const LightTailModel& G, double t);

/// Combined prediction log(Fbar(t) M1 + Gbar(t) M2), assembled in log space.
/// Arguments are ordered canonically first, so swapped calls return
/// bit-identical results.
ExpansionResult thm4_predict(const LightTailModel& F, const LightTailModel& G, double t);

namespace debug {
// Multiplies the Theorem-1 leading coefficient; selftest sensitivity hook.
extern double thm1_leading_scale;
}  // namespace debug

}  // namespace convtail
