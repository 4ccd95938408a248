#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "convtail/rv_function.hpp"

namespace convtail {

enum class ModelKind { WeibullType, TiltedRV, Gamma };

/// Proposition-3 / Theorem-4 case selector, decided from the factor's index
/// and the declared moment flags, never numerically.
enum class BranchLabel {
    G_MINUS1_INF,     // index == -1, exponential moment infinite
    G_MINUS1_FIN,     // index == -1, exponential moment finite
    G_BETWEEN_M2_M1,  // -2 < index < -1
    G_MINUS2_INF,     // index == -2, int u*c(u) du divergent
    G_LE_MINUS2_FIN,  // index <= -2, int u*c(u) du finite
    G_GT_MINUS1,      // index > -1
    THM1,             // Weibull-type self-convolution expansion
};

const char* to_string(BranchLabel b);

struct SpecParseError : std::invalid_argument {
    size_t position;
    SpecParseError(const std::string& msg, size_t pos)
        : std::invalid_argument(msg + " (at position " + std::to_string(pos) + ")"),
          position(pos) {}
};

/// Monotone cubic filling log-survival on [0, join]; matches value and
/// one-sided derivative of the tail formula at the join point.
struct BodyPatch {
    double join = 0.0;
    double a1 = 0.0, a2 = 0.0, a3 = 0.0;  // H(s) = a1 s + a2 s^2 + a3 s^3, H(0) = 0
    bool present = false;
    double value(double s) const { return ((a3 * s + a2) * s + a1) * s; }
    double deriv(double s) const { return (3.0 * a3 * s + 2.0 * a2) * s + a1; }
};

/// A distribution on [0, inf) of one of three forms:
///   WeibullType   survival = exp(-rate*t + chi(t))      for t >= join
///   TiltedRV      survival = factor(t) * exp(-rate*t)   for t >= join
///   Gamma         exact integer-shape gamma (Erlang), closed forms
/// The body below the join point is a monotone cubic patch in log-survival,
/// so every model is a genuine distribution and all moment constants are
/// computed from the same object the oracle integrates.
class LightTailModel {
public:
    ModelKind kind() const { return kind_; }
    double rate() const { return rate_; }
    int shape() const { return shape_; }
    double join_point() const { return patch_.present ? patch_.join : 0.0; }
    const SecondOrderRVFunction& factor() const { return factor_; }
    bool exp_moment_finite() const { return exp_moment_finite_; }
    bool first_exp_moment_finite() const { return first_exp_moment_finite_; }
    // true when chi' was verified nonincreasing on the sampled tail grid
    bool factor_derivative_nonincreasing() const { return deriv_nonincreasing_; }
    const std::string& spec_string() const { return spec_; }

    double log_survival(double t) const;
    double survival(double t) const { return std::exp(log_survival(t)); }
    double log_density(double t) const;
    double density(double t) const { return std::exp(log_density(t)); }

    /// 1/chi'(t), the proof-split point of the Weibull-type analysis; used as
    /// a quadrature subdivision hint. NaN for other kinds.
    double split_hint(double t) const;

    /// log factor(e^s); stays evaluable where e^s overflows, so tail
    /// integrals of slowly decaying factors keep their far mass.
    double log_factor_at_log_arg(double s) const;

    static LightTailModel weibull_type(double rate, SecondOrderRVFunction chi, double join,
                                       std::string spec);
    static LightTailModel tilted_rv(double rate, SecondOrderRVFunction factor, double join,
                                    bool exp_finite, bool first_finite, std::string spec);
    static LightTailModel gamma(int shape, double rate, std::string spec = "");

private:
    LightTailModel() = default;
    ModelKind kind_ = ModelKind::Gamma;
    double rate_ = 1.0;
    int shape_ = 0;
    SecondOrderRVFunction factor_;
    BodyPatch patch_;
    bool exp_moment_finite_ = false;
    bool first_exp_moment_finite_ = false;
    bool deriv_nonincreasing_ = false;
    std::string spec_;
};

/// Model grammar: family:key=value,...
///   gamma:shape=2,rate=1
///   tilted:rate=1,beta=-3,rho2=-4          [aux_scale=-1 scale=1 join=1]
///   shifted:rate=1,gamma=-1.5              [(1+t)^gamma, join=1]
///   logdamped:rate=1                       [(1+t)^-1 log(e+t)^-2, join=1]
///   weibull:rate=1,rho=0.5                 [rho1=-2 aux_scale=-1 scale=1 join=4]
/// Errors carry the offending byte position.
LightTailModel make_model(std::string_view spec);

/// Spec strings of the models exercised by the acceptance suite.
std::vector<std::string> standard_catalog();

/// m_F(theta) = int exp(theta u) dF(u); +inf (decided analytically from the
/// declared flags, no quadrature attempted) when theta equals the rate and
/// the moment diverges. theta > rate is rejected.
double exp_moment(const LightTailModel& m, double theta);

/// int_0^t exp(theta u) dF(u), default theta = rate. Returned via the
/// integration-by-parts identity 1 - c(t) + theta*int_0^t c, cross-checked
/// against the direct quadrature (1e-8 relative).
double truncated_exp_moment(const LightTailModel& m, double t,
                            std::optional<double> theta = std::nullopt);

/// int_0^inf u exp(theta u) dF(u), default theta = rate; +inf by flag.
double first_exp_moment(const LightTailModel& m, std::optional<double> theta = std::nullopt);

/// Total and deterministic on the catalog; Weibull-type models are rejected.
BranchLabel classify_branch(const LightTailModel& m);

}  // namespace convtail
