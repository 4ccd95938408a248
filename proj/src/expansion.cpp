#include "convtail/expansion.hpp"

#include <cmath>

#include "convtail/quadrature.hpp"

namespace convtail {

namespace debug {
double thm1_leading_scale = 1.0;
}

namespace {

constexpr double kPi = 3.14159265358979323846;

// int_0^upper smooth(u) * u^power du. For power in (-1, 0) the substitution
// v = u^(1+power) flattens the endpoint on [0, upper/2]; dyadic seeds toward
// zero mop up what fractional powers leave of the local smoothness.
double weighted_integral(const std::function<double(double)>& smooth, double power,
                         double upper = 0.5) {
    quad::Options opt;
    opt.rel_tol = 1e-12;
    auto dyadic = [&](double hi) {
        std::vector<double> seeds;
        for (double s = hi / 2; s > hi * 1e-18; s /= 2) seeds.push_back(s);
        return seeds;
    };
    if (power == 0.0 || (power > 0 && power == std::floor(power))) {
        opt.seeds = {upper / 4, upper / 2};
        auto r = quad::integrate(
            [&](double u) { return smooth(u) * (power == 0.0 ? 1.0 : std::pow(u, power)); }, 0.0,
            upper, opt);
        return r.value;
    }
    if (power > 0.0) {
        opt.seeds = dyadic(upper);
        return quad::integrate([&](double u) { return smooth(u) * std::pow(u, power); }, 0.0,
                               upper, opt)
            .value;
    }
    // power in (-1, 0): split chart
    double cut = upper / 2;
    double q = 1.0 + power;
    double vcut = std::pow(cut, q);
    quad::Options o1 = opt;
    o1.seeds = dyadic(vcut);
    auto near = quad::integrate(
        [&](double v) { return smooth(std::pow(v, 1.0 / q)) / q; }, 0.0, vcut, o1);
    quad::Options o2 = opt;
    o2.seeds = {};
    auto far = quad::integrate([&](double u) { return smooth(u) * std::pow(u, power); }, cut,
                               upper, o2);
    return near.value + far.value;
}

bool is_nonneg_int(double x) { return x >= 0 && x == std::floor(x); }

double binom(int n, int k) {
    double r = 1;
    for (int i = 0; i < k; ++i) r = r * (n - i) / (i + 1);
    return r;
}

}  // namespace

double compute_shape_integral(ShapeIntegralKind kind, double beta, double gamma, double rho) {
    switch (kind) {
        case ShapeIntegralKind::Base: {
            if (!(gamma > -1))
                throw std::invalid_argument("shape integral: u^gamma not integrable at 0");
            if (is_nonneg_int(beta) && is_nonneg_int(gamma)) {
                double s = 0;
                for (int j = 0; j <= int(beta); ++j) {
                    double e = gamma + j + 1;
                    s += binom(int(beta), j) * (j % 2 ? -1.0 : 1.0) * std::pow(0.5, e) / e;
                }
                return s;
            }
            return weighted_integral([&](double u) { return std::pow(1.0 - u, beta); }, gamma);
        }
        case ShapeIntegralKind::PowDiffWeight: {
            if (!(gamma > -1))
                throw std::invalid_argument("shape integral: u^gamma not integrable at 0");
            if (rho == 0.0) return 0.0;
            return weighted_integral(
                [&](double u) {
                    return std::expm1(rho * std::log1p(-u)) * std::pow(1.0 - u, beta);
                },
                gamma);
        }
        case ShapeIntegralKind::DerivTwoUMinusOne: {
            if (!(gamma > -1))
                throw std::invalid_argument("shape integral: u^gamma not integrable at 0");
            return weighted_integral(
                [&](double u) { return std::pow(1.0 - u, beta - 1.0) * (2.0 * u - 1.0); }, gamma);
        }
        case ShapeIntegralKind::SecondIndexPower: {
            if (rho == 0.0) return 0.0;
            if (!(gamma + rho + 1 > 0) || !(gamma + 1 > 0))
                throw std::invalid_argument("shape integral: exponent of u not integrable at 0");
            auto f = [&](double u) { return std::pow(1.0 - u, beta - 1.0); };
            return std::pow(2.0, rho) * weighted_integral(f, gamma + rho + 1.0) -
                   weighted_integral(f, gamma + 1.0);
        }
        case ShapeIntegralKind::LogWeight: {
            quad::Options opt;
            opt.rel_tol = 1e-12;
            for (double s = 0.25; s > 1e-18; s /= 2) opt.seeds.push_back(s);
            return quad::integrate(
                       [&](double u) { return std::pow(1.0 - u, beta - 1.0) * std::log(u); }, 0.0,
                       0.5, opt)
                .value;
        }
        case ShapeIntegralKind::BetaDiff: {
            if (!(gamma > -2))
                throw std::invalid_argument("shape integral: integrand not integrable at 0");
            if (beta == 0.0) return 0.0;
            // ((1-u)^beta - 1)/u is analytic at 0; shift the power weight by one
            return weighted_integral(
                [&](double u) { return std::expm1(beta * std::log1p(-u)) / u; }, gamma + 1.0);
        }
    }
    throw std::invalid_argument("compute_shape_integral: unknown kind");
}

namespace {

quad::Options running_opts(double join) {
    quad::Options opt;
    opt.rel_tol = 1e-10;
    double j = std::max(join, 0.25);
    for (double s = j * 0.5; s < 1e7 * j; s *= 2.5) opt.seeds.push_back(s);
    return opt;
}

double log_c(const LightTailModel& m, double u) { return m.rate() * u + m.log_survival(u); }

// int_0^{t/2} c(u) du with the patched c, as the oracle would see it
double int_c_head(const LightTailModel& m, double t) {
    auto r = quad::integrate([&](double u) { return std::exp(log_c(m, u)); }, 0.0, t / 2,
                             running_opts(m.join_point()));
    if (!r.converged)
        throw quad::ToleranceError("running integral of c did not converge",
                                   r.abs_error / std::abs(r.value));
    return r.value;
}

double int_c_tail(const LightTailModel& m, double t) {
    // t/2 >= join here, so c equals the factor formula on the whole range;
    // the log axis keeps the far mass of index -1 factors
    auto r = quad::integrate_tail_log_arg(
        [&](double s) { return m.log_factor_at_log_arg(s); }, t / 2,
        running_opts(m.join_point()));
    if (!r.converged)
        throw quad::ToleranceError("tail integral of c did not converge", r.rel_error);
    return std::exp(r.log_value);
}

double int_uc(const LightTailModel& m, double t) {
    auto r = quad::integrate([&](double u) { return u * std::exp(log_c(m, u)); }, 1.0, t / 2,
                             running_opts(m.join_point()));
    if (!r.converged)
        throw quad::ToleranceError("u-weighted running integral of c did not converge",
                                   r.abs_error / std::abs(r.value));
    return r.value;
}

struct SideExpansion {
    BranchLabel branch;
    double leading;
    std::vector<std::pair<std::string, double>> corrections;
    std::string error_order;
    double total() const {
        double m = leading;
        for (auto& [_, v] : corrections) m += v;
        return m;
    }
};

// Expansion of int_0^{t/2} Pbar(t-u) dQ(u) / Pbar(t): branch selected by the
// measure side Q, the survival side P contributes the (1-u)^p integrands.
// `with_boundary` folds Pbar(t/2)Qbar(t/2)/Pbar(t) in, which materializes as
// the extra 2^{-p-q} t^{-1} term of the q > -1 branch (it is absorbed by the
// error term everywhere else).
SideExpansion assemble_side(const LightTailModel& P, const LightTailModel& Q, double t,
                            bool with_boundary, const std::string& surv_aux,
                            const std::string& meas_aux) {
    if (P.kind() == ModelKind::WeibullType || Q.kind() == ModelKind::WeibullType)
        throw std::invalid_argument("Theorem 4 requires tilted-RV factors");
    if (P.rate() != Q.rate())
        throw std::invalid_argument("Theorem 4 requires a shared exponential rate");
    const double alpha = P.rate();
    const double p = P.factor().index, q = Q.factor().index;
    const double rho_p = P.factor().second_index, rho_q = Q.factor().second_index;
    const double ap = P.factor().auxiliary(t), aq = Q.factor().auxiliary(t);

    SideExpansion out;
    out.branch = classify_branch(Q);
    using K = ShapeIntegralKind;
    switch (out.branch) {
        case BranchLabel::G_MINUS1_INF: {
            double ic = int_c_head(Q, t);
            double c_t = Q.factor().evaluate(t);
            double k = p * compute_shape_integral(K::LogWeight, p, 0) +
                       std::log(2.0) * (1.0 - std::pow(2.0, -p));
            out.leading = alpha * ic;
            out.corrections = {{"tc_log_term", alpha * t * c_t * k}, {"unit_term", 1.0}};
            out.error_order = "o((1 + t c(t)) / int_0^{t/2} c + " + surv_aux + "(t))";
            break;
        }
        case BranchLabel::G_MINUS1_FIN: {
            out.leading = exp_moment(Q, alpha);
            out.corrections = {{"tail_integral", -alpha * int_c_tail(Q, t)}};
            out.error_order = "o(int_{t/2}^inf c + " + surv_aux + "(t))";
            break;
        }
        case BranchLabel::G_BETWEEN_M2_M1: {
            double c_t = Q.factor().evaluate(t);
            double shape = compute_shape_integral(K::BetaDiff, p, q) +
                           1.0 / ((1.0 + q) * std::pow(2.0, 1.0 + q));
            out.leading = exp_moment(Q, alpha);
            out.corrections = {{"tc_term", alpha * shape * t * c_t}};
            out.error_order = "o(t c(t) + " + surv_aux + "(t))";
            break;
        }
        case BranchLabel::G_MINUS2_INF: {
            out.leading = exp_moment(Q, alpha);
            double v = p == 0.0 ? 0.0 : -alpha * p * int_uc(Q, t) / t;
            out.corrections = {{"t_inv_uc_integral", v}};
            out.error_order = "o(t^{-1} int_1^{t/2} u c + " + surv_aux + "(t))";
            break;
        }
        case BranchLabel::G_LE_MINUS2_FIN: {
            out.leading = exp_moment(Q, alpha);
            double v = p == 0.0 ? 0.0 : -p * first_exp_moment(Q, alpha) / t;
            out.corrections = {{"t_inverse", v}};
            out.error_order = "o(t^{-1} + " + surv_aux + "(t))";
            break;
        }
        case BranchLabel::G_GT_MINUS1: {
            if (aq != 0.0 && !(q + rho_q + 1.0 > 0))
                throw std::invalid_argument(
                    "m1/m2 expansion: branch requires index + second_index + 1 > 0");
            double tc = t * Q.factor().evaluate(t);
            double base = compute_shape_integral(K::Base, p, q);
            out.leading = tc * alpha * base;
            if (ap != 0.0) {
                double r2 = compute_shape_integral(K::PowDiffWeight, p, q, rho_p);
                out.corrections.emplace_back(surv_aux, tc * (alpha / rho_p) * r2 * ap);
            }
            double d1 = p == 0.0 ? 0.0 : compute_shape_integral(K::DerivTwoUMinusOne, p, q);
            out.corrections.emplace_back("t_inverse", tc * (p * d1 - 2.0 * (1.0 + q) * base) / t);
            if (aq != 0.0) {
                double s1 = p == 0.0
                                ? 0.0
                                : compute_shape_integral(K::SecondIndexPower, p, q, rho_q);
                double coef = std::pow(2.0, -rho_q) * p / (rho_q * (q + rho_q + 1.0));
                double coef2 = (std::pow(2.0, -rho_q) * (q + 1.0) - q - rho_q - 1.0) /
                               (rho_q * (q + rho_q + 1.0));
                out.corrections.emplace_back(meas_aux,
                                             tc * alpha * (coef * s1 + coef2 * base) * aq);
            }
            if (with_boundary)
                out.corrections.emplace_back("boundary", tc * std::pow(2.0, -p - q) / t);
            out.error_order = "o(t^{-1} + " + surv_aux + "(t) + " + meas_aux + "(t))";
            break;
        }
        default:
            throw std::logic_error("assemble_side: unexpected branch");
    }
    return out;
}

ExpansionResult side_to_result(const LightTailModel& normalizer, SideExpansion side, double t) {
    double m = side.total();
    if (!(m > 0))
        throw std::domain_error("expansion not positive at this t: below the asymptotic regime");
    ExpansionResult r;
    r.branch = side.branch;
    r.leading = side.leading;
    r.corrections = std::move(side.corrections);
    r.predicted_log_tail = normalizer.log_survival(t) + std::log(m);
    r.first_order_log_tail = normalizer.log_survival(t) + std::log(side.leading);
    r.error_order = std::move(side.error_order);
    return r;
}

void check_thm4_domain(const LightTailModel& F, const LightTailModel& G, double t) {
    double jmax = std::max({F.join_point(), G.join_point(), 1.0});
    if (!(t >= 2.0 * jmax))
        throw std::invalid_argument(
            "thm4/m1/m2: t below twice the join point; asymptotic formula not claimed there");
}

}  // namespace

ExpansionResult thm1_predict(const LightTailModel& F, double t) {
    if (F.kind() != ModelKind::WeibullType)
        throw std::invalid_argument("thm1_predict: Theorem 1 requires a Weibull-type model");
    const auto& chi = F.factor();
    const double rho = chi.index, rho1 = chi.second_index;
    if (!(rho > 0 && rho < 1))
        throw std::invalid_argument("thm1_predict: hypothesis 0 < rho < 1 violated");
    bool pure = chi.auxiliary(std::max(t, chi.valid_from)) == 0.0;
    if (!pure && !(rho + rho1 < 0))
        throw std::invalid_argument("thm1_predict: hypothesis rho + rho1 < 0 violated");
    if (!F.factor_derivative_nonincreasing())
        throw std::invalid_argument("thm1_predict: chi' must be nonincreasing beyond the join");
    if (!(t >= 2.0 * F.join_point()))
        throw std::invalid_argument("thm1_predict: t below twice the join point");

    const double alpha = F.rate();
    const double chi_t = chi.evaluate(t);
    const double rr = rho * (1.0 - rho);
    double lead = 0.5 * alpha * std::sqrt(kPi / rr) * debug::thm1_leading_scale;
    double c1 = -std::pow(2.0, rho - 5.0) * alpha * std::sqrt(kPi) * (rho - 2.0) * (rho - 3.0) /
                (std::pow(rr, 1.5) * chi_t);
    double c2 = -std::pow(2.0, -rho) * std::sqrt(rho * kPi / (1.0 - rho)) * chi_t / t;

    ExpansionResult r;
    r.branch = BranchLabel::THM1;
    r.leading = lead;
    r.corrections = {{"chi_inverse", c1}, {"chi_over_t", c2}};
    double prefactor_log =
        std::log(t) + 2.0 * F.log_survival(t / 2.0) - 0.5 * std::log(chi.evaluate(t / 2.0));
    double total = lead + c1 + c2;
    if (!(total > 0))
        throw std::domain_error("thm1_predict: expansion not positive at this t");
    r.predicted_log_tail = std::log(total) + prefactor_log;
    r.first_order_log_tail = std::log(lead) + prefactor_log;
    r.error_order = "o(A1(t)*chi(t) + 1/chi(t) + chi(t)^{1/2}/t)";
    return r;
}

ExpansionResult m1_predict(const LightTailModel& F, const LightTailModel& G, double t) {
    check_thm4_domain(F, G, t);
    return side_to_result(F, assemble_side(F, G, t, false, "A2", "A3"), t);
}

ExpansionResult m2_predict(const LightTailModel& F, const LightTailModel& G, double t) {
    check_thm4_domain(F, G, t);
    return side_to_result(G, assemble_side(G, F, t, true, "A3", "A2"), t);
}

ExpansionResult thm4_predict(const LightTailModel& F, const LightTailModel& G, double t) {
    check_thm4_domain(F, G, t);
    // canonical orientation: the printed equations fold the boundary product
    // into one side, so a fixed order is what makes swapped calls bit-equal
    const bool flip = G.spec_string() < F.spec_string();
    const LightTailModel& A = flip ? G : F;
    const LightTailModel& B = flip ? F : G;
    SideExpansion s1 = assemble_side(A, B, t, false, "A2", "A3");
    SideExpansion s2 = assemble_side(B, A, t, true, "A3", "A2");
    double m1 = s1.total(), m2 = s2.total();
    if (!(m1 > 0) || !(m2 > 0))
        throw std::domain_error("thm4_predict: expansion not positive at this t");

    ExpansionResult r;
    r.branch = s1.branch;
    r.predicted_log_tail =
        log_add(A.log_survival(t) + std::log(m1), B.log_survival(t) + std::log(m2));
    r.first_order_log_tail = log_add(A.log_survival(t) + std::log(s1.leading),
                                     B.log_survival(t) + std::log(s2.leading));
    r.leading = std::exp(r.first_order_log_tail);
    for (auto& [n, v] : s1.corrections) r.corrections.emplace_back("m1." + n, v);
    for (auto& [n, v] : s2.corrections) r.corrections.emplace_back("m2." + n, v);
    r.error_order = "m1: " + s1.error_order + "; m2: " + s2.error_order;
    return r;
}

}  // namespace convtail
