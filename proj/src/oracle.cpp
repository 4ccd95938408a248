#include "convtail/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "convtail/quadrature.hpp"

namespace convtail {
namespace {

// Shared seed set for both cross integrals keeps conv_tail(F,G) and
// conv_tail(G,F) evaluating identical panel sequences.
std::vector<double> decomposition_seeds(const LightTailModel& F, const LightTailModel& G,
                                        double t) {
    std::vector<double> seeds{t / 4.0};
    for (const LightTailModel* m : {&F, &G}) {
        double h = m->split_hint(t);
        if (std::isfinite(h)) seeds.push_back(h);
        if (m->join_point() > 0) seeds.push_back(m->join_point());
    }
    std::erase_if(seeds, [&](double s) { return !(s > 0 && s < t / 2); });
    return seeds;
}

quad::LogResult cross_integral(const LightTailModel& S, const LightTailModel& D, double t,
                               double rel_tol, const std::vector<double>& seeds) {
    quad::Options opt;
    opt.rel_tol = rel_tol;
    opt.seeds = seeds;
    return quad::integrate_log(
        [&](double u) { return S.log_survival(t - u) + D.log_density(u); }, 0.0, t / 2.0, opt);
}

}  // namespace

ConvTailResult conv_tail(const LightTailModel& F, const LightTailModel& G, double t,
                         double rel_tol) {
    if (t < 0) throw std::invalid_argument("conv_tail: t must be nonnegative");
    if (rel_tol < 1e-12) throw std::invalid_argument("conv_tail: rel_tol below 1e-12");
    ConvTailResult res;
    res.split_point = t / 2.0;
    if (t == 0) return res;  // P(X+Y > 0) = 1 for nonnegative nondegenerate sums

    auto seeds = decomposition_seeds(F, G, t);
    auto i1 = cross_integral(F, G, t, rel_tol / 2.0, seeds);
    auto i2 = cross_integral(G, F, t, rel_tol / 2.0, seeds);
    double boundary = F.log_survival(t / 2.0) + G.log_survival(t / 2.0);

    res.log_value = log_add(log_add(i1.log_value, i2.log_value), boundary);
    double err1 = i1.log_value == kNegInf ? 0.0
                                          : std::exp(i1.log_value - res.log_value) * i1.rel_error;
    double err2 = i2.log_value == kNegInf ? 0.0
                                          : std::exp(i2.log_value - res.log_value) * i2.rel_error;
    res.rel_error_estimate = err1 + err2;
    res.evaluations = i1.evaluations + i2.evaluations;
    if (!i1.converged || !i2.converged || res.rel_error_estimate > rel_tol)
        throw quad::ToleranceError("conv_tail: requested tolerance not met",
                                   res.rel_error_estimate);
    return res;
}

double partial_conv_integral(const LightTailModel& F, const LightTailModel& G, double t,
                             double rel_tol) {
    if (t < 0) throw std::invalid_argument("partial_conv_integral: t must be nonnegative");
    if (t == 0) return kNegInf;  // empty integration range
    auto seeds = decomposition_seeds(F, G, t);
    auto r = cross_integral(F, G, t, rel_tol, seeds);
    if (!r.converged)
        throw quad::ToleranceError("partial_conv_integral: requested tolerance not met",
                                   r.rel_error);
    return r.log_value;
}

}  // namespace convtail
