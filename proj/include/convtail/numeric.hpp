#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <vector>

namespace convtail {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kInf = std::numeric_limits<double>::infinity();

// log(e^a + e^b) without overflow; tolerates -inf arguments.
inline double log_add(double a, double b) {
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    double m = a > b ? a : b;
    return m + std::log1p(std::exp(-(a > b ? a - b : b - a)));
}

inline double log_sum(std::span<const double> xs) {
    double m = kNegInf;
    for (double x : xs) m = std::max(m, x);
    if (m == kNegInf) return kNegInf;
    double s = 0.0;
    for (double x : xs) s += std::exp(x - m);
    return m + std::log(s);
}

// Neumaier-compensated accumulator.
struct CompensatedSum {
    double sum = 0.0;
    double comp = 0.0;
    void add(double x) {
        double t = sum + x;
        if (std::abs(sum) >= std::abs(x))
            comp += (sum - t) + x;
        else
            comp += (x - t) + sum;
        sum = t;
    }
    double value() const { return sum + comp; }
};

// Deterministic pairwise-tree reduction with compensated leaves.
inline double pairwise_compensated_sum(std::span<const double> xs) {
    if (xs.size() <= 8) {
        CompensatedSum acc;
        for (double x : xs) acc.add(x);
        return acc.value();
    }
    size_t half = xs.size() / 2;
    CompensatedSum acc;
    acc.add(pairwise_compensated_sum(xs.subspan(0, half)));
    acc.add(pairwise_compensated_sum(xs.subspan(half)));
    return acc.value();
}

// Least-squares fit of y = slope*x + intercept; returns {slope, intercept, r^2}.
struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

inline LineFit fit_line(std::span<const double> x, std::span<const double> y) {
    const size_t n = x.size();
    double sx = 0, sy = 0;
    for (size_t i = 0; i < n; ++i) { sx += x[i]; sy += y[i]; }
    double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0, syy = 0;
    for (size_t i = 0; i < n; ++i) {
        double dx = x[i] - mx, dy = y[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    if (syy == 0.0) {
        f.r_squared = 1.0;
    } else {
        double ss_res = syy - f.slope * sxy;
        f.r_squared = 1.0 - std::max(0.0, ss_res) / syy;
    }
    return f;
}

}  // namespace convtail
