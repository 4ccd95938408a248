#include <cmath>

#include "convtail/oracle.hpp"
#include "doctest.h"

using namespace convtail;

namespace {
double erlang_log_tail(int shape, double rate, double t) {
    double s = 0, term = 1;
    for (int k = 0; k < shape; ++k) {
        s += term;
        term *= rate * t / (k + 1);
    }
    return -rate * t + std::log(s);
}
}  // namespace

TEST_CASE("gamma self-convolution matches the Erlang closed form") {
    auto g2 = make_model("gamma:shape=2,rate=1");
    // frozen value at t = 10: e^-10 (1 + 10 + 50 + 1000/6)
    double exact10 = std::exp(-10.0) * (1.0 + 10.0 + 50.0 + 1000.0 / 6.0);
    CHECK(exact10 == doctest::Approx(1.03362e-2).epsilon(1e-5));
    auto r = conv_tail(g2, g2, 10.0);
    CHECK(std::exp(r.log_value) == doctest::Approx(exact10).epsilon(1e-8));
    CHECK(r.rel_error_estimate <= 1e-10);
    CHECK(r.evaluations > 0);
    CHECK(r.split_point == 5.0);

    // mixed shapes, same rate
    auto g1 = make_model("gamma:shape=1,rate=1");
    for (double t : {1.0, 5.0, 20.0, 40.0}) {
        auto c = conv_tail(g1, g2, t);
        CHECK(c.log_value == doctest::Approx(erlang_log_tail(3, 1.0, t)).epsilon(1e-8));
    }
}

TEST_CASE("tail at zero is one") {
    auto g2 = make_model("gamma:shape=2,rate=1");
    auto tb = make_model("tilted:rate=1,beta=-3,rho2=-4");
    CHECK(conv_tail(g2, tb, 0.0).log_value == 0.0);
    CHECK(partial_conv_integral(g2, tb, 0.0) == kNegInf);
}

TEST_CASE("conv_tail is symmetric in its arguments") {
    auto g2 = make_model("gamma:shape=2,rate=1");
    auto tb = make_model("tilted:rate=1,beta=-3,rho2=-4");
    for (double t : {3.0, 30.0}) {
        double a = conv_tail(g2, tb, t).log_value;
        double b = conv_tail(tb, g2, t).log_value;
        CHECK(std::abs(std::expm1(a - b)) <= 2e-10);
    }
}

TEST_CASE("partial integral of a lighter G converges to its moment") {
    // G has rate 2, F rate 1: Fbar(t-u)/Fbar(t) -> e^u, so the first
    // decomposition term over Fbar tends to m_G(1) = 4
    auto f = make_model("tilted:rate=1,beta=-3,rho2=-4");
    auto g = make_model("gamma:shape=2,rate=2");
    double v = std::exp(partial_conv_integral(f, g, 200.0) - f.log_survival(200.0));
    CHECK(v == doctest::Approx(exp_moment(g, 1.0)).epsilon(0.05));
}

TEST_CASE("symmetric decomposition algebra at moderate t") {
    auto g2 = make_model("gamma:shape=2,rate=1");
    double t = 10.0;
    double part = std::exp(partial_conv_integral(g2, g2, t));
    double conv = std::exp(conv_tail(g2, g2, t).log_value);
    double boundary = g2.survival(t / 2) * g2.survival(t / 2);
    CHECK(part == doctest::Approx((conv - boundary) / 2.0).epsilon(1e-8));
}

TEST_CASE("conv tail dominates each component and decreases in t") {
    auto g2 = make_model("gamma:shape=2,rate=1");
    auto tb = make_model("tilted:rate=1,beta=-3,rho2=-4");
    double prev = kInf;
    for (double t : {1.0, 2.0, 5.0, 10.0, 20.0, 50.0}) {
        double lv = conv_tail(g2, tb, t).log_value;
        CHECK(lv >= std::max(g2.log_survival(t), tb.log_survival(t)) - 1e-9);
        CHECK(lv <= prev + 1e-12);
        prev = lv;
    }
}

TEST_CASE("deep tail stays finite in log space") {
    auto w = make_model("weibull:rate=1,rho=0.5");
    auto r = conv_tail(w, w, 4096.0);
    CHECK(std::isfinite(r.log_value));
    CHECK(r.log_value < -1900.0);  // far below anything exp() could represent
    CHECK(r.rel_error_estimate <= 1e-10);
}

TEST_CASE("invalid arguments are rejected") {
    auto g2 = make_model("gamma:shape=2,rate=1");
    CHECK_THROWS_AS(conv_tail(g2, g2, -1.0), std::invalid_argument);
    CHECK_THROWS_AS(conv_tail(g2, g2, 1.0, 1e-13), std::invalid_argument);
}
