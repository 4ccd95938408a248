#include <cmath>

#include "convtail/quadrature.hpp"
#include "convtail/rv_function.hpp"
#include "doctest.h"

using namespace convtail;

TEST_CASE("hua_joe_construct direct substitution") {
    // chi(t) = t^{1/2} (1 - t^-2 / 2): positive auxiliary A(t) = t^-2
    auto chi = hua_joe_construct(1.0, 0.5, -2.0, 1.0);
    CHECK(chi.evaluate(4.0) == doctest::Approx(2.0 * (1.0 - 1.0 / 32.0)).epsilon(1e-14));

    // slowly varying limit: index 0, A(t) = t^-1 gives 1 - 1/t -> 1
    auto sv = hua_joe_construct(1.0, 0.0, -1.0, 1.0);
    CHECK(sv.evaluate(1e8) == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("hua_joe_construct rejects bad parameters") {
    CHECK_THROWS_AS(hua_joe_construct(1.0, 0.5, 0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(hua_joe_construct(1.0, 0.5, 2.0, 1.0), std::invalid_argument);
    // non-vanishing auxiliary
    CHECK_THROWS_AS(hua_joe_construct(1.0, 0.5, -1.0, [](double) { return 0.5; }),
                    std::invalid_argument);
}

TEST_CASE("derivative is consistent with the numerical integral of itself") {
    auto chi = hua_joe_construct(1.0, 0.5, -2.0, -1.0);
    REQUIRE(chi.has_derivative());
    for (auto [t1, t2] : {std::pair{2.0, 9.0}, std::pair{10.0, 250.0}}) {
        auto r = quad::integrate(chi.derivative, t1, t2, {.rel_tol = 1e-12});
        CHECK(r.value ==
              doctest::Approx(chi.evaluate(t2) - chi.evaluate(t1)).epsilon(1e-8));
    }
}

TEST_CASE("second_order_ratio basics") {
    auto chi = hua_joe_construct(1.0, 0.5, -2.0, 1.0);
    CHECK(second_order_ratio(chi, 123.0, 1.0) == 0.0);

    // closed-form limit x^{1/2}(x^-2 - 1)/(-2) = 15/16 at x = 4
    CHECK(second_order_ratio(chi, 1e4, 4.0) == doctest::Approx(0.9375).epsilon(1e-3));

    // an exact power with a nominal auxiliary has zero second-order deviation
    SecondOrderRVFunction p;
    p.index = 2.0;
    p.evaluate = [](double t) { return t * t; };
    p.auxiliary = [](double t) { return 1.0 / t; };
    for (double t : {10.0, 1e3})
        for (double x : {0.5, 2.0, 7.0})
            CHECK(second_order_ratio(p, t, x) == doctest::Approx(0.0).epsilon(1e-10));

    auto zero_aux = pure_power(1.0, 2.0);
    CHECK_THROWS_AS(second_order_ratio(zero_aux, 10.0, 2.0), std::domain_error);
}

TEST_CASE("hua-joe round trip recovers the 2RV limit") {
    struct P {
        double scale, index, second, aux;
    };
    for (const P& p : {P{1, 0.5, -2, -1}, P{1, -3, -4, -1}, P{0.5, 1.2, -1, 1}}) {
        auto f = hua_joe_construct(p.scale, p.index, p.second, p.aux);
        for (double x : {0.25, 0.5, 2.0, 4.0}) {
            double want = second_order_limit(p.index, p.second, x);
            CHECK(second_order_ratio(f, 1e4, x) == doctest::Approx(want).epsilon(1e-3));
        }
    }
}

TEST_CASE("karamata index estimates") {
    // pure powers are exact
    CHECK(karamata_index_estimate([](double t) { return t * t; }, 0.0, 7.0, KaramataSide::Head) ==
          doctest::Approx(3.0).epsilon(1e-10));
    CHECK(karamata_index_estimate([](double t) { return 1.0 / (t * t); }, 0.0, 5.0,
                                  KaramataSide::Tail) == doctest::Approx(1.0).epsilon(1e-9));
    for (double a : {-0.5, 0.0, 1.0, 2.5}) {
        // the t0 boundary leaves O(t^-(a+1)): push t far enough out per exponent
        double t = a < 0 ? 1e8 : 1e5;
        double got = karamata_index_estimate([=](double u) { return std::pow(u, a); }, 1.0, t,
                                             KaramataSide::Head);
        CHECK(got == doctest::Approx(a + 1.0).epsilon(1e-3));
    }
    auto chi = hua_joe_construct(1.0, 0.5, -2.0, -1.0);
    CHECK(karamata_index_estimate(chi.evaluate, 1.0, 1e6, KaramataSide::Head) ==
          doctest::Approx(1.5).epsilon(1e-3));
}

TEST_CASE("karamata tail rejects a divergent integral") {
    CHECK_THROWS_AS(karamata_index_estimate([](double t) { return 1.0 / t; }, 0.0, 2.0,
                                            KaramataSide::Tail),
                    quad::ToleranceError);
}

TEST_CASE("drees bounds") {
    std::vector<std::pair<double, double>> grid;
    for (double t : {1e3, 1e4})
        for (double x : {0.5, 2.0, 8.0}) grid.push_back({t, x});

    auto power = pure_power(2.0, -1.5);
    CHECK(drees_bound_check(power, grid, 1e-9, 0.1).ok());

    auto chi = hua_joe_construct(1.0, 0.5, -2.0, -1.0);
    CHECK(drees_bound_check(chi, grid, 0.1, 0.1).ok());

    // zero tolerance flags every grid point of a non-power function
    auto rep = drees_bound_check(chi, grid, 0.0, 0.1);
    CHECK(rep.violations.size() >= grid.size());
    CHECK(rep.clean_from_t == kInf);
}

TEST_CASE("product of 2RV functions has the summed index") {
    auto f = hua_joe_construct(1.0, -1.2, -1.0, -1.0);
    auto g = hua_joe_construct(1.0, 2.3, -2.0, -1.0);
    double got = measure_rv_index(
        [&](double t) { return f.evaluate(t) * g.evaluate(t); }, 1e4);
    CHECK(got == doctest::Approx(1.1).epsilon(1e-3));
}

TEST_CASE("pure powers measure their own index") {
    CHECK(measure_rv_index([](double t) { return 3.0 * std::pow(t, -2.5); }, 100.0) ==
          doctest::Approx(-2.5).epsilon(1e-12));
}
