#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "tailwave/background.hpp"
#include "tailwave/errors.hpp"

#include <cmath>

using namespace tailwave;

TEST_CASE("metric function closed forms") {
    Background mink = Background::minkowski(10.0);
    CHECK(mink.D(5.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(mink.D(5.0, 1) == 0.0);

    Background schw = Background::schwarzschild(1.0, 10.0);
    CHECK(schw.D(2.0) == doctest::Approx(0.0).epsilon(1e-15)); // horizon root
    CHECK(schw.D(4.0) == doctest::Approx(0.5));

    Background rn = Background::reissner_nordstrom(1.0, 0.6, 10.0);
    CHECK(rn.D(2.0) == doctest::Approx(0.09).epsilon(1e-14)); // 1 - 1 + 0.36/4
}

TEST_CASE("metric function domain and order errors") {
    Background schw = Background::schwarzschild(1.0, 10.0);
    CHECK_THROWS_AS(schw.D(1.5), DomainError);
    CHECK_THROWS_AS(schw.D(5.0, 4), UnsupportedOrder);
    Background mink = Background::minkowski();
    CHECK_THROWS_AS(mink.D(-1.0), DomainError);
}

TEST_CASE("derivatives are consistent with finite differences at 4th order") {
    const Background bgs[] = {Background::schwarzschild(1.0, 10.0),
                              Background::reissner_nordstrom(1.0, 0.6, 10.0)};
    for (const Background& bg : bgs) {
        for (int order = 1; order <= 3; ++order) {
            for (double r : {3.0, 5.0, 9.0, 20.0}) {
                double err_prev = 0.0;
                double hs[2] = {0.05, 0.025};
                double errs[2];
                for (int t = 0; t < 2; ++t) {
                    const double h = hs[t];
                    const double fd = (bg.D(r - 2 * h, order - 1) - 8 * bg.D(r - h, order - 1) +
                                       8 * bg.D(r + h, order - 1) - bg.D(r + 2 * h, order - 1)) /
                                      (12 * h);
                    errs[t] = std::abs(fd - bg.D(r, order));
                }
                (void)err_prev;
                // 4th order: refinement by 2 gains ~16; allow slack for roundoff
                if (errs[1] > 1e-13)
                    CHECK(errs[0] / errs[1] > 8.0);
            }
        }
    }
}

TEST_CASE("horizon radius") {
    CHECK(Background::schwarzschild(1.0).horizon_radius() == doctest::Approx(2.0));
    CHECK(Background::reissner_nordstrom(1.0, 0.6).horizon_radius() == doctest::Approx(1.8));
    CHECK(Background::minkowski().horizon_radius() == 0.0);
    Background pos = Background::custom([](double, int o) { return o == 0 ? 1.0 : 0.0; }, 0.0,
                                        0.0, 10.0);
    CHECK_THROWS_AS(pos.horizon_radius(), NoHorizon);

    // |D(r_+ + 1e-12 M)| < 1e-10 for the black-hole families
    Background schw = Background::schwarzschild(1.0);
    CHECK(std::abs(schw.D(schw.r_plus() + 1e-12)) < 1e-10);
    Background rn = Background::reissner_nordstrom(1.0, 0.6);
    CHECK(std::abs(rn.D(rn.r_plus() + 1e-12)) < 1e-10);
}

TEST_CASE("extremal family is constructible and flagged") {
    Background ext = Background::reissner_nordstrom(1.0, 1.0);
    CHECK(ext.extremal());
    CHECK(ext.horizon_radius() == doctest::Approx(1.0));
    CHECK(Background::reissner_nordstrom(1.0, 0.6).extremal() == false);
    CHECK_THROWS_AS(Background::reissner_nordstrom(1.0, 1.1), DomainError);
}

TEST_CASE("tortoise coordinate normalization and values") {
    Background mink = Background::minkowski(10.0);
    CHECK(mink.tortoise(7.0) == doctest::Approx(7.0).epsilon(1e-15));
    CHECK(mink.tortoise(10.0) == doctest::Approx(10.0).epsilon(1e-15));

    Background schw = Background::schwarzschild(1.0, 10.0);
    CHECK(schw.tortoise(10.0) == doctest::Approx(10.0).epsilon(1e-15));
    CHECK(schw.tortoise(18.0) == doctest::Approx(18.0 + 2.0 * std::log(2.0)).epsilon(1e-14));

    // monotone divergence toward the horizon
    CHECK(schw.tortoise(2.0 + 1e-4) < schw.tortoise(2.0 + 1e-3));
    CHECK(schw.tortoise(2.0 + 1e-8) < -30.0);
    CHECK_THROWS_AS(schw.tortoise(2.0), DomainError);

    Background rn = Background::reissner_nordstrom(1.0, 0.6, 10.0);
    CHECK(rn.tortoise(10.0) == doctest::Approx(10.0).epsilon(1e-15));
    // cross-check the closed form by quadrature of 1/D
    double quad = 0.0;
    const int n = 4000;
    const double a = 5.0, b = 14.0;
    const double hh = (b - a) / n;
    for (int i = 0; i < n; ++i) {
        const double r0 = a + i * hh, r1 = r0 + hh, rm = 0.5 * (r0 + r1);
        quad += hh / 6.0 * (1.0 / rn.D(r0) + 4.0 / rn.D(rm) + 1.0 / rn.D(r1));
    }
    CHECK(rn.tortoise(b) - rn.tortoise(a) == doctest::Approx(quad).epsilon(1e-10));
}

TEST_CASE("radius from null pair inverts the tortoise map") {
    Background mink = Background::minkowski(10.0);
    CHECK(mink.radius_from_null(0.0, 10.0) == doctest::Approx(5.0).epsilon(1e-15));

    Background schw = Background::schwarzschild(1.0, 10.0);
    const double v = 2.0 * (18.0 + 2.0 * std::log(2.0));
    CHECK(schw.radius_from_null(0.0, v) == doctest::Approx(18.0).epsilon(1e-13));

    // round trip over a log-spaced radius grid
    const Background bgs[] = {schw, Background::reissner_nordstrom(1.0, 0.6, 10.0),
                              Background::reissner_nordstrom(1.0, 1.0, 10.0)};
    for (const Background& bg : bgs) {
        for (int t = 0; t <= 40; ++t) {
            const double r = bg.r_plus() * (1.0 + std::pow(10.0, -6.0 + 8.0 * t / 40.0));
            const double back = bg.radius_from_tortoise(bg.tortoise(r));
            CHECK(std::abs(back - r) <= 1e-10 * r);
        }
    }

    // independent bisection oracle very close to the horizon
    {
        const double target = -0.01; // r* deep in the throat? still moderate
        double lo = 2.0 * (1 + 1e-15), hi = 10.0;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (schw.tortoise(mid) < target) lo = mid; else hi = mid;
        }
        const double r_newton = schw.radius_from_tortoise(target);
        CHECK(std::abs(r_newton - 0.5 * (lo + hi)) < 1e-10 * r_newton);
    }

    // strict monotonicity in v - u
    double prev = 0.0;
    for (int t = 0; t < 30; ++t) {
        const double r = schw.radius_from_null(0.0, -20.0 + 3.0 * t);
        if (t > 0) CHECK(r > prev);
        prev = r;
    }

    CHECK_THROWS_AS(mink.radius_from_null(10.0, 10.0), DomainError);
}

TEST_CASE("custom family matches schwarzschild through quadrature paths") {
    Background schw = Background::schwarzschild(1.0, 10.0);
    Background cust = Background::custom(
        [](double r, int o) {
            switch (o) {
                case 0: return 1.0 - 2.0 / r;
                case 1: return 2.0 / (r * r);
                case 2: return -4.0 / (r * r * r);
                default: return 12.0 / (r * r * r * r);
            }
        },
        2.0, 1.0, 10.0);
    for (double r : {3.0, 6.0, 12.0, 40.0}) {
        CHECK(cust.tortoise(r) == doctest::Approx(schw.tortoise(r)).epsilon(1e-11));
        CHECK(cust.static_tail_integral(r) ==
              doctest::Approx(schw.static_tail_integral(r)).epsilon(1e-10));
    }
    CHECK(cust.radius_from_tortoise(5.0) ==
          doctest::Approx(schw.radius_from_tortoise(5.0)).epsilon(1e-10));
}

TEST_CASE("static tail integral closed forms") {
    Background mink = Background::minkowski(10.0);
    CHECK(mink.static_tail_integral(4.0) == doctest::Approx(0.25).epsilon(1e-15));
    Background schw = Background::schwarzschild(1.0, 10.0);
    // large-r expansion 1/r + M/r^2 + ...
    const double r = 1e5;
    CHECK(schw.static_tail_integral(r) ==
          doctest::Approx(1.0 / r + 1.0 / (r * r)).epsilon(1e-9));
}
