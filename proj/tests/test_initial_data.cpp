#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "tailwave/errors.hpp"
#include "tailwave/evolve.hpp"
#include "tailwave/initial_data.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

using namespace tailwave;

TEST_CASE("polynomial bump profile values") {
    CharacteristicData d = bump_data(0, 20.0, 40.0, 1.0);
    // a (v-20)^4 (40-v)^4 at v = 30 is 10^8; maximum sits at the midpoint
    CHECK(d.on_u0(30.0, 0.0, 0.0) == doctest::Approx(1e8).epsilon(1e-15));
    CHECK(d.on_u0(30.0, 0.0, 0.0) == doctest::Approx(std::pow(10.0, 8)));
    for (double v : {21.0, 25.0, 35.0, 39.0}) CHECK(d.on_u0(v, 0.0, 0.0) <= d.on_u0(30.0, 0.0, 0.0));
    CHECK(d.on_u0(20.0, 0.0, 0.0) == 0.0);
    CHECK(d.on_u0(40.0, 0.0, 0.0) == 0.0);
    CHECK(d.on_u0(45.0, 0.0, 0.0) == 0.0);
    CHECK(d.on_v0(3.0, 0.0, 0.0) == 0.0);
    CHECK(d.corner_value == 0.0);
    CHECK(*d.predicted_I0 == 0.0);

    // C2 endpoints: the quartic touch leaves value and second difference at
    // the O(h^4) scale of the profile
    const double h = 1e-4;
    CHECK(std::abs(d.on_u0(20.0 + h, 0.0, 0.0)) < 2e5 * h * h * h * h);
    CHECK(std::abs(d.on_u0(20.0 + h, 0.0, 0.0) - 2 * d.on_u0(20.0 + 2 * h, 0.0, 0.0) +
                   d.on_u0(20.0 + 3 * h, 0.0, 0.0)) < 1e7 * h * h * h * h);
}

TEST_CASE("gaussian_truncated profile is confined and C2") {
    CharacteristicData d = bump_data(1, 10.0, 30.0, 2.0, BumpProfile::gaussian_truncated);
    CHECK(d.on_u0(20.0, 0.0, 0.0) == doctest::Approx(2.0)); // window value 1 at the center
    CHECK(d.on_u0(10.0, 0.0, 0.0) == 0.0);
    CHECK(d.on_u0(30.0, 0.0, 0.0) == 0.0);
    CHECK(d.on_u0(9.0, 0.0, 0.0) == 0.0);
    CHECK(d.ell == 1);
}

TEST_CASE("bump error paths") {
    CHECK_THROWS_AS(bump_data(0, 5.0, 5.0, 1.0), BadSupport);
    CHECK_THROWS_AS(bump_data(0, 7.0, 5.0, 1.0), BadSupport);
    CHECK_THROWS_AS(bump_data(-1, 1.0, 5.0, 1.0), DomainError);
    CHECK_THROWS_AS(bump_data(0, 1.0, 5.0, std::nan("")), DomainError);
}

TEST_CASE("static tail profiles and predicted first NP value") {
    Background mink = Background::minkowski(10.0);
    CharacteristicData dm = static_tail_data(mink, 1.0, 1.0);
    // psi = -C0 / r exactly, so phi = r psi = -C0
    for (double r : {2.0, 7.0, 31.0})
        CHECK(dm.on_u0(0.0, r, mink.tortoise(r)) == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(*dm.predicted_I0 == 0.0);

    Background schw = Background::schwarzschild(1.0, 10.0);
    CharacteristicData ds = static_tail_data(schw, 2.0, 3.0);
    CHECK(*ds.predicted_I0 == doctest::Approx(2.0));
    // large-r expansion phi = -C0 (1 + M/r + ...)
    CHECK(ds.on_u0(0.0, 1e6, schw.tortoise(1e6)) ==
          doctest::Approx(-2.0 * (1.0 + 1e-6)).epsilon(1e-10));
    // closed form against quadrature of the defining integral
    for (double r : {3.0, 8.0, 40.0}) {
        const double rs = schw.tortoise(r);
        CHECK(ds.on_u0(0.0, r, rs) ==
              doctest::Approx(-2.0 * r * schw.static_tail_integral(r)).epsilon(1e-12));
        // both rays carry the same radial profile (corner compatibility exact)
        CHECK(ds.on_u0(0.0, r, rs) == ds.on_v0(5.0, r, rs));
    }
    // the tortoise form survives where r - 2M underflows; the profile blows
    // down logarithmically (~ -C0 r (r - r_*) / (2M)^2) toward the horizon
    const double deep = ds.on_u0(0.0, 2.0, -400.0);
    CHECK(std::isfinite(deep));
    CHECK(deep < -100.0);

    Background rn = Background::reissner_nordstrom(1.0, 0.6, 10.0);
    CharacteristicData drn = static_tail_data(rn, 1.5, 3.0);
    for (double r : {3.0, 8.0, 40.0})
        CHECK(drn.on_u0(0.0, r, rn.tortoise(r)) ==
              doctest::Approx(-1.5 * r * rn.static_tail_integral(r)).epsilon(1e-12));
    CHECK(*drn.predicted_I0 == doctest::Approx(1.5));

    CHECK_THROWS_AS(static_tail_data(schw, 1.0, 1.5), DomainError);

    CharacteristicData rel = static_tail_data(schw, 2.0, 3.0, IngoingExtension::corner_constant);
    CHECK(rel.ingoing_constant_corner);
    CHECK(rel.family == "static_tail_relaxed");
}

TEST_CASE("superposition commutes with the constructors exactly") {
    CharacteristicData a = bump_data(2, 10.0, 20.0, 0.7);
    CharacteristicData b = bump_data(2, 15.0, 30.0, -1.3);
    CharacteristicData sum = add_data(a, b);
    CharacteristicData scaled = scale_data(a, 3.5);
    CharacteristicData direct = bump_data(2, 10.0, 20.0, 0.7 * 3.5);
    for (double v = 9.0; v <= 31.0; v += 0.37) {
        CHECK(sum.on_u0(v, 0.0, 0.0) == a.on_u0(v, 0.0, 0.0) + b.on_u0(v, 0.0, 0.0));
        CHECK(scaled.on_u0(v, 0.0, 0.0) == doctest::Approx(direct.on_u0(v, 0.0, 0.0)).epsilon(1e-15));
    }
    CHECK_THROWS_AS(add_data(a, bump_data(1, 10.0, 20.0, 1.0)), WrongMode);
}

TEST_CASE("tabulated data imports with linear interpolation") {
    const std::string path = "/tmp/tailwave_tab_test.txt";
    {
        std::ofstream f(path);
        f << "# v phi\n0 0\n10 1\n20 3\n30 0\n";
    }
    CharacteristicData d = tabulated_data(0, path);
    CHECK(d.on_u0(10.0, 0.0, 0.0) == doctest::Approx(1.0));
    CHECK(d.on_u0(15.0, 0.0, 0.0) == doctest::Approx(2.0));
    CHECK(d.on_u0(25.0, 0.0, 0.0) == doctest::Approx(1.5));
    CHECK(d.corner_value == 0.0);
}

TEST_CASE("time derivative of the static solution is at the scheme-error level") {
    Background schw = Background::schwarzschild(1.0, 10.0);
    GridSpec g{0.0, 12.0, 0.0, 60.0, 0.25, 0};
    const double r_min = schw.radius_from_null(g.u1, g.v0);
    CharacteristicData d = static_tail_data(schw, 1.0, r_min);
    ModeSolution sol = evolve_mode(schw, d, g);
    CharacteristicData td = time_derivative_data(d, sol);
    CHECK(*td.predicted_I0 == 0.0);
    double worst = 0.0;
    for (double v = g.v0 + g.h; v <= g.v1 - g.h; v += 1.0)
        worst = std::max(worst, std::abs(td.on_u0(v, 0.0, 0.0)));
    // second-order scheme error of an O(1) static profile
    CHECK(worst < 1e-3);

    // the same data at half the step shrinks at second order
    ModeSolution sol2 = evolve_mode(schw, d, g.refined());
    CharacteristicData td2 = time_derivative_data(d, sol2);
    double worst2 = 0.0;
    for (double v = g.v0 + g.h; v <= g.v1 - g.h; v += 1.0)
        worst2 = std::max(worst2, std::abs(td2.on_u0(v, 0.0, 0.0)));
    CHECK(worst2 < 0.5 * worst);

    // linearity of the sampler
    CharacteristicData td_scaled = time_derivative_data(scale_data(d, 2.0),
                                                        evolve_mode(schw, scale_data(d, 2.0), g));
    for (double v = 1.0; v <= 59.0; v += 3.1)
        CHECK(td_scaled.on_u0(v, 0.0, 0.0) ==
              doctest::Approx(2.0 * td.on_u0(v, 0.0, 0.0)).epsilon(1e-12));
}
