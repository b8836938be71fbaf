#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "tailwave/analysis.hpp"
#include "tailwave/energy.hpp"
#include "tailwave/errors.hpp"
#include "tailwave/evolve.hpp"
#include "tailwave/probes.hpp"

#include <cmath>
#include <cstdio>

using namespace tailwave;

namespace {

// C^2 seed for closed-form flat-space solutions
double seed(double x, double lo, double hi) {
    if (x <= lo || x >= hi) return 0.0;
    const double a = (x - lo) * (hi - x);
    const double norm = std::pow(0.25 * (hi - lo) * (hi - lo), 4);
    return a * a * a * a / norm;
}
double seed_d(double x, double lo, double hi) {
    if (x <= lo || x >= hi) return 0.0;
    const double a = (x - lo) * (hi - x);
    const double da = (lo + hi - 2.0 * x);
    const double norm = std::pow(0.25 * (hi - lo) * (hi - lo), 4);
    return 4.0 * a * a * a * da / norm;
}

} // namespace

TEST_CASE("flat ell=0 evolution reproduces the d'Alembert solution") {
    Background bg = Background::minkowski(10.0);
    GridSpec g{0.0, 50.0, 5.0, 155.0, 0.25, 0};
    CharacteristicData d;
    d.ell = 0;
    d.family = "dalembert";
    d.on_u0 = [](double v, double, double) { return seed(v, 30.0, 60.0); };
    d.on_v0 = [](double u, double, double) { return 0.4 * seed(u, 10.0, 30.0); };
    d.corner_value = 0.0;
    ModeSolution sol = evolve_mode(bg, d, g);
    double err = 0.0;
    for (int i = 0; i <= sol.nu(); ++i)
        for (int j = 0; j <= sol.nv(); ++j) {
            const double exact = seed(sol.v(j), 30.0, 60.0) + 0.4 * seed(sol.u(i), 10.0, 30.0);
            err = std::max(err, std::abs(sol.phi(i, j) - exact));
        }
    CHECK(err < 1e-12);
}

TEST_CASE("flat ell=1 multipole converges at second order") {
    // exact outgoing multipole phi = F'(v) - F(v)/r
    Background bg = Background::minkowski(10.0);
    CharacteristicData d;
    d.ell = 1;
    d.family = "multipole";
    d.on_u0 = [](double v, double r, double) { return seed_d(v, 60.0, 90.0) - seed(v, 60.0, 90.0) / r; };
    d.on_v0 = [](double, double, double) { return 0.0; };
    d.corner_value = 0.0;

    GridSpec g{0.0, 40.0, 45.0, 165.0, 0.5, 0};
    double errs[3];
    GridSpec gl = g;
    for (int l = 0; l < 3; ++l) {
        ModeSolution sol = evolve_mode(bg, d, gl);
        double err = 0.0;
        for (int i = 0; i <= sol.nu(); ++i)
            for (int j = 0; j <= sol.nv(); ++j) {
                const double v = sol.v(j);
                const double exact = seed_d(v, 60.0, 90.0) - seed(v, 60.0, 90.0) / sol.r(i, j);
                err = std::max(err, std::abs(sol.phi(i, j) - exact));
            }
        errs[l] = err;
        gl = gl.refined();
    }
    const double order = std::log2(errs[0] / errs[1]);
    const double order2 = std::log2(errs[1] / errs[2]);
    CHECK(order > 1.8);
    CHECK(order < 2.2);
    CHECK(order2 > 1.8);
    CHECK(order2 < 2.2);
}

TEST_CASE("schwarzschild static tail stays stationary at second order") {
    Background bg = Background::schwarzschild(1.0, 10.0);
    GridSpec g{0.0, 16.0, 0.0, 80.0, 0.5, 0};
    CharacteristicData d = static_tail_data(bg, 1.0, bg.radius_from_null(g.u1, g.v0));
    double eps[2];
    GridSpec gl = g;
    for (int l = 0; l < 2; ++l) {
        ModeSolution sol = evolve_mode(bg, d, gl);
        Array2D t = t_derivative_field(sol, 1);
        double worst = 0.0;
        for (int i = 1; i <= sol.nu() - 1; ++i)
            for (int j = 1; j <= sol.nv() - 1; ++j) worst = std::max(worst, std::abs(t(i, j)));
        eps[l] = worst;
        gl = gl.refined();
    }
    const double ratio = eps[1] / eps[0];
    CHECK(ratio > 0.22);
    CHECK(ratio < 0.30);
}

TEST_CASE("evolution is linear in the data") {
    Background bg = Background::schwarzschild(1.0, 10.0);
    GridSpec g{0.0, 10.0, 20.0, 70.0, 0.5, 0};
    CharacteristicData d1 = bump_data(1, 30.0, 45.0, 1.0);
    CharacteristicData d2 = bump_data(1, 40.0, 60.0, -0.6);
    ModeSolution s1 = evolve_mode(bg, d1, g);
    ModeSolution s2 = evolve_mode(bg, d2, g);
    ModeSolution s12 = evolve_mode(bg, add_data(scale_data(d1, 2.0), d2), g);
    double err = 0.0, scale = 0.0;
    for (int i = 0; i <= s1.nu(); ++i)
        for (int j = 0; j <= s1.nv(); ++j) {
            const double lin = 2.0 * s1.phi(i, j) + s2.phi(i, j);
            err = std::max(err, std::abs(s12.phi(i, j) - lin));
            scale = std::max(scale, std::abs(lin));
        }
    CHECK(err < 1e-12 * scale);
}

TEST_CASE("time-translation equivariance is bitwise") {
    Background bg = Background::schwarzschild(1.0, 10.0);
    GridSpec g{0.0, 10.0, 20.0, 70.0, 0.25, 0};
    const double shift = 8.0; // multiple of h
    GridSpec gs{g.u0 + shift, g.u1 + shift, g.v0 + shift, g.v1 + shift, g.h, 0};
    CharacteristicData d = bump_data(0, 30.0, 50.0, 1.0);
    CharacteristicData ds = bump_data(0, 30.0 + shift, 50.0 + shift, 1.0);
    ModeSolution a = evolve_mode(bg, d, g);
    ModeSolution b = evolve_mode(bg, ds, gs);
    REQUIRE(a.phi.data().size() == b.phi.data().size());
    bool same = true;
    for (std::size_t t = 0; t < a.phi.data().size(); ++t)
        if (a.phi.data()[t] != b.phi.data()[t]) same = false;
    CHECK(same);
}

TEST_CASE("determinism and refinement levels") {
    Background bg = Background::schwarzschild(1.0, 10.0);
    GridSpec g{0.0, 8.0, 20.0, 60.0, 0.5, 0};
    CharacteristicData d = bump_data(0, 30.0, 50.0, 1.0);
    std::vector<ModeSolution> sols = evolve_refined(bg, d, g, 3);
    REQUIRE(sols.size() == 3);

    // identical rerun is bitwise identical
    ModeSolution again = evolve_mode(bg, d, g);
    CHECK(again.phi.data() == sols[0].phi.data());

    // pairwise interior differences shrink by ~4 per level
    auto diff = [&](const ModeSolution& coarse, const ModeSolution& fine) {
        double worst = 0.0;
        for (int i = 0; i <= coarse.nu(); ++i)
            for (int j = 0; j <= coarse.nv(); ++j)
                worst = std::max(worst, std::abs(coarse.phi(i, j) - fine.phi(2 * i, 2 * j)));
        return worst;
    };
    const double d01 = diff(sols[0], sols[1]);
    const double d12 = diff(sols[1], sols[2]);
    const double order = std::log2(d01 / d12);
    CHECK(order > 1.7);
    CHECK(order < 2.3);

    // zero data stays identically zero on every level
    CharacteristicData z = bump_data(0, 30.0, 50.0, 0.0);
    for (const ModeSolution& s : evolve_refined(bg, z, g, 2))
        for (double x : s.phi.data()) CHECK(x == 0.0);

    CHECK_THROWS_AS(evolve_refined(bg, d, g, 1), DomainError);
}

TEST_CASE("discrete T-energy balance self-converges") {
    Background bg = Background::schwarzschild(1.0, 10.0);
    GridSpec g{0.0, 16.0, 20.0, 120.0, 0.5, 0};
    CharacteristicData d = bump_data(1, 40.0, 70.0, 1.0);
    double residual[2];
    GridSpec gl = g;
    for (int l = 0; l < 2; ++l) {
        ModeSolution sol = evolve_mode(bg, d, gl);
        const double u1 = 2.0, u2 = 14.0, va = 30.0, vb = 110.0;
        const double in_flux = t_energy_flux(sol, Cone::outgoing, u1, va, vb) +
                               t_energy_flux(sol, Cone::ingoing, va, u1, u2);
        const double out_flux = t_energy_flux(sol, Cone::outgoing, u2, va, vb) +
                                t_energy_flux(sol, Cone::ingoing, vb, u1, u2);
        residual[l] = std::abs(in_flux - out_flux) / std::max(in_flux, 1e-300);
        gl = gl.refined();
    }
    CHECK(residual[0] < 0.02);
    const double order = std::log2(residual[0] / residual[1]);
    CHECK(order >= 1.8);
}

TEST_CASE("PDE residual in Bondi form self-converges") {
    Background bg = Background::schwarzschild(1.0, 10.0);
    GridSpec g{0.0, 16.0, 24.0, 144.0, 0.5, 0};
    CharacteristicData d = bump_data(1, 44.0, 76.0, 1.0);
    double res[2];
    GridSpec gl = g;
    for (int l = 0; l < 2; ++l) {
        ModeSolution sol = evolve_mode(bg, d, gl);
        res[l] = commutator_residual(sol, EquationId::box_phi);
        gl = gl.refined();
    }
    const double order = std::log2(res[0] / res[1]);
    CHECK(order >= 1.8);
}

TEST_CASE("flat sine wave has the analytic time derivative") {
    Background bg = Background::minkowski(10.0);
    GridSpec g{0.0, 10.0, 4.0, 44.0, 0.05, 0};
    const double omega = 0.8;
    CharacteristicData d;
    d.ell = 0;
    d.family = "sine";
    d.on_u0 = [=](double v, double, double) { return std::sin(omega * v); };
    d.on_v0 = [=](double, double, double) { return std::sin(omega * 4.0); };
    d.corner_value = std::sin(omega * 4.0);
    ModeSolution sol = evolve_mode(bg, d, g);
    Array2D t1 = t_derivative_field(sol, 1);
    double err = 0.0;
    for (int i = 2; i <= sol.nu() - 2; ++i)
        for (int j = 2; j <= sol.nv() - 2; ++j)
            err = std::max(err, std::abs(t1(i, j) - omega * std::cos(omega * sol.v(j))));
    CHECK(err < 2.0 * omega * omega * omega * g.h * g.h); // centered 2nd order

    // composition: T applied to T^1 equals T^2 on the common interior
    Array2D t2 = t_derivative_field(sol, 2);
    Array2D t1t1 = t_derivative_of(sol, t1, 1, 1);
    double comp = 0.0;
    for (int i = 3; i <= sol.nu() - 3; ++i)
        for (int j = 3; j <= sol.nv() - 3; ++j)
            comp = std::max(comp, std::abs(t2(i, j) - t1t1(i, j)));
    CHECK(comp < 1e-12);

    CHECK_THROWS_AS(t_derivative_field(sol, 0), DomainError);
}

TEST_CASE("stability warning triggers on under-resolved potentials") {
    Background bg = Background::schwarzschild(1.0, 10.0);
    GridSpec g{0.0, 24.0, 6.0, 54.0, 3.0, 0};
    CharacteristicData d = bump_data(25, 12.0, 30.0, 1.0); // l(l+1)/r^2 large
    ModeSolution sol = evolve_mode(bg, d, g);
    CHECK(sol.stability_warning);
}

TEST_CASE("checkpoint rows round-trip") {
    Background bg = Background::schwarzschild(1.0, 10.0);
    GridSpec g{0.0, 8.0, 20.0, 52.0, 0.5, 4};
    CharacteristicData d = bump_data(0, 28.0, 44.0, 1.0);
    ModeSolution sol = evolve_mode(bg, d, g);
    const std::string path = "/tmp/tailwave_ckpt_test.twv";
    write_checkpoint(path, sol);
    Checkpoint c = read_checkpoint(path);
    CHECK(c.ell == 0);
    CHECK(c.h == 0.5);
    REQUIRE(static_cast<int>(c.rows.size()) == sol.nu() / 4 + 1);
    for (std::size_t k = 0; k < c.rows.size(); ++k)
        for (int j = 0; j <= sol.nv(); ++j)
            CHECK(c.rows[k][j] == sol.phi(static_cast<int>(k) * 4, j));
}

TEST_CASE("streaming probes agree with the stored evolution") {
    Background bg = Background::schwarzschild(1.0, 10.0);
    GridSpec g{0.0, 12.0, 20.0, 100.0, 0.25, 0};
    CharacteristicData d = bump_data(0, 30.0, 60.0, 1.0);
    ModeSolution sol = evolve_mode(bg, d, g);

    ProbeRequest req;
    req.u_stride = 4;
    ProbeSpec rad{ProbeKind::radiation, "rad", 0, 0, 0, {}, FieldSelector::phi, 0, 2.0};
    ProbeSpec pw{ProbeKind::pointwise, "pw", 15.0, 0, 0, {}, FieldSelector::phi, 0, 2.0};
    ProbeSpec ef{ProbeKind::energy_flux, "ef", 0, 0, 12.0, {}, FieldSelector::phi, 0, 2.0};
    ProbeSpec rp{ProbeKind::rp_flux, "rp", 0, 0, 12.0, {}, FieldSelector::phi, 0, 2.0};
    req.specs = {rad, pw, ef, rp};
    ProbeResult pr = evolve_probed(bg, d, g, req);

    const FluxSeries& rs = pr.series.at("rad");
    for (std::size_t t = 0; t < rs.size(); ++t) {
        const int i = sol.row_of_u(rs.u[t]);
        CHECK(rs.value[t] == sol.phi(i, sol.nv()));
    }
    const FluxSeries& ps = pr.series.at("pw");
    const int dstation = sol.radii.diag_near_radius(15.0);
    for (std::size_t t = 0; t < ps.size(); ++t) {
        const int i = sol.row_of_u(ps.u[t]);
        const int j = dstation + i;
        CHECK(ps.value[t] == doctest::Approx(sol.phi(i, j) / sol.r(i, j)).epsilon(1e-15));
    }
    // rp flux through the probe path matches the ModeSolution path closely
    const FluxSeries& rps = pr.series.at("rp");
    FluxSpec spec;
    spec.field = FieldSelector::phi;
    spec.p = 2.0;
    spec.r_cut_lo = 12.0;
    for (std::size_t t = 0; t < rps.size(); ++t) {
        const double direct = rp_flux(sol, spec, rps.u[t]);
        CHECK(rps.value[t] == doctest::Approx(direct).epsilon(1e-10));
    }
}
