#include "tailwave/energy.hpp"

#include "tailwave/errors.hpp"
#include "tailwave/numerics.hpp"

#include <algorithm>
#include <cmath>

namespace tailwave {

namespace {

constexpr double kPi = 3.14159265358979323846;

double mode_norm_factor(ModeNorm n, int ell) {
    // per_mode: orthonormal spherical-harmonic coefficients; sphere_integrated
    // converts a unit-Legendre coefficient to its sphere L^2 value.
    return n == ModeNorm::per_mode ? 1.0 : 4.0 * kPi / (2.0 * ell + 1.0);
}

int snap_index(double lo, double x, double h, const char* what) {
    const double raw = (x - lo) / h;
    const int i = static_cast<int>(std::llround(raw));
    if (std::abs(raw - i) > 1e-6)
        throw DomainError(std::string(what) + " = " + std::to_string(x) + " is not a grid node");
    return i;
}

EquationId equation_for(FieldSelector f) {
    switch (f) {
        case FieldSelector::phi: return EquationId::box_phi;
        case FieldSelector::Phi: return EquationId::box_Phi;
        case FieldSelector::PhiTilde: return EquationId::box_PhiTilde;
        case FieldSelector::Phi2: return EquationId::box_Phi2;
        case FieldSelector::dr_k_phi: return EquationId::box_drk_phi;
        case FieldSelector::dr_k_Phi2: return EquationId::box_drk_Phi2;
    }
    throw DomainError("equation_for: unreachable");
}

} // namespace

double rp_flux(const ModeSolution& sol, const FluxSpec& spec, double u) {
    const double floor = sol.bg.r_plus() > 0.0 ? sol.bg.r_plus() : 0.0;
    if (!(spec.r_cut_lo > floor))
        throw DomainError("rp_flux: r_cut_lo must exceed " + std::to_string(floor));
    const int i = sol.row_of_u(u);
    DerivedField f = derived_field(sol, spec.field, spec.k);
    Array2D g = radial_derivative(sol, f.values, 1, f.margin);
    const int m = f.margin + 2;
    const int nv = sol.nv();
    int j_lo = std::max(m, sol.radii.first_diag_at_or_above(spec.r_cut_lo) + i);
    int j_hi = nv - m;
    if (spec.r_cut_hi) {
        while (j_hi > j_lo && sol.r(i, j_hi) > *spec.r_cut_hi) --j_hi;
    }
    if (j_hi - j_lo < 4)
        throw InsufficientRadialRange("rp_flux: radial cuts leave too few nodes on the cone");
    std::vector<double> w(j_hi - j_lo + 1);
    for (int j = j_lo; j <= j_hi; ++j) {
        const double r = sol.r(i, j);
        const double D = sol.bg.d_eval(r, 0);
        const double gr = g(i, j);
        w[j - j_lo] = std::pow(r, spec.p) * gr * gr * 0.5 * D;
    }
    return mode_norm_factor(spec.mode_norm, sol.ell) * simpson_uniform(w, sol.grid.h);
}

double t_energy_flux(const ModeSolution& sol, Cone cone, double coord,
                     std::optional<double> range_lo, std::optional<double> range_hi) {
    const int nu = sol.nu(), nv = sol.nv();
    const double h = sol.grid.h;
    const double ll1 = static_cast<double>(sol.ell) * (sol.ell + 1);

    if (cone == Cone::outgoing) {
        const int i = sol.row_of_u(coord);
        const int j_lo = range_lo ? std::max(2, snap_index(sol.grid.v0, *range_lo, h, "range_lo"))
                                  : 2;
        const int j_hi = range_hi
                             ? std::min(nv - 2, snap_index(sol.grid.v0, *range_hi, h, "range_hi"))
                             : nv - 2;
        if (j_hi - j_lo < 4)
            throw InsufficientRadialRange("t_energy_flux: cone range has too few nodes");
        std::vector<double> psi(nv + 1, 0.0);
        for (int j = j_lo - 2; j <= j_hi + 2; ++j) {
            const double r = sol.r(i, j);
            psi[j] = r > 0.0 ? sol.phi(i, j) / r : 0.0;
        }
        std::vector<double> w(j_hi - j_lo + 1);
        for (int j = j_lo; j <= j_hi; ++j) {
            const double r = sol.r(i, j);
            if (r <= sol.bg.r_plus() || r <= 0.0) { w[j - j_lo] = 0.0; continue; }
            const double D = sol.bg.d_eval(r, 0);
            const double dpsi =
                (psi[j - 2] - 8.0 * psi[j - 1] + 8.0 * psi[j + 1] - psi[j + 2]) / (12.0 * h);
            w[j - j_lo] = r * r * dpsi * dpsi + 0.25 * D * ll1 * psi[j] * psi[j];
        }
        return simpson_uniform(w, h);
    }

    const int j = snap_index(sol.grid.v0, coord, h, "t_energy_flux v");
    const int i_lo = range_lo ? std::max(2, snap_index(sol.grid.u0, *range_lo, h, "range_lo"))
                              : 2;
    const int i_hi = range_hi
                         ? std::min(nu - 2, snap_index(sol.grid.u0, *range_hi, h, "range_hi"))
                         : nu - 2;
    if (i_hi - i_lo < 4)
        throw InsufficientRadialRange("t_energy_flux: ingoing range has too few nodes");
    std::vector<double> psi(nu + 1, 0.0);
    for (int i = i_lo - 2; i <= i_hi + 2; ++i) {
        const double r = sol.r(i, j);
        psi[i] = r > 0.0 ? sol.phi(i, j) / r : 0.0;
    }
    std::vector<double> w(i_hi - i_lo + 1);
    for (int i = i_lo; i <= i_hi; ++i) {
        const double r = sol.r(i, j);
        if (r <= sol.bg.r_plus() || r <= 0.0) { w[i - i_lo] = 0.0; continue; }
        const double D = sol.bg.d_eval(r, 0);
        const double dpsi =
            (psi[i - 2] - 8.0 * psi[i - 1] + 8.0 * psi[i + 1] - psi[i + 2]) / (12.0 * h);
        w[i - i_lo] = r * r * dpsi * dpsi + 0.25 * D * ll1 * psi[i] * psi[i];
    }
    return simpson_uniform(w, h);
}

double divergence_residual(const ModeSolution& sol, FieldSelector field, int k, double p,
                           const Rect& rect) {
    const double h = sol.grid.h;
    const int i1 = snap_index(sol.grid.u0, rect.u1, h, "rect u1");
    const int i2 = snap_index(sol.grid.u0, rect.u2, h, "rect u2");
    const int j1 = snap_index(sol.grid.v0, rect.v_lo, h, "rect v_lo");
    const int j2 = snap_index(sol.grid.v0, rect.v_hi, h, "rect v_hi");
    if (i2 <= i1 || j2 <= j1) throw DomainError("divergence_residual: empty rectangle");

    DerivedField f = derived_field(sol, field, k);
    Array2D dr_f = radial_derivative(sol, f.values, 1, f.margin);
    Array2D t_f = bondi_time_derivative(sol, f.values, f.margin);
    int rhs_margin = 0;
    Array2D rhs = commuted_equation_rhs(sol, equation_for(field), k, &rhs_margin);
    const int m = std::max({f.margin + 2, f.margin + 1, rhs_margin});
    if (i1 < m || i2 > sol.nu() - m || j1 < m || j2 > sol.nv() - m)
        throw InsufficientMargin("divergence_residual: rectangle too close to the grid edge");

    const double ll1 = static_cast<double>(sol.ell) * (sol.ell + 1);

    // volume integral of (K^V + E^V) dvol, dvol = (D/2) r^2 du dv per mode
    std::vector<double> row_int(i2 - i1 + 1);
    std::vector<double> w(j2 - j1 + 1);
    for (int i = i1; i <= i2; ++i) {
        for (int j = j1; j <= j2; ++j) {
            const double r = sol.r(i, j);
            const double D = sol.bg.d_eval(r, 0);
            const double D1 = sol.bg.d_eval(r, 1);
            const double a = dr_f(i, j), t = t_f(i, j), ff = f.values(i, j);
            const double KV = 0.5 * std::pow(r, p - 3.0) * (D * (p - 4.0) - D1 * r) * a * a +
                              2.0 * std::pow(r, p - 3.0) * a * t +
                              0.5 * (2.0 - p) * ll1 * std::pow(r, p - 5.0) * ff * ff;
            const double EV = std::pow(r, p - 2.0) * a * rhs(i, j);
            w[j - j1] = (KV + EV) * 0.5 * D * r * r;
        }
        row_int[i - i1] = simpson_uniform(w, h);
    }
    const double volume = simpson_uniform(row_int, h);

    // boundary fluxes: r^2 J.L on the cones, r^2 J.Lbar on the ingoing rays
    auto cone_flux = [&](int i) {
        std::vector<double> q(j2 - j1 + 1);
        for (int j = j1; j <= j2; ++j) {
            const double r = sol.r(i, j);
            const double D = sol.bg.d_eval(r, 0);
            const double a = dr_f(i, j);
            q[j - j1] = 0.5 * D * std::pow(r, p) * a * a;
        }
        return simpson_uniform(q, h);
    };
    auto ray_flux = [&](int j) {
        std::vector<double> q(i2 - i1 + 1);
        for (int i = i1; i <= i2; ++i) {
            const double r = sol.r(i, j);
            const double ff = f.values(i, j);
            q[i - i1] = 0.5 * ll1 * std::pow(r, p - 2.0) * ff * ff;
        }
        return simpson_uniform(q, h);
    };
    const double boundary = cone_flux(i1) - cone_flux(i2) + ray_flux(j1) - ray_flux(j2);
    return std::abs(volume - boundary);
}

MorawetzSeries morawetz_timeseries(const ModeSolution& sol, double r_band_lo, double r_band_hi,
                                   int u_stride) {
    if (!(r_band_lo < r_band_hi)) throw DomainError("morawetz: empty band");
    const int nu = sol.nu(), nv = sol.nv();
    const double h = sol.grid.h;
    const double ll1 = static_cast<double>(sol.ell) * (sol.ell + 1);
    MorawetzSeries out;
    out.integrand.meta["kind"] = "morawetz_band";
    out.integrand.extremal_warning = sol.bg.extremal();
    out.cumulative.extremal_warning = sol.bg.extremal();
    double acc = 0.0;
    double prev_u = 0.0, prev_m = 0.0;
    bool have_prev = false;
    for (int i = 1; i <= nu - 1; i += u_stride) {
        int j_lo = std::max(2, sol.radii.first_diag_at_or_above(r_band_lo) + i);
        int j_hi = std::min(nv - 2, sol.radii.first_diag_at_or_above(r_band_hi) + i);
        if (j_hi - j_lo < 4) continue;
        std::vector<double> w(j_hi - j_lo + 1);
        for (int j = j_lo; j <= j_hi; ++j) {
            const double r = sol.r(i, j);
            const double D = sol.bg.d_eval(r, 0);
            const double psi = sol.phi(i, j) / r;
            const double lpsi = (sol.phi(i, j + 1) / sol.r(i, j + 1) -
                                 sol.phi(i, j - 1) / sol.r(i, j - 1)) / (2.0 * h);
            const double lbpsi = (sol.phi(i + 1, j) / sol.r(i + 1, j) -
                                  sol.phi(i - 1, j) / sol.r(i - 1, j)) / (2.0 * h);
            w[j - j_lo] = r * r * (lpsi * lpsi + lbpsi * lbpsi) +
                          0.25 * D * (ll1 + 1.0) * psi * psi;
        }
        const double val = simpson_uniform(w, h);
        const double uu = sol.u(i);
        if (have_prev) acc += 0.5 * (val + prev_m) * (uu - prev_u);
        prev_u = uu;
        prev_m = val;
        have_prev = true;
        out.integrand.push(uu, val);
        out.cumulative.push(uu, acc);
    }
    return out;
}

InequalityCheck hardy_check(const std::vector<double>& r, const std::vector<double>& f,
                            double q) {
    if (r.size() != f.size() || r.size() < 8) throw DomainError("hardy_check: bad table");
    if (q == -1.0) throw HypothesisViolated("hardy_check: q = -1 excluded");
    const double h = r[1] - r[0];
    const int n = static_cast<int>(r.size());
    double fmax = 0.0;
    for (double x : f) fmax = std::max(fmax, std::abs(x));
    if (std::abs(f[0]) > 1e-12 * std::max(1.0, fmax))
        throw HypothesisViolated("hardy_check: f(r0) != 0");
    const double tail = std::pow(r[n - 1], q + 1.0) * f[n - 1] * f[n - 1];
    std::vector<double> wl(n), wr(n);
    const std::vector<double> df = derivative_table(f, h);
    for (int i = 0; i < n; ++i) {
        wl[i] = std::pow(r[i], q) * f[i] * f[i];
        wr[i] = std::pow(r[i], q + 2.0) * df[i] * df[i];
    }
    InequalityCheck out;
    out.lhs = simpson_uniform(wl, h);
    out.rhs = 4.0 / ((q + 1.0) * (q + 1.0)) * simpson_uniform(wr, h);
    if (std::abs(tail) > 1e-6 * std::max(out.lhs, 1e-300))
        throw HypothesisViolated("hardy_check: r^{q+1} f^2 does not vanish at the far end");
    out.ok = out.lhs <= out.rhs * (1.0 + 1e-8) + 1e-300;
    return out;
}

InequalityCheck poincare_check(const std::map<std::pair<int, int>, double>& coeffs, double r,
                               int L) {
    if (L < 1) throw DomainError("poincare_check: L >= 1 required");
    (void)r; // the r^2 normalization of the gradient cancels the r^-2 weight
    InequalityCheck out;
    for (const auto& [lm, c] : coeffs) {
        const int ell = lm.first;
        const int mm = lm.second;
        if (std::abs(mm) > ell) throw DomainError("poincare_check: |m| <= ell required");
        if (c != 0.0 && ell < L)
            throw SupportViolation("poincare_check: coefficient below the stated L");
        out.lhs += c * c;
        out.rhs += static_cast<double>(ell) * (ell + 1) * c * c;
    }
    out.rhs /= static_cast<double>(L) * (L + 1);
    out.ok = out.lhs <= out.rhs * (1.0 + 1e-12) + 1e-300;
    return out;
}

bool interpolation_check(const std::function<double(double, double)>& f, double R, double p,
                         double q, double eps, const std::vector<double>& taus, double r_max,
                         int n_r) {
    if (taus.empty()) throw DomainError("interpolation_check: need tau samples");
    if (!(eps > 0.0 && eps < 1.0)) throw DomainError("interpolation_check: eps in (0,1)");
    const double h = (r_max - R) / n_r;
    std::vector<double> Sa(taus.size()), Sb(taus.size()), Sc(taus.size());
    std::vector<double> wa(n_r + 1), wb(n_r + 1), wc(n_r + 1);
    for (std::size_t t = 0; t < taus.size(); ++t) {
        for (int i = 0; i <= n_r; ++i) {
            const double r = R + i * h;
            const double v = f(taus[t], r);
            const double v2 = v * v;
            wa[i] = std::pow(r, p - eps) * v2;
            wb[i] = std::pow(r, p + 1.0 - eps) * v2;
            wc[i] = std::pow(r, p) * v2;
        }
        Sa[t] = simpson_uniform(wa, h);
        Sb[t] = simpson_uniform(wb, h);
        Sc[t] = simpson_uniform(wc, h);
    }
    double d1 = 0.0, d2 = 0.0;
    for (std::size_t t = 0; t < taus.size(); ++t) {
        d1 = std::max(d1, Sa[t] * std::pow(1.0 + taus[t], q));
        d2 = std::max(d2, Sb[t] * std::pow(1.0 + taus[t], q - 1.0));
    }
    // hypothesis sanity: normalized series must not trend upward
    auto trending_up = [&](const std::vector<double>& S, double qq) {
        double head = 0.0;
        for (std::size_t t = 0; t < S.size() / 2 + 1; ++t)
            head = std::max(head, S[t] * std::pow(1.0 + taus[t], qq));
        const double last = S.back() * std::pow(1.0 + taus.back(), qq);
        return last > 1.5 * head && last > 1e-14 * (d1 + d2);
    };
    if (trending_up(Sa, q))
        throw HypothesisViolated("interpolation_check: r^{p-eps} hypothesis fails");
    if (trending_up(Sb, q - 1.0))
        throw HypothesisViolated("interpolation_check: r^{p+1-eps} hypothesis fails");

    for (std::size_t t = 0; t < taus.size(); ++t) {
        const double tau = taus[t];
        const double bound = std::pow(tau + R, eps) * d1 * std::pow(1.0 + tau, -q) +
                             std::pow(tau + R, eps - 1.0) * d2 * std::pow(1.0 + tau, -q + 1.0);
        if (Sc[t] > bound * (1.0 + 1e-8)) return false;
    }
    return true;
}

} // namespace tailwave
