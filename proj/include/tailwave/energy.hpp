#pragma once

#include "tailwave/evolve.hpp"
#include "tailwave/fields.hpp"
#include "tailwave/series.hpp"

#include <map>
#include <optional>
#include <utility>
#include <vector>

namespace tailwave {

enum class ModeNorm { per_mode, sphere_integrated };

struct FluxSpec {
    FieldSelector field = FieldSelector::phi;
    int k = 0;             // for the dr_k selectors
    double p = 2.0;        // radial weight exponent
    double r_cut_lo = 0.0; // the hierarchy cut R; must exceed r_plus
    std::optional<double> r_cut_hi; // grid edge when absent
    ModeNorm mode_norm = ModeNorm::per_mode;
};

// \int r^p (dr field)^2 dr over the cone u = const restricted to the radial
// cuts (dr = (D/2) dv, composite Simpson with trapezoid end cells; cuts snap
// to grid nodes).
double rp_flux(const ModeSolution& sol, const FluxSpec& spec, double u);

enum class Cone { outgoing, ingoing };

// Per-mode T-energy flux: the outgoing cone u = coord integrates
// r^2 (L psi)^2 + (D/4) l(l+1) psi^2 over v in [range_lo, range_hi],
// psi = phi / r; the ingoing ray v = coord integrates the Lbar analogue over
// u. The range is the coordinate interval along the cone (node-snapped);
// defaults cover the stencil-valid extent.
double t_energy_flux(const ModeSolution& sol, Cone cone, double coord,
                     std::optional<double> range_lo = {}, std::optional<double> range_hi = {});

// | volume integral of K^V + E^V  -  net boundary flux | for the multiplier
// V = r^{p-2} dr applied to the selected commuted field on the sub-rectangle
// [u1,u2] x [v_lo,v_hi] (node-snapped). E^V pairs the multiplier with the
// matching commuted-equation right-hand side.
struct Rect {
    double u1, u2, v_lo, v_hi;
};
double divergence_residual(const ModeSolution& sol, FieldSelector field, int k, double p,
                           const Rect& rect);

struct MorawetzSeries {
    FluxSeries integrand;  // per-u band energy
    FluxSeries cumulative; // running u-integral
};
MorawetzSeries morawetz_timeseries(const ModeSolution& sol, double r_band_lo, double r_band_hi,
                                   int u_stride = 1);

struct InequalityCheck {
    double lhs = 0.0;
    double rhs = 0.0;
    bool ok = false;
};

// \int r^q f^2 <= 4/(q+1)^2 \int r^{q+2} (f')^2 on a uniform table of f;
// boundary and decay hypotheses are checked first.
InequalityCheck hardy_check(const std::vector<double>& r, const std::vector<double>& f, double q);

// Coefficient-space Poincare comparison for modes supported on ell >= L.
InequalityCheck poincare_check(const std::map<std::pair<int, int>, double>& coeffs, double r,
                               int L);

// Interpolation bound: given f(tau, r) whose r^{p-eps} and r^{p+1-eps}
// weighted integrals decay like (1+tau)^{-q} and (1+tau)^{-q+1}, the r^p
// integral obeys the split bound
//   (tau+R)^eps D1 (1+tau)^{-q} + (tau+R)^{eps-1} D2 (1+tau)^{-q+1}.
// Throws HypothesisViolated when the hypothesis fits fail.
bool interpolation_check(const std::function<double(double, double)>& f, double R, double p,
                         double q, double eps, const std::vector<double>& taus, double r_max,
                         int n_r = 2000);

} // namespace tailwave
