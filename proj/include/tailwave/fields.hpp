#pragma once

#include "tailwave/array2d.hpp"
#include "tailwave/evolve.hpp"

#include <string>
#include <vector>

namespace tailwave {

// phi, Phi = r^2 dr phi, PhiTilde = r (r - M) dr phi, Phi2 = r^2 dr Phi, and
// the dr^k iterates of phi and Phi2.
enum class FieldSelector { phi, Phi, PhiTilde, Phi2, dr_k_phi, dr_k_Phi2 };

std::string to_string(FieldSelector s);
FieldSelector field_selector_from_string(const std::string& s);

struct DerivedField {
    FieldSelector selector = FieldSelector::phi;
    int k = 0;
    Array2D values;
    int margin = 0; // valid nodes: margin <= i <= nu-margin, same in j
};

// dr^order via iterated dr = 2 D^{-1} dv at fixed u with 4th-order centered
// v-stencils. Adds 2 to the margin per application. Entries where D <= 0 are
// left zero (inside any radial cut the callers apply).
Array2D radial_derivative(const ModeSolution& sol, const Array2D& field, int order,
                          int margin_in = 0);

DerivedField derived_field(const ModeSolution& sol, FieldSelector sel, int k = 0);

// T = du|_r applied through the double-null chart: T f = du f|_v + dv f|_u.
Array2D bondi_time_derivative(const ModeSolution& sol, const Array2D& field, int margin_in);

struct Extraction {
    double estimate = 0.0;
    double tolerance = 0.0;
};

// Limit r -> infinity of r^2 dr phi on the cone u = const (ell = 0 only):
// Richardson tableau in 1/r over the outermost decade of radii; the
// polynomial degree (1..3) with the smallest last step wins and the spread of
// the last two extrapolants is reported as the tolerance. A positive
// r_max_fixed pins the top of the extrapolation ladder (so different cones
// share radial nodes and their extrapolation residuals cancel in
// differences); the default uses the cone's outermost covered radius.
Extraction extract_np_constant(const ModeSolution& sol, double u, double decade = 10.0,
                               double r_max_fixed = -1.0);

// max over samples of |I0(u) - I0(u0)|, extracted on shared radial nodes
double check_np_conservation(const ModeSolution& sol, const std::vector<double>& u_samples);

// Limit of r^2 dr PhiTilde for the ell = 1 mode.
Extraction extract_second_np(const ModeSolution& sol, double u, double decade = 10.0);

// Outermost-decade extrapolation of r^m * field on the cone u = const. The
// admissible (selector, m) combinations are pinned in a validated table;
// anything else throws DomainError.
Extraction scri_limit(const ModeSolution& sol, const DerivedField& field, double weight_m,
                      double u, double decade = 10.0);

enum class EquationId { box_phi, box_Phi, box_PhiTilde, box_Phi2, box_drk_phi, box_drk_Phi2 };

std::string to_string(EquationId id);

// Discretizes both sides of the named wave-operator identity on the evolved
// solution (mode form: angular laplacian -> -l(l+1)/r^2) and returns the
// interior max of |LHS - RHS| r^2 over a quarter-inset window with
// r in [r_min_norm, r_max_norm] (defaults: the tortoise normalization radius
// and four times it; the cap keeps the roundoff amplification of the nested
// radial stencils on r^4-growing fields out of the norm). k selects the
// dr-iterate for the box_drk_* families.
double commutator_residual(const ModeSolution& sol, EquationId eq, int k = 0,
                           double r_min_norm = -1.0, double r_max_norm = -1.0);

// RHS of the named identity as a field array (used by the energy module's
// divergence residuals); margin returned through out_margin.
Array2D commuted_equation_rhs(const ModeSolution& sol, EquationId eq, int k, int* out_margin);

// Base field the equation refers to, with its margin.
DerivedField equation_field(const ModeSolution& sol, EquationId eq, int k);

} // namespace tailwave
