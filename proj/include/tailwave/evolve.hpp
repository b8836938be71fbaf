#pragma once

#include "tailwave/array2d.hpp"
#include "tailwave/background.hpp"
#include "tailwave/grid.hpp"
#include "tailwave/initial_data.hpp"

#include <map>
#include <string>
#include <vector>

namespace tailwave {

// The evolved radiation field phi(u_i, v_j) of one mode on the full rectangle,
// with the diagonal radius cache. Immutable after evolve_mode returns.
struct ModeSolution {
    Background bg;
    int ell = 0;
    GridSpec grid;
    Array2D phi;
    RadiusTable radii;
    std::string data_family;
    std::map<std::string, std::string> data_meta;
    bool stability_warning = false;

    double u(int i) const { return grid.u(i); }
    double v(int j) const { return grid.v(j); }
    double r(int i, int j) const { return radii.r(i, j); }
    int nu() const { return radii.nu(); }
    int nv() const { return radii.nv(); }

    // row index of the cone u = value; throws DomainError off the grid
    int row_of_u(double u_value) const;
};

// Second-order diamond integrator: the north corner of each null cell is
// updated from east, west, south with the cell-centered potential
//   phi_N = phi_E + phi_W - phi_S - (h^2/8) D(r_c) V_l(r_c) (phi_E + phi_W),
//   V_l(r) = l(l+1)/r^2 + D'(r)/r.
// Deterministic bit-for-bit for fixed inputs. Sets stability_warning when
// |D V_l| h^2 > 1 somewhere on the grid.
ModeSolution evolve_mode(const Background& bg, const CharacteristicData& data, const GridSpec& grid);

// Solutions at h, h/2, h/4, ... (levels >= 2) for self-convergence studies.
std::vector<ModeSolution> evolve_refined(const Background& bg, const CharacteristicData& data,
                                          const GridSpec& grid, int levels);

// (T^k phi)(u_i, v_j), T phi = du phi|_v + dv phi|_u with centered 2nd-order
// stencils iterated on a shrinking interior; entries within k cells of the
// boundary are zero. Throws InsufficientMargin when the grid is too small.
Array2D t_derivative_field(const ModeSolution& sol, int k);

// Same quantity for a caller-supplied field on the solution's grid.
Array2D t_derivative_of(const ModeSolution& sol, const Array2D& field, int k, int margin);

namespace detail {
// shared between the stored and streaming integrators
std::vector<double> potential_coefficients(const Background& bg, const RadiusTable& radii,
                                           int ell, double h, bool* warn);
void sample_initial_rays(const Background& bg, const CharacteristicData& data,
                         const GridSpec& grid, const RadiusTable& radii,
                         std::vector<double>& row0, std::vector<double>& col0);
} // namespace detail

// Binary checkpoint row dumps: header {magic "TWV1"; ell, h, u0, u1, v0, v1 as
// little-endian 8-byte floats}, then the sampled rows as row-major 8-byte
// floats, one row every checkpoint_stride u-rows starting at u0.
void write_checkpoint(const std::string& path, const ModeSolution& sol);
struct Checkpoint {
    int ell;
    double h, u0, u1, v0, v1;
    std::vector<std::vector<double>> rows;
};
Checkpoint read_checkpoint(const std::string& path);

} // namespace tailwave
