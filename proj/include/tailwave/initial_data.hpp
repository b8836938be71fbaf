#pragma once

#include "tailwave/background.hpp"

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>

namespace tailwave {

struct ModeSolution; // evolve.hpp

// Characteristic data for one mode on the two initial null rays of the
// evolution rectangle. Profiles are callables (coordinate, r, r_*) -> phi so
// that one data object can be sampled onto any compatible grid; the evolver
// supplies the cached radius and tortoise value. Carrying r_* lets profiles
// stay finite arbitrarily close to the horizon, where r - r_plus underflows.
struct CharacteristicData {
    int ell = 0;
    std::function<double(double v, double r, double rstar)> on_u0; // outgoing ray u = u0
    std::function<double(double u, double r, double rstar)> on_v0; // ingoing ray v = v0
    double corner_value = 0.0;
    std::optional<double> predicted_I0;
    std::optional<std::pair<double, double>> support_v; // compact support on {u = u0}
    std::string family;
    std::map<std::string, std::string> meta;
    // natural rectangle for data sampled off an existing solution
    std::optional<double> u0_hint, v0_hint;
    // ingoing ray held at the sampled corner value (on_v0 is then ignored)
    bool ingoing_constant_corner = false;
};

enum class BumpProfile { polynomial_bump, gaussian_truncated };

// phi(u0, v) = a (v - v_lo)^4 (v_hi - v)^4 on [v_lo, v_hi] (or the C^2
// windowed gaussian), zero ingoing data. predicted_I0 = 0.
CharacteristicData bump_data(int ell, double v_lo, double v_hi, double amplitude,
                             BumpProfile profile = BumpProfile::polynomial_bump);

enum class IngoingExtension {
    static_profile, // same radial profile: the exact static solution
    corner_constant // phi(., v0) = corner value: static far field, relaxing interior
};

// psi(u0, r) = -C0 \int_r^\infty D^{-1} s^{-2} ds, phi = r psi on the outgoing
// ray; ingoing ray per `ingoing`. ell = 0 only. predicted_I0 = C0 M.
CharacteristicData static_tail_data(const Background& bg, double c0, double r_min_data,
                                    IngoingExtension ingoing = IngoingExtension::static_profile);

// Data for T phi sampled from an evolved solution with centered stencils on
// the one-cell-inset rays (u0 + h, v0 + h). Throws InsufficientMargin.
CharacteristicData time_derivative_data(const CharacteristicData& base, const ModeSolution& sol);

// Two-column numeric text file (v, phi) with linear interpolation onto the
// grid; ingoing ray constant at the first sample.
CharacteristicData tabulated_data(int ell, const std::string& path);

CharacteristicData scale_data(const CharacteristicData& d, double a);
CharacteristicData add_data(const CharacteristicData& a, const CharacteristicData& b);

} // namespace tailwave
