#pragma once

#include "tailwave/evolve.hpp"
#include "tailwave/fields.hpp"
#include "tailwave/series.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace tailwave {

// Streaming measurement requests evaluated while the evolution marches in u,
// holding only a three-row window of the field. Memory stays O(nv) however
// long the rectangle is, and the field values match evolve_mode bit for bit.
enum class ProbeKind {
    pointwise,   // psi (or T^k psi) at a fixed-radius station
    radiation,   // phi on the outermost cone v = v1
    energy_flux, // T-energy flux through the truncated cone, r >= r_lo
    rp_flux,     // r^p-weighted flux of dr(field), r in [r_lo, r_hi]
    np_constant, // I0(u) extraction (tolerance lands in rich_err)
    morawetz     // band energy in r in [r_lo, r_hi]
};

struct ProbeSpec {
    ProbeKind kind = ProbeKind::pointwise;
    std::string name;
    double r_station = 0.0; // pointwise
    int t_order = 0;        // pointwise: 0, 1 or 2
    double r_lo = 0.0;
    std::optional<double> r_hi;
    FieldSelector field = FieldSelector::phi; // rp_flux
    int field_k = 0;
    double p = 2.0; // rp_flux
};

struct ProbeRequest {
    int u_stride = 8; // sample every u_stride rows
    std::vector<ProbeSpec> specs;
    std::string checkpoint_path; // write row dumps when set and stride > 0
};

struct ProbeResult {
    std::map<std::string, FluxSeries> series;
    bool stability_warning = false;
    double min_r = 0.0, max_r = 0.0;
};

ProbeResult evolve_probed(const Background& bg, const CharacteristicData& data,
                          const GridSpec& grid, const ProbeRequest& request);

} // namespace tailwave
