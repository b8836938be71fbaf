#pragma once

#include "tailwave/energy.hpp"
#include "tailwave/series.hpp"

#include <string>
#include <utility>
#include <vector>

namespace tailwave {

// Running log-log slope d ln y / d ln u on a 5-point stencil over log-spaced
// resamples. Throws NonpositiveValues when the series is not positive there.
std::vector<std::pair<double, double>> local_power_index(const FluxSeries& series);

enum class FitModel { pure_power, power_with_offset };

struct Window {
    double lo = 0.0, hi = 0.0;
};

struct PowerLawFit {
    double exponent = 0.0;
    double stderr_ = 0.0;
    Window window;
    std::vector<std::pair<double, double>> lpi_curve;
    FitModel model = FitModel::pure_power;
};

// Least squares in log-log; power_with_offset fits y = A u^s (1 + B/u) with a
// golden-section search over B. Requires >= 8 samples in the window.
PowerLawFit fit_tail(const FluxSeries& series, Window window, FitModel model);

// log2((y_h - y_{h/2}) / (y_{h/2} - y_{h/4})); DegenerateDifferences when the
// increments sit at the roundoff floor or change sign.
double convergence_order(double y_h, double y_h2, double y_h4);

struct SharpnessOptions {
    double p = 2.0;
    double r_cut_lo = 0.0;   // defaults to the tortoise normalization radius
    Window late_window;      // late-u window for the infimum
    int u_stride = 8;
    double infimum_factor = 0.5; // c in the analytic tail threshold c I0^2 (1/R - 1/r_max)
};

struct SharpnessVerdict {
    FluxSeries per_slice;    // u -> rp_flux(u)
    FluxSeries cumulative;   // running u-integral of the per-slice flux
    double i0 = 0.0, i0_tolerance = 0.0;
    double infimum = 0.0;    // per-slice infimum over the late window
    double threshold = 0.0;  // c I0^2 (1/R - 1/r_max) for the I0 != 0 branch
    double cumulative_exponent = 0.0; // growth of the cumulative integral
    std::string verdict;     // "non_integrable" | "integrable_trend"
};

// Per-slice r^p flux series of dr phi with the late-window infimum and the
// cumulative-growth fit backing the verdict. ell = 0 only; throws
// I0Unresolved when the extraction tolerance exceeds 10% of |I0| while the
// branch is ambiguous.
SharpnessVerdict sharpness_scan(const ModeSolution& sol, const SharpnessOptions& opt);

struct Measurable {
    std::string name;
    std::string tag;       // free-form label written to the theorem_ref column
    FluxSeries fine;       // finer grid level
    FluxSeries coarse;     // optional coarser level (empty -> single level)
    Window window;
    FitModel model = FitModel::power_with_offset;
    double band_lo = 0.0, band_hi = 0.0;
};

struct ReportRow {
    std::string name, tag;
    double exponent = 0.0, stderr_ = 0.0;
    double exponent_coarse = 0.0;
    double band_lo = 0.0, band_hi = 0.0;
    std::string verdict; // PASS | FAIL | vacuum-cleared
};

struct Report {
    std::vector<ReportRow> rows;
    bool all_pass = true;
};

// One fitted exponent per measurable with a PASS/FAIL verdict against the
// configured band; a PASS requires the band to hold at both grid levels. A
// window whose values sit at the vacuum floor reports "vacuum-cleared"
// instead of an exponent.
Report decay_report(const std::vector<Measurable>& measurables);

} // namespace tailwave
