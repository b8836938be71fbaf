#include "tailwave/analysis.hpp"

#include "tailwave/errors.hpp"
#include "tailwave/fields.hpp"
#include "tailwave/numerics.hpp"

#include <algorithm>
#include <cmath>

namespace tailwave {

std::vector<std::pair<double, double>> local_power_index(const FluxSeries& series) {
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < series.size(); ++i) {
        if (series.u[i] <= 0.0) continue;
        if (!(series.value[i] > 0.0))
            throw NonpositiveValues("local_power_index: series must be positive");
        xs.push_back(std::log(series.u[i]));
        ys.push_back(std::log(series.value[i]));
    }
    if (xs.size() < 6) throw InsufficientPoints("local_power_index: too few usable samples");

    // resample uniformly in log u (linear interpolation)
    const int n = std::min<int>(200, static_cast<int>(xs.size()));
    const double x0 = xs.front(), x1 = xs.back();
    const double dx = (x1 - x0) / (n - 1);
    std::vector<double> ry(n);
    std::size_t k = 0;
    for (int i = 0; i < n; ++i) {
        const double x = x0 + i * dx;
        while (k + 2 < xs.size() && xs[k + 1] < x) ++k;
        const double t = (x - xs[k]) / (xs[k + 1] - xs[k]);
        ry[i] = (1.0 - t) * ys[k] + t * ys[k + 1];
    }
    std::vector<std::pair<double, double>> out;
    for (int i = 2; i < n - 2; ++i) {
        const double slope =
            (ry[i - 2] - 8.0 * ry[i - 1] + 8.0 * ry[i + 1] - ry[i + 2]) / (12.0 * dx);
        out.emplace_back(std::exp(x0 + i * dx), slope);
    }
    return out;
}

namespace {

double offset_fit_ssr(const std::vector<double>& u, const std::vector<double>& logy, double B,
                      double* slope_out, double* stderr_out) {
    std::vector<double> x(u.size()), y(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        x[i] = std::log(u[i]);
        y[i] = logy[i] - std::log1p(B / u[i]);
    }
    const LineFit lf = fit_line(x, y);
    if (slope_out) *slope_out = lf.slope;
    if (stderr_out) *stderr_out = lf.slope_stderr;
    double ss = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double r = y[i] - (lf.intercept + lf.slope * x[i]);
        ss += r * r;
    }
    return ss;
}

} // namespace

PowerLawFit fit_tail(const FluxSeries& series, Window window, FitModel model) {
    std::vector<double> u, logy;
    for (std::size_t i = 0; i < series.size(); ++i) {
        if (series.u[i] < window.lo || series.u[i] > window.hi) continue;
        if (series.u[i] <= 0.0) continue;
        const double a = std::abs(series.value[i]);
        if (a == 0.0) throw NonpositiveValues("fit_tail: zero value inside the fit window");
        u.push_back(series.u[i]);
        logy.push_back(std::log(a));
    }
    if (u.size() < 8) throw InsufficientPoints("fit_tail: need at least 8 points in the window");

    PowerLawFit fit;
    fit.window = window;
    fit.model = model;
    if (model == FitModel::pure_power) {
        std::vector<double> x(u.size());
        for (std::size_t i = 0; i < u.size(); ++i) x[i] = std::log(u[i]);
        const LineFit lf = fit_line(x, logy);
        fit.exponent = lf.slope;
        fit.stderr_ = lf.slope_stderr;
    } else {
        // golden-section over the offset B in y = A u^s (1 + B/u)
        const double umin = *std::min_element(u.begin(), u.end());
        double lo = -0.60 * umin, hi = 3.0 * umin;
        const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
        double b1 = hi - gr * (hi - lo), b2 = lo + gr * (hi - lo);
        double f1 = offset_fit_ssr(u, logy, b1, nullptr, nullptr);
        double f2 = offset_fit_ssr(u, logy, b2, nullptr, nullptr);
        for (int it = 0; it < 80; ++it) {
            if (f1 < f2) {
                hi = b2; b2 = b1; f2 = f1;
                b1 = hi - gr * (hi - lo);
                f1 = offset_fit_ssr(u, logy, b1, nullptr, nullptr);
            } else {
                lo = b1; b1 = b2; f1 = f2;
                b2 = lo + gr * (hi - lo);
                f2 = offset_fit_ssr(u, logy, b2, nullptr, nullptr);
            }
        }
        offset_fit_ssr(u, logy, 0.5 * (b1 + b2), &fit.exponent, &fit.stderr_);
    }
    bool positive = true;
    for (std::size_t i = 0; i < series.size(); ++i)
        if (series.u[i] >= window.lo && series.u[i] <= window.hi && !(series.value[i] > 0.0))
            positive = false;
    if (positive) {
        try {
            auto lpi = local_power_index(series.window(window.lo, window.hi));
            fit.lpi_curve = std::move(lpi);
        } catch (const Error&) {
            // lpi curve is advisory; the fit stands on its own
        }
    }
    return fit;
}

double convergence_order(double y_h, double y_h2, double y_h4) {
    const double d1 = y_h - y_h2;
    const double d2 = y_h2 - y_h4;
    const double scale = std::max({std::abs(y_h), std::abs(y_h2), std::abs(y_h4), 1e-300});
    if (std::abs(d1) < 1e3 * 2.2e-16 * scale || std::abs(d2) < 1e3 * 2.2e-16 * scale)
        throw DegenerateDifferences("convergence_order: increments at the roundoff floor");
    const double ratio = d1 / d2;
    if (ratio <= 0.0)
        throw DegenerateDifferences("convergence_order: non-monotone refinement differences");
    return std::log2(ratio);
}

SharpnessVerdict sharpness_scan(const ModeSolution& sol, const SharpnessOptions& opt) {
    if (sol.ell != 0) throw WrongMode("sharpness_scan: ell = 0 required");
    SharpnessVerdict out;

    const Extraction i0 = extract_np_constant(sol, sol.grid.u0);
    out.i0 = i0.estimate;
    out.i0_tolerance = i0.tolerance;
    const bool zero_branch = std::abs(i0.estimate) <= 10.0 * i0.tolerance;
    if (!zero_branch && i0.tolerance > 0.1 * std::abs(i0.estimate))
        throw I0Unresolved("sharpness_scan: I0 tolerance exceeds 10% of the estimate");

    FluxSpec spec;
    spec.field = FieldSelector::phi;
    spec.p = opt.p;
    spec.r_cut_lo = opt.r_cut_lo > 0.0 ? opt.r_cut_lo : sol.bg.r_norm();

    const int nu = sol.nu();
    double acc = 0.0;
    bool have_prev = false;
    double prev_u = 0.0, prev_f = 0.0;
    double r_max_late = 0.0;
    for (int i = 0; i <= nu; i += opt.u_stride) {
        const double uu = sol.u(i);
        double fval;
        try {
            fval = rp_flux(sol, spec, uu);
        } catch (const InsufficientRadialRange&) {
            break; // cone no longer covers the cut region
        }
        if (have_prev) acc += 0.5 * (fval + prev_f) * (uu - prev_u);
        prev_u = uu;
        prev_f = fval;
        have_prev = true;
        out.per_slice.push(uu, fval);
        out.cumulative.push(uu, acc);
        if (uu >= opt.late_window.lo && uu <= opt.late_window.hi)
            r_max_late = r_max_late == 0.0 ? sol.r(i, sol.nv() - 4) : std::min(r_max_late, sol.r(i, sol.nv() - 4));
    }
    out.per_slice.meta["p"] = std::to_string(opt.p);
    out.per_slice.meta["field"] = "phi";
    out.per_slice.meta["r_cut_lo"] = std::to_string(spec.r_cut_lo);

    double inf = 0.0;
    bool first = true;
    for (std::size_t t = 0; t < out.per_slice.size(); ++t) {
        const double uu = out.per_slice.u[t];
        if (uu < opt.late_window.lo || uu > opt.late_window.hi) continue;
        if (first || out.per_slice.value[t] < inf) inf = out.per_slice.value[t];
        first = false;
    }
    out.infimum = inf;
    out.threshold = opt.infimum_factor * i0.estimate * i0.estimate *
                    (1.0 / spec.r_cut_lo - (r_max_late > 0.0 ? 1.0 / r_max_late : 0.0));

    try {
        PowerLawFit cfit = fit_tail(out.cumulative, opt.late_window, FitModel::pure_power);
        out.cumulative_exponent = cfit.exponent;
    } catch (const Error&) {
        out.cumulative_exponent = 0.0;
    }

    if (!zero_branch) {
        out.verdict = (inf >= out.threshold) ? "non_integrable" : "integrable_trend";
    } else {
        out.verdict = (out.cumulative_exponent >= 0.9) ? "non_integrable" : "integrable_trend";
    }
    return out;
}

Report decay_report(const std::vector<Measurable>& measurables) {
    Report rep;
    for (const Measurable& m : measurables) {
        ReportRow row;
        row.name = m.name;
        row.tag = m.tag;
        row.band_lo = m.band_lo;
        row.band_hi = m.band_hi;
        if (m.fine.size() == 0) throw MissingSeries("decay_report: series missing for " + m.name);

        // vacuum floor: the window carries no signal at all
        double wmax = 0.0, gmax = 0.0;
        for (std::size_t i = 0; i < m.fine.size(); ++i) {
            gmax = std::max(gmax, std::abs(m.fine.value[i]));
            if (m.fine.u[i] >= m.window.lo && m.fine.u[i] <= m.window.hi)
                wmax = std::max(wmax, std::abs(m.fine.value[i]));
        }
        if (wmax == 0.0 || wmax < 1e-250 || (gmax > 0.0 && wmax < 1e-200 * gmax)) {
            row.verdict = "vacuum-cleared";
            rep.rows.push_back(row);
            continue;
        }

        const PowerLawFit fit = fit_tail(m.fine, m.window, m.model);
        row.exponent = fit.exponent;
        row.stderr_ = fit.stderr_;
        bool pass = fit.exponent >= m.band_lo && fit.exponent <= m.band_hi;
        if (m.coarse.size() > 0) {
            const PowerLawFit cfit = fit_tail(m.coarse, m.window, m.model);
            row.exponent_coarse = cfit.exponent;
            pass = pass && cfit.exponent >= m.band_lo && cfit.exponent <= m.band_hi;
        } else {
            row.exponent_coarse = fit.exponent;
        }
        row.verdict = pass ? "PASS" : "FAIL";
        if (!pass) rep.all_pass = false;
        rep.rows.push_back(row);
    }
    return rep;
}

} // namespace tailwave
