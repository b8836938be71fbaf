#include "tailwave/probes.hpp"

#include "tailwave/errors.hpp"
#include "tailwave/numerics.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

namespace tailwave {

namespace {

// 4th-order dv on a row; margin grows by 2
void dr_row(const Background& bg, const RadiusTable& radii, int i, double h,
            const std::vector<double>& src, std::vector<double>& dst, int& margin) {
    const int nv = static_cast<int>(src.size()) - 1;
    dst.assign(nv + 1, 0.0);
    const double floor = bg.r_plus();
    for (int j = margin + 2; j <= nv - margin - 2; ++j) {
        const double r = radii.r_diag(j - i);
        if (r <= floor || r <= 0.0) continue;
        const double D = bg.d_eval(r, 0);
        if (D <= 0.0) continue;
        const double dv = (src[j - 2] - 8.0 * src[j - 1] + 8.0 * src[j + 1] - src[j + 2]) /
                          (12.0 * h);
        dst[j] = 2.0 / D * dv;
    }
    margin += 2;
}

struct RowField {
    std::vector<double> values;
    int margin = 0;
};

RowField field_row(const Background& bg, const RadiusTable& radii, int i, double h,
                   const std::vector<double>& phi_row, FieldSelector sel, int k) {
    RowField out;
    const int nv = static_cast<int>(phi_row.size()) - 1;
    auto weight = [&](std::vector<double>& f, int margin, auto&& wfn) {
        for (int j = margin; j <= nv - margin; ++j) {
            const double r = radii.r_diag(j - i);
            f[j] = (r > 0.0 ? wfn(r) : 0.0) * f[j];
        }
    };
    switch (sel) {
        case FieldSelector::phi:
            out.values = phi_row;
            out.margin = 0;
            return out;
        case FieldSelector::Phi:
        case FieldSelector::PhiTilde: {
            int m = 0;
            dr_row(bg, radii, i, h, phi_row, out.values, m);
            const double M = bg.mass();
            if (sel == FieldSelector::Phi)
                weight(out.values, m, [](double r) { return r * r; });
            else
                weight(out.values, m, [M](double r) { return r * (r - M); });
            out.margin = m;
            return out;
        }
        case FieldSelector::Phi2: {
            RowField Phi = field_row(bg, radii, i, h, phi_row, FieldSelector::Phi, 0);
            int m = Phi.margin;
            dr_row(bg, radii, i, h, Phi.values, out.values, m);
            weight(out.values, m, [](double r) { return r * r; });
            out.margin = m;
            return out;
        }
        case FieldSelector::dr_k_phi: {
            if (k < 1) throw UnsupportedK("dr_k_phi: k >= 1");
            std::vector<double> cur = phi_row, next;
            int m = 0;
            for (int s = 0; s < k; ++s) {
                dr_row(bg, radii, i, h, cur, next, m);
                cur.swap(next);
            }
            out.values = std::move(cur);
            out.margin = m;
            return out;
        }
        case FieldSelector::dr_k_Phi2: {
            if (k < 1) throw UnsupportedK("dr_k_Phi2: k >= 1");
            RowField p2 = field_row(bg, radii, i, h, phi_row, FieldSelector::Phi2, 0);
            std::vector<double> cur = std::move(p2.values), next;
            int m = p2.margin;
            for (int s = 0; s < k; ++s) {
                dr_row(bg, radii, i, h, cur, next, m);
                cur.swap(next);
            }
            out.values = std::move(cur);
            out.margin = m;
            return out;
        }
    }
    throw DomainError("field_row: unreachable");
}

Extraction extrapolate_decade_row(const RadiusTable& radii, int i, int j_lo, int j_hi,
                                  const std::function<double(int)>& value_at, double weight_m,
                                  double decade, double min_r_max, double r_max_fixed) {
    if (j_hi - j_lo < 8) throw InsufficientRadialRange("np extraction: grid too narrow");
    double r_max = radii.r_diag(j_hi - i);
    if (r_max_fixed > 0.0) {
        if (r_max_fixed > r_max)
            throw InsufficientRadialRange("np extraction: pinned ladder exceeds coverage");
        r_max = r_max_fixed;
    }
    if (r_max < min_r_max)
        throw InsufficientRadialRange("np extraction: outermost radius below required coverage");
    const int nodes = 5;
    std::vector<double> xs, ys;
    int prev_j = -1;
    for (int t = 0; t < nodes; ++t) {
        const double r_t = r_max * std::pow(decade, -static_cast<double>(t) / (nodes - 1));
        int j = radii.diag_near_radius(r_t) + i;
        j = std::min(j, j_hi);
        if (j <= j_lo) throw InsufficientRadialRange("np extraction: decade leaves the grid");
        if (j == prev_j) continue;
        prev_j = j;
        const double r = radii.r_diag(j - i);
        xs.push_back(1.0 / r);
        ys.push_back(std::pow(r, weight_m) * value_at(j));
    }
    if (xs.size() < 3) throw InsufficientRadialRange("np extraction: too few distinct nodes");
    const std::vector<double> diag = extrapolate_to_zero(xs, ys);
    int best = 1;
    double best_step = std::abs(diag[1] - diag[0]);
    for (int d = 2; d < static_cast<int>(diag.size()) && d <= 3; ++d) {
        const double step = std::abs(diag[d] - diag[d - 1]);
        if (step < best_step) { best = d; best_step = step; }
    }
    return {diag[best], best_step};
}

void put_f64_stream(std::ofstream& f, double x) {
    std::uint64_t bits;
    std::memcpy(&bits, &x, 8);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xff);
    f.write(reinterpret_cast<const char*>(b), 8);
}

} // namespace

ProbeResult evolve_probed(const Background& bg, const CharacteristicData& data,
                          const GridSpec& grid, const ProbeRequest& request) {
    grid.validate();
    RadiusTable radii(bg, grid);
    const int nu = radii.nu(), nv = radii.nv();
    const double h = grid.h;
    const double ll1 = static_cast<double>(data.ell) * (data.ell + 1);
    const double np_cov = bg.mass() > 0.0 ? 200.0 * bg.mass() : 10.0 * bg.r_norm();

    ProbeResult out;
    out.min_r = radii.min_r();
    out.max_r = radii.max_r();
    const std::vector<double> coef =
        detail::potential_coefficients(bg, radii, data.ell, h, &out.stability_warning);
    std::vector<double> row0, col0;
    detail::sample_initial_rays(bg, data, grid, radii, row0, col0);

    for (const ProbeSpec& s : request.specs) {
        FluxSeries fs;
        fs.meta["probe"] = s.name;
        fs.extremal_warning = bg.extremal();
        out.series[s.name] = std::move(fs);
    }

    std::ofstream ckpt;
    const bool do_ckpt = !request.checkpoint_path.empty() && grid.checkpoint_stride > 0;
    if (do_ckpt) {
        ckpt.open(request.checkpoint_path, std::ios::binary);
        if (!ckpt) throw Error("cannot open checkpoint file " + request.checkpoint_path);
        ckpt.write("TWV1", 4);
        put_f64_stream(ckpt, static_cast<double>(data.ell));
        put_f64_stream(ckpt, h);
        put_f64_stream(ckpt, grid.u0);
        put_f64_stream(ckpt, grid.u1);
        put_f64_stream(ckpt, grid.v0);
        put_f64_stream(ckpt, grid.v1);
    }

    std::vector<double> prev(nv + 1), cur = row0, next(nv + 1);
    std::vector<double> scratch_psi(nv + 1), scratch_w;

    auto row_local = [&](int i, const std::vector<double>& row) {
        const double uu = grid.u(i);
        for (const ProbeSpec& s : request.specs) {
            FluxSeries& fs = out.series[s.name];
            switch (s.kind) {
                case ProbeKind::pointwise: {
                    if (s.t_order != 0) break;
                    const int d = radii.diag_near_radius(s.r_station);
                    const int j = d + i;
                    if (j < 0 || j > nv) break;
                    fs.push(uu, row[j] / radii.r_diag(d));
                    break;
                }
                case ProbeKind::radiation:
                    fs.push(uu, row[nv]);
                    break;
                case ProbeKind::energy_flux: {
                    int j_lo = std::max(2, radii.first_diag_at_or_above(s.r_lo) + i);
                    int j_hi = nv - 2;
                    if (s.r_hi)
                        while (j_hi > j_lo && radii.r_diag(j_hi - i) > *s.r_hi) --j_hi;
                    if (j_hi - j_lo < 8) break;
                    for (int j = j_lo - 2; j <= j_hi + 2; ++j)
                        scratch_psi[j] = row[j] / radii.r_diag(j - i);
                    scratch_w.assign(j_hi - j_lo + 1, 0.0);
                    for (int j = j_lo; j <= j_hi; ++j) {
                        const double r = radii.r_diag(j - i);
                        const double D = bg.d_eval(r, 0);
                        const double dpsi = (scratch_psi[j - 2] - 8.0 * scratch_psi[j - 1] +
                                             8.0 * scratch_psi[j + 1] - scratch_psi[j + 2]) /
                                            (12.0 * h);
                        scratch_w[j - j_lo] =
                            r * r * dpsi * dpsi + 0.25 * D * ll1 * scratch_psi[j] * scratch_psi[j];
                    }
                    fs.push(uu, simpson_uniform(scratch_w, h));
                    break;
                }
                case ProbeKind::rp_flux: {
                    RowField f = field_row(bg, radii, i, h, row, s.field, s.field_k);
                    std::vector<double> g;
                    int m = f.margin;
                    dr_row(bg, radii, i, h, f.values, g, m);
                    int j_lo = std::max(m, radii.first_diag_at_or_above(s.r_lo) + i);
                    int j_hi = nv - m;
                    if (s.r_hi)
                        while (j_hi > j_lo && radii.r_diag(j_hi - i) > *s.r_hi) --j_hi;
                    if (j_hi - j_lo < 8) break;
                    scratch_w.assign(j_hi - j_lo + 1, 0.0);
                    for (int j = j_lo; j <= j_hi; ++j) {
                        const double r = radii.r_diag(j - i);
                        const double D = bg.d_eval(r, 0);
                        scratch_w[j - j_lo] = std::pow(r, s.p) * g[j] * g[j] * 0.5 * D;
                    }
                    fs.push(uu, simpson_uniform(scratch_w, h));
                    break;
                }
                case ProbeKind::np_constant: {
                    std::vector<double> Phi;
                    int m = 0;
                    dr_row(bg, radii, i, h, row, Phi, m);
                    for (int j = m; j <= nv - m; ++j) {
                        const double r = radii.r_diag(j - i);
                        Phi[j] *= r * r;
                    }
                    try {
                        const Extraction e = extrapolate_decade_row(
                            radii, i, m, nv - m,
                            [&](int j) { return Phi[j]; }, 0.0, 10.0, np_cov,
                            s.r_hi ? *s.r_hi : -1.0);
                        fs.push(uu, e.estimate, e.tolerance);
                    } catch (const InsufficientRadialRange&) {
                        // station has drifted out of coverage; stop sampling
                    }
                    break;
                }
                case ProbeKind::morawetz:
                    break; // needs neighbours; handled in the windowed pass
            }
        }
    };

    auto windowed = [&](int i, const std::vector<double>& pm, const std::vector<double>& pc,
                        const std::vector<double>& pp) {
        const double uu = grid.u(i);
        for (const ProbeSpec& s : request.specs) {
            FluxSeries& fs = out.series[s.name];
            if (s.kind == ProbeKind::pointwise && s.t_order > 0) {
                const int d = radii.diag_near_radius(s.r_station);
                const int j = d + i;
                if (j < 1 || j > nv - 1) continue;
                double val;
                if (s.t_order == 1) {
                    val = (pp[j] - pm[j] + pc[j + 1] - pc[j - 1]) / (2.0 * h);
                } else if (s.t_order == 2) {
                    const double duu = (pp[j] - 2.0 * pc[j] + pm[j]) / (h * h);
                    const double dvv = (pc[j + 1] - 2.0 * pc[j] + pc[j - 1]) / (h * h);
                    const double duv =
                        (pp[j + 1] - pp[j - 1] - pm[j + 1] + pm[j - 1]) / (4.0 * h * h);
                    val = duu + 2.0 * duv + dvv;
                } else {
                    throw UnsupportedK("pointwise probe: t_order must be 0, 1 or 2");
                }
                fs.push(uu, val / radii.r_diag(d));
            } else if (s.kind == ProbeKind::morawetz) {
                int j_lo = std::max(2, radii.first_diag_at_or_above(s.r_lo) + i);
                int j_hi = std::min(nv - 2, radii.first_diag_at_or_above(
                                                s.r_hi ? *s.r_hi : radii.max_r()) + i);
                if (j_hi - j_lo < 8) continue;
                scratch_w.assign(j_hi - j_lo + 1, 0.0);
                for (int j = j_lo; j <= j_hi; ++j) {
                    const double r = radii.r_diag(j - i);
                    const double D = bg.d_eval(r, 0);
                    const double psi = pc[j] / r;
                    const double lpsi = (pc[j + 1] / radii.r_diag(j + 1 - i) -
                                         pc[j - 1] / radii.r_diag(j - 1 - i)) / (2.0 * h);
                    const double lbpsi = (pp[j] / radii.r_diag(j - i - 1) -
                                          pm[j] / radii.r_diag(j - i + 1)) / (2.0 * h);
                    scratch_w[j - j_lo] = r * r * (lpsi * lpsi + lbpsi * lbpsi) +
                                          0.25 * D * (ll1 + 1.0) * psi * psi;
                }
                fs.push(uu, simpson_uniform(scratch_w, h));
            }
        }
    };

    bool any_windowed = false;
    for (const ProbeSpec& s : request.specs)
        if ((s.kind == ProbeKind::pointwise && s.t_order > 0) || s.kind == ProbeKind::morawetz)
            any_windowed = true;

    if (do_ckpt)
        for (int j = 0; j <= nv; ++j) put_f64_stream(ckpt, cur[j]);
    row_local(0, cur);

    for (int i = 1; i <= nu; ++i) {
        next[0] = col0[i];
        const double* c = coef.data() + (nu - i);
        const double* pr = cur.data();
        double* nx = next.data();
        for (int j = 1; j <= nv; ++j) {
            const double sum = pr[j] + nx[j - 1];
            nx[j] = sum - pr[j - 1] - c[j] * sum;
        }
        if (any_windowed && (i - 1) % request.u_stride == 0 && i >= 2)
            windowed(i - 1, prev, cur, next);
        if (i % request.u_stride == 0 || (i == nu && nu % request.u_stride != 0))
            row_local(i, next);
        if (do_ckpt && i % grid.checkpoint_stride == 0)
            for (int j = 0; j <= nv; ++j) put_f64_stream(ckpt, next[j]);
        prev.swap(cur);
        cur.swap(next);
    }
    return out;
}

} // namespace tailwave
