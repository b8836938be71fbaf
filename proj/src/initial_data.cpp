#include "tailwave/initial_data.hpp"

#include "tailwave/errors.hpp"
#include "tailwave/evolve.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>

namespace tailwave {

CharacteristicData bump_data(int ell, double v_lo, double v_hi, double amplitude,
                             BumpProfile profile) {
    if (ell < 0) throw DomainError("bump_data: ell must be >= 0");
    if (!(v_lo < v_hi)) throw BadSupport("bump_data: empty support interval");
    if (!std::isfinite(amplitude)) throw DomainError("bump_data: amplitude must be finite");

    CharacteristicData d;
    d.ell = ell;
    d.family = "bump";
    d.support_v = {v_lo, v_hi};
    d.predicted_I0 = 0.0;
    d.corner_value = 0.0;
    d.meta["profile"] = profile == BumpProfile::polynomial_bump ? "polynomial_bump"
                                                                : "gaussian_truncated";
    const double width = v_hi - v_lo;
    if (profile == BumpProfile::polynomial_bump) {
        d.on_u0 = [=](double v, double, double) {
            if (v <= v_lo || v >= v_hi) return 0.0;
            const double a = v - v_lo, b = v_hi - v;
            const double a2 = a * a, b2 = b * b;
            return amplitude * a2 * a2 * b2 * b2;
        };
    } else {
        // gaussian with a C^2 cubic window, unit window value at the center
        const double vc = 0.5 * (v_lo + v_hi);
        const double sig2 = width * width / 32.0;
        const double wnorm = 64.0 / (width * width * width * width * width * width);
        d.on_u0 = [=](double v, double, double) {
            if (v <= v_lo || v >= v_hi) return 0.0;
            const double a = v - v_lo, b = v_hi - v;
            const double w = wnorm * a * a * a * b * b * b;
            return amplitude * w * std::exp(-(v - vc) * (v - vc) / (2.0 * sig2));
        };
    }
    d.on_v0 = [](double, double, double) { return 0.0; };
    return d;
}

CharacteristicData static_tail_data(const Background& bg, double c0, double r_min_data,
                                    IngoingExtension ingoing) {
    const double floor = bg.r_plus() > 0.0 ? bg.r_plus() : 0.0;
    if (!(r_min_data > floor))
        throw DomainError("static_tail_data: r_min_data must exceed " + std::to_string(floor));

    CharacteristicData d;
    d.ell = 0;
    d.family = "static_tail";
    d.predicted_I0 = c0 * bg.mass();
    d.meta["C0"] = std::to_string(c0);
    d.meta["ingoing"] =
        ingoing == IngoingExtension::static_profile ? "static_profile" : "corner_constant";

    Background bgc = bg; // captured by value; Background is immutable
    // psi(r) = -C0 \int_r^\infty D^{-1} s^{-2} ds. Near the horizon the closed
    // forms lose r - r_plus to rounding, so the log factors are rebuilt from
    // the tortoise value, which the sampler supplies exactly:
    //   schwarzschild: ln(r - 2M) = (r_* - r)/(2M) + ln(R - 2M)
    //   sub-extremal RN: ln(r - r_+) = (r_* - r + b ln(r - r_-) - off) / a
    auto profile = [bgc, c0](double r, double rstar) {
        switch (bgc.kind()) {
            case MetricKind::minkowski:
                return -c0;
            case MetricKind::schwarzschild: {
                const double M = bgc.mass();
                if (r - 2.0 * M > 1e-10 * M) // direct form, no cancellation
                    return -c0 * r / (2.0 * M) * -std::log1p(-2.0 * M / r);
                const double ln_rm2m =
                    (rstar - r) / (2.0 * M) + std::log(bgc.r_norm() - 2.0 * M);
                return -c0 * r / (2.0 * M) * (std::log(r) - ln_rm2m);
            }
            case MetricKind::reissner_nordstrom: {
                if (bgc.extremal()) return -c0 * r * bgc.static_tail_integral(r);
                const double rp = bgc.r_plus(), rm = bgc.r_minus();
                if (r - rp > 1e-10 * rp)
                    return -c0 * r / (rp - rm) * std::log1p((rp - rm) / (r - rp));
                const double a = rp * rp / (rp - rm);
                const double b = rm * rm / (rp - rm);
                const double R = bgc.r_norm();
                const double off = R - (R + a * std::log(R - rp) - b * std::log(R - rm));
                const double ln_rmrp = (rstar - r + b * std::log(r - rm) - off) / a;
                return -c0 * r / (rp - rm) * (std::log(r - rm) - ln_rmrp);
            }
            case MetricKind::custom:
                return -c0 * r * bgc.static_tail_integral(r);
        }
        return 0.0;
    };
    d.on_u0 = [profile](double, double r, double rstar) { return profile(r, rstar); };
    d.on_v0 = [profile](double, double r, double rstar) { return profile(r, rstar); };
    if (ingoing == IngoingExtension::corner_constant) {
        d.family = "static_tail_relaxed";
        d.ingoing_constant_corner = true;
    }
    // corner value is grid dependent through r(u0, v0); the evolver samples it
    // from the profile at the actual corner radius
    d.corner_value = profile(r_min_data, bg.tortoise(r_min_data));
    d.meta["corner"] = "profile";
    return d;
}

CharacteristicData time_derivative_data(const CharacteristicData& base, const ModeSolution& sol) {
    const int nu = sol.nu(), nv = sol.nv();
    if (nu < 2 || nv < 2)
        throw InsufficientMargin("time_derivative_data: solution grid too small for stencils");
    const double h = sol.grid.h;

    // T phi on the inset rays u = u0 + h and v = v0 + h
    auto tphi = [&](int i, int j) {
        return (sol.phi(i + 1, j) - sol.phi(i - 1, j) + sol.phi(i, j + 1) - sol.phi(i, j - 1)) /
               (2.0 * h);
    };
    auto samples_u0 = std::make_shared<std::vector<double>>();
    auto samples_v0 = std::make_shared<std::vector<double>>();
    samples_u0->reserve(nv - 1);
    samples_v0->reserve(nu - 1);
    for (int j = 1; j <= nv - 1; ++j) samples_u0->push_back(tphi(1, j));
    for (int i = 1; i <= nu - 1; ++i) samples_v0->push_back(tphi(i, 1));

    const double new_u0 = sol.grid.u0 + h, new_v0 = sol.grid.v0 + h;
    auto interp = [](const std::vector<double>& s, double x0, double h, double x) {
        const double t = (x - x0) / h;
        const int n = static_cast<int>(s.size());
        if (t <= 0.0) return s.front();
        if (t >= n - 1) return s.back();
        const int k = static_cast<int>(t);
        const double f = t - k;
        return (1.0 - f) * s[k] + f * s[k + 1];
    };

    CharacteristicData d;
    d.ell = base.ell;
    d.family = "t_derivative(" + base.family + ")";
    d.predicted_I0 = 0.0; // I0 of a time derivative always vanishes
    d.u0_hint = new_u0;
    d.v0_hint = new_v0;
    d.on_u0 = [samples_u0, new_v0, h, interp](double v, double, double) {
        return interp(*samples_u0, new_v0, h, v);
    };
    d.on_v0 = [samples_v0, new_u0, h, interp](double u, double, double) {
        return interp(*samples_v0, new_u0, h, u);
    };
    d.corner_value = samples_u0->front();
    return d;
}

CharacteristicData tabulated_data(int ell, const std::string& path) {
    std::ifstream f(path);
    if (!f) throw Error("tabulated_data: cannot open " + path);
    auto vs = std::make_shared<std::vector<double>>();
    auto ps = std::make_shared<std::vector<double>>();
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        double v, p;
        if (ls >> v >> p) {
            if (!vs->empty() && v <= vs->back())
                throw BadSupport("tabulated_data: v column must be strictly increasing");
            vs->push_back(v);
            ps->push_back(p);
        }
    }
    if (vs->size() < 2) throw BadSupport("tabulated_data: need at least two samples");

    CharacteristicData d;
    d.ell = ell;
    d.family = "tabulated";
    d.on_u0 = [vs, ps](double v, double, double) {
        if (v <= vs->front()) return ps->front();
        if (v >= vs->back()) return ps->back();
        const auto it = std::upper_bound(vs->begin(), vs->end(), v);
        const std::size_t k = static_cast<std::size_t>(it - vs->begin()) - 1;
        const double t = (v - (*vs)[k]) / ((*vs)[k + 1] - (*vs)[k]);
        return (1.0 - t) * (*ps)[k] + t * (*ps)[k + 1];
    };
    const double first = ps->front();
    d.on_v0 = [first](double, double, double) { return first; };
    d.corner_value = first;
    return d;
}

CharacteristicData scale_data(const CharacteristicData& d, double a) {
    CharacteristicData out = d;
    auto u0 = d.on_u0, v0 = d.on_v0;
    out.on_u0 = [u0, a](double v, double r, double rs) { return a * u0(v, r, rs); };
    out.on_v0 = [v0, a](double u, double r, double rs) { return a * v0(u, r, rs); };
    out.corner_value = a * d.corner_value;
    if (d.predicted_I0) out.predicted_I0 = a * *d.predicted_I0;
    return out;
}

CharacteristicData add_data(const CharacteristicData& a, const CharacteristicData& b) {
    if (a.ell != b.ell) throw WrongMode("add_data: mode indices differ");
    if (a.ingoing_constant_corner != b.ingoing_constant_corner)
        throw WrongMode("add_data: ingoing-ray conventions differ");
    CharacteristicData out = a;
    auto au = a.on_u0, bu = b.on_u0, av = a.on_v0, bv = b.on_v0;
    out.on_u0 = [au, bu](double v, double r, double rs) { return au(v, r, rs) + bu(v, r, rs); };
    out.on_v0 = [av, bv](double u, double r, double rs) { return av(u, r, rs) + bv(u, r, rs); };
    out.corner_value = a.corner_value + b.corner_value;
    out.family = a.family + "+" + b.family;
    if (a.predicted_I0 && b.predicted_I0) out.predicted_I0 = *a.predicted_I0 + *b.predicted_I0;
    else out.predicted_I0.reset();
    if (a.support_v && b.support_v)
        out.support_v = {std::min(a.support_v->first, b.support_v->first),
                         std::max(a.support_v->second, b.support_v->second)};
    else out.support_v.reset();
    return out;
}

} // namespace tailwave
