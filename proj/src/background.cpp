#include "tailwave/background.hpp"

#include "tailwave/errors.hpp"
#include "tailwave/numerics.hpp"

#include <cmath>
#include <limits>

namespace tailwave {

std::string to_string(MetricKind k) {
    switch (k) {
        case MetricKind::minkowski: return "minkowski";
        case MetricKind::schwarzschild: return "schwarzschild";
        case MetricKind::reissner_nordstrom: return "reissner_nordstrom";
        case MetricKind::custom: return "custom";
    }
    return "?";
}

Background Background::minkowski(double r_norm) {
    Background bg;
    bg.kind_ = MetricKind::minkowski;
    bg.r_norm_ = r_norm;
    return bg;
}

Background Background::schwarzschild(double mass, double r_norm) {
    if (mass <= 0.0) throw DomainError("schwarzschild: mass must be positive");
    Background bg;
    bg.kind_ = MetricKind::schwarzschild;
    bg.mass_ = mass;
    bg.r_plus_ = 2.0 * mass;
    bg.r_norm_ = r_norm;
    if (r_norm <= bg.r_plus_) throw DomainError("schwarzschild: r_norm must exceed the horizon");
    bg.tortoise_offset_ = 0.0;
    bg.tortoise_offset_ = r_norm - bg.tortoise_unchecked(r_norm);
    return bg;
}

Background Background::reissner_nordstrom(double mass, double charge, double r_norm) {
    if (mass <= 0.0) throw DomainError("reissner_nordstrom: mass must be positive");
    if (std::abs(charge) > mass)
        throw DomainError("reissner_nordstrom: |e| <= M required (super-extremal rejected)");
    Background bg;
    bg.kind_ = MetricKind::reissner_nordstrom;
    bg.mass_ = mass;
    bg.charge_ = charge;
    const double disc = std::sqrt(mass * mass - charge * charge);
    bg.r_plus_ = mass + disc;
    bg.r_minus_ = mass - disc;
    bg.extremal_ = (disc == 0.0);
    bg.r_norm_ = r_norm;
    if (r_norm <= bg.r_plus_) throw DomainError("reissner_nordstrom: r_norm must exceed the horizon");
    bg.tortoise_offset_ = 0.0;
    bg.tortoise_offset_ = r_norm - bg.tortoise_unchecked(r_norm);
    return bg;
}

Background Background::custom(std::function<double(double, int)> d_fn, double r_plus,
                              double mass, double r_norm) {
    if (!d_fn) throw DomainError("custom: D callable required");
    Background bg;
    bg.kind_ = MetricKind::custom;
    bg.custom_ = std::move(d_fn);
    bg.mass_ = mass;
    bg.r_plus_ = r_plus;
    bg.r_norm_ = r_norm;
    if (r_norm <= r_plus) throw DomainError("custom: r_norm must exceed r_plus");
    bg.tortoise_offset_ = 0.0; // custom tortoise integrates from r_norm directly
    return bg;
}

double Background::d_eval(double r, int order) const {
    switch (kind_) {
        case MetricKind::minkowski:
            return order == 0 ? 1.0 : 0.0;
        case MetricKind::schwarzschild: {
            const double M = mass_;
            switch (order) {
                case 0: return 1.0 - 2.0 * M / r;
                case 1: return 2.0 * M / (r * r);
                case 2: return -4.0 * M / (r * r * r);
                default: return 12.0 * M / (r * r * r * r);
            }
        }
        case MetricKind::reissner_nordstrom: {
            const double M = mass_, e2 = charge_ * charge_;
            switch (order) {
                case 0: return 1.0 - 2.0 * M / r + e2 / (r * r);
                case 1: return 2.0 * M / (r * r) - 2.0 * e2 / (r * r * r);
                case 2: return -4.0 * M / (r * r * r) + 6.0 * e2 / (r * r * r * r);
                default: return 12.0 * M / (r * r * r * r) - 24.0 * e2 / (r * r * r * r * r);
            }
        }
        case MetricKind::custom:
            return custom_(r, order);
    }
    return 0.0;
}

double Background::D(double r, int order) const {
    if (order < 0 || order > 3)
        throw UnsupportedOrder("metric D: derivative order must be in 0..3, got " + std::to_string(order));
    // the closed horizon boundary is admitted so that D(r_plus) = 0 is exact
    if (r_plus_ > 0.0 ? !(r >= r_plus_) : !(r > 0.0))
        throw DomainError("metric D: r = " + std::to_string(r) + " outside the exterior");
    return d_eval(r, order);
}

double Background::horizon_radius() const {
    if (kind_ == MetricKind::minkowski) return 0.0;
    if (kind_ == MetricKind::custom && r_plus_ <= 0.0)
        throw NoHorizon("horizon_radius: D has no root for this family");
    return r_plus_;
}

double Background::tortoise_unchecked(double r) const {
    switch (kind_) {
        case MetricKind::minkowski:
            return r + tortoise_offset_;
        case MetricKind::schwarzschild:
            return r + 2.0 * mass_ * std::log(r - 2.0 * mass_) + tortoise_offset_;
        case MetricKind::reissner_nordstrom: {
            if (extremal_) {
                const double M = mass_;
                return r + 2.0 * M * std::log(r - M) - M * M / (r - M) + tortoise_offset_;
            }
            const double a = r_plus_ * r_plus_ / (r_plus_ - r_minus_);
            const double b = r_minus_ * r_minus_ / (r_plus_ - r_minus_);
            return r + a * std::log(r - r_plus_) - b * std::log(r - r_minus_) + tortoise_offset_;
        }
        case MetricKind::custom: {
            // r_*(r) = r_norm + \int_{r_norm}^r ds / D(s)
            const double lo = std::min(r, r_norm_), hi = std::max(r, r_norm_);
            const double val = adaptive_simpson([this](double s) { return 1.0 / custom_(s, 0); },
                                                lo, hi, 1e-12, 60);
            return r_norm_ + (r >= r_norm_ ? val : -val);
        }
    }
    return 0.0;
}

double Background::tortoise(double r) const {
    const double floor = (r_plus_ > 0.0) ? r_plus_ : 0.0;
    if (!(r > floor)) throw DomainError("tortoise: r must exceed " + std::to_string(floor));
    return tortoise_unchecked(r);
}

namespace {

// Newton iteration in y with monotone g; bisection fallback on a bracket that
// is expanded geometrically until it straddles the root.
double solve_monotone(const std::function<double(double)>& g,
                      const std::function<double(double)>& gp, double y0,
                      const char* what) {
    double y = y0;
    double lo = std::numeric_limits<double>::quiet_NaN();
    double hi = std::numeric_limits<double>::quiet_NaN();
    // bracket by geometric expansion around y0
    {
        double step = 1.0;
        double a = y0, b = y0;
        double ga = g(a), gb = g(b);
        int it = 0;
        while (ga > 0.0 && it++ < 2200) { a -= step; step *= 2.0; ga = g(a); }
        step = 1.0;
        it = 0;
        while (gb < 0.0 && it++ < 2200) { b += step; step *= 2.0; gb = g(b); }
        if (ga > 0.0 || gb < 0.0)
            throw Nonconvergence(std::string(what) + ": failed to bracket root");
        lo = a; hi = b;
        y = 0.5 * (a + b);
    }
    for (int it = 0; it < 400; ++it) {
        const double gy = g(y);
        if (gy > 0.0) hi = y; else lo = y;
        const double dy = gy / gp(y);
        double ynext = y - dy;
        // alternate with bisection so slow Newton creep cannot stall progress
        if ((it & 1) || !(ynext > lo && ynext < hi)) ynext = 0.5 * (lo + hi);
        if (std::abs(ynext - y) <= 1e-15 * (1.0 + std::abs(y))) return ynext;
        y = ynext;
    }
    throw Nonconvergence(std::string(what) + ": iteration cap exceeded");
}

} // namespace

double Background::radius_from_tortoise(double t) const {
    switch (kind_) {
        case MetricKind::minkowski: {
            const double r = t - tortoise_offset_;
            if (!(r > 0.0)) throw DomainError("radius_from_tortoise: no exterior intersection");
            return r;
        }
        case MetricKind::schwarzschild: {
            // y = log(r - 2M): e^y + 2M y = t - 2M - offset
            const double M = mass_;
            const double c = t - 2.0 * M - tortoise_offset_;
            const double y0 = c > 0.0 ? std::log1p(c) : c / (2.0 * M);
            const double y = solve_monotone(
                [&](double y) { return std::exp(y) + 2.0 * M * y - c; },
                [&](double y) { return std::exp(y) + 2.0 * M; }, y0, "radius_from_tortoise");
            return 2.0 * M + std::exp(y);
        }
        case MetricKind::reissner_nordstrom: {
            if (extremal_) {
                const double M = mass_;
                const double c = t - M - tortoise_offset_;
                const double y0 = c > 0.0 ? std::log1p(c) : -std::sqrt(std::abs(c) * M) / M - 1.0;
                const double y = solve_monotone(
                    [&](double y) {
                        return std::exp(y) + 2.0 * M * y - M * M * std::exp(-y) - c;
                    },
                    [&](double y) { return std::exp(y) + 2.0 * M + M * M * std::exp(-y); },
                    y0, "radius_from_tortoise");
                return M + std::exp(y);
            }
            const double a = r_plus_ * r_plus_ / (r_plus_ - r_minus_);
            const double b = r_minus_ * r_minus_ / (r_plus_ - r_minus_);
            const double gap = r_plus_ - r_minus_;
            const double c = t - tortoise_offset_;
            const double y0 = (c - r_plus_) > 0.0 ? std::log1p(c - r_plus_) : (c - r_plus_) / a;
            const double y = solve_monotone(
                [&](double y) {
                    const double x = std::exp(y);
                    return r_plus_ + x + a * y - b * std::log(gap + x) - c;
                },
                [&](double y) {
                    const double x = std::exp(y);
                    return x + a - b * x / (gap + x);
                },
                y0, "radius_from_tortoise");
            return r_plus_ + std::exp(y);
        }
        case MetricKind::custom: {
            // safeguarded Newton on r, expanding the bracket geometrically from
            // the normalization radius (quadrature cost grows toward the
            // horizon, so the inner wall stops at a relative depth of 1e-12)
            const double span = r_norm_ - r_plus_;
            double lo = r_norm_, hi = r_norm_;
            int it = 0;
            while (tortoise_unchecked(hi) < t && it++ < 200) hi = r_plus_ + 2.0 * (hi - r_plus_);
            it = 0;
            while (tortoise_unchecked(lo) > t && it++ < 200) {
                const double d = lo - r_plus_;
                if (d < 1e-12 * span)
                    throw DomainError(
                        "radius_from_tortoise: target too deep for the custom family");
                lo = r_plus_ + d * 0.25;
            }
            double r = 0.5 * (lo + hi);
            for (int k = 0; k < 400; ++k) {
                const double g = tortoise_unchecked(r) - t;
                if (g > 0.0) hi = r; else lo = r;
                double rn = r - g * custom_(r, 0);
                if ((k & 1) || !(rn > lo && rn < hi)) rn = 0.5 * (lo + hi);
                if (std::abs(rn - r) <= 1e-13 * (1.0 + std::abs(r))) return rn;
                r = rn;
            }
            throw Nonconvergence("radius_from_tortoise: custom family iteration cap");
        }
    }
    throw Nonconvergence("radius_from_tortoise: unreachable");
}

double Background::radius_from_null(double u, double v) const {
    return radius_from_tortoise(0.5 * (v - u));
}

double Background::static_tail_integral(double r) const {
    const double floor = (r_plus_ > 0.0) ? r_plus_ : 0.0;
    if (!(r > floor)) throw DomainError("static_tail_integral: r must exceed " + std::to_string(floor));
    switch (kind_) {
        case MetricKind::minkowski:
            return 1.0 / r;
        case MetricKind::schwarzschild:
            return std::log(r / (r - 2.0 * mass_)) / (2.0 * mass_);
        case MetricKind::reissner_nordstrom: {
            if (extremal_) return 1.0 / (r - mass_);
            return std::log((r - r_minus_) / (r - r_plus_)) / (r_plus_ - r_minus_);
        }
        case MetricKind::custom: {
            // substitute s = 1/r'; integrand 1/D(1/s) is smooth up to s = 0
            const double cap = 1.0 / r;
            return adaptive_simpson(
                [this](double s) { return s == 0.0 ? 1.0 : 1.0 / custom_(1.0 / s, 0); }, 0.0,
                cap, 1e-13);
        }
    }
    return 0.0;
}

} // namespace tailwave
