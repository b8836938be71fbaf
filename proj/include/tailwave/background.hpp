#pragma once

#include <functional>
#include <string>

namespace tailwave {

enum class MetricKind { minkowski, schwarzschild, reissner_nordstrom, custom };

std::string to_string(MetricKind k);

// A spherically symmetric, stationary, asymptotically flat exterior
//   g = -D(r) du^2 - 2 du dr + r^2 dOmega^2,
// with D > 0 for r > r_plus and D(r_plus) = 0 for the black-hole families.
// Immutable after construction; all members are const-qualified and pure.
class Background {
public:
    static Background minkowski(double r_norm = 10.0);
    static Background schwarzschild(double mass, double r_norm = 10.0);
    static Background reissner_nordstrom(double mass, double charge, double r_norm = 10.0);
    // d_fn(r, order) must supply D and its first three r-derivatives.
    static Background custom(std::function<double(double, int)> d_fn, double r_plus,
                             double mass, double r_norm = 10.0);

    // D^(order)(r). Throws DomainError for r <= r_plus (r <= 0 when horizonless),
    // UnsupportedOrder for order outside 0..3.
    double D(double r, int order = 0) const;

    // Largest root of D, 0 for Minkowski. Throws NoHorizon for a strictly
    // positive custom family.
    double horizon_radius() const;

    // Tortoise coordinate with r_*(r_norm) = r_norm. Throws DomainError
    // for r <= r_plus.
    double tortoise(double r) const;

    // Inverse of tortoise, relative tolerance 1e-12. Throws Nonconvergence /
    // DomainError.
    double radius_from_tortoise(double rstar) const;
    double radius_from_null(double u, double v) const;

    // \int_r^\infty D(s)^{-1} s^{-2} ds; closed form for the built-in families.
    double static_tail_integral(double r) const;

    MetricKind kind() const { return kind_; }
    double mass() const { return mass_; }
    double charge() const { return charge_; }
    double r_plus() const { return r_plus_; }
    double r_minus() const { return r_minus_; }
    double r_norm() const { return r_norm_; }
    bool extremal() const { return extremal_; }

    // Unchecked evaluation, defined for all r > max(r_plus - tiny, 0); used by
    // the evolution kernel where r may sit on the horizon up to rounding.
    double d_eval(double r, int order) const;

private:
    Background() = default;

    double tortoise_unchecked(double r) const;

    MetricKind kind_ = MetricKind::minkowski;
    double mass_ = 0.0;
    double charge_ = 0.0;
    double r_plus_ = 0.0;
    double r_minus_ = 0.0;
    double r_norm_ = 10.0;
    bool extremal_ = false;
    double tortoise_offset_ = 0.0; // enforces r_*(r_norm) = r_norm
    std::function<double(double, int)> custom_;
};

} // namespace tailwave
