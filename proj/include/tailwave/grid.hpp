#pragma once

#include "tailwave/background.hpp"

#include <vector>

namespace tailwave {

// Uniform double-null rectangle [u0,u1] x [v0,v1] with equal step h in u and v.
struct GridSpec {
    double u0 = 0.0, u1 = 0.0;
    double v0 = 0.0, v1 = 0.0;
    double h = 0.0;
    int checkpoint_stride = 0;

    int nu() const; // number of u steps
    int nv() const; // number of v steps
    double u(int i) const { return u0 + i * h; }
    double v(int j) const { return v0 + j * h; }

    // step counts must be integers; throws DomainError otherwise
    void validate() const;

    GridSpec refined() const; // halve h, same rectangle
};

// Radii r(u_i, v_j) depend only on the diagonal d = j - i (stationarity of the
// background), so the whole grid's radii are cached as one 1-D table. Cell
// centers share the diagonal of their south corner. Entries whose tortoise
// value lies below the representable exterior collapse to r_plus; there D = 0
// and the evolution reduces to free transport, matching the continuum
// double-null chart approaching the horizon asymptotically.
class RadiusTable {
public:
    RadiusTable(const Background& bg, const GridSpec& g);

    double r(int i, int j) const { return r_[j - i + nu_]; }
    double r_diag(int d) const { return r_[d + nu_]; }
    double rstar_diag(int d) const;
    int nu() const { return nu_; }
    int nv() const { return nv_; }
    double min_r() const { return r_.front(); }
    double max_r() const { return r_.back(); }

    // diagonal whose radius is closest to r_target (ties toward larger r)
    int diag_near_radius(double r_target) const;
    // smallest diagonal with r >= r_target, or nv()+1 if none
    int first_diag_at_or_above(double r_target) const;

private:
    int nu_ = 0, nv_ = 0;
    double rstar_base_ = 0.0, half_h_ = 0.0;
    std::vector<double> r_; // index d + nu, d in [-nu, nv]
};

} // namespace tailwave
