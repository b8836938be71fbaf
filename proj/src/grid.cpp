#include "tailwave/grid.hpp"

#include "tailwave/errors.hpp"

#include <algorithm>
#include <cmath>

namespace tailwave {

namespace {
int step_count(double lo, double hi, double h, const char* name) {
    const double raw = (hi - lo) / h;
    const long long n = std::llround(raw);
    if (n <= 0 || std::abs(raw - static_cast<double>(n)) > 1e-9 * std::max(1.0, raw))
        throw DomainError(std::string("grid: (") + name + " range)/h must be a positive integer");
    return static_cast<int>(n);
}
} // namespace

int GridSpec::nu() const { return step_count(u0, u1, h, "u"); }
int GridSpec::nv() const { return step_count(v0, v1, h, "v"); }

void GridSpec::validate() const {
    if (!(h > 0.0)) throw DomainError("grid: h must be positive");
    if (!(u1 > u0)) throw DomainError("grid: u1 must exceed u0");
    if (!(v1 > v0)) throw DomainError("grid: v1 must exceed v0");
    (void)nu();
    (void)nv();
    if (checkpoint_stride < 0) throw DomainError("grid: checkpoint_stride must be >= 0");
}

GridSpec GridSpec::refined() const {
    GridSpec g = *this;
    g.h = 0.5 * h;
    g.checkpoint_stride = checkpoint_stride * 2;
    return g;
}

RadiusTable::RadiusTable(const Background& bg, const GridSpec& g) {
    g.validate();
    nu_ = g.nu();
    nv_ = g.nv();
    half_h_ = 0.5 * g.h;
    rstar_base_ = 0.5 * (g.v0 - g.u0); // diagonal d = 0
    r_.assign(nu_ + nv_ + 1, 0.0);

    const double floor = bg.r_plus() > 0.0 ? bg.r_plus() : 0.0;

    if (bg.kind() == MetricKind::custom) {
        // ODE continuation dr/dr_* = D(r) walking inward from the outermost
        // diagonal, re-anchored by a direct inversion every 1024 entries.
        double r = bg.radius_from_tortoise(rstar_base_ + nv_ * half_h_);
        r_[nu_ + nv_] = r;
        const double hs = -half_h_;
        for (int idx = nu_ + nv_ - 1; idx >= 0; --idx) {
            const int steps_done = nu_ + nv_ - 1 - idx;
            if (steps_done > 0 && steps_done % 1024 == 0) {
                r = bg.radius_from_tortoise(rstar_base_ + (idx + 1 - nu_) * half_h_);
            }
            if (r - floor <= 1e-13 * std::max(1.0, floor)) {
                r_[idx] = floor; // horizon hugging: D -> 0, transport regime
                continue;
            }
            const double k1 = bg.d_eval(r, 0);
            const double k2 = bg.d_eval(std::max(floor, r + 0.5 * hs * k1), 0);
            const double k3 = bg.d_eval(std::max(floor, r + 0.5 * hs * k2), 0);
            const double k4 = bg.d_eval(std::max(floor, r + hs * k3), 0);
            r += hs / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            r = std::max(r, floor);
            r_[idx] = r;
        }
    } else {
        for (int idx = 0; idx <= nu_ + nv_; ++idx) {
            const int d = idx - nu_;
            const double t = rstar_base_ + d * half_h_;
            if (bg.kind() == MetricKind::minkowski) {
                // diagonals past the center (v <= u) carry r = 0; the l = 0
                // evolution is pure transport there and diagnostics stay
                // behind their positive radial cuts
                r_[idx] = std::max(t, 0.0);
                continue;
            }
            r_[idx] = bg.radius_from_tortoise(t);
        }
    }
}

double RadiusTable::rstar_diag(int d) const { return rstar_base_ + d * half_h_; }

int RadiusTable::diag_near_radius(double r_target) const {
    // r_ is nondecreasing in the index
    const auto it = std::lower_bound(r_.begin(), r_.end(), r_target);
    if (it == r_.begin()) return -nu_;
    if (it == r_.end()) return nv_;
    const int hi = static_cast<int>(it - r_.begin());
    const int lo = hi - 1;
    const int idx = (r_target - r_[lo] < r_[hi] - r_target) ? lo : hi;
    return idx - nu_;
}

int RadiusTable::first_diag_at_or_above(double r_target) const {
    const auto it = std::lower_bound(r_.begin(), r_.end(), r_target);
    if (it == r_.end()) return nv_ + 1;
    return static_cast<int>(it - r_.begin()) - nu_;
}

} // namespace tailwave
