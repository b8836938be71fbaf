#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace tailwave {

// Composite Simpson on uniformly spaced samples; a trailing trapezoid cell
// absorbs an even sample count. Returns 0 for fewer than 2 samples.
double simpson_uniform(const std::vector<double>& f, double h);

// Same, but over the index range [j0, j1] of a raw array.
double simpson_range(const double* f, int j0, int j1, double h);

// Adaptive Simpson with absolute/relative tolerance. Throws QuadratureFailure
// when the recursion depth cap is exceeded before the tolerance is met.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-12, int max_depth = 48);

// Centered finite-difference first derivative, 4th order, on a uniform table.
// One-sided 4th-order stencils at the edges.
std::vector<double> derivative_table(const std::vector<double>& f, double h);

// Polynomial extrapolation of (x_i, y_i) to x = 0 (Neville). Returns the
// tableau diagonal: entry d is the degree-d extrapolant using x_0..x_d.
std::vector<double> extrapolate_to_zero(const std::vector<double>& x,
                                        const std::vector<double>& y);

// Least squares for y = a + b x; returns {a, b, stderr_b}.
struct LineFit {
    double intercept = 0.0;
    double slope = 0.0;
    double slope_stderr = 0.0;
    double rms_residual = 0.0;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

// FNV-1a 64-bit hash (stable across platforms); used for config hashes.
std::uint64_t fnv1a64(const std::string& s);
std::string hash_hex(std::uint64_t h);

} // namespace tailwave
