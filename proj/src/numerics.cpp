#include "tailwave/numerics.hpp"

#include "tailwave/errors.hpp"

#include <cmath>
#include <cstdio>

namespace tailwave {

double simpson_range(const double* f, int j0, int j1, double h) {
    const int n = j1 - j0; // number of intervals
    if (n <= 0) return 0.0;
    if (n == 1) return 0.5 * h * (f[j0] + f[j1]);
    int m = n;
    double tail = 0.0;
    if (m % 2 != 0) { // trapezoid for the last cell, Simpson on the rest
        tail = 0.5 * h * (f[j0 + m - 1] + f[j0 + m]);
        m -= 1;
    }
    double s = f[j0] + f[j0 + m];
    for (int k = 1; k < m; k += 2) s += 4.0 * f[j0 + k];
    for (int k = 2; k < m; k += 2) s += 2.0 * f[j0 + k];
    return s * h / 3.0 + tail;
}

double simpson_uniform(const std::vector<double>& f, double h) {
    if (f.size() < 2) return 0.0;
    return simpson_range(f.data(), 0, static_cast<int>(f.size()) - 1, h);
}

namespace {

double adaptive_simpson_rec(const std::function<double(double)>& f, double a, double b,
                            double fa, double fm, double fb, double whole, double tol,
                            int depth, int max_depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    if (depth >= max_depth)
        throw QuadratureFailure("adaptive_simpson: depth cap exceeded on [" +
                                std::to_string(a) + ", " + std::to_string(b) + "]");
    return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1, max_depth) +
           adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1, max_depth);
}

} // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol, int max_depth) {
    if (a == b) return 0.0;
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, 0, max_depth);
}

std::vector<double> derivative_table(const std::vector<double>& f, double h) {
    const int n = static_cast<int>(f.size());
    std::vector<double> d(n, 0.0);
    if (n < 5) {
        for (int j = 0; j + 1 < n; ++j) d[j] = (f[j + 1] - f[j]) / h;
        if (n >= 2) d[n - 1] = d[n - 2];
        return d;
    }
    for (int j = 2; j < n - 2; ++j)
        d[j] = (f[j - 2] - 8.0 * f[j - 1] + 8.0 * f[j + 1] - f[j + 2]) / (12.0 * h);
    // one-sided 4th order at the edges
    d[0] = (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) / (12.0 * h);
    d[1] = (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]) / (12.0 * h);
    d[n - 2] = (3.0 * f[n - 1] + 10.0 * f[n - 2] - 18.0 * f[n - 3] + 6.0 * f[n - 4] - f[n - 5]) / (12.0 * h);
    d[n - 1] = (25.0 * f[n - 1] - 48.0 * f[n - 2] + 36.0 * f[n - 3] - 16.0 * f[n - 4] + 3.0 * f[n - 5]) / (12.0 * h);
    return d;
}

std::vector<double> extrapolate_to_zero(const std::vector<double>& x,
                                        const std::vector<double>& y) {
    const int n = static_cast<int>(x.size());
    std::vector<double> diag;
    std::vector<double> col = y;
    diag.reserve(n);
    if (n == 0) return diag;
    diag.push_back(col[0]);
    std::vector<double> prev = col;
    for (int d = 1; d < n; ++d) {
        std::vector<double> next(n - d);
        for (int i = 0; i < n - d; ++i) {
            const double xi = x[i], xj = x[i + d];
            next[i] = (xi * prev[i + 1] - xj * prev[i]) / (xi - xj);
        }
        diag.push_back(next[0]);
        prev = std::move(next);
    }
    return diag;
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    LineFit out;
    const int n = static_cast<int>(x.size());
    if (n < 2) throw InsufficientPoints("fit_line: need at least 2 points");
    double sx = 0, sy = 0;
    for (int i = 0; i < n; ++i) { sx += x[i]; sy += y[i]; }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0;
    for (int i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0) throw DegenerateDifferences("fit_line: x values coincide");
    out.slope = sxy / sxx;
    out.intercept = my - out.slope * mx;
    double ss = 0;
    for (int i = 0; i < n; ++i) {
        const double r = y[i] - (out.intercept + out.slope * x[i]);
        ss += r * r;
    }
    out.rms_residual = std::sqrt(ss / n);
    out.slope_stderr = (n > 2) ? std::sqrt(ss / (n - 2) / sxx) : 0.0;
    return out;
}

std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string hash_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

} // namespace tailwave
