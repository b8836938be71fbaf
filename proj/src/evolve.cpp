#include "tailwave/evolve.hpp"

#include "tailwave/errors.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace tailwave {

namespace detail {

std::vector<double> potential_coefficients(const Background& bg, const RadiusTable& radii,
                                           int ell, double h, bool* warn) {
    const int nu = radii.nu(), nv = radii.nv();
    std::vector<double> coef(nu + nv + 1, 0.0);
    const double ll1 = static_cast<double>(ell) * (ell + 1);
    const double floor = bg.r_plus();
    if (ell >= 1 && radii.min_r() <= 0.0)
        throw DomainError("evolve: the l >= 1 potential is singular at the center; "
                          "choose v0 > u1 for horizonless backgrounds");
    double worst = 0.0;
    for (int idx = 0; idx <= nu + nv; ++idx) {
        const double r = radii.r_diag(idx - nu);
        if (r <= floor || r <= 0.0) { coef[idx] = 0.0; continue; }
        const double d0 = bg.d_eval(r, 0);
        if (d0 <= 0.0) { coef[idx] = 0.0; continue; }
        const double dv = d0 * (ll1 / (r * r) + bg.d_eval(r, 1) / r);
        worst = std::max(worst, std::abs(dv));
        coef[idx] = h * h / 8.0 * dv;
    }
    if (warn) *warn = worst * h * h > 1.0;
    return coef;
}

void sample_initial_rays(const Background& bg, const CharacteristicData& data,
                         const GridSpec& grid, const RadiusTable& radii,
                         std::vector<double>& row0, std::vector<double>& col0) {
    const int nu = radii.nu(), nv = radii.nv();
    if (data.support_v) {
        const auto [lo, hi] = *data.support_v;
        if (lo < grid.v0 || hi > grid.v1)
            throw BadSupport("data support [" + std::to_string(lo) + ", " + std::to_string(hi) +
                             "] outside the grid v range");
    }
    if (data.u0_hint && std::abs(*data.u0_hint - grid.u0) > 1e-9)
        throw InsufficientMargin("data sampled for u0 = " + std::to_string(*data.u0_hint) +
                                 ", grid starts at " + std::to_string(grid.u0));
    if (data.v0_hint && std::abs(*data.v0_hint - grid.v0) > 1e-9)
        throw InsufficientMargin("data sampled for v0 = " + std::to_string(*data.v0_hint) +
                                 ", grid starts at " + std::to_string(grid.v0));
    row0.resize(nv + 1);
    col0.resize(nu + 1);
    for (int j = 0; j <= nv; ++j)
        row0[j] = data.on_u0(grid.v(j), radii.r(0, j), radii.rstar_diag(j));
    if (data.ingoing_constant_corner) {
        for (int i = 0; i <= nu; ++i) col0[i] = row0[0];
    } else {
        for (int i = 0; i <= nu; ++i)
            col0[i] = data.on_v0(grid.u(i), radii.r(i, 0), radii.rstar_diag(-i));
    }
    (void)bg;
}

} // namespace detail

int ModeSolution::row_of_u(double u_value) const {
    const double raw = (u_value - grid.u0) / grid.h;
    const int i = static_cast<int>(std::llround(raw));
    if (i < 0 || i > nu() || std::abs(raw - i) > 1e-6)
        throw DomainError("u = " + std::to_string(u_value) + " is not a grid row");
    return i;
}

ModeSolution evolve_mode(const Background& bg, const CharacteristicData& data,
                         const GridSpec& grid) {
    grid.validate();
    if (data.ell < 0) throw DomainError("evolve_mode: ell must be >= 0");
    RadiusTable radii(bg, grid);
    const int nu = radii.nu(), nv = radii.nv();

    bool warn = false;
    const std::vector<double> coef =
        detail::potential_coefficients(bg, radii, data.ell, grid.h, &warn);

    std::vector<double> row0, col0;
    detail::sample_initial_rays(bg, data, grid, radii, row0, col0);

    ModeSolution sol{bg, data.ell, grid, Array2D(nu + 1, nv + 1), radii,
                     data.family, data.meta, warn};

    double* first = sol.phi.row(0);
    for (int j = 0; j <= nv; ++j) first[j] = row0[j];
    for (int i = 1; i <= nu; ++i) {
        const double* prev = sol.phi.row(i - 1);
        double* next = sol.phi.row(i);
        next[0] = col0[i];
        const double* c = coef.data() + (nu - i);
        for (int j = 1; j <= nv; ++j) {
            const double sum = prev[j] + next[j - 1];
            next[j] = sum - prev[j - 1] - c[j] * sum;
        }
    }
    return sol;
}

std::vector<ModeSolution> evolve_refined(const Background& bg, const CharacteristicData& data,
                                          const GridSpec& grid, int levels) {
    if (levels < 2) throw DomainError("evolve_refined: levels must be >= 2");
    std::vector<ModeSolution> out;
    out.reserve(levels);
    GridSpec g = grid;
    for (int l = 0; l < levels; ++l) {
        out.push_back(evolve_mode(bg, data, g));
        g = g.refined();
    }
    return out;
}

Array2D t_derivative_of(const ModeSolution& sol, const Array2D& field, int k, int margin) {
    const int nu = static_cast<int>(field.rows()) - 1;
    const int nv = static_cast<int>(field.cols()) - 1;
    const double h = sol.grid.h;
    Array2D cur = field;
    int m = margin;
    for (int step = 0; step < k; ++step) {
        if (nu - 2 * (m + 1) < 0 || nv - 2 * (m + 1) < 0)
            throw InsufficientMargin("t_derivative: grid too small for the requested order");
        Array2D next(nu + 1, nv + 1, 0.0);
        for (int i = m + 1; i <= nu - m - 1; ++i)
            for (int j = m + 1; j <= nv - m - 1; ++j)
                next(i, j) = (cur(i + 1, j) - cur(i - 1, j) + cur(i, j + 1) - cur(i, j - 1)) /
                             (2.0 * h);
        cur = std::move(next);
        ++m;
    }
    return cur;
}

Array2D t_derivative_field(const ModeSolution& sol, int k) {
    if (k < 1) throw DomainError("t_derivative_field: k must be >= 1");
    return t_derivative_of(sol, sol.phi, k, 0);
}

namespace {
void put_f64(std::ofstream& f, double x) {
    std::uint64_t bits;
    std::memcpy(&bits, &x, 8);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xff);
    f.write(reinterpret_cast<const char*>(b), 8);
}
double get_f64(std::ifstream& f) {
    unsigned char b[8];
    f.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    double x;
    std::memcpy(&x, &bits, 8);
    return x;
}
} // namespace

void write_checkpoint(const std::string& path, const ModeSolution& sol) {
    const int stride = sol.grid.checkpoint_stride;
    if (stride <= 0) throw DomainError("write_checkpoint: checkpoint_stride must be positive");
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open for writing: " + path);
    f.write("TWV1", 4);
    put_f64(f, static_cast<double>(sol.ell));
    put_f64(f, sol.grid.h);
    put_f64(f, sol.grid.u0);
    put_f64(f, sol.grid.u1);
    put_f64(f, sol.grid.v0);
    put_f64(f, sol.grid.v1);
    for (int i = 0; i <= sol.nu(); i += stride) {
        const double* row = sol.phi.row(i);
        for (int j = 0; j <= sol.nv(); ++j) put_f64(f, row[j]);
    }
}

Checkpoint read_checkpoint(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open: " + path);
    char magic[4];
    f.read(magic, 4);
    if (std::memcmp(magic, "TWV1", 4) != 0) throw Error("bad checkpoint magic in " + path);
    Checkpoint c;
    c.ell = static_cast<int>(get_f64(f));
    c.h = get_f64(f);
    c.u0 = get_f64(f);
    c.u1 = get_f64(f);
    c.v0 = get_f64(f);
    c.v1 = get_f64(f);
    const int nv = static_cast<int>(std::llround((c.v1 - c.v0) / c.h));
    while (f) {
        std::vector<double> row(nv + 1);
        for (int j = 0; j <= nv && f; ++j) row[j] = get_f64(f);
        if (f) c.rows.push_back(std::move(row));
    }
    return c;
}

} // namespace tailwave
