#include "tailwave/series.hpp"

#include "tailwave/errors.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace tailwave {

FluxSeries FluxSeries::window(double lo, double hi) const {
    FluxSeries out;
    out.meta = meta;
    out.extremal_warning = extremal_warning;
    for (std::size_t i = 0; i < u.size(); ++i)
        if (u[i] >= lo && u[i] <= hi) out.push(u[i], value[i], rich_err[i]);
    return out;
}

void write_series_csv(const std::string& path, const FluxSeries& s) {
    std::ofstream f(path);
    if (!f) throw Error("cannot open for writing: " + path);
    f << "# tailwave flux v1\n";
    f << "u,value,rich_err\n";
    char buf[128];
    for (std::size_t i = 0; i < s.u.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", s.u[i], s.value[i], s.rich_err[i]);
        f << buf;
    }
    for (const auto& [k, v] : s.meta) f << "#" << k << "=" << v << "\n";
    if (s.extremal_warning) f << "#extremal_warning=1\n";
}

FluxSeries read_series_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw Error("cannot open: " + path);
    FluxSeries s;
    std::string line;
    bool header_seen = false;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            if (line.rfind("# tailwave flux", 0) == 0) continue;
            const auto eq = line.find('=');
            if (eq != std::string::npos) {
                const std::string key = line.substr(1, eq - 1);
                const std::string val = line.substr(eq + 1);
                if (key == "extremal_warning") s.extremal_warning = (val == "1");
                else s.meta[key] = val;
            }
            continue;
        }
        if (!header_seen && line.rfind("u,", 0) == 0) { header_seen = true; continue; }
        std::istringstream ls(line);
        double a, b, c;
        char comma;
        if (ls >> a >> comma >> b >> comma >> c) s.push(a, b, c);
    }
    return s;
}

FluxSeries with_richardson_errors(const FluxSeries& fine, const FluxSeries& coarse) {
    FluxSeries out = fine;
    std::size_t k = 0;
    for (std::size_t i = 0; i < fine.u.size(); ++i) {
        while (k + 1 < coarse.u.size() && coarse.u[k] < fine.u[i] - 1e-9) ++k;
        if (k < coarse.u.size() && std::abs(coarse.u[k] - fine.u[i]) < 1e-9)
            out.rich_err[i] = std::abs(fine.value[i] - coarse.value[k]) / 3.0;
    }
    return out;
}

} // namespace tailwave
