#pragma once

#include <map>
#include <string>
#include <vector>

namespace tailwave {

// A sampled time series (u_i, value_i) with per-sample Richardson error bars
// and a metadata trailer that ends up in the CSV output.
struct FluxSeries {
    std::vector<double> u;
    std::vector<double> value;
    std::vector<double> rich_err;
    std::map<std::string, std::string> meta;
    bool extremal_warning = false;

    std::size_t size() const { return u.size(); }
    void push(double uu, double val, double err = 0.0) {
        u.push_back(uu);
        value.push_back(val);
        rich_err.push_back(err);
    }
    // restrict to u in [lo, hi]
    FluxSeries window(double lo, double hi) const;
};

// Schema: "# tailwave flux v1", a header row "u,value,rich_err", data rows,
// then "#key=value" trailer lines.
void write_series_csv(const std::string& path, const FluxSeries& s);
FluxSeries read_series_csv(const std::string& path);

// Attach pointwise Richardson error bars |a-b|/3 (2nd-order pair) by matching
// u samples; returns series at the finer level with bars filled in.
FluxSeries with_richardson_errors(const FluxSeries& fine, const FluxSeries& coarse);

} // namespace tailwave
