#include "tailwave/scenario.hpp"

#include "tailwave/errors.hpp"
#include "tailwave/numerics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <set>
#include <sstream>

namespace fs = std::filesystem;

namespace tailwave {

namespace {

Background background_from(const Config& cfg) {
    const std::string kind = cfg.get_string("background.kind");
    const double M = cfg.get_double("background.M", 1.0);
    const double e = cfg.get_double("background.e", 0.0);
    const double R = cfg.get_double("background.R_norm", 10.0);
    if (kind == "minkowski") return Background::minkowski(R);
    if (kind == "schwarzschild") return Background::schwarzschild(M, R);
    if (kind == "reissner_nordstrom") return Background::reissner_nordstrom(M, e, R);
    throw ConfigError("background.kind: unknown family '" + kind + "'");
}

GridSpec grid_from(const Config& cfg) {
    GridSpec g;
    g.u0 = cfg.get_double("grid.u0", 0.0);
    g.u1 = cfg.get_double("grid.u1");
    g.v0 = cfg.get_double("grid.v0", 0.0);
    g.v1 = cfg.get_double("grid.v1");
    g.h = cfg.get_double("grid.h");
    g.checkpoint_stride = cfg.get_int("grid.checkpoint_stride", 0);
    if (!(g.v1 > g.v0))
        throw ConfigError("grid.v1 must exceed grid.v0");
    if (!(g.u1 > g.u0))
        throw ConfigError("grid.u1 must exceed grid.u0");
    g.validate();
    return g;
}

CharacteristicData data_from(const Config& cfg, const Background& bg, const GridSpec& grid) {
    const std::string family = cfg.get_string("data.family");
    const int ell = cfg.get_int("data.ell", 0);
    if (family == "bump") {
        const double v_lo = cfg.get_double("data.v_lo");
        const double v_hi = cfg.get_double("data.v_hi");
        const double amp = cfg.get_double("data.amplitude", 1.0);
        const std::string prof = cfg.get_string("data.profile", "polynomial_bump");
        BumpProfile p;
        if (prof == "polynomial_bump") p = BumpProfile::polynomial_bump;
        else if (prof == "gaussian_truncated") p = BumpProfile::gaussian_truncated;
        else throw ConfigError("data.profile: unknown profile '" + prof + "'");
        return bump_data(ell, v_lo, v_hi, amp, p);
    }
    if (family == "static_tail" || family == "static_tail_relaxed") {
        const double c0 = cfg.get_double("data.C0", 1.0);
        const double r_corner = bg.radius_from_null(grid.u1, grid.v0);
        const double r_min = cfg.get_double("data.r_min", std::max(r_corner, bg.r_plus() * 1.0001));
        const auto ingoing = family == "static_tail" ? IngoingExtension::static_profile
                                                     : IngoingExtension::corner_constant;
        if (ell != 0) throw ConfigError("data.ell: static tail data is ell = 0 only");
        return static_tail_data(bg, c0, r_min, ingoing);
    }
    if (family == "tabulated") return tabulated_data(ell, cfg.get_string("data.path"));
    throw ConfigError("data.family: unknown family '" + family + "'");
}

struct VerdictSpec {
    std::string name, tag, kind;
    Window window{0.0, 0.0};
    FitModel model = FitModel::power_with_offset;
    double band_lo = 0.0, band_hi = 0.0;
    // np conservation
    std::vector<double> u_list;
    double np_shrink = 2.5;
    double np_predicted_rel = 0.05;
    // sharpness
    double factor = 0.5;
    double slope_rel = 0.25;
    double u_star = 0.0;
    std::vector<double> r_hi_list;
};

struct Plan {
    Background bg;
    GridSpec grid;
    CharacteristicData data;
    int levels = 2;
    ProbeRequest probes;
    std::vector<VerdictSpec> verdicts;
    std::string name;
    bool plots = true;
};

std::set<std::string> measure_names(const Config& cfg) {
    std::set<std::string> names;
    for (const std::string& k : cfg.keys_with_prefix("measure.")) {
        const std::string rest = k.substr(8);
        const auto dot = rest.find('.');
        if (dot == std::string::npos) continue; // measure.stride etc.
        names.insert(rest.substr(0, dot));
    }
    return names;
}

Plan plan_from(const Config& cfg) {
    Plan plan{background_from(cfg), grid_from(cfg), CharacteristicData{}, 2, {}, {}, "", true};
    plan.data = data_from(cfg, plan.bg, plan.grid);
    plan.levels = cfg.get_int("grid.levels", 2);
    if (plan.levels < 1 || plan.levels > 4) throw ConfigError("grid.levels must be in 1..4");
    plan.name = cfg.get_string("name", "scenario");
    plan.plots = cfg.get_bool("output.plots", true);
    plan.probes.u_stride = cfg.get_int("measure.stride", 8);
    if (plan.probes.u_stride < 1) throw ConfigError("measure.stride must be >= 1");

    for (const std::string& name : measure_names(cfg)) {
        const std::string base = "measure." + name + ".";
        const std::string kind = cfg.get_string(base + "kind");
        ProbeSpec p;
        p.name = name;
        if (kind == "pointwise") {
            p.kind = ProbeKind::pointwise;
            p.r_station = cfg.get_double(base + "r");
            p.t_order = cfg.get_int(base + "t_order", 0);
        } else if (kind == "radiation") {
            p.kind = ProbeKind::radiation;
        } else if (kind == "energy_flux") {
            p.kind = ProbeKind::energy_flux;
            p.r_lo = cfg.get_double(base + "r_lo", plan.bg.r_norm());
            if (cfg.has(base + "r_hi")) p.r_hi = cfg.get_double(base + "r_hi");
        } else if (kind == "rp_flux") {
            p.kind = ProbeKind::rp_flux;
            p.field = field_selector_from_string(cfg.get_string(base + "field", "phi"));
            p.field_k = cfg.get_int(base + "k", 0);
            p.p = cfg.get_double(base + "p");
            p.r_lo = cfg.get_double(base + "r_lo", plan.bg.r_norm());
            if (cfg.has(base + "r_hi")) p.r_hi = cfg.get_double(base + "r_hi");
        } else if (kind == "np") {
            p.kind = ProbeKind::np_constant;
            if (cfg.has(base + "r_max")) p.r_hi = cfg.get_double(base + "r_max");
        } else if (kind == "morawetz") {
            p.kind = ProbeKind::morawetz;
            p.r_lo = cfg.get_double(base + "r_lo");
            p.r_hi = cfg.get_double(base + "r_hi");
        } else {
            throw ConfigError(base + "kind: unknown measurement kind '" + kind + "'");
        }
        plan.probes.specs.push_back(p);

        const std::string vbase = "verdict." + name + ".";
        if (cfg.has(vbase + "kind") || cfg.has(vbase + "band")) {
            VerdictSpec v;
            v.name = name;
            v.kind = cfg.get_string(vbase + "kind", "exponent");
            v.tag = cfg.get_string(vbase + "tag", name);
            if (cfg.has(vbase + "window")) {
                const auto w = cfg.get_double_list(vbase + "window");
                if (w.size() != 2) throw ConfigError(vbase + "window needs lo,hi");
                v.window = {w[0], w[1]};
            }
            const std::string model = cfg.get_string(vbase + "model", "power_offset");
            if (model == "power_offset") v.model = FitModel::power_with_offset;
            else if (model == "pure_power") v.model = FitModel::pure_power;
            else throw ConfigError(vbase + "model: unknown model '" + model + "'");
            if (cfg.has(vbase + "band")) {
                const auto b = cfg.get_double_list(vbase + "band");
                if (b.size() != 2) throw ConfigError(vbase + "band needs lo,hi");
                v.band_lo = b[0];
                v.band_hi = b[1];
            }
            if (v.kind == "np_conservation") {
                v.u_list = cfg.get_double_list(vbase + "u_list");
                v.np_shrink = cfg.get_double(vbase + "shrink", 2.5);
                v.np_predicted_rel = cfg.get_double(vbase + "predicted_rel", 0.05);
            } else if (v.kind == "sharpness_inf") {
                v.factor = cfg.get_double(vbase + "factor", 0.5);
            } else if (v.kind == "sharpness_slope") {
                v.slope_rel = cfg.get_double(vbase + "slope_rel", 0.25);
                v.u_star = cfg.get_double(vbase + "u_star");
                v.r_hi_list = cfg.get_double_list(vbase + "r_hi_list");
            } else if (v.kind != "exponent") {
                throw ConfigError(vbase + "kind: unknown verdict kind '" + v.kind + "'");
            }
            plan.verdicts.push_back(v);
        }
    }

    // pin the np extrapolation ladder at the latest conservation sample's
    // coverage so extraction residuals cancel across u
    for (const VerdictSpec& v : plan.verdicts) {
        if (v.kind != "np_conservation" || v.u_list.empty()) continue;
        for (ProbeSpec& p : plan.probes.specs) {
            if (p.name != v.name || p.r_hi) continue;
            double u_last = plan.grid.u0;
            for (double uu : v.u_list) u_last = std::max(u_last, uu);
            p.r_hi = 0.999 * plan.bg.radius_from_null(u_last, plan.grid.v1 - 4.0 * plan.grid.h);
        }
    }

    // sharpness_slope needs one probe per radial cut
    for (const VerdictSpec& v : plan.verdicts) {
        if (v.kind != "sharpness_slope") continue;
        auto it = std::find_if(plan.probes.specs.begin(), plan.probes.specs.end(),
                               [&](const ProbeSpec& p) { return p.name == v.name; });
        if (it == plan.probes.specs.end()) continue;
        ProbeSpec proto = *it;
        plan.probes.specs.erase(it);
        for (std::size_t c = 0; c < v.r_hi_list.size(); ++c) {
            ProbeSpec p = proto;
            p.name = v.name + "_cut" + std::to_string(c);
            p.r_hi = v.r_hi_list[c];
            plan.probes.specs.push_back(p);
        }
    }
    return plan;
}

double series_value_at(const FluxSeries& s, double u) {
    if (s.size() == 0) throw MissingSeries("series empty");
    std::size_t best = 0;
    for (std::size_t i = 1; i < s.size(); ++i)
        if (std::abs(s.u[i] - u) < std::abs(s.u[best] - u)) best = i;
    return s.value[best];
}

void stamp(FluxSeries& s, const Config& cfg, const GridSpec& g, int level) {
    s.meta["config_hash"] = cfg.hash();
    s.meta["grid_h"] = std::to_string(g.h);
    s.meta["grid_u"] = std::to_string(g.u0) + ":" + std::to_string(g.u1);
    s.meta["grid_v"] = std::to_string(g.v0) + ":" + std::to_string(g.v1);
    s.meta["level"] = std::to_string(level);
}

std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", x);
    return buf;
}

} // namespace

std::string resolve_out_root(const Config& cfg, const std::string& cli_override) {
    if (!cli_override.empty()) return cli_override;
    if (const char* env = std::getenv("TAILWAVE_OUT")) return env;
    return cfg.get_string("output.dir", "out");
}

ScenarioResult run_scenario(const Config& cfg, const std::string& out_root, bool dry_run) {
    const Plan plan = plan_from(cfg);
    ScenarioResult res;
    res.out_dir = out_root;

    if (dry_run) {
        std::ostringstream ss;
        ss << "scenario " << plan.name << "\n"
           << "  background " << to_string(plan.bg.kind()) << " M=" << plan.bg.mass()
           << " e=" << plan.bg.charge() << " R_norm=" << plan.bg.r_norm() << "\n"
           << "  grid u [" << plan.grid.u0 << ", " << plan.grid.u1 << "] v [" << plan.grid.v0
           << ", " << plan.grid.v1 << "] h=" << plan.grid.h << " levels=" << plan.levels << "\n"
           << "  data " << plan.data.family << " ell=" << plan.data.ell << "\n"
           << "  measurements:";
        for (const ProbeSpec& p : plan.probes.specs) ss << " " << p.name;
        ss << "\n  config hash " << cfg.hash() << "\n";
        std::cout << ss.str();
        return res;
    }

    fs::create_directories(out_root);

    // coarse-to-fine levels; the finest drives the verdicts, the next-coarser
    // supplies Richardson error bars and the two-level band requirement
    std::vector<ProbeResult> levels;
    GridSpec g = plan.grid;
    for (int l = 0; l < plan.levels; ++l) {
        ProbeRequest req = plan.probes;
        req.u_stride = plan.probes.u_stride << l; // same physical sampling times
        if (plan.grid.checkpoint_stride > 0 && l == 0)
            req.checkpoint_path = (fs::path(out_root) / "checkpoint.twv").string();
        levels.push_back(evolve_probed(plan.bg, plan.data, g, req));
        g = g.refined();
    }
    ProbeResult& fine = levels.back();
    const ProbeResult* coarse = plan.levels >= 2 ? &levels[plan.levels - 2] : nullptr;

    GridSpec fine_grid = plan.grid;
    for (int l = 1; l < plan.levels; ++l) fine_grid = fine_grid.refined();

    for (auto& [name, s] : fine.series) {
        if (coarse) {
            const auto it = coarse->series.find(name);
            if (it != coarse->series.end()) s = with_richardson_errors(s, it->second);
        }
        stamp(s, cfg, fine_grid, plan.levels - 1);
        write_series_csv((fs::path(out_root) / ("series_" + name + ".csv")).string(), s);
    }
    if (coarse) {
        for (const auto& [name, s] : coarse->series) {
            FluxSeries c = s;
            stamp(c, cfg, plan.grid, plan.levels - 2);
            write_series_csv((fs::path(out_root) / ("series_" + name + "_coarse.csv")).string(),
                             c);
        }
    }

    // verdicts
    std::vector<Measurable> measurables;
    std::vector<ReportRow> extra_rows;
    for (const VerdictSpec& v : plan.verdicts) {
        if (v.kind == "exponent") {
            Measurable m;
            m.name = v.name;
            m.tag = v.tag;
            m.fine = fine.series.at(v.name);
            if (coarse && coarse->series.count(v.name)) m.coarse = coarse->series.at(v.name);
            m.window = v.window;
            m.model = v.model;
            m.band_lo = v.band_lo;
            m.band_hi = v.band_hi;
            measurables.push_back(std::move(m));
            continue;
        }
        if (v.kind == "np_conservation") {
            const FluxSeries& sf = fine.series.at(v.name);
            ReportRow row;
            row.name = v.name;
            row.tag = v.tag;
            row.band_lo = v.band_lo;
            row.band_hi = v.band_hi;
            bool pass = true;
            double base = series_value_at(sf, v.u_list.front());
            double dev_fine = 0.0;
            for (double uu : v.u_list) {
                const double val = series_value_at(sf, uu);
                dev_fine = std::max(dev_fine, std::abs(val - base));
                if (val < v.band_lo || val > v.band_hi) pass = false;
            }
            row.exponent = base; // reported value column carries I0
            if (coarse && coarse->series.count(v.name)) {
                const FluxSeries& sc = coarse->series.at(v.name);
                double cbase = series_value_at(sc, v.u_list.front());
                double dev_coarse = 0.0;
                for (double uu : v.u_list)
                    dev_coarse = std::max(dev_coarse, std::abs(series_value_at(sc, uu) - cbase));
                row.exponent_coarse = cbase;
                row.stderr_ = dev_fine;
                if (!(dev_fine <= dev_coarse / v.np_shrink)) pass = false;
            }
            if (plan.data.predicted_I0 && *plan.data.predicted_I0 != 0.0) {
                if (std::abs(base - *plan.data.predicted_I0) >
                    v.np_predicted_rel * std::abs(*plan.data.predicted_I0))
                    pass = false;
            }
            row.verdict = pass ? "PASS" : "FAIL";
            extra_rows.push_back(row);
            continue;
        }
        if (v.kind == "sharpness_inf") {
            const FluxSeries& sf = fine.series.at(v.name);
            // I0 from the np series when present, else the data's prediction
            double i0 = plan.data.predicted_I0 ? *plan.data.predicted_I0 : 0.0;
            for (const auto& [nm, s] : fine.series)
                if (s.meta.count("probe") && nm != v.name && s.size() > 0 &&
                    nm.rfind("np", 0) == 0)
                    i0 = s.value.front();
            double inf = 0.0;
            bool first = true;
            for (std::size_t t = 0; t < sf.size(); ++t) {
                if (sf.u[t] < v.window.lo || sf.u[t] > v.window.hi) continue;
                if (first || sf.value[t] < inf) inf = sf.value[t];
                first = false;
            }
            const double r_lo = plan.bg.r_norm();
            const double r_max = plan.bg.radius_from_null(v.window.hi, plan.grid.v1);
            const double thresh = v.factor * i0 * i0 * (1.0 / r_lo - 1.0 / r_max);
            ReportRow row;
            row.name = v.name;
            row.tag = v.tag;
            row.exponent = inf;
            row.exponent_coarse = thresh;
            row.band_lo = thresh;
            row.band_hi = 1e300;
            row.verdict = (!first && inf >= thresh) ? "PASS" : "FAIL";
            extra_rows.push_back(row);
            continue;
        }
        if (v.kind == "sharpness_slope") {
            double i0 = plan.data.predicted_I0 ? *plan.data.predicted_I0 : 0.0;
            std::vector<double> lnr, vals;
            for (std::size_t c = 0; c < v.r_hi_list.size(); ++c) {
                const std::string nm = v.name + "_cut" + std::to_string(c);
                lnr.push_back(std::log(v.r_hi_list[c]));
                vals.push_back(series_value_at(fine.series.at(nm), v.u_star));
            }
            const LineFit lf = fit_line(lnr, vals);
            ReportRow row;
            row.name = v.name;
            row.tag = v.tag;
            row.exponent = lf.slope;
            row.stderr_ = lf.slope_stderr;
            row.band_lo = i0 * i0 * (1.0 - v.slope_rel);
            row.band_hi = i0 * i0 * (1.0 + v.slope_rel);
            row.verdict =
                (lf.slope >= row.band_lo && lf.slope <= row.band_hi) ? "PASS" : "FAIL";
            extra_rows.push_back(row);
            continue;
        }
    }

    res.report = decay_report(measurables);
    for (const ReportRow& r : extra_rows) {
        res.report.rows.push_back(r);
        if (r.verdict == "FAIL") res.report.all_pass = false;
    }

    // report.csv + report.txt
    {
        std::ofstream rc(fs::path(out_root) / "report.csv");
        rc << "measurable,theorem_ref,exponent,stderr,band_lo,band_hi,verdict\n";
        for (const ReportRow& r : res.report.rows)
            rc << r.name << "," << r.tag << "," << fmt(r.exponent) << "," << fmt(r.stderr_)
               << "," << fmt(r.band_lo) << "," << fmt(r.band_hi) << "," << r.verdict << "\n";
        rc << "#config_hash=" << cfg.hash() << "\n";
        rc << "#grid_h=" << fine_grid.h << "\n";

        std::ofstream rt(fs::path(out_root) / "report.txt");
        rt << "scenario " << plan.name << " (config " << cfg.hash() << ")\n";
        for (const ReportRow& r : res.report.rows) {
            rt << "  [" << r.verdict << "] " << r.name << " (" << r.tag << ")"
               << "  value " << fmt(r.exponent);
            if (r.band_hi < 1e299)
                rt << "  band [" << fmt(r.band_lo) << ", " << fmt(r.band_hi) << "]";
            else
                rt << "  threshold " << fmt(r.band_lo);
            rt << "\n";
        }
        rt << (res.report.all_pass ? "ALL PASS\n" : "FAILURES PRESENT\n");
        if (fine.stability_warning) rt << "warning: potential under-resolved (|D V| h^2 > 1)\n";
    }

    if (plan.plots) {
        std::ofstream gp(fs::path(out_root) / "plots.gp");
        gp << "# renderer-agnostic plot script (config " << cfg.hash() << ")\n";
        gp << "set logscale xy\nset xlabel 'u'\nset ylabel 'value'\n";
        for (const auto& [name, s] : fine.series)
            gp << "plot 'series_" << name << ".csv' every ::2 using 1:(abs($2)) with lines title '"
               << name << "'\npause -1\n";
    }

    res.exit_code = res.report.all_pass ? 0 : 1;
    return res;
}

int run_sweep(const Config& cfg, const std::string& out_root, int jobs) {
    // axes: sweep.<key> = v1,v2,... applied onto the base config
    std::vector<std::pair<std::string, std::vector<std::string>>> axes;
    for (const std::string& k : cfg.keys_with_prefix("sweep.")) {
        const std::string target = k.substr(6);
        std::vector<std::string> vals;
        std::istringstream ss(cfg.get_string(k));
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            const auto a = tok.find_first_not_of(" \t");
            const auto b = tok.find_last_not_of(" \t");
            if (a != std::string::npos) vals.push_back(tok.substr(a, b - a + 1));
        }
        if (vals.empty()) throw ConfigError("sweep axis '" + k + "' has no values");
        axes.emplace_back(target, vals);
    }

    if (axes.empty()) {
        const ScenarioResult r = run_scenario(cfg, out_root, false);
        return r.exit_code;
    }

    std::vector<Config> cells{cfg};
    std::vector<std::string> names{""};
    for (const auto& [target, vals] : axes) {
        std::vector<Config> nc;
        std::vector<std::string> nn;
        std::string short_name = target.substr(target.find_last_of('.') + 1);
        for (std::size_t i = 0; i < cells.size(); ++i)
            for (const std::string& v : vals) {
                Config c = cells[i];
                c.set(target, v);
                nc.push_back(c);
                nn.push_back(names[i] + (names[i].empty() ? "" : "_") + short_name + "-" + v);
            }
        cells = std::move(nc);
        names = std::move(nn);
    }
    {
        std::set<std::string> uniq(names.begin(), names.end());
        if (uniq.size() != names.size())
            throw ConfigError("sweep: duplicate cell names; axes values must be distinct");
    }

    std::vector<int> codes(cells.size(), 0);
    std::vector<std::future<void>> pool;
    std::atomic<std::size_t> cursor{0};
    const int n_jobs = std::max(1, jobs);
    for (int w = 0; w < n_jobs; ++w) {
        pool.push_back(std::async(std::launch::async, [&]() {
            for (;;) {
                const std::size_t i = cursor.fetch_add(1);
                if (i >= cells.size()) return;
                const std::string cell_dir = (fs::path(out_root) / names[i]).string();
                try {
                    const ScenarioResult r = run_scenario(cells[i], cell_dir, false);
                    codes[i] = r.exit_code;
                } catch (const ConfigError&) {
                    codes[i] = 2;
                } catch (const Error&) {
                    codes[i] = 3;
                }
            }
        }));
    }
    for (auto& f : pool) f.get();

    std::ofstream sum(fs::path(out_root) / "summary.csv");
    sum << "cell,exit,measurable,theorem_ref,exponent,verdict\n";
    int worst = 0;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        worst = std::max(worst, codes[i]);
        const fs::path rep = fs::path(out_root) / names[i] / "report.csv";
        std::ifstream rin(rep);
        std::string line;
        bool first = true;
        while (std::getline(rin, line)) {
            if (first || line.empty() || line[0] == '#') { first = false; continue; }
            std::istringstream ls(line);
            std::string mname, tag, expo, se, blo, bhi, verdict;
            std::getline(ls, mname, ',');
            std::getline(ls, tag, ',');
            std::getline(ls, expo, ',');
            std::getline(ls, se, ',');
            std::getline(ls, blo, ',');
            std::getline(ls, bhi, ',');
            std::getline(ls, verdict, ',');
            sum << names[i] << "," << codes[i] << "," << mname << "," << tag << "," << expo
                << "," << verdict << "\n";
        }
    }
    sum << "#config_hash=" << cfg.hash() << "\n";
    return worst;
}

} // namespace tailwave
