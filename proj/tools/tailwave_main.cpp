// tailwave: scenario runner and verification harness for characteristic
// scalar-wave evolutions on spherically symmetric black-hole exteriors.
//
//   tailwave run <cfg> [--jobs N] [--dry-run] [--out DIR]
//   tailwave check [--filter NAME]
//   tailwave sweep <cfg> [--jobs N] [--out DIR]
//
// Exit codes: 0 all verdicts pass, 1 verdict failure, 2 config error,
// 3 runtime numerical error.

#include "tailwave/checks.hpp"
#include "tailwave/errors.hpp"
#include "tailwave/scenario.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <thread>

int main(int argc, char** argv) {
    CLI::App app{"characteristic wave-tail evolutions and diagnostics"};
    app.require_subcommand(1);

    std::string cfg_path, out_dir, filter;
    int jobs = static_cast<int>(std::thread::hardware_concurrency());
    bool dry_run = false;

    CLI::App* run = app.add_subcommand("run", "run one scenario config");
    run->add_option("config", cfg_path, "scenario config file")->required();
    run->add_option("--jobs", jobs, "parallelism degree");
    run->add_flag("--dry-run", dry_run, "validate and print the resolved plan only");
    run->add_option("--out", out_dir, "output directory (overrides config and TAILWAVE_OUT)");

    CLI::App* check = app.add_subcommand("check", "run the fast property suite");
    check->add_option("--filter", filter, "run only checks whose name contains this");

    CLI::App* sweep = app.add_subcommand("sweep", "cross-product parameter sweep");
    sweep->add_option("config", cfg_path, "sweep config file")->required();
    sweep->add_option("--jobs", jobs, "parallelism degree");
    sweep->add_option("--out", out_dir, "output directory (overrides config and TAILWAVE_OUT)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            const tailwave::Config cfg = tailwave::Config::parse_file(cfg_path);
            const std::string root = tailwave::resolve_out_root(cfg, out_dir);
            const tailwave::ScenarioResult r = tailwave::run_scenario(cfg, root, dry_run);
            if (!dry_run) {
                for (const auto& row : r.report.rows)
                    std::cout << "[" << row.verdict << "] " << row.name << " value "
                              << row.exponent << "\n";
                std::cout << (r.exit_code == 0 ? "ALL PASS" : "FAILURES PRESENT") << " ("
                          << root << ")\n";
            }
            return r.exit_code;
        }
        if (check->parsed()) {
            const auto results = tailwave::run_checks(filter);
            if (results.empty()) {
                std::cerr << "no checks match filter '" << filter << "'\n";
                return 2;
            }
            bool all = true;
            for (const auto& c : results) {
                std::cout << (c.pass ? "[PASS] " : "[FAIL] ") << c.name << ": " << c.detail
                          << "\n";
                all = all && c.pass;
            }
            return all ? 0 : 1;
        }
        if (sweep->parsed()) {
            const tailwave::Config cfg = tailwave::Config::parse_file(cfg_path);
            const std::string root = tailwave::resolve_out_root(cfg, out_dir);
            return tailwave::run_sweep(cfg, root, jobs);
        }
    } catch (const tailwave::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const tailwave::Error& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 2;
}
