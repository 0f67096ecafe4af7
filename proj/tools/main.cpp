// Command-line front end: runs experiments, validates configs, and compares
// metrics files produced by previous runs.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "mfrl/mfrl.hpp"

namespace {

void apply_overrides(mfrl::ExperimentConfig& cfg, const std::string& case_name,
                     const std::string& controller, std::int64_t seed, std::int64_t steps,
                     const std::string& out) {
    if (!case_name.empty()) {
        if (case_name == "case1") cfg.benchmark = mfrl::BenchmarkCase::case1;
        else if (case_name == "case2") cfg.benchmark = mfrl::BenchmarkCase::case2;
        else if (case_name == "custom") cfg.benchmark = mfrl::BenchmarkCase::custom;
        else throw std::invalid_argument("--case must be case1, case2, or custom");
    }
    if (!controller.empty()) {
        if (controller == "rl") cfg.controller = mfrl::ControllerKind::rl;
        else if (controller == "smc") cfg.controller = mfrl::ControllerKind::smc;
        else if (controller == "mfac") cfg.controller = mfrl::ControllerKind::mfac;
        else throw std::invalid_argument("--controller must be rl, smc, or mfac");
    }
    if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
    if (steps > 0) cfg.steps = steps;
    if (!out.empty()) cfg.out_path = out;
    cfg.validate();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"model-following adaptive control experiments"};
    app.require_subcommand(1);

    std::string config_path;
    std::string case_name;
    std::string controller;
    std::int64_t seed = -1;
    std::int64_t steps = -1;
    std::string out_path;

    auto* run = app.add_subcommand("run", "run one experiment and write trace + metrics CSVs");
    run->add_option("--config", config_path, "config file (key = value)")->required();
    run->add_option("--case", case_name, "override case: case1|case2|custom");
    run->add_option("--controller", controller, "override controller: rl|smc|mfac");
    run->add_option("--seed", seed, "override seed");
    run->add_option("--steps", steps, "override run length");
    run->add_option("--out", out_path, "override trace output path");

    std::vector<std::string> metrics_files;
    std::string compare_out;
    auto* compare = app.add_subcommand("compare", "tabulate two or more metrics files");
    compare->add_option("metrics", metrics_files, "metrics CSV files from previous runs")
        ->required()
        ->expected(-2);
    compare->add_option("--out", compare_out, "also write the comparison as CSV");

    std::string validate_path;
    auto* validate = app.add_subcommand("validate", "check a config file and echo its canonical form");
    validate->add_option("--config", validate_path, "config file (key = value)")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            mfrl::ExperimentConfig cfg = mfrl::load_config(config_path);
            apply_overrides(cfg, case_name, controller, seed, steps, out_path);
            const mfrl::RunMetrics m = mfrl::run_experiment(cfg);
            std::cout << "case " << m.benchmark << ", controller " << m.controller << ", seed "
                      << m.seed << ", steps " << m.steps << "\n";
            std::cout << "converged: " << (m.converged ? "yes" : "no");
            if (m.convergence_step >= 0) std::cout << " (step " << m.convergence_step << ")";
            std::cout << "\n";
            std::cout << "rms error (full run):   " << m.rms_error_full << "\n";
            std::cout << "rms error (last 10%):   " << m.rms_error_last << "\n";
            std::cout << "mean |error| (last 10%): " << m.steady_state_offset << "\n";
            std::cout << "max |td residual| (last 10%): " << m.max_bellman_residual << "\n";
            if (m.gains.size() > 0) {
                std::cout << "actor gains:";
                for (int i = 0; i < m.gains.size(); ++i) std::cout << " " << m.gains(i);
                std::cout << "\n";
            }
            std::cout << "trace:   " << cfg.out_path << "\n";
            std::cout << "metrics: " << mfrl::metrics_path(cfg.out_path) << "\n";
        } else if (compare->parsed()) {
            std::vector<mfrl::RunMetrics> rows;
            for (const auto& file : metrics_files) {
                for (auto& m : mfrl::read_metrics_csv(file)) {
                    rows.push_back(std::move(m));
                }
            }
            const mfrl::Comparison result = mfrl::compare_runs(std::move(rows));
            std::cout << result.text;
            if (!compare_out.empty()) {
                const std::filesystem::path p(compare_out);
                if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
                std::ofstream out(compare_out, std::ios::binary);
                if (!out) throw std::invalid_argument("cannot open '" + compare_out + "'");
                out << result.csv;
                std::cout << "wrote " << compare_out << "\n";
            }
        } else if (validate->parsed()) {
            const mfrl::ExperimentConfig cfg = mfrl::load_config(validate_path);
            std::cout << "ok\n" << mfrl::serialize_config(cfg);
        }
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 1;
    }
    return 0;
}
