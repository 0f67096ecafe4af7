#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mfrl/baselines.hpp"
#include "mfrl/config.hpp"
#include "mfrl/episode.hpp"
#include "mfrl/learner.hpp"
#include "mfrl/plants.hpp"
#include "mfrl/types.hpp"

namespace mfrl {

/// Streams trace records to CSV with the fixed column layout
///   k,t,y,y_m,eps,u,mu_clean,mu_applied,V_hat,bellman_residual,
///   omega_change_norm,theta_change_norm,omega_1..omega_{n_E}
class TraceCsvWriter {
public:
    TraceCsvWriter(const std::string& path, int error_size) : error_size_(error_size) {
        const std::filesystem::path p(path);
        if (p.has_parent_path()) {
            std::filesystem::create_directories(p.parent_path());
        }
        out_.open(path, std::ios::binary);
        if (!out_) {
            throw std::invalid_argument("cannot open trace output '" + path + "'");
        }
        out_ << "k,t,y,y_m,eps,u,mu_clean,mu_applied,V_hat,bellman_residual,"
                "omega_change_norm,theta_change_norm";
        for (int i = 1; i <= error_size_; ++i) {
            out_ << ",omega_" << i;
        }
        out_ << "\n";
    }

    void write(const TraceRecord& rec) {
        out_ << rec.k << "," << format_double(rec.time) << "," << format_double(rec.y) << ","
             << format_double(rec.y_model) << "," << format_double(rec.error) << ","
             << format_double(rec.u) << "," << format_double(rec.mu_clean) << ","
             << format_double(rec.mu_applied) << "," << format_double(rec.value) << ","
             << format_double(rec.bellman_residual) << "," << format_double(rec.omega_change)
             << "," << format_double(rec.theta_change);
        for (int i = 0; i < error_size_; ++i) {
            out_ << "," << format_double(i < rec.omega.size() ? rec.omega(i) : 0.0);
        }
        out_ << "\n";
    }

    void flush() { out_.flush(); }

private:
    int error_size_;
    std::ofstream out_;
};

/// Summary numbers of one run. The "last" window is the final 10% of the
/// trace (at least one step).
struct RunMetrics {
    std::string benchmark;
    std::string controller;
    std::uint64_t seed = 0;
    long steps = 0;
    bool converged = false;
    long convergence_step = -1;  ///< -1 means never converged
    double rms_error_full = 0.0;
    double rms_error_last = 0.0;
    double steady_state_offset = 0.0;      ///< mean |eps| over the last window
    double mean_stage_cost_last = 0.0;     ///< mean stage cost over the last window
    double mean_stage_cost_full = 0.0;     ///< running mean stage cost at the end of the run
    double max_bellman_residual = 0.0;     ///< max |TD residual| over the last window
    Eigen::RowVectorXd gains;              ///< final actor gains (zero for baselines)
    std::string hash;
};

namespace detail {

inline std::size_t last_window_start(std::size_t n) {
    const std::size_t window = std::max<std::size_t>(1, n / 10);
    return n - window;
}

}  // namespace detail

/// Reduces a trace to RunMetrics. Stage costs are recomputed from the logged
/// errors (rebuilding the error stack, zero pre-history) and applied controls.
inline RunMetrics compute_metrics(const std::vector<TraceRecord>& trace,
                                  const ExperimentConfig& cfg, bool converged,
                                  long convergence_step, const Eigen::RowVectorXd& gains) {
    if (trace.empty()) {
        throw std::invalid_argument("compute_metrics: empty trace");
    }
    RunMetrics m;
    m.benchmark = to_string(cfg.benchmark);
    m.controller = to_string(cfg.controller);
    m.seed = cfg.seed;
    m.steps = static_cast<long>(trace.size());
    m.converged = converged;
    m.convergence_step = convergence_step;
    m.gains = gains;
    m.hash = config_hash(cfg);

    const std::size_t n = trace.size();
    const std::size_t start = detail::last_window_start(n);
    double sum_sq_full = 0.0;
    double sum_sq_last = 0.0;
    double sum_abs_last = 0.0;
    double sum_cost_last = 0.0;
    double sum_cost_full = 0.0;
    double max_residual = 0.0;
    const int depth = cfg.dims.history;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = trace[i].error;
        sum_sq_full += e * e;
        double stack_sq = 0.0;
        for (int back = 0; back <= depth; ++back) {
            const double past = (static_cast<long>(i) - back >= 0) ? trace[i - back].error : 0.0;
            stack_sq += past * past;
        }
        const double mu = trace[i].mu_applied;
        const double cost = 0.5 * (cfg.q_weight * stack_sq + cfg.r_weight * mu * mu);
        sum_cost_full += cost;
        if (i >= start) {
            sum_sq_last += e * e;
            sum_abs_last += std::abs(e);
            max_residual = std::max(max_residual, std::abs(trace[i].bellman_residual));
            sum_cost_last += cost;
        }
    }
    const double count_last = static_cast<double>(n - start);
    m.rms_error_full = std::sqrt(sum_sq_full / static_cast<double>(n));
    m.rms_error_last = std::sqrt(sum_sq_last / count_last);
    m.steady_state_offset = sum_abs_last / count_last;
    m.mean_stage_cost_last = sum_cost_last / count_last;
    m.mean_stage_cost_full = sum_cost_full / static_cast<double>(n);
    m.max_bellman_residual = max_residual;
    return m;
}

inline std::string metrics_path(const std::string& trace_path) {
    const std::string suffix = ".csv";
    if (trace_path.size() > suffix.size() &&
        trace_path.compare(trace_path.size() - suffix.size(), suffix.size(), suffix) == 0) {
        return trace_path.substr(0, trace_path.size() - suffix.size()) + ".metrics.csv";
    }
    return trace_path + ".metrics.csv";
}

inline void write_metrics_csv(const std::string& path, const RunMetrics& m) {
    const std::filesystem::path p(path);
    if (p.has_parent_path()) {
        std::filesystem::create_directories(p.parent_path());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::invalid_argument("cannot open metrics output '" + path + "'");
    }
    out << "case,controller,seed,steps,converged,convergence_step,rms_error_full,"
           "rms_error_last10,steady_state_offset,mean_stage_cost_last10,"
           "mean_stage_cost_full,max_bellman_residual_last10,config_hash";
    for (int i = 1; i <= m.gains.size(); ++i) {
        out << ",omega_" << i;
    }
    out << "\n";
    out << m.benchmark << "," << m.controller << "," << m.seed << "," << m.steps << ","
        << (m.converged ? 1 : 0) << ",";
    if (m.convergence_step >= 0) {
        out << m.convergence_step;
    }
    out << "," << format_double(m.rms_error_full) << "," << format_double(m.rms_error_last)
        << "," << format_double(m.steady_state_offset) << ","
        << format_double(m.mean_stage_cost_last) << "," << format_double(m.mean_stage_cost_full)
        << "," << format_double(m.max_bellman_residual) << "," << m.hash;
    for (int i = 0; i < m.gains.size(); ++i) {
        out << "," << format_double(m.gains(i));
    }
    out << "\n";
}

inline std::vector<RunMetrics> read_metrics_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::invalid_argument("cannot open metrics file '" + path + "'");
    }
    std::string header;
    if (!std::getline(in, header)) {
        throw std::invalid_argument(path + ": empty metrics file");
    }
    const std::string expected =
        "case,controller,seed,steps,converged,convergence_step,rms_error_full,"
        "rms_error_last10,steady_state_offset,mean_stage_cost_last10,"
        "mean_stage_cost_full,max_bellman_residual_last10,config_hash";
    if (header.compare(0, expected.size(), expected) != 0) {
        throw std::invalid_argument(path + ": unexpected metrics header");
    }
    std::vector<RunMetrics> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (detail::trim(line).empty()) continue;
        std::vector<std::string> fields;
        std::string field;
        std::istringstream ls(line);
        while (std::getline(ls, field, ',')) fields.push_back(field);
        if (fields.size() < 13) {
            throw std::invalid_argument(path + ": short metrics row");
        }
        RunMetrics m;
        m.benchmark = fields[0];
        m.controller = fields[1];
        m.seed = static_cast<std::uint64_t>(std::stoull(fields[2]));
        m.steps = std::stol(fields[3]);
        m.converged = fields[4] == "1";
        m.convergence_step = fields[5].empty() ? -1 : std::stol(fields[5]);
        m.rms_error_full = std::stod(fields[6]);
        m.rms_error_last = std::stod(fields[7]);
        m.steady_state_offset = std::stod(fields[8]);
        m.mean_stage_cost_last = std::stod(fields[9]);
        m.mean_stage_cost_full = std::stod(fields[10]);
        m.max_bellman_residual = std::stod(fields[11]);
        m.hash = fields[12];
        m.gains.resize(static_cast<Eigen::Index>(fields.size() - 13));
        for (std::size_t i = 13; i < fields.size(); ++i) {
            m.gains(static_cast<Eigen::Index>(i - 13)) = std::stod(fields[i]);
        }
        rows.push_back(std::move(m));
    }
    return rows;
}

namespace detail {

/// Drives a state-feedback or output-feedback baseline and fills the
/// learner-specific trace columns with zeros so the CSV schema is identical
/// across controllers.
template <class Plant, class Reference, class ComputeControl>
std::vector<TraceRecord> run_baseline_loop(Plant& plant, Reference& reference,
                                           const ExperimentConfig& cfg, double sample_period,
                                           TraceCsvWriter* writer,
                                           ComputeControl&& compute_control) {
    std::vector<TraceRecord> trace;
    trace.reserve(static_cast<std::size_t>(cfg.steps));
    const int n_e = cfg.dims.error_size();
    double u_prev = 0.0;
    for (long k = 0; k < cfg.steps; ++k) {
        const double y = plant.output();
        const double y_model = reference.output();
        const double u = compute_control(k, y, y_model);
        TraceRecord rec;
        rec.k = k;
        rec.time = static_cast<double>(k) * sample_period;
        rec.y = y;
        rec.y_model = y_model;
        rec.error = y_model - y;
        rec.u = u;
        rec.mu_clean = u - u_prev;
        rec.mu_applied = u - u_prev;
        rec.omega = Eigen::RowVectorXd::Zero(n_e);
        if (writer) {
            writer->write(rec);
        }
        trace.push_back(std::move(rec));
        const double y_next = plant.step(u);
        if (!std::isfinite(y_next) || std::abs(y_next) > cfg.learner.blow_up_bound) {
            std::ostringstream msg;
            msg << "process output " << y_next << " left the safe region (bound "
                << cfg.learner.blow_up_bound << ") at step " << k;
            throw PlantDivergenceError(msg.str(), k);
        }
        reference.step();
        u_prev = u;
    }
    return trace;
}

inline LearnerState initial_state_from(const ExperimentConfig& cfg) {
    Eigen::MatrixXd omega0;
    if (!cfg.omega0.empty()) {
        omega0.resize(cfg.dims.inputs, cfg.dims.error_size());
        int idx = 0;
        for (int i = 0; i < omega0.rows(); ++i) {
            for (int j = 0; j < omega0.cols(); ++j) {
                omega0(i, j) = cfg.omega0[static_cast<std::size_t>(idx++)];
            }
        }
    }
    return make_initial_state(cfg.dims, cfg.theta0_scale, omega0);
}

}  // namespace detail

/// Runs one experiment: wires the selected controller to the selected
/// process/reference pair, streams the per-step trace to cfg.out_path,
/// writes the metrics row next to it, and returns the metrics.
inline RunMetrics run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    const int n_e = cfg.dims.error_size();
    TraceCsvWriter writer(cfg.out_path, n_e);

    std::vector<TraceRecord> trace;
    bool converged = false;
    long convergence_step = -1;
    Eigen::RowVectorXd gains = Eigen::RowVectorXd::Zero(n_e);

    const bool linear_family =
        cfg.benchmark == BenchmarkCase::case1 || cfg.benchmark == BenchmarkCase::custom;
    DelayedLinearPlant::Params plant_params;
    Eigen::Vector3d x0 = Eigen::Vector3d::Zero();
    if (cfg.benchmark == BenchmarkCase::case1) {
        plant_params = benchmarks::case1_plant_params();
        x0 = benchmarks::case1_initial_state();
    } else if (cfg.benchmark == BenchmarkCase::custom) {
        plant_params = {cfg.custom.A,           cfg.custom.A_d,        cfg.custom.B,
                        cfg.custom.B_h,         cfg.custom.C,          cfg.custom.state_delay,
                        cfg.custom.input_delay, cfg.custom.sample_period};
        x0 = cfg.custom.x0;
    }

    switch (cfg.controller) {
        case ControllerKind::rl: {
            const auto sink = [&writer](const TraceRecord& rec) { writer.write(rec); };
            EpisodeResult result;
            if (linear_family) {
                DelayedLinearPlant plant(plant_params, x0);
                LinearReferenceModel reference =
                    cfg.benchmark == BenchmarkCase::case1
                        ? benchmarks::case1_reference(cfg.x_m0)
                        : LinearReferenceModel(cfg.custom.A_m, cfg.custom.C_m, cfg.x_m0);
                result = run_online_episode(plant, reference, cfg.cost(), cfg.learner,
                                            detail::initial_state_from(cfg), cfg.noise(),
                                            cfg.steps, sink, plant_params.sample_period);
            } else {
                NonlinearSwitchingPlant plant(cfg.learner.max_steps);
                PiecewiseReference reference(cfg.learner.max_steps);
                result = run_online_episode(plant, reference, cfg.cost(), cfg.learner,
                                            detail::initial_state_from(cfg), cfg.noise(),
                                            cfg.steps, sink, 1.0);
            }
            trace = std::move(result.trace);
            converged = result.converged;
            convergence_step = result.convergence_step;
            gains = result.state.omega.row(0);
            break;
        }
        case ControllerKind::smc: {
            DelayedLinearPlant plant(plant_params, x0);
            LinearReferenceModel reference =
                cfg.benchmark == BenchmarkCase::case1
                    ? benchmarks::case1_reference(cfg.x_m0)
                    : LinearReferenceModel(cfg.custom.A_m, cfg.custom.C_m, cfg.x_m0);
            SmcController::Gains smc_gains = benchmarks::case1_smc_gains();
            smc_gains.delta_as_previous_sigma = cfg.smc_delta_prev_sigma;
            SmcController smc(plant_params, smc_gains);
            // The baseline reads the true process and reference states; this
            // channel is not available to the learner.
            trace = detail::run_baseline_loop(
                plant, reference, cfg, plant_params.sample_period, &writer,
                [&](long, double, double) { return smc.control(plant.state(), reference.state()); });
            break;
        }
        case ControllerKind::mfac: {
            NonlinearSwitchingPlant plant(cfg.learner.max_steps);
            PiecewiseReference reference(cfg.learner.max_steps);
            MfacController mfac;
            trace = detail::run_baseline_loop(
                plant, reference, cfg, 1.0, &writer,
                [&](long, double y, double y_model) { return mfac.control(y, y_model); });
            break;
        }
    }

    writer.flush();
    const RunMetrics metrics = compute_metrics(trace, cfg, converged, convergence_step, gains);
    write_metrics_csv(metrics_path(cfg.out_path), metrics);
    return metrics;
}

/// Side-by-side view of two or more runs of the same benchmark case.
struct Comparison {
    std::string text;
    std::string csv;
};

inline Comparison compare_runs(std::vector<RunMetrics> runs) {
    if (runs.size() < 2) {
        throw std::invalid_argument("compare_runs: need at least two runs");
    }
    for (const auto& run : runs) {
        if (run.benchmark != runs.front().benchmark) {
            throw std::invalid_argument("compare_runs: runs come from different cases");
        }
    }
    std::stable_sort(runs.begin(), runs.end(), [](const RunMetrics& a, const RunMetrics& b) {
        if (a.controller != b.controller) return a.controller < b.controller;
        if (a.seed != b.seed) return a.seed < b.seed;
        return a.hash < b.hash;
    });

    std::ostringstream text;
    text << "case: " << runs.front().benchmark << "\n";
    text << std::left << std::setw(12) << "controller" << std::setw(8) << "seed" << std::setw(11)
         << "converged" << std::setw(11) << "conv_step" << std::setw(14) << "rms_full"
         << std::setw(14) << "rms_last10" << std::setw(14) << "offset" << std::setw(14)
         << "max_residual" << "\n";
    std::ostringstream csv;
    csv << "case,controller,seed,converged,convergence_step,rms_error_full,rms_error_last10,"
           "steady_state_offset,max_bellman_residual_last10\n";
    for (const auto& m : runs) {
        std::ostringstream conv;
        if (m.convergence_step >= 0) conv << m.convergence_step;
        text << std::left << std::setw(12) << m.controller << std::setw(8) << m.seed
             << std::setw(11) << (m.converged ? "yes" : "no") << std::setw(11)
             << (conv.str().empty() ? "-" : conv.str()) << std::setw(14) << std::setprecision(6)
             << m.rms_error_full << std::setw(14) << m.rms_error_last << std::setw(14)
             << m.steady_state_offset << std::setw(14) << m.max_bellman_residual << "\n";
        csv << m.benchmark << "," << m.controller << "," << m.seed << ","
            << (m.converged ? 1 : 0) << "," << conv.str() << ","
            << format_double(m.rms_error_full) << "," << format_double(m.rms_error_last) << ","
            << format_double(m.steady_state_offset) << ","
            << format_double(m.max_bellman_residual) << "\n";
    }
    return Comparison{text.str(), csv.str()};
}

}  // namespace mfrl
