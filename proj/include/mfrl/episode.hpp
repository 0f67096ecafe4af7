#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <utility>
#include <vector>

#include "mfrl/learner.hpp"
#include "mfrl/packing.hpp"
#include "mfrl/probing.hpp"
#include "mfrl/types.hpp"

namespace mfrl {

/// Raised when the process output leaves the configured safe region; the
/// partial trace already handed to the sink is preserved.
class PlantDivergenceError : public std::runtime_error {
public:
    PlantDivergenceError(const std::string& what, long step)
        : std::runtime_error(what), step(step) {}
    long step;
};

/// One row of the per-step episode log.
struct TraceRecord {
    long k = 0;
    double time = 0.0;
    double y = 0.0;
    double y_model = 0.0;
    double error = 0.0;             ///< y_model - y at step k
    double u = 0.0;                 ///< input applied during k -> k+1
    double mu_clean = 0.0;          ///< actor output Omega E_k
    double mu_applied = 0.0;        ///< actor output plus probing noise
    double value = 0.0;             ///< V_hat(Z_k) under the step's updated weights
    double bellman_residual = 0.0;  ///< TD residual of the updated weights on this transition
    double omega_change = 0.0;
    double theta_change = 0.0;
    Eigen::RowVectorXd omega;       ///< actor gains after the step
};

using TraceSink = std::function<void(const TraceRecord&)>;

struct EpisodeResult {
    LearnerState state;
    bool converged = false;
    long convergence_step = -1;
    std::vector<TraceRecord> trace;
};

/// Runs the online actor-critic loop against a process and a reference.
///
/// Plant must provide `double output()` and `double step(double u)` (returning
/// the next output); Reference must provide `double output()` and
/// `double step()`. Both benchmark processes are single-input single-output,
/// and so is this loop.
///
/// Per step k:
///   1. mu_k = Omega E_k, plus probing noise inside the exploration window;
///      the noisy value is the one applied, logged, and learned from.
///   2. target = stage cost U(E_k, mu_k).
///   3. u <- u + mu_k is applied to the process, producing y_{k+1}; the
///      reference advances to y_m_{k+1} and E_{k+1} is formed.
///   4. Critic weights are projected toward
///      V(Z_k) - V(Z_{k+1}) = target, with Z_{k+1} closing the loop through
///      the current strategy.
///   5. Actor gains are projected toward the strategy extracted from the
///      updated kernel at E_k.
///   6. Convergence is declared once both weight-change norms stay below the
///      threshold for `window` consecutive steps. Adaptation continues for
///      the whole horizon (capped at cfg.max_steps) so the strategy keeps
///      re-tuning if the process later changes; the first convergence point
///      is what gets reported.
///
/// The episode aborts with PlantDivergenceError if |y| exceeds
/// cfg.blow_up_bound; rows already written to the sink are preserved.
template <class Plant, class Reference>
EpisodeResult run_online_episode(Plant& plant, Reference& reference, const CostWeights& weights,
                                 const LearnerConfig& cfg, LearnerState state,
                                 const ProbingNoise& noise, long total_steps = -1,
                                 const TraceSink& sink = {}, double sample_period = 1.0) {
    cfg.validate();
    if (state.omega.rows() != 1) {
        throw std::invalid_argument("run_online_episode: drives single-input processes only");
    }
    const Dimensions dims{1, 1, static_cast<int>(state.omega.cols()) - 1};
    dims.validate();
    weights.validate(dims);
    if (state.theta_bar.size() != dims.packed_size()) {
        throw std::invalid_argument("run_online_episode: critic weight length does not match dims");
    }
    {
        // The initial kernel must be symmetric positive definite so that an
        // admissible strategy can be extracted from it.
        const Eigen::MatrixXd theta0 = unpack_kernel(state.theta_bar);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(theta0);
        if (eig.eigenvalues().minCoeff() <= 0.0) {
            throw std::invalid_argument(
                "run_online_episode: initial critic kernel must be positive definite");
        }
    }
    if (total_steps < 0) {
        total_steps = cfg.max_steps;
    }

    EpisodeResult result;
    result.trace.reserve(static_cast<std::size_t>(total_steps));

    ErrorStack errors(dims);
    double y = plant.output();
    double y_model = reference.output();
    errors.push(y_model - y);

    double u = 0.0;
    int quiet_steps = 0;

    for (long k = 0; k < total_steps; ++k) {
        const Eigen::VectorXd error_stack = errors.vector();
        const double mu_clean = (state.omega * error_stack)(0);
        const double probe = (k < cfg.exploration_steps) ? noise.sample(k) : 0.0;
        const double mu_applied = mu_clean + probe;

        Eigen::VectorXd mu_k(1);
        mu_k << mu_applied;
        const double target = critic_target(error_stack, mu_k, weights);

        u += mu_applied;
        const double y_next = plant.step(u);
        if (!std::isfinite(y_next) || std::abs(y_next) > cfg.blow_up_bound) {
            std::ostringstream msg;
            msg << "process output " << y_next << " left the safe region (bound "
                << cfg.blow_up_bound << ") at step " << k;
            throw PlantDivergenceError(msg.str(), k);
        }
        const double y_model_next = reference.step();

        errors.push(y_model_next - y_next);
        const Eigen::VectorXd error_stack_next = errors.vector();
        Eigen::VectorXd mu_next(1);
        mu_next << (state.omega * error_stack_next)(0);

        Eigen::VectorXd z_k(dims.augmented_size());
        z_k << error_stack, mu_k;
        Eigen::VectorXd z_next(dims.augmented_size());
        z_next << error_stack_next, mu_next;
        const Eigen::VectorXd zbar_k = kron_pack_state(z_k);
        const Eigen::VectorXd zbar_next = kron_pack_state(z_next);

        double theta_change = 0.0;
        double omega_change = 0.0;
        if (k <= cfg.max_steps) {
            const Eigen::VectorXd theta_prev = state.theta_bar;
            state.theta_bar =
                critic_update(state.theta_bar, zbar_k, zbar_next, target, cfg.delta_v, cfg.eta_v);
            theta_change =
                (unpack_kernel(state.theta_bar) - unpack_kernel(theta_prev)).norm();

            const QuadraticKernel kernel = QuadraticKernel::from_packed(dims, state.theta_bar);
            const Eigen::VectorXd mu_desired =
                desired_action(kernel, error_stack, cfg.max_condition);
            const Eigen::MatrixXd omega_prev = state.omega;
            state.omega =
                actor_update(state.omega, error_stack, mu_desired, cfg.delta_mu, cfg.eta_mu);
            omega_change = (state.omega - omega_prev).norm();

            state.critic_changes.push_back(theta_change);
            state.actor_changes.push_back(omega_change);
            while (static_cast<int>(state.critic_changes.size()) > cfg.window) {
                state.critic_changes.pop_front();
            }
            while (static_cast<int>(state.actor_changes.size()) > cfg.window) {
                state.actor_changes.pop_front();
            }

            if (theta_change < cfg.threshold && omega_change < cfg.threshold) {
                ++quiet_steps;
                if (quiet_steps >= cfg.window && !result.converged) {
                    result.converged = true;
                    result.convergence_step = k;
                }
            } else {
                quiet_steps = 0;
            }
        }
        state.step = k + 1;

        TraceRecord rec;
        rec.k = k;
        rec.time = static_cast<double>(k) * sample_period;
        rec.y = y;
        rec.y_model = y_model;
        rec.error = error_stack(0);
        rec.u = u;
        rec.mu_clean = mu_clean;
        rec.mu_applied = mu_applied;
        rec.value = evaluate_value(state.theta_bar, z_k);
        rec.bellman_residual = bellman_residual(state.theta_bar, z_k, z_next, error_stack,
                                                mu_k, weights);
        rec.omega_change = omega_change;
        rec.theta_change = theta_change;
        rec.omega = state.omega.row(0);
        if (sink) {
            sink(rec);
        }
        result.trace.push_back(std::move(rec));

        y = y_next;
        y_model = y_model_next;
    }

    result.state = std::move(state);
    return result;
}

}  // namespace mfrl
