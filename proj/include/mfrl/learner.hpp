#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <deque>
#include <sstream>
#include <stdexcept>

#include "mfrl/packing.hpp"
#include "mfrl/types.hpp"

namespace mfrl {

/// Raised when the control block of the critic kernel is too ill-conditioned
/// to extract a strategy from. No silent regularization is applied.
class PolicyExtractionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Tuning constants of the online actor-critic loop.
///
/// The step factors must lie in (0, 2): inside that range each projection
/// update contracts the weight error along the current regressor (see
/// contraction_factor); outside it the error component can grow.
struct LearnerConfig {
    double delta_v = 0.5;          ///< critic step factor, 0 < delta_v < 2
    double eta_v = 1.5;            ///< critic regularizer, > 0
    double delta_mu = 0.5;         ///< actor step factor, 0 < delta_mu < 2
    double eta_mu = 1.5;           ///< actor regularizer, > 0
    long max_steps = 4000;         ///< adaptation step budget
    int window = 30;               ///< consecutive quiet steps required to declare convergence
    double threshold = 5e-4;       ///< weight-change norm regarded as quiet
    long exploration_steps = 250;  ///< steps with probing noise added to the control
    double max_condition = 1e8;    ///< condition bound for policy extraction
    double blow_up_bound = 1e6;    ///< |y| beyond which the episode aborts

    void validate() const {
        if (!(delta_v > 0.0 && delta_v < 2.0)) {
            throw std::invalid_argument("delta_V must satisfy 0 < delta_V < 2");
        }
        if (!(delta_mu > 0.0 && delta_mu < 2.0)) {
            throw std::invalid_argument("delta_mu must satisfy 0 < delta_mu < 2");
        }
        if (!(eta_v > 0.0)) throw std::invalid_argument("eta_V must be positive");
        if (!(eta_mu > 0.0)) throw std::invalid_argument("eta_mu must be positive");
        if (window < 1) throw std::invalid_argument("N must be at least 1");
        if (!(threshold > 0.0)) throw std::invalid_argument("T_r must be positive");
        if (max_steps < 1) throw std::invalid_argument("N_T must be at least 1");
        if (exploration_steps < 0) throw std::invalid_argument("exploration_steps must be >= 0");
        if (!(max_condition >= 1.0)) throw std::invalid_argument("max_condition must be >= 1");
        if (!(blow_up_bound > 0.0)) throw std::invalid_argument("blow_up_bound must be positive");
    }
};

/// Mutable weights of the actor-critic pair plus the recent change history
/// used by the convergence test.
struct LearnerState {
    Eigen::VectorXd theta_bar;          ///< packed critic weights
    Eigen::MatrixXd omega;              ///< t x n_E actor gains
    long step = 0;
    std::deque<double> critic_changes;  ///< last `window` Frobenius change norms
    std::deque<double> actor_changes;
};

/// Desired temporal-difference value for the critic: the observed stage cost.
inline double critic_target(const Eigen::VectorXd& error_stack, const Eigen::VectorXd& mu_hat,
                            const CostWeights& w) {
    return stage_cost(error_stack, mu_hat, w);
}

inline double critic_target(const ErrorStack& errors, const Eigen::VectorXd& mu_hat,
                            const CostWeights& w) {
    return stage_cost(errors.vector(), mu_hat, w);
}

/// One projection step of the critic weights toward satisfying
/// theta_bar . (zbar_k - zbar_next) = target:
///
///   theta <- theta - delta * (theta . ztilde - target) / (eta + |ztilde|^2) * ztilde
///
/// With eta > 0 the update is well defined for ztilde = 0 (no change). With
/// eta = 0, delta = 1 it is the exact minimum-norm projection onto the
/// constraint, so the constraint holds after a single step.
inline Eigen::VectorXd critic_update(const Eigen::VectorXd& theta_bar,
                                     const Eigen::VectorXd& zbar_k,
                                     const Eigen::VectorXd& zbar_next, double target,
                                     double delta_v, double eta_v) {
    if (zbar_k.size() != theta_bar.size() || zbar_next.size() != theta_bar.size()) {
        throw std::invalid_argument("critic_update: packed vector lengths disagree");
    }
    if (!theta_bar.allFinite() || !zbar_k.allFinite() || !zbar_next.allFinite() ||
        !std::isfinite(target)) {
        throw NumericError("critic_update: non-finite input");
    }
    const Eigen::VectorXd ztilde = zbar_k - zbar_next;
    const double excitation = ztilde.squaredNorm();
    if (excitation == 0.0) {
        return theta_bar;
    }
    const double residual = theta_bar.dot(ztilde) - target;
    return theta_bar - (delta_v * residual / (eta_v + excitation)) * ztilde;
}

/// Strategy gains encoded by a critic kernel: -Theta_mm^{-1} Theta_me.
///
/// Throws PolicyExtractionError when the control block is singular or its
/// condition number exceeds max_condition.
inline Eigen::MatrixXd policy_gains(const QuadraticKernel& kernel, double max_condition = 1e8) {
    const Eigen::MatrixXd mm = kernel.mm();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(mm, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const double s_max = sv(0);
    const double s_min = sv(sv.size() - 1);
    if (!(s_min > 0.0) || !(s_max / s_min <= max_condition)) {
        std::ostringstream msg;
        msg << "policy extraction failed: control block of the critic kernel is singular or "
               "ill-conditioned (smallest singular value "
            << s_min << ", condition bound " << max_condition << ")";
        throw PolicyExtractionError(msg.str());
    }
    return -svd.solve(kernel.me());
}

/// Greedy correction control implied by the critic at the given error stack.
inline Eigen::VectorXd desired_action(const QuadraticKernel& kernel,
                                      const Eigen::VectorXd& error_stack,
                                      double max_condition = 1e8) {
    if (error_stack.size() != kernel.dims.error_size()) {
        throw std::invalid_argument("desired_action: error stack length does not match dims");
    }
    return policy_gains(kernel, max_condition) * error_stack;
}

/// One projection step of the actor gains toward Omega E = mu_desired,
/// applied row-wise per control channel:
///
///   Omega <- Omega - delta * (Omega E - mu_desired) E' / (eta + |E|^2)
inline Eigen::MatrixXd actor_update(const Eigen::MatrixXd& omega,
                                    const Eigen::VectorXd& error_stack,
                                    const Eigen::VectorXd& mu_desired, double delta_mu,
                                    double eta_mu) {
    if (omega.cols() != error_stack.size() || omega.rows() != mu_desired.size()) {
        throw std::invalid_argument("actor_update: dimension mismatch");
    }
    if (!omega.allFinite() || !error_stack.allFinite() || !mu_desired.allFinite()) {
        throw NumericError("actor_update: non-finite input");
    }
    const double excitation = error_stack.squaredNorm();
    if (excitation == 0.0) {
        return omega;
    }
    const Eigen::VectorXd residual = omega * error_stack - mu_desired;
    return omega - (delta_mu / (eta_mu + excitation)) * residual * error_stack.transpose();
}

/// Eigenvalue of the weight-error dynamics along the regressor direction:
///
///   Lambda = (eta + (1 - delta) |r|^2) / (eta + |r|^2)
///
/// Strictly below 1 for any nonzero regressor when 0 < delta < 2;
/// all other directions carry eigenvalue 1.
inline double contraction_factor(const Eigen::VectorXd& regressor, double delta, double eta) {
    const double excitation = regressor.squaredNorm();
    return (eta + (1.0 - delta) * excitation) / (eta + excitation);
}

/// Temporal-difference residual V(z_k) - V(z_next) - U(E_k, mu_k); zero for
/// an exact value function under the evaluated strategy.
inline double bellman_residual(const Eigen::VectorXd& theta_bar, const Eigen::VectorXd& z_k,
                               const Eigen::VectorXd& z_next, const Eigen::VectorXd& error_stack,
                               const Eigen::VectorXd& mu, const CostWeights& w) {
    return evaluate_value(theta_bar, z_k) - evaluate_value(theta_bar, z_next) -
           stage_cost(error_stack, mu, w);
}

/// Symmetric positive definite kernel whose extracted strategy equals the
/// given gains: [[I, -m W'], [-m W, m I]] with m |W|_F^2 < 1. Starting the
/// critic here keeps the actor's projection target at W instead of pulling
/// an explicitly chosen initial strategy back toward zero.
inline Eigen::MatrixXd consistent_kernel(const Dimensions& dims, const Eigen::MatrixXd& omega) {
    if (omega.rows() != dims.inputs || omega.cols() != dims.error_size()) {
        throw std::invalid_argument("consistent_kernel: omega must be t x n_E");
    }
    const int n = dims.augmented_size();
    const double m = std::min(1.0, 0.8 / std::max(1e-12, omega.squaredNorm()));
    Eigen::MatrixXd theta = Eigen::MatrixXd::Identity(n, n);
    theta.bottomLeftCorner(dims.inputs, dims.error_size()) = -m * omega;
    theta.topRightCorner(dims.error_size(), dims.inputs) = -m * omega.transpose();
    theta.bottomRightCorner(dims.inputs, dims.inputs) =
        m * Eigen::MatrixXd::Identity(dims.inputs, dims.inputs);
    return theta;
}

/// Initial learner state. Without explicit gains the critic kernel is c * I
/// and the strategy is extracted from it (zero gains). With explicit nonzero
/// gains the kernel is the consistent one for them, so extraction at step 0
/// reproduces the requested strategy.
inline LearnerState make_initial_state(const Dimensions& dims, double kernel_scale = 1.0,
                                       const Eigen::MatrixXd& omega0 = Eigen::MatrixXd()) {
    dims.validate();
    if (!(kernel_scale > 0.0)) {
        throw std::invalid_argument("make_initial_state: kernel scale must be positive");
    }
    LearnerState state;
    const int n = dims.augmented_size();
    if (omega0.size() == 0) {
        state.theta_bar = pack_kernel(kernel_scale * Eigen::MatrixXd::Identity(n, n));
        state.omega = policy_gains(QuadraticKernel::from_packed(dims, state.theta_bar));
    } else if (omega0.isZero(0.0)) {
        if (omega0.rows() != dims.inputs || omega0.cols() != dims.error_size()) {
            throw std::invalid_argument("make_initial_state: omega0 must be t x n_E");
        }
        state.theta_bar = pack_kernel(kernel_scale * Eigen::MatrixXd::Identity(n, n));
        state.omega = omega0;
    } else {
        state.theta_bar = pack_kernel(kernel_scale * consistent_kernel(dims, omega0));
        state.omega = omega0;
    }
    return state;
}

}  // namespace mfrl
