#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <deque>
#include <stdexcept>

#include "mfrl/plants.hpp"

namespace mfrl {

/// Sliding-mode model-following controller for the delayed linear benchmark.
///
/// Unlike the learner this baseline consumes the full process and reference
/// states, plus the process matrices, each step:
///
///   tau_k   = x_k - G x_m_k
///   E_k     = E_{k-1} + S_f (A + B K) tau_{k-1} + S_f A_d tau_{k-11}
///             + S_f B_h K tau_{k-21}                       (E_0 = 0)
///   sigma_k = S_f tau_k - S_f exp(-0.1 k) tau_0 - E_k
///   R_k     = R_{k-1} + sigma_k - 0.5 sigma_{k-1}
///   u_k     = H x_m_k + K tau_k + K_0 exp(-0.1 (k+1)) tau_0
///             + 75.6846 R_k - 75.6846 E_k - 37.8423 sigma_k
///
/// The input-delay term folds the nominal feedback u ~ K tau into B_h, which
/// keeps the accumulator scalar. Pre-history tau values are zero. The 0.5
/// coefficient in the R recursion multiplies sigma_{k-1} by default; setting
/// delta_as_previous_sigma = false drops that term instead.
class SmcController {
public:
    struct Gains {
        Eigen::Matrix<double, 3, 2> G;
        Eigen::RowVector2d H;
        Eigen::RowVector3d S_f;
        Eigen::RowVector3d K;
        Eigen::RowVector3d K_reaching;   ///< coefficient row of the exp-decay feedforward
        double r_gain = 75.6846;
        double e_gain = 75.6846;
        double sigma_gain = 37.8423;
        double reaching_decay = 0.1;
        double sigma_feedback = 0.5;
        bool delta_as_previous_sigma = true;
    };

    SmcController(const DelayedLinearPlant::Params& plant, const Gains& gains)
        : gains_(gains),
          sf_closed_loop_(gains.S_f * (plant.A + plant.B * gains.K)),
          sf_state_delay_(gains.S_f * plant.A_d),
          sf_input_delay_((gains.S_f * plant.B_h) * gains.K),
          tau_hist_(21, Eigen::Vector3d::Zero()) {}

    long step_count() const { return k_; }
    double surface() const { return sigma_prev_; }
    double error_accumulator() const { return e_acc_; }

    /// Control input u_k from the measured process and reference states;
    /// advances the internal accumulators.
    double control(const Eigen::Vector3d& x, const Eigen::Vector2d& x_model) {
        const Eigen::Vector3d tau = x - gains_.G * x_model;
        if (k_ == 0) {
            tau_0_ = tau;
        } else {
            const Eigen::Vector3d& tau_1 = tau_hist_[20];   // tau_{k-1}
            const Eigen::Vector3d& tau_11 = tau_hist_[10];  // tau_{k-11}
            const Eigen::Vector3d& tau_21 = tau_hist_[0];   // tau_{k-21}
            e_acc_ += sf_closed_loop_.dot(tau_1) + sf_state_delay_.dot(tau_11) +
                      sf_input_delay_.dot(tau_21);
        }
        const double decay = std::exp(-gains_.reaching_decay * static_cast<double>(k_));
        const double sigma =
            gains_.S_f.dot(tau) - gains_.S_f.dot(tau_0_) * decay - e_acc_;
        const double delta_prev = gains_.delta_as_previous_sigma ? sigma_prev_ : 0.0;
        r_acc_ += sigma - gains_.sigma_feedback * delta_prev;

        const double feedforward =
            gains_.K_reaching.dot(tau_0_) *
            std::exp(-gains_.reaching_decay * static_cast<double>(k_ + 1));
        const double u = gains_.H.dot(x_model) + gains_.K.dot(tau) + feedforward +
                         gains_.r_gain * r_acc_ - gains_.e_gain * e_acc_ -
                         gains_.sigma_gain * sigma;

        tau_hist_.push_back(tau);
        tau_hist_.pop_front();
        sigma_prev_ = sigma;
        ++k_;
        return u;
    }

private:
    Gains gains_;
    Eigen::RowVector3d sf_closed_loop_;
    Eigen::RowVector3d sf_state_delay_;
    Eigen::RowVector3d sf_input_delay_;
    std::deque<Eigen::Vector3d> tau_hist_;  // tau_{k-21} .. tau_{k-1}, oldest first
    Eigen::Vector3d tau_0_ = Eigen::Vector3d::Zero();
    double e_acc_ = 0.0;
    double r_acc_ = 0.0;
    double sigma_prev_ = 0.0;
    long k_ = 0;
};

namespace benchmarks {

inline SmcController::Gains case1_smc_gains() {
    SmcController::Gains g;
    g.G << -0.1785,  0.0292,
           -0.3275, -0.0152,
            0.0905, -0.0326;
    g.H << 0.9999, -0.0100;
    g.S_f << 1.0, 1.85, -0.825;
    g.K << 145.9573, 270.1303, -120.8601;
    g.K_reaching << -75.6846, -140.0165, 62.4398;
    return g;
}

inline SmcController case1_smc(bool delta_as_previous_sigma = true) {
    SmcController::Gains g = case1_smc_gains();
    g.delta_as_previous_sigma = delta_as_previous_sigma;
    return SmcController(case1_plant_params(), g);
}

}  // namespace benchmarks

/// High-order model-free adaptive controller for the switching benchmark.
///
/// Keeps a pseudo-partial-derivative estimate phi updated from input/output
/// increments, then mixes past inputs and the tracking error:
///
///   phi_k = sum_i beta_i phi_{k-i}
///           + 0.8 du / (0.01 + du^2) ((y_k - y_{k-1}) - du sum_i beta_i phi_{k-i})
///   u_k   = phi_k^2 / (0.1 + phi_k^2) u_{k-1}
///           + 0.1 / (0.1 + phi_k^2) sum_i beta_bar_i u_{k-i}
///           + 0.8 phi_k (y_m_k - y_k) / (0.1 + phi_k^2)
///
/// with du = u_{k-1} - u_{k-2}. Both weight vectors sum to one, so a matched
/// reference with constant input history holds that input steady. Histories
/// start with phi = 0.5 and zero inputs/outputs.
class MfacController {
public:
    MfacController() { phi_hist_.fill(0.5); }

    /// Start from explicit histories (newest first) instead of the defaults.
    MfacController(const std::array<double, 6>& phi_hist, const std::array<double, 4>& u_hist,
                   double y_prev = 0.0, double y_prev2 = 0.0)
        : phi_hist_(phi_hist), u_hist_(u_hist), y_prev_(y_prev), y_prev2_(y_prev2) {}

    double phi() const { return phi_hist_[0]; }
    long step_count() const { return k_; }

    double control(double y, double y_model) {
        double phi_mix = 0.0;
        for (std::size_t i = 0; i < beta_.size(); ++i) {
            phi_mix += beta_[i] * phi_hist_[i];
        }
        const double du = u_hist_[0] - u_hist_[1];
        const double phi =
            phi_mix + 0.8 * du / (0.01 + du * du) * ((y - y_prev_) - du * phi_mix);

        double u_mix = 0.0;
        for (std::size_t i = 0; i < beta_bar_.size(); ++i) {
            u_mix += beta_bar_[i] * u_hist_[i];
        }
        const double denom = 0.1 + phi * phi;
        const double u = (phi * phi / denom) * u_hist_[0] + (0.1 / denom) * u_mix +
                         0.8 * phi * (y_model - y) / denom;

        for (std::size_t i = phi_hist_.size() - 1; i > 0; --i) {
            phi_hist_[i] = phi_hist_[i - 1];
        }
        phi_hist_[0] = phi;
        for (std::size_t i = u_hist_.size() - 1; i > 0; --i) {
            u_hist_[i] = u_hist_[i - 1];
        }
        u_hist_[0] = u;
        y_prev2_ = y_prev_;
        y_prev_ = y;
        ++k_;
        return u;
    }

private:
    static constexpr std::array<double, 6> beta_ = {1.0 / 2, 1.0 / 4, 1.0 / 8,
                                                    1.0 / 16, 1.0 / 32, 1.0 / 32};
    static constexpr std::array<double, 4> beta_bar_ = {1.0 / 2, 1.0 / 4, 1.0 / 8, 1.0 / 8};
    std::array<double, 6> phi_hist_{};  // phi_{k-1} .. phi_{k-6}
    std::array<double, 4> u_hist_{};    // u_{k-1} .. u_{k-4}
    double y_prev_ = 0.0;
    double y_prev2_ = 0.0;
    long k_ = 0;
};

}  // namespace mfrl
