#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <deque>
#include <stdexcept>

#include "mfrl/types.hpp"

namespace mfrl {

/// Rounds to the nearest integer with halfway cases away from zero; the tie
/// rule matters at exact regime and square-wave boundaries.
inline long long round_half_away(double x) {
    return std::llround(x);
}

/// Discrete-time linear process with state and input delays:
///
///   x_{k+1} = A x_k + B u_k + A_d x_{k-d} + B_h u_{k-h},   y_k = C x_k
///
/// Pre-history states and inputs are zero, so the delayed terms vanish for
/// the first d (resp. h) steps.
class DelayedLinearPlant {
public:
    struct Params {
        Eigen::Matrix3d A = Eigen::Matrix3d::Zero();
        Eigen::Matrix3d A_d = Eigen::Matrix3d::Zero();
        Eigen::Vector3d B = Eigen::Vector3d::Zero();
        Eigen::Vector3d B_h = Eigen::Vector3d::Zero();
        Eigen::RowVector3d C = Eigen::RowVector3d::Zero();
        int state_delay = 0;        ///< d, in steps
        int input_delay = 0;        ///< h, in steps
        double sample_period = 1.0; ///< T_s, seconds per step
    };

    DelayedLinearPlant(const Params& params, const Eigen::Vector3d& x0)
        : params_(params), x_(x0) {
        if (params_.state_delay < 0 || params_.input_delay < 0) {
            throw std::invalid_argument("DelayedLinearPlant: delays must be nonnegative");
        }
        state_hist_.assign(static_cast<std::size_t>(params_.state_delay),
                           Eigen::Vector3d::Zero());
        input_hist_.assign(static_cast<std::size_t>(params_.input_delay), 0.0);
    }

    double output() const { return params_.C.dot(x_); }
    const Eigen::Vector3d& state() const { return x_; }
    long step_count() const { return step_; }
    double time() const { return static_cast<double>(step_) * params_.sample_period; }
    const Params& params() const { return params_; }

    /// Advance one sample with input u_k; returns y_{k+1}.
    double step(double u) {
        if (!std::isfinite(u)) {
            throw NumericError("DelayedLinearPlant::step: non-finite input");
        }
        const Eigen::Vector3d& x_delayed =
            params_.state_delay == 0 ? x_ : state_hist_.front();
        const double u_delayed = params_.input_delay == 0 ? u : input_hist_.front();
        const Eigen::Vector3d next = params_.A * x_ + params_.B * u +
                                     params_.A_d * x_delayed + params_.B_h * u_delayed;
        if (params_.state_delay > 0) {
            state_hist_.push_back(x_);
            state_hist_.pop_front();
        }
        if (params_.input_delay > 0) {
            input_hist_.push_back(u);
            input_hist_.pop_front();
        }
        x_ = next;
        ++step_;
        return output();
    }

private:
    Params params_;
    Eigen::Vector3d x_;
    std::deque<Eigen::Vector3d> state_hist_;  // x_{k-d} .. x_{k-1}, oldest first
    std::deque<double> input_hist_;           // u_{k-h} .. u_{k-1}, oldest first
    long step_ = 0;
};

/// Autonomous linear reference: x_m <- A_m x_m, y_m = C_m x_m.
class LinearReferenceModel {
public:
    LinearReferenceModel(const Eigen::Matrix2d& A_m, const Eigen::RowVector2d& C_m,
                         const Eigen::Vector2d& x0)
        : A_m_(A_m), C_m_(C_m), x_(x0) {}

    double output() const { return C_m_.dot(x_); }
    const Eigen::Vector2d& state() const { return x_; }

    /// Advance one sample; returns y_m at the new step.
    double step() {
        x_ = (A_m_ * x_).eval();
        return output();
    }

private:
    Eigen::Matrix2d A_m_;
    Eigen::RowVector2d C_m_;
    Eigen::Vector2d x_;
};

/// Scalar nonlinear benchmark process whose map switches halfway through the
/// horizon:
///
///   first regime  (2k <= N_T):  y_{k+1} = y_k / (1 + y_k^2) + u_k^3
///   second regime (2k >  N_T):  y_{k+1} = (y_k y_{k-1} y_{k-2} u_{k-1} (y_{k-2} - 1)
///                                          + round(2k/N_T) u_k)
///                                         / (1 + y_{k-1}^2 + y_{k-2}^2)
///
/// Histories start at zero.
class NonlinearSwitchingPlant {
public:
    explicit NonlinearSwitchingPlant(long horizon) : horizon_(horizon) {
        if (horizon < 1) {
            throw std::invalid_argument("NonlinearSwitchingPlant: horizon must be positive");
        }
    }

    double output() const { return y_[0]; }
    long step_count() const { return k_; }
    long horizon() const { return horizon_; }

    /// True when the upcoming transition uses the second regime.
    bool second_regime() const { return 2 * k_ > horizon_; }

    double step(double u) {
        if (!std::isfinite(u)) {
            throw NumericError("NonlinearSwitchingPlant::step: non-finite input");
        }
        double next;
        if (!second_regime()) {
            next = y_[0] / (1.0 + y_[0] * y_[0]) + u * u * u;
        } else {
            const double gain =
                static_cast<double>(round_half_away(2.0 * static_cast<double>(k_) /
                                                    static_cast<double>(horizon_)));
            next = (y_[0] * y_[1] * y_[2] * u_prev_ * (y_[2] - 1.0) + gain * u) /
                   (1.0 + y_[1] * y_[1] + y_[2] * y_[2]);
        }
        y_[2] = y_[1];
        y_[1] = y_[0];
        y_[0] = next;
        u_prev_ = u;
        ++k_;
        return next;
    }

private:
    long horizon_;
    long k_ = 0;
    std::array<double, 3> y_{{0.0, 0.0, 0.0}};  // y_k, y_{k-1}, y_{k-2}
    double u_prev_ = 0.0;                       // u_{k-1}
};

/// Desired trajectory for the switching benchmark, evaluated at step k of an
/// N_T-step horizon: two sinusoid phases interleaved with two square-wave
/// phases at boundaries N_T/5, 2 N_T/5, and 4 N_T/5.
inline double piecewise_reference(long k, long horizon) {
    if (horizon < 1) {
        throw std::invalid_argument("piecewise_reference: horizon must be positive");
    }
    const double pi = 3.14159265358979323846;
    const double kd = static_cast<double>(k);
    const auto square = [&](double level) {
        const long long n = round_half_away(2.0 * kd / static_cast<double>(horizon));
        return (n % 2 == 0) ? level : -level;
    };
    if (5 * k <= horizon) {
        return 0.5 * std::sin(kd * pi / 100.0) + 0.3 * std::cos(kd * pi / 50.0);
    }
    if (5 * k <= 2 * horizon) {
        return square(0.5);
    }
    if (5 * k <= 4 * horizon) {
        return 0.5 * std::sin(kd * pi / 100.0) + 0.3 * std::cos(kd * pi / 50.0);
    }
    return square(-0.4);
}

/// Streaming wrapper around piecewise_reference. The recursion only defines
/// the value from step 1 onward; the initial output is taken as zero.
class PiecewiseReference {
public:
    explicit PiecewiseReference(long horizon) : horizon_(horizon) {}

    double output() const { return y_; }

    double step() {
        y_ = piecewise_reference(k_, horizon_);
        ++k_;
        return y_;
    }

private:
    long horizon_;
    long k_ = 0;
    double y_ = 0.0;
};

namespace benchmarks {

/// Delayed linear benchmark (three-state underwater-vehicle model sampled at
/// 10 ms, with a 10-step state delay and a 20-step input delay).
inline DelayedLinearPlant::Params case1_plant_params() {
    DelayedLinearPlant::Params p;
    p.A << 0.9817, -0.0119, 0.0,
           0.0099,  0.9999, 0.0,
           0.0,    -0.01,   1.0;
    p.A_d << 0.0099,  0.005,   0.005,
             0.0,    -0.001,  -0.0005,
            -0.001,  -0.0005,  0.001;
    p.B << -0.0131, -0.0001, 0.0;
    p.B_h << 0.001, 0.0001, 0.0001;
    p.C << -0.8784, -2.3961, 0.6464;
    p.state_delay = 10;
    p.input_delay = 20;
    p.sample_period = 0.01;
    return p;
}

inline Eigen::Vector3d case1_initial_state() {
    return {-0.2956, -0.7210, -1.7932};
}

/// Undamped oscillator reference for the delayed linear benchmark.
inline LinearReferenceModel case1_reference(const Eigen::Vector2d& x0 = {0.0, 1.0}) {
    Eigen::Matrix2d A_m;
    A_m << 1.0, 0.01,
          -0.01, 1.0;
    Eigen::RowVector2d C_m;
    C_m << 1.0, 0.0;
    return LinearReferenceModel(A_m, C_m, x0);
}

inline DelayedLinearPlant case1_plant() {
    return DelayedLinearPlant(case1_plant_params(), case1_initial_state());
}

inline NonlinearSwitchingPlant case2_plant(long horizon = 4000) {
    return NonlinearSwitchingPlant(horizon);
}

inline PiecewiseReference case2_reference(long horizon = 4000) {
    return PiecewiseReference(horizon);
}

}  // namespace benchmarks

}  // namespace mfrl
