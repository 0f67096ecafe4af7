#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <stdexcept>
#include <string>

namespace mfrl {

/// Numeric failure (non-finite values fed to an update or simulator step).
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Problem sizes of the model-following loop.
///
/// `history` counts the *extra* past error samples kept besides the current
/// one, so the stacked error vector has (history + 1) * outputs entries.
struct Dimensions {
    int outputs = 1;  ///< p, number of process outputs
    int inputs = 1;   ///< t, number of control inputs
    int history = 0;  ///< r, extra past error samples

    /// Length n_E of the stacked error vector.
    int error_size() const { return (history + 1) * outputs; }

    /// Length n_Z of the augmented vector [E; mu].
    int augmented_size() const { return error_size() + inputs; }

    /// Length q = n_Z (n_Z + 1) / 2 of the packed quadratic coefficient vector.
    int packed_size() const {
        const int n = augmented_size();
        return n * (n + 1) / 2;
    }

    void validate() const {
        if (outputs < 1 || inputs < 1 || history < 0) {
            throw std::invalid_argument(
                "Dimensions: require outputs >= 1, inputs >= 1, history >= 0");
        }
    }
};

/// Moving stack of the newest (history + 1) output errors,
/// ordered newest first: [e_k; e_{k-1}; ...; e_{k-r}].
///
/// Starts zero-filled, so the stack is well defined before r+1 samples exist.
class ErrorStack {
public:
    explicit ErrorStack(const Dimensions& dims)
        : dims_(dims), entries_(Eigen::VectorXd::Zero(dims.error_size())) {
        dims_.validate();
    }

    /// Shift in the newest output error; the oldest block falls off the end.
    void push(const Eigen::VectorXd& error) {
        if (error.size() != dims_.outputs) {
            throw std::invalid_argument("ErrorStack::push: error must have " +
                                        std::to_string(dims_.outputs) + " entries");
        }
        const int p = dims_.outputs;
        const int n = dims_.error_size();
        if (n > p) {
            entries_.tail(n - p) = entries_.head(n - p).eval();
        }
        entries_.head(p) = error;
    }

    /// Scalar-output convenience.
    void push(double error) {
        push(Eigen::VectorXd::Constant(1, error));
    }

    const Eigen::VectorXd& vector() const { return entries_; }
    const Dimensions& dims() const { return dims_; }

private:
    Dimensions dims_;
    Eigen::VectorXd entries_;
};

/// Augmented vector Z = [E; mu] the value function is quadratic in.
struct AugmentedState {
    Eigen::VectorXd z;

    static AugmentedState from(const ErrorStack& errors, const Eigen::VectorXd& mu) {
        if (mu.size() != errors.dims().inputs) {
            throw std::invalid_argument("AugmentedState: mu must have t entries");
        }
        AugmentedState state;
        state.z.resize(errors.vector().size() + mu.size());
        state.z << errors.vector(), mu;
        return state;
    }
};

/// Quadratic stage-cost weights: Q (n_E x n_E, symmetric PSD) on the error
/// stack and R (t x t, symmetric PD) on the correction control.
struct CostWeights {
    Eigen::MatrixXd Q;
    Eigen::MatrixXd R;

    static CostWeights diagonal(const Dimensions& dims, double q, double r) {
        CostWeights w;
        w.Q = q * Eigen::MatrixXd::Identity(dims.error_size(), dims.error_size());
        w.R = r * Eigen::MatrixXd::Identity(dims.inputs, dims.inputs);
        return w;
    }

    void validate(const Dimensions& dims) const {
        if (Q.rows() != dims.error_size() || Q.cols() != dims.error_size()) {
            throw std::invalid_argument("CostWeights: Q must be n_E x n_E");
        }
        if (R.rows() != dims.inputs || R.cols() != dims.inputs) {
            throw std::invalid_argument("CostWeights: R must be t x t");
        }
        const double q_scale = std::max(1.0, Q.cwiseAbs().maxCoeff());
        const double r_scale = std::max(1.0, R.cwiseAbs().maxCoeff());
        if ((Q - Q.transpose()).cwiseAbs().maxCoeff() > 1e-12 * q_scale ||
            (R - R.transpose()).cwiseAbs().maxCoeff() > 1e-12 * r_scale) {
            throw std::invalid_argument("CostWeights: Q and R must be symmetric");
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eq(Q);
        if (eq.eigenvalues().minCoeff() < -1e-12 * q_scale) {
            throw std::invalid_argument("CostWeights: Q must be positive semidefinite");
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> er(R);
        if (er.eigenvalues().minCoeff() <= 0.0) {
            throw std::invalid_argument("CostWeights: R must be positive definite");
        }
    }
};

/// Stage cost 0.5 (E' Q E + mu' R mu); nonnegative for valid weights, and
/// zero exactly when Q E = 0 and mu = 0.
inline double stage_cost(const Eigen::VectorXd& error_stack, const Eigen::VectorXd& mu,
                         const CostWeights& w) {
    if (w.Q.rows() != error_stack.size() || w.Q.cols() != error_stack.size()) {
        throw std::invalid_argument("stage_cost: Q dimensions do not match the error stack");
    }
    if (w.R.rows() != mu.size() || w.R.cols() != mu.size()) {
        throw std::invalid_argument("stage_cost: R dimensions do not match the control");
    }
    return 0.5 * (error_stack.dot(w.Q * error_stack) + mu.dot(w.R * mu));
}

inline double stage_cost(const ErrorStack& errors, const Eigen::VectorXd& mu,
                         const CostWeights& w) {
    return stage_cost(errors.vector(), mu, w);
}

}  // namespace mfrl
