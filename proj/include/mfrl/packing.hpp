#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mfrl/types.hpp"

namespace mfrl {

// Packed ordering of a symmetric n x n quadratic form: index pairs (i, j)
// with 0 <= i <= j < n, row-major over i. This ordering is part of the
// on-disk and in-memory contract; do not change it.

/// Flat position of the pair (i, j), i <= j, in the packed ordering.
inline int packed_index(int i, int j, int n) {
    return i * n - i * (i - 1) / 2 + (j - i);
}

/// Side length n of the symmetric matrix whose packed form has q entries.
inline int packed_side(int q) {
    const int n = static_cast<int>(std::lround((std::sqrt(8.0 * q + 1.0) - 1.0) / 2.0));
    if (n * (n + 1) / 2 != q) {
        throw std::invalid_argument("packed vector length is not of the form n(n+1)/2");
    }
    return n;
}

/// Pairwise-product features of z: entry (i, j) is z_i * z_j for i <= j.
inline Eigen::VectorXd kron_pack_state(const Eigen::VectorXd& z) {
    const int n = static_cast<int>(z.size());
    Eigen::VectorXd packed(n * (n + 1) / 2);
    int idx = 0;
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            packed(idx++) = z(i) * z(j);
        }
    }
    return packed;
}

inline Eigen::VectorXd kron_pack_state(const AugmentedState& state) {
    return kron_pack_state(state.z);
}

/// Packs a symmetric kernel so that dot(pack_kernel(T), kron_pack_state(z))
/// reproduces 0.5 z' T z exactly: diagonal pairs carry 0.5 T_ii, off-diagonal
/// pairs carry T_ij (the symmetric pair folded together).
inline Eigen::VectorXd pack_kernel(const Eigen::MatrixXd& theta) {
    if (theta.rows() != theta.cols()) {
        throw std::invalid_argument("pack_kernel: kernel must be square");
    }
    const double scale = std::max(1.0, theta.cwiseAbs().maxCoeff());
    if ((theta - theta.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
        throw std::invalid_argument("pack_kernel: kernel must be symmetric");
    }
    const int n = static_cast<int>(theta.rows());
    Eigen::VectorXd packed(n * (n + 1) / 2);
    int idx = 0;
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            packed(idx++) = (i == j) ? 0.5 * theta(i, i) : theta(i, j);
        }
    }
    return packed;
}

/// Exact inverse of pack_kernel; the result is symmetric by construction.
inline Eigen::MatrixXd unpack_kernel(const Eigen::VectorXd& packed) {
    const int n = packed_side(static_cast<int>(packed.size()));
    Eigen::MatrixXd theta(n, n);
    int idx = 0;
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            const double v = packed(idx++);
            if (i == j) {
                theta(i, i) = 2.0 * v;
            } else {
                theta(i, j) = v;
                theta(j, i) = v;
            }
        }
    }
    return theta;
}

/// Value estimate dot(theta_bar, kron_pack_state(z)); equals 0.5 z' T z when
/// theta_bar = pack_kernel(T).
inline double evaluate_value(const Eigen::VectorXd& theta_bar, const Eigen::VectorXd& z) {
    const int n = static_cast<int>(z.size());
    if (static_cast<int>(theta_bar.size()) != n * (n + 1) / 2) {
        throw std::invalid_argument("evaluate_value: packed length does not match the state");
    }
    return theta_bar.dot(kron_pack_state(z));
}

inline double evaluate_value(const Eigen::VectorXd& theta_bar, const AugmentedState& state) {
    return evaluate_value(theta_bar, state.z);
}

/// Symmetric critic kernel with the [E; mu] block partition.
struct QuadraticKernel {
    Dimensions dims;
    Eigen::MatrixXd theta;

    static QuadraticKernel from_packed(const Dimensions& dims, const Eigen::VectorXd& packed) {
        QuadraticKernel kernel{dims, unpack_kernel(packed)};
        if (kernel.theta.rows() != dims.augmented_size()) {
            throw std::invalid_argument("QuadraticKernel: packed length does not match dims");
        }
        return kernel;
    }

    Eigen::MatrixXd ee() const { return theta.topLeftCorner(dims.error_size(), dims.error_size()); }
    Eigen::MatrixXd em() const { return theta.topRightCorner(dims.error_size(), dims.inputs); }
    Eigen::MatrixXd me() const { return theta.bottomLeftCorner(dims.inputs, dims.error_size()); }
    Eigen::MatrixXd mm() const { return theta.bottomRightCorner(dims.inputs, dims.inputs); }
};

}  // namespace mfrl
