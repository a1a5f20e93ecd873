// Copyright 2026 The QNTK Diagnostics Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
/**
 * @file
 * Quantum neural tangent kernel at initialization: Gram matrix of output
 * gradients over a merged (data point, output) index, its spectrum, the
 * diagnostics derived from it, and the frozen-kernel predictors.
 *
 * Merged index convention: alpha = i * C + j for data point i and output j.
 * Eigenvectors are stored as the rows of `A`, so K = A^T diag(lambda) A.
 */
#pragma once

#include "qntk/models.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <span>
#include <string>

namespace qntk::kernel {

inline constexpr double kDefaultCutoff = 1e-10;

/// Symmetric eigendecomposition. Eigenvalues ascending; rows of
/// `eigenvectors` are the matching orthonormal eigenvectors.
struct EigenSystem {
    Eigen::VectorXd eigenvalues;
    Eigen::MatrixXd eigenvectors;
};

/**
 * @brief Cyclic Jacobi eigensolver for symmetric matrices.
 *
 * Sweeps over all off-diagonal pairs with classical rotations until the
 * off-diagonal Frobenius mass drops below machine precision relative to the
 * matrix norm. Throws StructuralError when the input is not symmetric to
 * 1e-10 (relative to its largest entry, floor 1).
 */
[[nodiscard]] EigenSystem eig_sym(const Eigen::MatrixXd &matrix);

struct KernelBundle {
    Eigen::MatrixXd K;
    Eigen::VectorXd eigenvalues;  // ascending
    Eigen::MatrixXd eigenvectors; // rows; K = A^T D A
    Eigen::MatrixXd K_inv;        // spectral pseudo-inverse
    double cutoff_used{0.0};      // absolute threshold cutoff_rel * lambda_max

    [[nodiscard]] double lambda_max() const;
};

struct Diagnostics {
    double lambda_min{0.0};
    double lambda_max{0.0};
    double kappa{0.0};
    double eta_crit{0.0};
    double tau{0.0};
    double cutoff_used{0.0};
    std::size_t rank{0};      // eigenvalues above cutoff_used
    std::size_t dimension{0}; // MC

    [[nodiscard]] bool full_rank() const { return rank == dimension; }
};

void to_json(nlohmann::json &j, const Diagnostics &d);

/// Stacked Jacobian G (MC x P), row alpha = i * C + j.
[[nodiscard]] Eigen::MatrixXd stacked_jacobian(const model::QnnModel &model,
                                               std::span<const double> theta,
                                               const Eigen::MatrixXd &inputs);

/// G G^T, mirrored from its upper triangle so it is exactly symmetric.
[[nodiscard]] Eigen::MatrixXd gram(const Eigen::MatrixXd &G);

/// Kernel on `inputs` (M x d) at parameters `theta`.
[[nodiscard]] Eigen::MatrixXd kernel_matrix(const model::QnnModel &model,
                                            std::span<const double> theta,
                                            const Eigen::MatrixXd &inputs);

/// Cross-kernel between test (T x d) and training (M x d) inputs,
/// shape TC x MC.
[[nodiscard]] Eigen::MatrixXd cross_kernel(const model::QnnModel &model,
                                           std::span<const double> theta,
                                           const Eigen::MatrixXd &test_inputs,
                                           const Eigen::MatrixXd &train_inputs);

/// Eigensystem and regularized inverse for an assembled kernel.
[[nodiscard]] KernelBundle make_bundle(Eigen::MatrixXd K,
                                       double cutoff_rel = kDefaultCutoff);

/**
 * @brief Spectral diagnostics.
 *
 * lambda_min is the smallest eigenvalue above cutoff_rel * lambda_max, so a
 * rank-deficient kernel is described on its retained eigenspace; `rank`
 * records how much of it survives. Throws SingularKernelError only when no
 * eigenvalue is positive. eta_crit = 2 / lambda_max,
 * kappa = lambda_max / lambda_min and tau = 2 kappa.
 */
[[nodiscard]] Diagnostics diagnostics(const KernelBundle &bundle,
                                      double cutoff_rel = kDefaultCutoff);

/// Pseudo-inverse keeping eigenvalues above cutoff_rel * lambda_max.
[[nodiscard]] Eigen::MatrixXd
regularized_inverse(const KernelBundle &bundle,
                    double cutoff_rel = kDefaultCutoff);

/// K_tilde * K_inv.
[[nodiscard]] Eigen::MatrixXd inference_map(const Eigen::MatrixXd &cross,
                                            const Eigen::MatrixXd &K_inv);

/// K_tilde K^+ (1 - exp(-eta K t)) y, gradient-flow time `t`.
[[nodiscard]] Eigen::VectorXd predict_at_time(const Eigen::MatrixXd &cross,
                                              const KernelBundle &bundle,
                                              const Eigen::VectorXd &labels,
                                              double eta, double t);

/// K_tilde K^+ y.
[[nodiscard]] Eigen::VectorXd predict_infinite(const Eigen::MatrixXd &cross,
                                               const Eigen::MatrixXd &K_inv,
                                               const Eigen::VectorXd &labels);

/// (1 - eta K)^t eps0 for integer GD step count `t`.
[[nodiscard]] Eigen::VectorXd error_trajectory(const KernelBundle &bundle,
                                               double eta,
                                               const Eigen::VectorXd &eps0,
                                               long long t);

/// Row-major flattening of an M x C label matrix onto the merged index.
[[nodiscard]] Eigen::VectorXd flatten(const Eigen::MatrixXd &labels);

/// CSV of a kernel block: header "alpha" then the column merged indices
/// written "i.j", one row per row index in the same notation.
[[nodiscard]] std::string matrix_csv(const Eigen::MatrixXd &matrix,
                                     std::size_t n_outputs);

} // namespace qntk::kernel
