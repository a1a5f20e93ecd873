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
#include "qntk/kernel.hpp"

#include "qntk/error.hpp"
#include "qntk/io.hpp"
#include "qntk/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <fmt/core.h>

namespace qntk::kernel {

namespace {

constexpr int kMaxSweeps = 100;

double max_abs(const Eigen::MatrixXd &m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

void require_square(const Eigen::MatrixXd &m, const char *what) {
    if (m.rows() != m.cols()) {
        throw StructuralError(fmt::format("{} must be square, got {}x{}", what,
                                          m.rows(), m.cols()));
    }
}

} // namespace

EigenSystem eig_sym(const Eigen::MatrixXd &matrix) {
    require_square(matrix, "eig_sym input");
    const Eigen::Index n = matrix.rows();
    const double scale = std::max(1.0, max_abs(matrix));
    if (max_abs(matrix - matrix.transpose()) > 1e-10 * scale) {
        throw StructuralError("eig_sym input is not symmetric");
    }
    if (!matrix.allFinite()) {
        throw NumericalError("eig_sym input has non-finite entries");
    }

    Eigen::MatrixXd a = 0.5 * (matrix + matrix.transpose());
    Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
    const double norm = a.norm();

    auto off_diagonal = [&] {
        double off = 0.0;
        for (Eigen::Index p = 0; p < n; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                off += a(p, q) * a(p, q);
            }
        }
        return std::sqrt(off);
    };

    bool converged = n <= 1;
    for (int sweep = 0; sweep < kMaxSweeps && !converged; ++sweep) {
        if (off_diagonal() <= 1e-15 * norm) {
            converged = true;
            break;
        }
        for (Eigen::Index p = 0; p < n - 1; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) {
                    continue;
                }
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t =
                    std::copysign(1.0, theta) /
                    (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;

                for (Eigen::Index k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double vkp = v(k, p);
                    const double vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }
    if (!converged && off_diagonal() > 1e-12 * norm) {
        throw NumericalError("Jacobi eigensolver did not converge");
    }

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index i, Eigen::Index j) {
                         return a(i, i) < a(j, j);
                     });

    EigenSystem out{Eigen::VectorXd(n), Eigen::MatrixXd(n, n)};
    for (Eigen::Index r = 0; r < n; ++r) {
        const auto src = order[static_cast<std::size_t>(r)];
        out.eigenvalues(r) = a(src, src);
        out.eigenvectors.row(r) = v.col(src).transpose();
    }
    return out;
}

double KernelBundle::lambda_max() const {
    return eigenvalues.size() == 0 ? 0.0 : eigenvalues(eigenvalues.size() - 1);
}

void to_json(nlohmann::json &j, const Diagnostics &d) {
    j = nlohmann::json{{"lambda_min", d.lambda_min}, {"lambda_max", d.lambda_max},
                       {"kappa", d.kappa},           {"eta_crit", d.eta_crit},
                       {"tau", d.tau},               {"cutoff_used", d.cutoff_used},
                       {"rank", d.rank},             {"dimension", d.dimension}};
}

Eigen::MatrixXd stacked_jacobian(const model::QnnModel &model,
                                 std::span<const double> theta,
                                 const Eigen::MatrixXd &inputs) {
    const auto M = static_cast<std::size_t>(inputs.rows());
    if (M == 0) {
        throw StructuralError("kernel needs at least one input");
    }
    if (static_cast<std::size_t>(inputs.cols()) != model.input_dim()) {
        throw StructuralError(fmt::format(
            "inputs have {} columns, model expects {}", inputs.cols(),
            model.input_dim()));
    }
    const auto C = static_cast<Eigen::Index>(model.n_outputs());
    const auto P = static_cast<Eigen::Index>(model.param_count());
    Eigen::MatrixXd G(static_cast<Eigen::Index>(M) * C, P);

    parallel_for(M, [&](std::size_t i) {
        const Eigen::VectorXd x = inputs.row(static_cast<Eigen::Index>(i));
        const auto g = model::model_gradient(
            model, std::span<const double>(x.data(), x.size()), theta);
        G.middleRows(static_cast<Eigen::Index>(i) * C, C) = g;
    });
    if (!G.allFinite()) {
        throw NumericalError("non-finite gradient entry in kernel assembly");
    }
    return G;
}

Eigen::MatrixXd gram(const Eigen::MatrixXd &G) {
    Eigen::MatrixXd K = G * G.transpose();
    for (Eigen::Index i = 0; i < K.rows(); ++i) {
        for (Eigen::Index j = i + 1; j < K.cols(); ++j) {
            K(j, i) = K(i, j);
        }
    }
    return K;
}

Eigen::MatrixXd kernel_matrix(const model::QnnModel &model,
                              std::span<const double> theta,
                              const Eigen::MatrixXd &inputs) {
    return gram(stacked_jacobian(model, theta, inputs));
}

Eigen::MatrixXd cross_kernel(const model::QnnModel &model,
                             std::span<const double> theta,
                             const Eigen::MatrixXd &test_inputs,
                             const Eigen::MatrixXd &train_inputs) {
    const Eigen::MatrixXd Gt = stacked_jacobian(model, theta, test_inputs);
    const Eigen::MatrixXd Gr = stacked_jacobian(model, theta, train_inputs);
    return Gt * Gr.transpose();
}

KernelBundle make_bundle(Eigen::MatrixXd K, double cutoff_rel) {
    require_square(K, "kernel");
    auto eig = eig_sym(K);
    KernelBundle bundle{std::move(K), std::move(eig.eigenvalues),
                        std::move(eig.eigenvectors), {}, 0.0};
    bundle.cutoff_used = cutoff_rel * bundle.lambda_max();
    bundle.K_inv = regularized_inverse(bundle, cutoff_rel);
    return bundle;
}

Diagnostics diagnostics(const KernelBundle &bundle, double cutoff_rel) {
    const double lmax = bundle.lambda_max();
    if (!(lmax > 0.0)) {
        throw SingularKernelError("kernel has no positive eigenvalue");
    }
    const double cutoff = cutoff_rel * lmax;
    double lmin = lmax;
    std::size_t rank = 0;
    for (const double l : bundle.eigenvalues) {
        if (l > cutoff) {
            lmin = std::min(lmin, l);
            ++rank;
        }
    }
    Diagnostics d;
    d.lambda_min = lmin;
    d.lambda_max = lmax;
    d.kappa = lmax / lmin;
    d.eta_crit = 2.0 / lmax;
    d.tau = 2.0 * d.kappa;
    d.cutoff_used = cutoff;
    d.rank = rank;
    d.dimension = static_cast<std::size_t>(bundle.eigenvalues.size());
    return d;
}

Eigen::MatrixXd regularized_inverse(const KernelBundle &bundle,
                                    double cutoff_rel) {
    const double lmax = bundle.lambda_max();
    if (!(lmax > 0.0)) {
        throw SingularKernelError("kernel has no eigenvalue above the cutoff");
    }
    const double cutoff = cutoff_rel * lmax;
    const Eigen::VectorXd inv = bundle.eigenvalues.unaryExpr(
        [cutoff](double l) { return l > cutoff ? 1.0 / l : 0.0; });
    const auto &A = bundle.eigenvectors;
    Eigen::MatrixXd out = A.transpose() * inv.asDiagonal() * A;
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
        for (Eigen::Index j = i + 1; j < out.cols(); ++j) {
            out(j, i) = out(i, j);
        }
    }
    return out;
}

Eigen::MatrixXd inference_map(const Eigen::MatrixXd &cross,
                              const Eigen::MatrixXd &K_inv) {
    if (cross.cols() != K_inv.rows() || K_inv.rows() != K_inv.cols()) {
        throw StructuralError(fmt::format(
            "inference map shape mismatch: cross {}x{}, K_inv {}x{}",
            cross.rows(), cross.cols(), K_inv.rows(), K_inv.cols()));
    }
    return cross * K_inv;
}

Eigen::VectorXd predict_at_time(const Eigen::MatrixXd &cross,
                                const KernelBundle &bundle,
                                const Eigen::VectorXd &labels, double eta,
                                double t) {
    if (!(eta > 0.0)) {
        throw ConfigError("learning rate must be positive");
    }
    if (!(t >= 0.0)) {
        throw ConfigError("time must be non-negative");
    }
    const auto n = bundle.eigenvalues.size();
    if (cross.cols() != n || labels.size() != n) {
        throw StructuralError("predict_at_time shape mismatch");
    }
    const double lmax = bundle.lambda_max();
    if (!(lmax > 0.0)) {
        throw SingularKernelError("kernel has no eigenvalue above the cutoff");
    }
    const double cutoff = bundle.cutoff_used;
    Eigen::VectorXd z = bundle.eigenvectors * labels;
    for (Eigen::Index k = 0; k < n; ++k) {
        const double l = bundle.eigenvalues(k);
        z(k) *= l > cutoff ? -std::expm1(-eta * l * t) / l : 0.0;
    }
    return cross * (bundle.eigenvectors.transpose() * z);
}

Eigen::VectorXd predict_infinite(const Eigen::MatrixXd &cross,
                                 const Eigen::MatrixXd &K_inv,
                                 const Eigen::VectorXd &labels) {
    if (labels.size() != K_inv.cols()) {
        throw StructuralError("label vector does not match kernel size");
    }
    return inference_map(cross, K_inv) * labels;
}

Eigen::VectorXd error_trajectory(const KernelBundle &bundle, double eta,
                                 const Eigen::VectorXd &eps0, long long t) {
    if (t < 0) {
        throw ConfigError("step count must be non-negative");
    }
    if (eps0.size() != bundle.eigenvalues.size()) {
        throw StructuralError("residual vector does not match kernel size");
    }
    Eigen::VectorXd z = bundle.eigenvectors * eps0;
    for (Eigen::Index k = 0; k < z.size(); ++k) {
        z(k) *= std::pow(1.0 - eta * bundle.eigenvalues(k),
                         static_cast<double>(t));
    }
    return bundle.eigenvectors.transpose() * z;
}

Eigen::VectorXd flatten(const Eigen::MatrixXd &labels) {
    Eigen::VectorXd out(labels.size());
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < labels.rows(); ++i) {
        for (Eigen::Index j = 0; j < labels.cols(); ++j) {
            out(k++) = labels(i, j);
        }
    }
    return out;
}

std::string matrix_csv(const Eigen::MatrixXd &matrix, std::size_t n_outputs) {
    if (n_outputs == 0) {
        throw StructuralError("output count must be positive");
    }
    const auto label = [n_outputs](Eigen::Index a) {
        const auto u = static_cast<std::size_t>(a);
        return fmt::format("{}.{}", u / n_outputs, u % n_outputs);
    };
    std::vector<std::string> header{"alpha"};
    for (Eigen::Index c = 0; c < matrix.cols(); ++c) {
        header.push_back(label(c));
    }
    std::string out = io::csv_row(header);
    for (Eigen::Index r = 0; r < matrix.rows(); ++r) {
        std::vector<std::string> row{label(r)};
        for (Eigen::Index c = 0; c < matrix.cols(); ++c) {
            row.push_back(io::format_double(matrix(r, c)));
        }
        out += io::csv_row(row);
    }
    return out;
}

} // namespace qntk::kernel
