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
 * Scores, the Fourier-spectrum probe and the diagnostic report that sets
 * kernel predictions against trained models over a seed ensemble.
 */
#pragma once

#include "qntk/datasets.hpp"
#include "qntk/kernel.hpp"
#include "qntk/models.hpp"
#include "qntk/training.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace qntk::analysis {

/// 1 - sum eps^2 / sum (y - mean y)^2. Throws UndefinedMetricError on
/// constant labels.
[[nodiscard]] double r2_score(std::span<const double> preds,
                              std::span<const double> labels);

/// (1/D) sum |a_i - b_i|.
[[nodiscard]] double aad(std::span<const double> a, std::span<const double> b);

/// (1/D) sum (a_i - b_i)^2.
[[nodiscard]] double mean_squared_error(std::span<const double> a,
                                        std::span<const double> b);

// Fourier spectrum --------------------------------------------------------------

struct SpectrumReport {
    std::vector<int> frequencies;      // -N/2 .. N/2 - 1
    std::vector<double> mean_abs_coeff; // ensemble mean of |c_j|
    std::vector<double> mean_sq_coeff;  // ensemble mean of |c_j|^2
    double mean_power{0.0};             // ensemble mean of (1/N) sum f^2
    std::size_t ensemble_size{0};
    std::size_t grid_size{0};

    /// sum_{|w| > cutoff} |c| / sum |c|.
    [[nodiscard]] double high_frequency_mass(double cutoff) const;
    /// |c_j| for a signed frequency.
    [[nodiscard]] double magnitude(int omega) const;
};

/// Sample points -pi + 2 pi k / N, k = 0..N-1.
[[nodiscard]] std::vector<double> fourier_grid(std::size_t grid_size);

/**
 * @brief Spectrum of sampled signals, one row per ensemble member.
 *
 * c_j = (1/N) sum_k f_k exp(-2 pi i j k / N), so cos(x) gives |c_{+-1}| = 0.5
 * and sum_j |c_j|^2 equals the mean signal power.
 */
[[nodiscard]] SpectrumReport
spectrum_from_samples(const std::vector<std::vector<double>> &signals);

/// First model output on fourier_grid() for each parameter vector.
[[nodiscard]] SpectrumReport
fourier_spectrum(const model::QnnModel &model,
                 const std::vector<model::ParamVector> &params,
                 std::size_t grid_size = 64);

/// As above with parameters drawn by train::initial_params per seed.
[[nodiscard]] SpectrumReport
fourier_spectrum(const model::QnnModel &model,
                 std::span<const std::uint64_t> seeds,
                 std::size_t grid_size = 64);

[[nodiscard]] std::string spectrum_csv(const SpectrumReport &report);
void to_json(nlohmann::json &j, const SpectrumReport &r);

// Learning-rate selection ---------------------------------------------------------

struct EtaMode {
    enum class Kind { Crit, Fraction, Absolute };
    Kind kind{Kind::Crit};
    double value{1.0};

    void validate() const;
};

void to_json(nlohmann::json &j, const EtaMode &m);
/// Accepts "crit", {"fraction": f} or {"absolute": eta}.
void from_json(const nlohmann::json &j, EtaMode &m);

/// crit -> 2 / lambda_max, fraction f -> f * 2 / lambda_max,
/// absolute -> value.
[[nodiscard]] double resolve_eta(const EtaMode &mode,
                                 const kernel::Diagnostics &diag);

// Diagnostic report -------------------------------------------------------------

struct Aggregate {
    double mean{0.0};
    double std{0.0}; // population standard deviation
    std::size_t count{0};
};

/// Mean and standard deviation; count 0 for an empty input.
[[nodiscard]] Aggregate aggregate(std::span<const double> values);

struct SeedResult {
    std::uint64_t seed{0};
    std::string status{"ok"}; // ok, singular_kernel, divergence, numerical
    std::string message;
    std::optional<kernel::Diagnostics> diagnostics;
    double eta{0.0};
    std::size_t epochs_run{0};
    bool converged{false};
    double final_loss{0.0};
    double rel_param_change{0.0};
    double loss_increase_fraction{0.0};
    Eigen::VectorXd qntk_test;     // merged index over test points
    Eigen::VectorXd qnn_test;
    Eigen::VectorXd qntk_extended; // merged index over extended inputs
    Eigen::VectorXd qnn_extended;
    std::optional<double> r2_qntk;
    std::optional<double> r2_qnn;
    double mse_qntk{0.0};
    double mse_qnn{0.0};
    double aad{0.0};

    [[nodiscard]] bool ok() const { return status == "ok"; }
};

struct DiagnosticReport {
    model::ModelConfig model;
    train::TrainConfig train;
    EtaMode eta_mode;
    std::string dataset;
    Eigen::VectorXd test_labels;     // merged index
    Eigen::MatrixXd extended_inputs; // D x d
    std::vector<SeedResult> seeds;
    // Ensemble curves over successful seeds, merged index on extended inputs.
    Eigen::VectorXd qntk_mean, qntk_std, qnn_mean, qnn_std;
    /// AAD between the ensemble-mean curves.
    std::optional<double> aad_of_means;
    std::map<std::string, Aggregate> aggregates;
};

/// Inputs used for AAD and prediction curves: 100 points across the feature
/// range for one-dimensional data, the 0.1-step square grid otherwise.
[[nodiscard]] Eigen::MatrixXd extended_inputs(const data::Dataset &dataset);

/**
 * @brief Runs the kernel diagnostics and a training run per seed.
 *
 * Each seed draws theta_0, builds the kernel on the training split, predicts
 * with the infinite-time formula and trains at the resolved learning rate.
 * Kernels with no positive eigenvalue and divergent runs are recorded on their seed entry and
 * excluded from the aggregates.
 */
[[nodiscard]] DiagnosticReport
build_report(const model::ModelConfig &config, const data::Dataset &dataset,
             std::span<const std::uint64_t> seeds,
             const train::TrainConfig &train_config,
             const EtaMode &eta_mode = {});

/// Same, for an already built (possibly hand-written) model.
[[nodiscard]] DiagnosticReport
build_report(const model::QnnModel &model, const data::Dataset &dataset,
             std::span<const std::uint64_t> seeds,
             const train::TrainConfig &train_config,
             const EtaMode &eta_mode = {});

void to_json(nlohmann::json &j, const DiagnosticReport &r);

[[nodiscard]] std::string predictions_csv(const DiagnosticReport &r);
[[nodiscard]] std::string training_csv(const DiagnosticReport &r);
[[nodiscard]] std::string diagnostics_csv(const DiagnosticReport &r);

/// seed,lambda_min,lambda_max,kappa,eta_crit,tau for the given rows.
[[nodiscard]] std::string
diagnostics_csv(const std::vector<std::pair<std::uint64_t,
                                            kernel::Diagnostics>> &rows);

} // namespace qntk::analysis
