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
 * Dataset generators: transverse-field Ising magnetization (exact
 * diagonalization), noisy sinusoid and two-moons, plus the evaluation grids
 * used for extended-test comparisons.
 */
#pragma once

#include <Eigen/Dense>
#include <json.hpp>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace qntk::data {

/// Per-column affine map from [source_min, source_max] onto
/// [target_lo, target_hi].
struct MinMaxScaler {
    Eigen::VectorXd source_min;
    Eigen::VectorXd source_max;
    double target_lo{-1.0};
    double target_hi{1.0};

    /// Throws ConfigError when a column is constant.
    static MinMaxScaler fit(const Eigen::MatrixXd &values, double lo,
                            double hi);

    [[nodiscard]] Eigen::MatrixXd transform(const Eigen::MatrixXd &v) const;
    [[nodiscard]] Eigen::MatrixXd inverse(const Eigen::MatrixXd &v) const;
};

void to_json(nlohmann::json &j, const MinMaxScaler &s);
void from_json(const nlohmann::json &j, MinMaxScaler &s);

struct Dataset {
    Eigen::MatrixXd inputs; // M x d, already scaled
    Eigen::MatrixXd labels; // M x C
    std::vector<bool> train_mask;
    MinMaxScaler feature_scaler;
    std::optional<MinMaxScaler> label_scaler;
    std::string generator;
    std::uint64_t seed{0};

    [[nodiscard]] std::size_t size() const {
        return static_cast<std::size_t>(inputs.rows());
    }
    [[nodiscard]] std::size_t input_dim() const {
        return static_cast<std::size_t>(inputs.cols());
    }
    [[nodiscard]] std::size_t n_outputs() const {
        return static_cast<std::size_t>(labels.cols());
    }
    [[nodiscard]] std::size_t n_train() const;

    [[nodiscard]] std::vector<std::size_t> train_indices() const;
    [[nodiscard]] std::vector<std::size_t> test_indices() const;
    [[nodiscard]] Eigen::MatrixXd train_inputs() const;
    [[nodiscard]] Eigen::MatrixXd train_labels() const;
    [[nodiscard]] Eigen::MatrixXd test_inputs() const;
    [[nodiscard]] Eigen::MatrixXd test_labels() const;

    /// Rows `rows` in the given order; every kept row is marked as training.
    [[nodiscard]] Dataset training_subset(
        const std::vector<std::size_t> &rows) const;
};

/// Random split: a seeded permutation, the first round(fraction * M) indices
/// become training points.
[[nodiscard]] std::vector<bool> split_mask(std::size_t n, double fraction,
                                           std::uint64_t seed);

// Transverse-field Ising model ----------------------------------------------

struct TfimConfig {
    std::size_t n_spins{6};
    double coupling{1.0}; // J_Z
    std::vector<double> fields{default_fields()};
    double feature_lo{-0.95};
    double feature_hi{0.95};

    /// 20 values from -5 to 4.5 in steps of 0.5.
    static std::vector<double> default_fields();
    void validate() const;
};

struct TfimGroundState {
    double magnetization{0.0}; // (1/N) sum_i <sigma_X^i>
    double energy{0.0};
    double gap{0.0};
    bool degenerate{false};
};

inline constexpr std::size_t kMaxSpins = 10;

/**
 * @brief Exact ground state of H = -J sum Z_i Z_{i+1} - h sum X_i (periodic).
 *
 * When the ground level is degenerate (gap < 1e-10) the magnetization is
 * averaged over the whole ground multiplet, which is basis independent and
 * symmetric under the Z2 spin flip.
 */
[[nodiscard]] TfimGroundState tfim_ground_state(std::size_t n_spins,
                                                double field, double coupling);

[[nodiscard]] double tfim_ground_magnetization(std::size_t n_spins,
                                               double field, double coupling);

/// One point per field value; features are h/J min-max scaled, labels are
/// raw magnetizations, 50% random split.
[[nodiscard]] Dataset make_tfim_dataset(const TfimConfig &config,
                                        std::uint64_t split_seed);

// Synthetic datasets ----------------------------------------------------------

/// y = sin(pi x) + amplitude * N(0, noise_std) on an even grid over [-1, 1];
/// labels min-max scaled onto [-1, 1]; 50% split.
[[nodiscard]] Dataset make_sinusoid_dataset(std::size_t n_points,
                                            double noise_std,
                                            std::uint64_t seed,
                                            double amplitude = 0.4);

/// Two interleaving half circles plus N(0, noise_std) noise, features scaled
/// onto [-1, 1]. Class 0 (upper arc) is labelled (+1, -1), class 1 (-1, +1).
[[nodiscard]] Dataset make_moons_dataset(std::size_t n_points,
                                         double noise_std, std::uint64_t seed);

/// Square grid lo..hi with spacing `step` on both axes, rows (x0, x1) with x1
/// varying fastest.
[[nodiscard]] Eigen::MatrixXd inference_grid_moons(double step,
                                                   double lo = -1.2,
                                                   double hi = 1.2);

/// D evenly spaced points from lo to hi inclusive.
[[nodiscard]] std::vector<double> extended_test_inputs_1d(std::size_t D,
                                                          double lo,
                                                          double hi);

/// Predicted class per row: argmax over outputs.
[[nodiscard]] std::vector<std::size_t>
argmax_classes(const Eigen::MatrixXd &outputs);

// Serialization -----------------------------------------------------------------

/// CSV with columns feature_0.., label_0.., is_train.
[[nodiscard]] std::string dataset_csv(const Dataset &ds);
[[nodiscard]] nlohmann::json dataset_metadata(const Dataset &ds);

/// Writes `<stem>.csv` and `<stem>.json` into `dir`.
void save_dataset(const Dataset &ds, const std::filesystem::path &dir,
                  const std::string &stem = "dataset");
[[nodiscard]] Dataset load_dataset(const std::filesystem::path &csv,
                                   const std::filesystem::path &json);

} // namespace qntk::data
