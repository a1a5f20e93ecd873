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
 * Full-batch vanilla gradient descent on the halved squared error, with the
 * parameter-step stopping rule and lazy-training bookkeeping.
 */
#pragma once

#include "qntk/datasets.hpp"
#include "qntk/error.hpp"
#include "qntk/models.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace qntk::train {

struct TrainConfig {
    double eta{0.01};
    std::size_t max_epochs{500};
    double convergence_tol{1e-3};
    std::uint64_t seed{0};

    void validate() const;
};

void to_json(nlohmann::json &j, const TrainConfig &c);
/// Strict: unknown keys raise ConfigError; absent keys keep defaults.
void from_json(const nlohmann::json &j, TrainConfig &c);

/// Residual snapshots are kept every epoch up to this many stored values,
/// otherwise every 10th epoch.
inline constexpr std::size_t kResidualBudget = 1'000'000;

struct TrainLog {
    std::vector<double> loss;      // loss at the start of each epoch
    std::vector<double> step_norm; // ||theta(t+1) - theta(t)||
    model::ParamVector theta0;
    model::ParamVector theta_final;
    std::size_t epochs_run{0};
    bool converged{false};
    double final_loss{0.0}; // loss at theta_final
    std::vector<std::size_t> residual_epochs; // 0-based epoch of each snapshot
    std::vector<Eigen::VectorXd> residuals;   // f - y on the merged index
};

/// Thrown when an update turns non-finite. Carries the log up to that point.
class DivergenceError : public Error {
  public:
    DivergenceError(const std::string &what, TrainLog log)
        : Error(what), log_(std::move(log)) {}
    [[nodiscard]] const TrainLog &log() const { return log_; }

  private:
    TrainLog log_;
};

/// (1/2) sum (f - y)^2.
[[nodiscard]] double mse_loss(std::span<const double> preds,
                              std::span<const double> labels);

/// Uniform draws on [0, 2 pi) from the documented generator.
[[nodiscard]] model::ParamVector initial_params(std::size_t count,
                                                std::uint64_t seed);

/// Model outputs for every row of `inputs`, on the merged index.
[[nodiscard]] Eigen::VectorXd predict(const model::QnnModel &model,
                                      std::span<const double> theta,
                                      const Eigen::MatrixXd &inputs);

/// theta - eta * sum_alpha eps_alpha * grad f_alpha over the rows of
/// `inputs` with flattened `labels`.
[[nodiscard]] model::ParamVector gd_step(const model::QnnModel &model,
                                         std::span<const double> theta,
                                         const Eigen::MatrixXd &inputs,
                                         const Eigen::VectorXd &labels,
                                         double eta);

/// gd_step on the training split of `dataset`.
[[nodiscard]] model::ParamVector gd_step(const model::QnnModel &model,
                                         std::span<const double> theta,
                                         const data::Dataset &dataset,
                                         double eta);

/// Trains on the training split from theta0 drawn with `config.seed`.
[[nodiscard]] TrainLog train(const model::QnnModel &model,
                             const data::Dataset &dataset,
                             const TrainConfig &config);

/// Trains on the training split from an explicit starting point.
[[nodiscard]] TrainLog train(const model::QnnModel &model,
                             const data::Dataset &dataset,
                             const TrainConfig &config,
                             model::ParamVector theta0);

/// Share of transitions in loss..., final_loss that rise by more than `tol`.
[[nodiscard]] double loss_increase_fraction(const TrainLog &log,
                                            double tol = 0.0);

/// ||theta_final - theta0|| / ||theta0||.
[[nodiscard]] double lazy_metrics(const TrainLog &log);

/// epoch,loss,step_norm (epochs counted from 1).
[[nodiscard]] std::string training_log_csv(const TrainLog &log);

/// converged, epochs_run, final_loss, relative_param_change.
[[nodiscard]] nlohmann::json training_summary(const TrainLog &log);

} // namespace qntk::train
