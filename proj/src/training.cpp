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
#include "qntk/training.hpp"

#include "qntk/io.hpp"
#include "qntk/kernel.hpp"
#include "qntk/parallel.hpp"
#include "qntk/random.hpp"

#include <cmath>
#include <numbers>
#include <set>

#include <fmt/core.h>

namespace qntk::train {

void TrainConfig::validate() const {
    if (!(eta > 0.0) || !std::isfinite(eta)) {
        throw ConfigError("learning rate must be positive and finite");
    }
    if (max_epochs < 1) {
        throw ConfigError("max_epochs must be >= 1");
    }
    if (!(convergence_tol > 0.0)) {
        throw ConfigError("convergence_tol must be positive");
    }
}

void to_json(nlohmann::json &j, const TrainConfig &c) {
    j = nlohmann::json{{"eta", c.eta},
                       {"max_epochs", c.max_epochs},
                       {"convergence_tol", c.convergence_tol},
                       {"seed", c.seed}};
}

void from_json(const nlohmann::json &j, TrainConfig &c) {
    static const std::set<std::string> keys{"eta", "max_epochs",
                                            "convergence_tol", "seed"};
    if (!j.is_object()) {
        throw ConfigError("train config must be a JSON object");
    }
    for (const auto &[k, v] : j.items()) {
        if (!keys.contains(k)) {
            throw ConfigError(fmt::format("unknown train config key '{}'", k));
        }
    }
    try {
        if (j.contains("eta")) {
            c.eta = j.at("eta").get<double>();
        }
        if (j.contains("max_epochs")) {
            c.max_epochs = j.at("max_epochs").get<std::size_t>();
        }
        if (j.contains("convergence_tol")) {
            c.convergence_tol = j.at("convergence_tol").get<double>();
        }
        if (j.contains("seed")) {
            c.seed = j.at("seed").get<std::uint64_t>();
        }
    } catch (const nlohmann::json::exception &e) {
        throw ConfigError(fmt::format("invalid train config: {}", e.what()));
    }
    c.validate();
}

double mse_loss(std::span<const double> preds, std::span<const double> labels) {
    if (preds.size() != labels.size()) {
        throw StructuralError(fmt::format(
            "prediction length {} differs from label length {}", preds.size(),
            labels.size()));
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        const double e = preds[i] - labels[i];
        acc += e * e;
    }
    return 0.5 * acc;
}

model::ParamVector initial_params(std::size_t count, std::uint64_t seed) {
    Rng rng(seed);
    model::ParamVector theta(count);
    for (auto &t : theta) {
        t = rng.uniform(0.0, 2.0 * std::numbers::pi);
    }
    return theta;
}

Eigen::VectorXd predict(const model::QnnModel &model,
                        std::span<const double> theta,
                        const Eigen::MatrixXd &inputs) {
    const auto C = static_cast<Eigen::Index>(model.n_outputs());
    Eigen::VectorXd out(inputs.rows() * C);
    parallel_for(static_cast<std::size_t>(inputs.rows()), [&](std::size_t r) {
        const auto i = static_cast<Eigen::Index>(r);
        const Eigen::VectorXd x = inputs.row(i);
        const auto f = model::forward(
            model, std::span<const double>(x.data(), x.size()), theta);
        for (Eigen::Index j = 0; j < C; ++j) {
            out(i * C + j) = f[static_cast<std::size_t>(j)];
        }
    });
    return out;
}

namespace {

struct BatchEvaluation {
    Eigen::VectorXd residuals; // MC
    Eigen::VectorXd gradient;  // P, d loss / d theta
};

BatchEvaluation evaluate_batch(const model::QnnModel &model,
                               std::span<const double> theta,
                               const Eigen::MatrixXd &inputs,
                               const Eigen::VectorXd &labels) {
    const auto C = static_cast<Eigen::Index>(model.n_outputs());
    const auto P = static_cast<Eigen::Index>(model.param_count());
    const auto M = inputs.rows();
    if (labels.size() != M * C) {
        throw StructuralError(fmt::format(
            "label vector has {} entries, expected {}", labels.size(), M * C));
    }
    Eigen::VectorXd residuals(M * C);
    Eigen::MatrixXd per_point(P, M);
    parallel_for(static_cast<std::size_t>(M), [&](std::size_t r) {
        const auto i = static_cast<Eigen::Index>(r);
        const Eigen::VectorXd x = inputs.row(i);
        const auto ev = model::evaluate(
            model, std::span<const double>(x.data(), x.size()), theta);
        Eigen::VectorXd eps(C);
        for (Eigen::Index j = 0; j < C; ++j) {
            eps(j) = ev.outputs[static_cast<std::size_t>(j)] - labels(i * C + j);
        }
        residuals.segment(i * C, C) = eps;
        per_point.col(i) = ev.jacobian.transpose() * eps;
    });
    // Summing in point order keeps the update independent of thread timing.
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(P);
    for (Eigen::Index i = 0; i < M; ++i) {
        grad += per_point.col(i);
    }
    return {std::move(residuals), std::move(grad)};
}

model::ParamVector apply_step(std::span<const double> theta,
                              const Eigen::VectorXd &grad, double eta) {
    model::ParamVector next(theta.begin(), theta.end());
    for (std::size_t l = 0; l < next.size(); ++l) {
        next[l] -= eta * grad(static_cast<Eigen::Index>(l));
    }
    return next;
}

bool all_finite(std::span<const double> v) {
    for (double x : v) {
        if (!std::isfinite(x)) {
            return false;
        }
    }
    return true;
}

} // namespace

model::ParamVector gd_step(const model::QnnModel &model,
                           std::span<const double> theta,
                           const Eigen::MatrixXd &inputs,
                           const Eigen::VectorXd &labels, double eta) {
    if (!all_finite(theta)) {
        throw StructuralError("parameters must be finite");
    }
    const auto batch = evaluate_batch(model, theta, inputs, labels);
    auto next = apply_step(theta, batch.gradient, eta);
    if (!all_finite(next)) {
        throw DivergenceError("gradient step produced non-finite parameters",
                              {});
    }
    return next;
}

model::ParamVector gd_step(const model::QnnModel &model,
                           std::span<const double> theta,
                           const data::Dataset &dataset, double eta) {
    return gd_step(model, theta, dataset.train_inputs(),
                   kernel::flatten(dataset.train_labels()), eta);
}

TrainLog train(const model::QnnModel &model, const data::Dataset &dataset,
               const TrainConfig &config) {
    return train(model, dataset, config,
                 initial_params(model.param_count(), config.seed));
}

TrainLog train(const model::QnnModel &model, const data::Dataset &dataset,
               const TrainConfig &config, model::ParamVector theta0) {
    config.validate();
    if (theta0.size() != model.param_count()) {
        throw StructuralError("initial parameter vector has wrong length");
    }
    const Eigen::MatrixXd inputs = dataset.train_inputs();
    const Eigen::VectorXd labels = kernel::flatten(dataset.train_labels());
    if (inputs.rows() == 0) {
        throw ConfigError("dataset has no training points");
    }

    const std::size_t stored_per_epoch = static_cast<std::size_t>(labels.size());
    const std::size_t stride =
        stored_per_epoch * config.max_epochs <= kResidualBudget ? 1 : 10;

    TrainLog log;
    log.theta0 = theta0;
    model::ParamVector theta = std::move(theta0);

    for (std::size_t epoch = 0; epoch < config.max_epochs; ++epoch) {
        const auto batch = evaluate_batch(model, theta, inputs, labels);
        const double loss = 0.5 * batch.residuals.squaredNorm();
        log.loss.push_back(loss);
        if (epoch % stride == 0) {
            log.residual_epochs.push_back(epoch);
            log.residuals.push_back(batch.residuals);
        }

        auto next = apply_step(theta, batch.gradient, config.eta);
        double step2 = 0.0;
        for (std::size_t l = 0; l < next.size(); ++l) {
            const double d = next[l] - theta[l];
            step2 += d * d;
        }
        const double step = std::sqrt(step2);
        if (!all_finite(next) || !std::isfinite(loss)) {
            log.theta_final = theta;
            log.final_loss = loss;
            log.epochs_run = epoch;
            throw DivergenceError(
                fmt::format("non-finite update at epoch {}", epoch + 1), log);
        }
        log.step_norm.push_back(step);
        theta = std::move(next);
        log.epochs_run = epoch + 1;
        if (step < config.convergence_tol) {
            log.converged = true;
            break;
        }
    }
    log.final_loss =
        0.5 * (predict(model, theta, inputs) - labels).squaredNorm();
    log.theta_final = std::move(theta);
    return log;
}

double lazy_metrics(const TrainLog &log) {
    if (log.epochs_run < 1) {
        throw UndefinedMetricError("training did not run");
    }
    if (log.theta0.size() != log.theta_final.size()) {
        throw StructuralError("parameter vectors differ in length");
    }
    double num = 0.0;
    double den = 0.0;
    for (std::size_t l = 0; l < log.theta0.size(); ++l) {
        const double d = log.theta_final[l] - log.theta0[l];
        num += d * d;
        den += log.theta0[l] * log.theta0[l];
    }
    if (den == 0.0) {
        throw UndefinedMetricError("initial parameter vector has zero norm");
    }
    return std::sqrt(num) / std::sqrt(den);
}

double loss_increase_fraction(const TrainLog &log, double tol) {
    std::vector<double> seq = log.loss;
    seq.push_back(log.final_loss);
    if (seq.size() < 2) {
        return 0.0;
    }
    std::size_t rises = 0;
    for (std::size_t e = 1; e < seq.size(); ++e) {
        if (seq[e] > seq[e - 1] + tol) {
            ++rises;
        }
    }
    return static_cast<double>(rises) / static_cast<double>(seq.size() - 1);
}

std::string training_log_csv(const TrainLog &log) {
    std::string out = io::csv_row({"epoch", "loss", "step_norm"});
    for (std::size_t e = 0; e < log.step_norm.size(); ++e) {
        out += io::csv_row({std::to_string(e + 1), io::format_double(log.loss[e]),
                            io::format_double(log.step_norm[e])});
    }
    return out;
}

nlohmann::json training_summary(const TrainLog &log) {
    return nlohmann::json{{"converged", log.converged},
                          {"epochs_run", log.epochs_run},
                          {"final_loss", log.final_loss},
                          {"relative_param_change", lazy_metrics(log)}};
}

} // namespace qntk::train
