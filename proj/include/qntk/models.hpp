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
 * Layered data re-uploading QNN architectures: two encodings (low/high
 * frequency) times two trainable blocks (hardware-efficient and Hamiltonian
 * variational), with one Pauli-Z readout per output on the leading qubits.
 */
#pragma once

#include "qntk/simulator.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace qntk::model {

enum class Encoding { LowFreq, HighFreq };
enum class Ansatz { HEA, HVA };

[[nodiscard]] std::string to_string(Encoding e);
[[nodiscard]] std::string to_string(Ansatz a);
[[nodiscard]] Encoding parse_encoding(const std::string &s);
[[nodiscard]] Ansatz parse_ansatz(const std::string &s);

struct ModelConfig {
    std::size_t n_qubits{4};
    std::size_t layers{1};
    Encoding encoding{Encoding::HighFreq};
    Ansatz ansatz{Ansatz::HEA};
    std::size_t n_outputs{1};
    std::size_t input_dim{1};

    /// Throws ConfigError on an inconsistent configuration.
    void validate() const;

    bool operator==(const ModelConfig &) const = default;
};

void to_json(nlohmann::json &j, const ModelConfig &c);
/// Strict: unknown or missing keys raise ConfigError.
void from_json(const nlohmann::json &j, ModelConfig &c);

/// Classical pre-processing applied to a feature before it becomes an angle.
enum class Preprocess { Identity, Square, Divide };

struct FeatureAngle {
    std::size_t feature{0};
    Preprocess kind{Preprocess::Identity};
    double divisor{1.0};

    [[nodiscard]] double apply(double x) const;
};

/// A gate whose angle comes either from a feature, from a trainable
/// parameter (`gate.param_index`), or is a constant.
struct ProgramGate {
    sim::Gate gate;
    std::optional<FeatureAngle> feature{};
};

using ParamVector = std::vector<double>;

class QnnModel {
  public:
    /// Checks that trainable indices cover [0, P) exactly once.
    QnnModel(ModelConfig config, std::vector<ProgramGate> program);

    [[nodiscard]] const ModelConfig &config() const { return config_; }
    [[nodiscard]] const std::vector<ProgramGate> &program() const {
        return program_;
    }
    [[nodiscard]] const std::vector<sim::Observable> &observables() const {
        return observables_;
    }
    [[nodiscard]] std::size_t param_count() const { return param_count_; }
    [[nodiscard]] std::size_t n_outputs() const { return config_.n_outputs; }
    [[nodiscard]] std::size_t input_dim() const { return config_.input_dim; }

    /// Circuit with feature angles substituted for input `x`.
    [[nodiscard]] sim::Circuit bind_input(std::span<const double> x) const;

  private:
    ModelConfig config_;
    std::vector<ProgramGate> program_;
    std::vector<sim::Observable> observables_;
    std::size_t param_count_{0};
};

[[nodiscard]] QnnModel build_model(const ModelConfig &config);

/// Expected trainable parameter count for a configuration.
[[nodiscard]] std::size_t expected_param_count(const ModelConfig &config);

/// One value per output, each the Z expectation on qubit j.
[[nodiscard]] std::vector<double> forward(const QnnModel &model,
                                          std::span<const double> x,
                                          std::span<const double> theta);

/// C x P matrix of output derivatives with respect to the parameters.
[[nodiscard]] Eigen::MatrixXd
model_gradient(const QnnModel &model, std::span<const double> x,
               std::span<const double> theta,
               sim::GradientMethod method = sim::GradientMethod::Adjoint);

struct Evaluation {
    std::vector<double> outputs; // C
    Eigen::MatrixXd jacobian;    // C x P
};

/// forward() and model_gradient() from one adjoint pass.
[[nodiscard]] Evaluation evaluate(const QnnModel &model,
                                  std::span<const double> x,
                                  std::span<const double> theta);

} // namespace qntk::model
