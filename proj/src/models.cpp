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
#include "qntk/models.hpp"

#include "qntk/error.hpp"

#include <cmath>
#include <set>

#include <fmt/core.h>

namespace qntk::model {

std::string to_string(Encoding e) {
    return e == Encoding::LowFreq ? "low_freq" : "high_freq";
}

std::string to_string(Ansatz a) { return a == Ansatz::HEA ? "HEA" : "HVA"; }

Encoding parse_encoding(const std::string &s) {
    if (s == "low_freq") {
        return Encoding::LowFreq;
    }
    if (s == "high_freq") {
        return Encoding::HighFreq;
    }
    throw ConfigError(fmt::format("unknown encoding '{}'", s));
}

Ansatz parse_ansatz(const std::string &s) {
    if (s == "HEA") {
        return Ansatz::HEA;
    }
    if (s == "HVA") {
        return Ansatz::HVA;
    }
    throw ConfigError(fmt::format("unknown ansatz '{}'", s));
}

void ModelConfig::validate() const {
    if (n_qubits < 1 || n_qubits > sim::kMaxQubits) {
        throw ConfigError(fmt::format("n_qubits must be in [1, {}], got {}",
                                      sim::kMaxQubits, n_qubits));
    }
    if (layers < 1) {
        throw ConfigError("layers must be >= 1");
    }
    if (n_outputs < 1 || n_outputs > n_qubits) {
        throw ConfigError(fmt::format(
            "n_outputs must be in [1, n_qubits={}], got {}", n_qubits,
            n_outputs));
    }
    if (input_dim < 1 || input_dim > n_qubits) {
        throw ConfigError(fmt::format(
            "input_dim must be in [1, n_qubits={}], got {}", n_qubits,
            input_dim));
    }
    if (ansatz == Ansatz::HVA && n_qubits < 2) {
        throw ConfigError("HVA needs at least 2 qubits for its RZZ couplings");
    }
}

void to_json(nlohmann::json &j, const ModelConfig &c) {
    j = nlohmann::json{{"n_qubits", c.n_qubits},
                       {"layers", c.layers},
                       {"encoding", to_string(c.encoding)},
                       {"ansatz", to_string(c.ansatz)},
                       {"n_outputs", c.n_outputs},
                       {"input_dim", c.input_dim}};
}

void from_json(const nlohmann::json &j, ModelConfig &c) {
    static const std::set<std::string> keys{"n_qubits", "layers", "encoding",
                                            "ansatz", "n_outputs",
                                            "input_dim"};
    if (!j.is_object()) {
        throw ConfigError("model config must be a JSON object");
    }
    for (const auto &[k, v] : j.items()) {
        if (!keys.contains(k)) {
            throw ConfigError(fmt::format("unknown model config key '{}'", k));
        }
    }
    auto count = [&](const char *key) -> std::size_t {
        if (!j.contains(key)) {
            throw ConfigError(fmt::format("missing model config key '{}'", key));
        }
        const auto &v = j.at(key);
        if (!v.is_number_integer() || v.get<long long>() < 0) {
            throw ConfigError(
                fmt::format("model config key '{}' must be a non-negative "
                            "integer",
                            key));
        }
        return v.get<std::size_t>();
    };
    auto text = [&](const char *key) -> std::string {
        if (!j.contains(key) || !j.at(key).is_string()) {
            throw ConfigError(
                fmt::format("model config key '{}' must be a string", key));
        }
        return j.at(key).get<std::string>();
    };
    c.n_qubits = count("n_qubits");
    c.layers = count("layers");
    c.encoding = parse_encoding(text("encoding"));
    c.ansatz = parse_ansatz(text("ansatz"));
    c.n_outputs = count("n_outputs");
    c.input_dim = count("input_dim");
    c.validate();
}

double FeatureAngle::apply(double x) const {
    switch (kind) {
    case Preprocess::Identity:
        return x;
    case Preprocess::Square:
        return x * x;
    case Preprocess::Divide:
        return x / divisor;
    }
    return x;
}

QnnModel::QnnModel(ModelConfig config, std::vector<ProgramGate> program)
    : config_(config), program_(std::move(program)) {
    config_.validate();

    std::vector<int> seen;
    for (const auto &pg : program_) {
        sim::validate(pg.gate, config_.n_qubits);
        if (pg.feature && pg.gate.param_index) {
            throw StructuralError(
                "a gate cannot be both feature-encoded and trainable");
        }
        if (pg.feature && pg.feature->feature >= config_.input_dim) {
            throw StructuralError("feature index out of range");
        }
        if (pg.gate.param_index) {
            if (!sim::is_rotation(pg.gate.kind)) {
                throw UnsupportedGateError("only rotations can be trainable");
            }
            const auto idx = *pg.gate.param_index;
            if (idx >= seen.size()) {
                seen.resize(idx + 1, 0);
            }
            ++seen[idx];
        }
    }
    for (std::size_t i = 0; i < seen.size(); ++i) {
        if (seen[i] != 1) {
            throw StructuralError(fmt::format(
                "trainable index {} appears {} times (expected once)", i,
                seen[i]));
        }
    }
    param_count_ = seen.size();
    if (param_count_ == 0) {
        throw StructuralError("a model needs at least one trainable gate");
    }

    observables_.reserve(config_.n_outputs);
    for (std::size_t j = 0; j < config_.n_outputs; ++j) {
        observables_.push_back(sim::Observable::z(j, config_.n_qubits));
    }
}

sim::Circuit QnnModel::bind_input(std::span<const double> x) const {
    if (x.size() != config_.input_dim) {
        throw StructuralError(fmt::format("input has dimension {}, model "
                                          "expects {}",
                                          x.size(), config_.input_dim));
    }
    for (double v : x) {
        if (!std::isfinite(v)) {
            throw StructuralError("input components must be finite");
        }
    }
    sim::Circuit circuit{config_.n_qubits, {}};
    circuit.gates.reserve(program_.size());
    for (const auto &pg : program_) {
        sim::Gate g = pg.gate;
        if (pg.feature) {
            g.angle = pg.feature->apply(x[pg.feature->feature]);
        }
        circuit.gates.push_back(g);
    }
    return circuit;
}

std::size_t expected_param_count(const ModelConfig &config) {
    const std::size_t per_qubit = config.ansatz == Ansatz::HEA ? 3 : 2;
    return config.layers * per_qubit * config.n_qubits;
}

QnnModel build_model(const ModelConfig &config) {
    config.validate();
    const std::size_t n = config.n_qubits;
    const std::size_t L = config.layers;
    const std::size_t d = config.input_dim;

    std::vector<ProgramGate> program;
    std::size_t next = 0;
    auto encode = [&](sim::Gate g, std::size_t q, Preprocess kind,
                      double divisor) {
        program.push_back({g, FeatureAngle{q % d, kind, divisor}});
    };
    auto train = [&](sim::Gate g) {
        program.push_back({sim::trainable(g, next++), std::nullopt});
    };

    for (std::size_t l = 0; l < L; ++l) {
        if (config.encoding == Encoding::LowFreq) {
            // Divisor runs L, L-1, ..., 1 so it never vanishes.
            const auto divisor = static_cast<double>(L - l);
            for (std::size_t q = 0; q < n; ++q) {
                encode(sim::rx(q, 0.0), q, Preprocess::Divide, divisor);
            }
        } else {
            for (std::size_t q = 0; q < n; ++q) {
                encode(sim::ry(q, 0.0), q, Preprocess::Identity, 1.0);
            }
            for (std::size_t q = 0; q < n; ++q) {
                encode(sim::rz(q, 0.0), q, Preprocess::Square, 1.0);
            }
        }

        if (config.ansatz == Ansatz::HEA) {
            for (std::size_t q = 0; q < n; ++q) {
                train(sim::rx(q, 0.0));
            }
            for (std::size_t q = 0; q < n; ++q) {
                train(sim::rz(q, 0.0));
            }
            for (std::size_t q = 0; q < n; ++q) {
                train(sim::rx(q, 0.0));
            }
            if (n > 1) {
                for (std::size_t q = 0; q < n; ++q) {
                    program.push_back({sim::cnot(q, (q + 1) % n), std::nullopt});
                }
            }
        } else {
            for (std::size_t q = 0; q < n; ++q) {
                train(sim::rx(q, 0.0));
            }
            for (std::size_t q = 0; q < n; ++q) {
                train(sim::rzz(q, (q + 1) % n, 0.0));
            }
        }
    }
    return QnnModel(config, std::move(program));
}

namespace {

void check_theta(const QnnModel &model, std::span<const double> theta) {
    if (theta.size() != model.param_count()) {
        throw StructuralError(fmt::format(
            "parameter vector has length {}, model has {} parameters",
            theta.size(), model.param_count()));
    }
}

} // namespace

std::vector<double> forward(const QnnModel &model, std::span<const double> x,
                            std::span<const double> theta) {
    check_theta(model, theta);
    const auto psi = sim::run(model.bind_input(x), theta);
    std::vector<double> out;
    out.reserve(model.n_outputs());
    for (const auto &obs : model.observables()) {
        out.push_back(sim::expectation(psi, obs));
    }
    return out;
}

Eigen::MatrixXd model_gradient(const QnnModel &model,
                               std::span<const double> x,
                               std::span<const double> theta,
                               sim::GradientMethod method) {
    check_theta(model, theta);
    const auto jac = sim::jacobian(model.bind_input(x), theta,
                                   model.observables(), model.param_count(),
                                   method);
    const auto rows = static_cast<Eigen::Index>(model.n_outputs());
    const auto cols = static_cast<Eigen::Index>(model.param_count());
    return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic,
                                          Eigen::Dynamic, Eigen::RowMajor>>(
        jac.data(), rows, cols);
}

Evaluation evaluate(const QnnModel &model, std::span<const double> x,
                    std::span<const double> theta) {
    check_theta(model, theta);
    auto vj = sim::value_and_jacobian(model.bind_input(x), theta,
                                      model.observables(), model.param_count());
    const auto rows = static_cast<Eigen::Index>(model.n_outputs());
    const auto cols = static_cast<Eigen::Index>(model.param_count());
    return {std::move(vj.values),
            Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic,
                                           Eigen::Dynamic, Eigen::RowMajor>>(
                vj.jacobian.data(), rows, cols)};
}

} // namespace qntk::model
