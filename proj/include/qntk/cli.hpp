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
 * Command-line driver. A run is described by a JSON config; flags override
 * the command, output directory and seed list.
 */
#pragma once

#include "qntk/analysis.hpp"
#include "qntk/datasets.hpp"
#include "qntk/models.hpp"
#include "qntk/training.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace qntk::cli {

enum class Command { Dataset, Diagnose, Train, Compare, Fourier, Sweep };

[[nodiscard]] std::string to_string(Command c);
[[nodiscard]] Command parse_command(const std::string &s);

/// Dataset generator selection and its arguments.
struct DatasetSpec {
    std::string kind{"tfim"}; // tfim, sinusoid, moons
    data::TfimConfig tfim;
    std::uint64_t split_seed{0}; // tfim only
    std::size_t n_points{20};
    double noise_std{0.5};
    double amplitude{0.4}; // sinusoid only
    std::uint64_t seed{0};

    [[nodiscard]] data::Dataset generate() const;
};

void to_json(nlohmann::json &j, const DatasetSpec &d);
void from_json(const nlohmann::json &j, DatasetSpec &d);

struct RunConfig {
    Command command{Command::Compare};
    model::ModelConfig model;
    DatasetSpec dataset;
    train::TrainConfig train;
    std::vector<std::uint64_t> seeds;
    analysis::EtaMode eta_mode;
    std::vector<std::size_t> layers; // sweep only; empty selects the default
    std::size_t grid_size{64};       // fourier only
    std::filesystem::path out;

    void validate() const;
};

void to_json(nlohmann::json &j, const RunConfig &c);
/// Strict about unknown keys; absent keys keep their defaults.
void from_json(const nlohmann::json &j, RunConfig &c);

/// 5..50 step 5 for regression data, {5, 15, 25, 35, 45} for moons.
[[nodiscard]] std::vector<std::size_t>
default_layers(const std::string &dataset_kind);

/// Seeds used when none are given: 0..9, or 0..19 for the Fourier probe.
[[nodiscard]] std::vector<std::uint64_t> default_seeds(Command c);

/// Parses "1,2,3". Throws ConfigError on anything else.
[[nodiscard]] std::vector<std::uint64_t> parse_seed_list(const std::string &s);

/// Executes a validated config, writing into config.out.
void execute(const RunConfig &config);

/// Full entry point. Returns 0 on success, 2 on configuration errors, 3 on
/// numerical-integrity errors, 4 on I/O errors and 1 otherwise.
int run(int argc, const char *const *argv);

} // namespace qntk::cli
