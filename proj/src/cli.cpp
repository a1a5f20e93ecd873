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
#include "qntk/cli.hpp"

#include "qntk/error.hpp"
#include "qntk/io.hpp"
#include "qntk/kernel.hpp"
#include "qntk/parallel.hpp"

#include <CLI11.hpp>
#include <fmt/core.h>

#include <iostream>
#include <set>
#include <sstream>

namespace qntk::cli {

namespace fs = std::filesystem;
using nlohmann::json;

std::string to_string(Command c) {
    switch (c) {
    case Command::Dataset:
        return "dataset";
    case Command::Diagnose:
        return "diagnose";
    case Command::Train:
        return "train";
    case Command::Compare:
        return "compare";
    case Command::Fourier:
        return "fourier";
    case Command::Sweep:
        return "sweep";
    }
    return "unknown";
}

Command parse_command(const std::string &s) {
    for (auto c : {Command::Dataset, Command::Diagnose, Command::Train,
                   Command::Compare, Command::Fourier, Command::Sweep}) {
        if (to_string(c) == s) {
            return c;
        }
    }
    throw ConfigError(fmt::format("unknown command '{}'", s));
}

namespace {

void reject_unknown(const json &j, const std::set<std::string> &keys,
                    const char *what) {
    if (!j.is_object()) {
        throw ConfigError(fmt::format("{} must be a JSON object", what));
    }
    for (const auto &[k, v] : j.items()) {
        if (!keys.contains(k)) {
            throw ConfigError(fmt::format("unknown {} key '{}'", what, k));
        }
    }
}

template <typename T>
void read_opt(const json &j, const char *key, T &target, const char *what) {
    if (!j.contains(key)) {
        return;
    }
    try {
        target = j.at(key).get<T>();
    } catch (const json::exception &e) {
        throw ConfigError(
            fmt::format("invalid {} key '{}': {}", what, key, e.what()));
    }
}

} // namespace

// Dataset spec ------------------------------------------------------------------

data::Dataset DatasetSpec::generate() const {
    if (kind == "tfim") {
        return data::make_tfim_dataset(tfim, split_seed);
    }
    if (kind == "sinusoid") {
        return data::make_sinusoid_dataset(n_points, noise_std, seed, amplitude);
    }
    if (kind == "moons") {
        return data::make_moons_dataset(n_points, noise_std, seed);
    }
    throw ConfigError(fmt::format("unknown dataset kind '{}'", kind));
}

void to_json(json &j, const DatasetSpec &d) {
    if (d.kind == "tfim") {
        j = json{{"kind", d.kind},
                 {"n_spins", d.tfim.n_spins},
                 {"coupling", d.tfim.coupling},
                 {"fields", d.tfim.fields},
                 {"feature_lo", d.tfim.feature_lo},
                 {"feature_hi", d.tfim.feature_hi},
                 {"split_seed", d.split_seed}};
    } else {
        j = json{{"kind", d.kind},
                 {"n_points", d.n_points},
                 {"noise_std", d.noise_std},
                 {"seed", d.seed}};
        if (d.kind == "sinusoid") {
            j["amplitude"] = d.amplitude;
        }
    }
}

void from_json(const json &j, DatasetSpec &d) {
    if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string()) {
        throw ConfigError("dataset must be an object with a string 'kind'");
    }
    d = DatasetSpec{};
    d.kind = j.at("kind").get<std::string>();
    const char *what = "dataset";
    if (d.kind == "tfim") {
        reject_unknown(j,
                       {"kind", "n_spins", "coupling", "fields", "feature_lo",
                        "feature_hi", "split_seed"},
                       what);
        read_opt(j, "n_spins", d.tfim.n_spins, what);
        read_opt(j, "coupling", d.tfim.coupling, what);
        read_opt(j, "fields", d.tfim.fields, what);
        read_opt(j, "feature_lo", d.tfim.feature_lo, what);
        read_opt(j, "feature_hi", d.tfim.feature_hi, what);
        read_opt(j, "split_seed", d.split_seed, what);
        d.tfim.validate();
    } else if (d.kind == "sinusoid" || d.kind == "moons") {
        std::set<std::string> keys{"kind", "n_points", "noise_std", "seed"};
        if (d.kind == "sinusoid") {
            keys.insert("amplitude");
        } else {
            d.noise_std = 0.2;
        }
        reject_unknown(j, keys, what);
        read_opt(j, "n_points", d.n_points, what);
        read_opt(j, "noise_std", d.noise_std, what);
        read_opt(j, "seed", d.seed, what);
        read_opt(j, "amplitude", d.amplitude, what);
        if (d.n_points < 2) {
            throw ConfigError("dataset needs at least two points");
        }
        if (d.kind == "moons" && d.n_points % 2 != 0) {
            throw ConfigError("moons dataset needs an even number of points");
        }
        if (!(d.noise_std >= 0.0)) {
            throw ConfigError("noise_std must be non-negative");
        }
    } else {
        throw ConfigError(fmt::format("unknown dataset kind '{}'", d.kind));
    }
}

// Run config --------------------------------------------------------------------

void RunConfig::validate() const {
    model.validate();
    train.validate();
    eta_mode.validate();
    if (out.empty()) {
        throw ConfigError("no output directory given");
    }
    const std::size_t d = dataset.kind == "moons" ? 2 : 1;
    const std::size_t c = dataset.kind == "moons" ? 2 : 1;
    if (command != Command::Fourier &&
        (model.input_dim != d || model.n_outputs != c)) {
        throw ConfigError(fmt::format(
            "{} data needs input_dim {} and n_outputs {}", dataset.kind, d, c));
    }
    if (command == Command::Fourier && model.input_dim != 1) {
        throw ConfigError("fourier needs input_dim 1");
    }
    if (command == Command::Fourier &&
        (grid_size < 32 || (grid_size & (grid_size - 1)) != 0)) {
        throw ConfigError("grid_size must be a power of two >= 32");
    }
    for (auto l : layers) {
        auto m = model;
        m.layers = l;
        m.validate();
    }
}

void to_json(json &j, const RunConfig &c) {
    j = json{{"command", to_string(c.command)},
             {"model", c.model},
             {"dataset", c.dataset},
             {"train", c.train},
             {"seeds", c.seeds},
             {"eta_mode", c.eta_mode},
             {"out", c.out.generic_string()}};
    if (c.command == Command::Sweep) {
        j["layers"] = c.layers;
    }
    if (c.command == Command::Fourier) {
        j["grid_size"] = c.grid_size;
    }
}

void from_json(const json &j, RunConfig &c) {
    const char *what = "config";
    reject_unknown(j,
                   {"command", "model", "dataset", "train", "seeds", "eta_mode",
                    "layers", "grid_size", "out"},
                   what);
    if (j.contains("command")) {
        if (!j.at("command").is_string()) {
            throw ConfigError("command must be a string");
        }
        c.command = parse_command(j.at("command").get<std::string>());
    }
    if (j.contains("model")) {
        c.model = j.at("model").get<model::ModelConfig>();
    }
    if (j.contains("dataset")) {
        c.dataset = j.at("dataset").get<DatasetSpec>();
    }
    if (j.contains("train")) {
        c.train = j.at("train").get<train::TrainConfig>();
    }
    if (j.contains("eta_mode")) {
        c.eta_mode = j.at("eta_mode").get<analysis::EtaMode>();
    }
    read_opt(j, "seeds", c.seeds, what);
    read_opt(j, "layers", c.layers, what);
    read_opt(j, "grid_size", c.grid_size, what);
    if (j.contains("out")) {
        if (!j.at("out").is_string()) {
            throw ConfigError("out must be a string");
        }
        c.out = j.at("out").get<std::string>();
    }
}

std::vector<std::size_t> default_layers(const std::string &dataset_kind) {
    if (dataset_kind == "moons") {
        return {5, 15, 25, 35, 45};
    }
    std::vector<std::size_t> out;
    for (std::size_t l = 5; l <= 50; l += 5) {
        out.push_back(l);
    }
    return out;
}

std::vector<std::uint64_t> default_seeds(Command c) {
    const std::uint64_t n = c == Command::Fourier ? 20 : 10;
    std::vector<std::uint64_t> out(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        out[i] = i;
    }
    return out;
}

std::vector<std::uint64_t> parse_seed_list(const std::string &s) {
    std::vector<std::uint64_t> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty() ||
            item.find_first_not_of("0123456789") != std::string::npos) {
            throw ConfigError(fmt::format("invalid seed '{}'", item));
        }
        try {
            out.push_back(std::stoull(item));
        } catch (const std::exception &) {
            throw ConfigError(fmt::format("invalid seed '{}'", item));
        }
    }
    if (out.empty()) {
        throw ConfigError("empty seed list");
    }
    return out;
}

// Execution ---------------------------------------------------------------------

namespace {

void prepare_dir(const fs::path &dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw IoError(fmt::format("cannot create output directory '{}': {}",
                                  dir.string(), ec.message()));
    }
}

void write_manifest(const fs::path &dir, const RunConfig &config,
                    const json &resolved_eta) {
    json m{{"config", config}, {"resolved_eta", resolved_eta}};
    io::write_json(dir / "manifest.json", m);
}

json eta_map(const std::vector<std::pair<std::uint64_t, double>> &etas) {
    json j = json::object();
    for (const auto &[seed, eta] : etas) {
        j[std::to_string(seed)] = eta;
    }
    return j;
}

void run_dataset(const RunConfig &config, const data::Dataset &ds) {
    data::save_dataset(ds, config.out, "dataset");
    write_manifest(config.out, config, json::object());
}

void run_diagnose(const RunConfig &config, const data::Dataset &ds) {
    const auto model = model::build_model(config.model);
    const Eigen::MatrixXd x_train = ds.train_inputs();
    std::vector<std::pair<std::uint64_t, kernel::Diagnostics>> rows;
    std::vector<std::pair<std::uint64_t, double>> etas;
    json entries = json::array();
    for (auto seed : config.seeds) {
        const auto theta0 = train::initial_params(model.param_count(), seed);
        const Eigen::MatrixXd K = kernel::kernel_matrix(model, theta0, x_train);
        io::write_text(config.out / fmt::format("kernel_seed{}.csv", seed),
                       kernel::matrix_csv(K, model.n_outputs()));
        json e{{"seed", seed}};
        try {
            const auto d = kernel::diagnostics(kernel::make_bundle(K));
            rows.emplace_back(seed, d);
            etas.emplace_back(seed, analysis::resolve_eta(config.eta_mode, d));
            e["status"] = "ok";
            e["diagnostics"] = d;
        } catch (const SingularKernelError &err) {
            e["status"] = "singular_kernel";
            e["message"] = err.what();
        }
        const Eigen::VectorXd values = kernel::eig_sym(K).eigenvalues;
        e["eigenvalues"] =
            std::vector<double>(values.data(), values.data() + values.size());
        entries.push_back(std::move(e));
    }
    io::write_text(config.out / "diagnostics.csv",
                   analysis::diagnostics_csv(rows));
    io::write_json(config.out / "diagnose.json", json{{"seeds", entries}});
    write_manifest(config.out, config, eta_map(etas));
}

void run_train(const RunConfig &config, const data::Dataset &ds) {
    const auto model = model::build_model(config.model);
    const Eigen::MatrixXd x_train = ds.train_inputs();
    std::string csv =
        io::csv_row({"seed", "epochs", "final_loss", "rel_param_change"});
    std::vector<std::pair<std::uint64_t, double>> etas;
    json entries = json::array();
    for (auto seed : config.seeds) {
        const auto theta0 = train::initial_params(model.param_count(), seed);
        json e{{"seed", seed}};
        double eta = config.eta_mode.value;
        try {
            if (config.eta_mode.kind != analysis::EtaMode::Kind::Absolute) {
                const auto bundle = kernel::make_bundle(
                    kernel::kernel_matrix(model, theta0, x_train));
                eta = analysis::resolve_eta(config.eta_mode,
                                            kernel::diagnostics(bundle));
            }
        } catch (const SingularKernelError &err) {
            e["status"] = "singular_kernel";
            e["message"] = err.what();
            entries.push_back(std::move(e));
            continue;
        }
        etas.emplace_back(seed, eta);
        auto tc = config.train;
        tc.eta = eta;
        tc.seed = seed;
        try {
            const auto log = train::train(model, ds, tc, theta0);
            io::write_text(config.out / fmt::format("log_seed{}.csv", seed),
                           train::training_log_csv(log));
            e["status"] = "ok";
            e["summary"] = train::training_summary(log);
            e["loss_increase_fraction"] = train::loss_increase_fraction(log);
            csv += io::csv_row({std::to_string(seed),
                                std::to_string(log.epochs_run),
                                io::format_double(log.final_loss),
                                io::format_double(train::lazy_metrics(log))});
        } catch (const train::DivergenceError &err) {
            io::write_text(config.out / fmt::format("log_seed{}.csv", seed),
                           train::training_log_csv(err.log()));
            e["status"] = "divergence";
            e["message"] = err.what();
        }
        e["eta"] = eta;
        entries.push_back(std::move(e));
    }
    io::write_text(config.out / "training.csv", csv);
    io::write_json(config.out / "training.json", json{{"seeds", entries}});
    write_manifest(config.out, config, eta_map(etas));
}

void write_report(const fs::path &dir, const RunConfig &config,
                  const analysis::DiagnosticReport &rep) {
    io::write_json(dir / "report.json", rep);
    io::write_text(dir / "predictions.csv", analysis::predictions_csv(rep));
    io::write_text(dir / "training.csv", analysis::training_csv(rep));
    io::write_text(dir / "diagnostics.csv", analysis::diagnostics_csv(rep));
    std::vector<std::pair<std::uint64_t, double>> etas;
    for (const auto &s : rep.seeds) {
        if (s.diagnostics) {
            etas.emplace_back(s.seed, s.eta);
        }
    }
    write_manifest(dir, config, eta_map(etas));
}

void run_compare(const RunConfig &config, const data::Dataset &ds) {
    const auto rep = analysis::build_report(config.model, ds, config.seeds,
                                            config.train, config.eta_mode);
    write_report(config.out, config, rep);
}

void run_fourier(const RunConfig &config) {
    const auto model = model::build_model(config.model);
    const auto spec =
        analysis::fourier_spectrum(model, config.seeds, config.grid_size);
    io::write_text(config.out / "spectrum.csv", analysis::spectrum_csv(spec));
    json j = spec;
    j["high_frequency_mass"] = spec.high_frequency_mass(
        static_cast<double>(config.model.layers) / 2.0);
    io::write_json(config.out / "spectrum.json", j);
    write_manifest(config.out, config, json::object());
}

void run_sweep(const RunConfig &config, const data::Dataset &ds) {
    const auto layers =
        config.layers.empty() ? default_layers(config.dataset.kind)
                              : config.layers;
    std::vector<analysis::DiagnosticReport> reports(layers.size());
    std::vector<RunConfig> subconfigs(layers.size());
    for (std::size_t k = 0; k < layers.size(); ++k) {
        subconfigs[k] = config;
        subconfigs[k].command = Command::Compare;
        subconfigs[k].model.layers = layers[k];
        subconfigs[k].layers.clear();
        subconfigs[k].out = config.out / fmt::format("L{:02}", layers[k]);
        prepare_dir(subconfigs[k].out);
    }
    parallel_for(layers.size(), [&](std::size_t k) {
        reports[k] = analysis::build_report(subconfigs[k].model, ds,
                                            config.seeds, config.train,
                                            config.eta_mode);
        write_report(subconfigs[k].out, subconfigs[k], reports[k]);
    });

    std::vector<std::string> header{"layers"};
    const std::vector<std::string> metrics{
        "lambda_min", "lambda_max", "kappa", "eta_crit",        "tau",
        "r2_qntk",    "r2_qnn",     "aad",   "rel_param_change", "final_loss"};
    for (const auto &m : metrics) {
        header.push_back(m + "_mean");
        header.push_back(m + "_std");
    }
    header.emplace_back("aad_of_means");
    std::string csv = io::csv_row(header);
    for (std::size_t k = 0; k < layers.size(); ++k) {
        std::vector<std::string> row{std::to_string(layers[k])};
        for (const auto &m : metrics) {
            const auto it = reports[k].aggregates.find(m);
            if (it == reports[k].aggregates.end() || it->second.count == 0) {
                row.emplace_back("");
                row.emplace_back("");
            } else {
                row.push_back(io::format_double(it->second.mean));
                row.push_back(io::format_double(it->second.std));
            }
        }
        row.push_back(reports[k].aad_of_means
                          ? io::format_double(*reports[k].aad_of_means)
                          : "");
        csv += io::csv_row(row);
    }
    io::write_text(config.out / "sweep.csv", csv);
    auto top = config;
    top.layers = layers;
    write_manifest(config.out, top, json::object());
}

} // namespace

void execute(const RunConfig &config) {
    config.validate();
    // Generate before touching the filesystem so config errors leave no
    // partial outputs behind.
    std::optional<data::Dataset> ds;
    if (config.command != Command::Fourier) {
        ds = config.dataset.generate();
    }
    prepare_dir(config.out);
    switch (config.command) {
    case Command::Dataset:
        run_dataset(config, *ds);
        break;
    case Command::Diagnose:
        run_diagnose(config, *ds);
        break;
    case Command::Train:
        run_train(config, *ds);
        break;
    case Command::Compare:
        run_compare(config, *ds);
        break;
    case Command::Fourier:
        run_fourier(config);
        break;
    case Command::Sweep:
        run_sweep(config, *ds);
        break;
    }
}

int run(int argc, const char *const *argv) {
    CLI::App app{"Quantum neural tangent kernel diagnostics"};
    std::string config_path;
    std::string out;
    std::string seeds;
    std::string command;
    app.add_option("--config", config_path, "JSON run configuration")
        ->check(CLI::ExistingFile);
    app.add_option("--out", out, "Output directory");
    app.add_option("--seeds", seeds, "Comma-separated initialization seeds");
    app.add_option("--command", command,
                   "dataset, diagnose, train, compare, fourier or sweep");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        RunConfig config;
        if (!config_path.empty()) {
            json j;
            try {
                j = json::parse(io::read_text(config_path));
            } catch (const json::parse_error &e) {
                throw ConfigError(fmt::format("malformed config: {}", e.what()));
            }
            config = j.get<RunConfig>();
        }
        if (!command.empty()) {
            config.command = parse_command(command);
        }
        if (!out.empty()) {
            config.out = out;
        }
        if (!seeds.empty()) {
            config.seeds = parse_seed_list(seeds);
        }
        if (config.seeds.empty()) {
            config.seeds = default_seeds(config.command);
        }
        execute(config);
    } catch (const ConfigError &e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const NumericalError &e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return 3;
    } catch (const IoError &e) {
        std::cerr << "i/o error: " << e.what() << '\n';
        return 4;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

} // namespace qntk::cli
