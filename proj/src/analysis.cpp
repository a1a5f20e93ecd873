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
#include "qntk/analysis.hpp"

#include "qntk/error.hpp"
#include "qntk/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <numbers>

#include <fmt/core.h>

namespace qntk::analysis {

namespace {

void require_same_length(std::size_t a, std::size_t b) {
    if (a != b) {
        throw StructuralError(
            fmt::format("length mismatch: {} vs {}", a, b));
    }
}

std::span<const double> as_span(const Eigen::VectorXd &v) {
    return {v.data(), static_cast<std::size_t>(v.size())};
}

} // namespace

double r2_score(std::span<const double> preds, std::span<const double> labels) {
    require_same_length(preds.size(), labels.size());
    if (labels.size() < 2) {
        throw UndefinedMetricError("R^2 needs at least two labels");
    }
    double mean = 0.0;
    for (double y : labels) {
        mean += y;
    }
    mean /= static_cast<double>(labels.size());
    double ss_res = 0.0;
    double ss_tot = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const double e = preds[i] - labels[i];
        const double d = labels[i] - mean;
        ss_res += e * e;
        ss_tot += d * d;
    }
    if (ss_tot == 0.0) {
        throw UndefinedMetricError("labels have zero variance");
    }
    return 1.0 - ss_res / ss_tot;
}

double aad(std::span<const double> a, std::span<const double> b) {
    require_same_length(a.size(), b.size());
    if (a.empty()) {
        throw StructuralError("AAD of empty vectors");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        acc += std::abs(a[i] - b[i]);
    }
    return acc / static_cast<double>(a.size());
}

double mean_squared_error(std::span<const double> a,
                          std::span<const double> b) {
    require_same_length(a.size(), b.size());
    if (a.empty()) {
        throw StructuralError("MSE of empty vectors");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc / static_cast<double>(a.size());
}

// Fourier spectrum --------------------------------------------------------------

double SpectrumReport::high_frequency_mass(double cutoff) const {
    double total = 0.0;
    double high = 0.0;
    for (std::size_t j = 0; j < frequencies.size(); ++j) {
        total += mean_abs_coeff[j];
        if (std::abs(frequencies[j]) > cutoff) {
            high += mean_abs_coeff[j];
        }
    }
    if (total == 0.0) {
        throw UndefinedMetricError("spectrum has no mass");
    }
    return high / total;
}

double SpectrumReport::magnitude(int omega) const {
    const auto it = std::find(frequencies.begin(), frequencies.end(), omega);
    if (it == frequencies.end()) {
        throw StructuralError(fmt::format("frequency {} outside grid", omega));
    }
    return mean_abs_coeff[static_cast<std::size_t>(it - frequencies.begin())];
}

std::vector<double> fourier_grid(std::size_t grid_size) {
    std::vector<double> xs(grid_size);
    for (std::size_t k = 0; k < grid_size; ++k) {
        xs[k] = -std::numbers::pi + 2.0 * std::numbers::pi *
                                        static_cast<double>(k) /
                                        static_cast<double>(grid_size);
    }
    return xs;
}

SpectrumReport
spectrum_from_samples(const std::vector<std::vector<double>> &signals) {
    if (signals.empty()) {
        throw StructuralError("spectrum needs at least one signal");
    }
    const std::size_t N = signals.front().size();
    if (N < 2) {
        throw StructuralError("spectrum needs at least two samples");
    }
    std::vector<std::complex<double>> twiddle(N);
    for (std::size_t m = 0; m < N; ++m) {
        const double phase = -2.0 * std::numbers::pi * static_cast<double>(m) /
                             static_cast<double>(N);
        twiddle[m] = {std::cos(phase), std::sin(phase)};
    }

    SpectrumReport out;
    out.grid_size = N;
    out.ensemble_size = signals.size();
    const long half = static_cast<long>(N / 2);
    for (long w = -half; w < static_cast<long>(N) - half; ++w) {
        out.frequencies.push_back(static_cast<int>(w));
    }
    out.mean_abs_coeff.assign(N, 0.0);
    out.mean_sq_coeff.assign(N, 0.0);

    for (const auto &f : signals) {
        require_same_length(f.size(), N);
        double power = 0.0;
        for (double v : f) {
            power += v * v;
        }
        out.mean_power += power / static_cast<double>(N);
        for (std::size_t b = 0; b < N; ++b) {
            const long w = out.frequencies[b];
            const auto wm = static_cast<std::size_t>(
                ((w % static_cast<long>(N)) + static_cast<long>(N)) %
                static_cast<long>(N));
            std::complex<double> c{0.0, 0.0};
            for (std::size_t k = 0; k < N; ++k) {
                c += f[k] * twiddle[(wm * k) % N];
            }
            c /= static_cast<double>(N);
            out.mean_abs_coeff[b] += std::abs(c);
            out.mean_sq_coeff[b] += std::norm(c);
        }
    }
    const double n = static_cast<double>(signals.size());
    out.mean_power /= n;
    for (std::size_t b = 0; b < N; ++b) {
        out.mean_abs_coeff[b] /= n;
        out.mean_sq_coeff[b] /= n;
    }
    return out;
}

SpectrumReport fourier_spectrum(const model::QnnModel &model,
                                const std::vector<model::ParamVector> &params,
                                std::size_t grid_size) {
    if (grid_size < 32 || !std::has_single_bit(grid_size)) {
        throw ConfigError("Fourier grid size must be a power of two >= 32");
    }
    if (model.config().input_dim != 1) {
        throw ConfigError("Fourier probe needs a one-dimensional input");
    }
    const auto xs = fourier_grid(grid_size);
    std::vector<std::vector<double>> signals;
    signals.reserve(params.size());
    for (const auto &theta : params) {
        std::vector<double> f(grid_size);
        for (std::size_t k = 0; k < grid_size; ++k) {
            const double x = xs[k];
            f[k] = model::forward(model, std::span<const double>(&x, 1),
                                  theta)[0];
        }
        signals.push_back(std::move(f));
    }
    return spectrum_from_samples(signals);
}

SpectrumReport fourier_spectrum(const model::QnnModel &model,
                                std::span<const std::uint64_t> seeds,
                                std::size_t grid_size) {
    std::vector<model::ParamVector> params;
    params.reserve(seeds.size());
    for (auto s : seeds) {
        params.push_back(train::initial_params(model.param_count(), s));
    }
    return fourier_spectrum(model, params, grid_size);
}

std::string spectrum_csv(const SpectrumReport &report) {
    std::string out = io::csv_row({"omega", "mean_abs_coeff"});
    for (std::size_t b = 0; b < report.frequencies.size(); ++b) {
        out += io::csv_row({std::to_string(report.frequencies[b]),
                            io::format_double(report.mean_abs_coeff[b])});
    }
    return out;
}

void to_json(nlohmann::json &j, const SpectrumReport &r) {
    j = nlohmann::json{{"frequencies", r.frequencies},
                       {"mean_abs_coeff", r.mean_abs_coeff},
                       {"mean_sq_coeff", r.mean_sq_coeff},
                       {"mean_power", r.mean_power},
                       {"ensemble_size", r.ensemble_size},
                       {"grid_size", r.grid_size}};
}

// Learning-rate selection ---------------------------------------------------------

void EtaMode::validate() const {
    if (kind != Kind::Crit && (!(value > 0.0) || !std::isfinite(value))) {
        throw ConfigError("learning-rate value must be positive and finite");
    }
}

void to_json(nlohmann::json &j, const EtaMode &m) {
    switch (m.kind) {
    case EtaMode::Kind::Crit:
        j = "crit";
        break;
    case EtaMode::Kind::Fraction:
        j = nlohmann::json{{"fraction", m.value}};
        break;
    case EtaMode::Kind::Absolute:
        j = nlohmann::json{{"absolute", m.value}};
        break;
    }
}

void from_json(const nlohmann::json &j, EtaMode &m) {
    if (j.is_string()) {
        if (j.get<std::string>() != "crit") {
            throw ConfigError(fmt::format("unknown eta_mode '{}'",
                                          j.get<std::string>()));
        }
        m = EtaMode{};
        return;
    }
    if (!j.is_object() || j.size() != 1) {
        throw ConfigError(
            "eta_mode must be \"crit\", {\"fraction\": f} or {\"absolute\": v}");
    }
    const auto &[key, val] = *j.items().begin();
    if (!val.is_number()) {
        throw ConfigError("eta_mode value must be a number");
    }
    if (key == "fraction") {
        m = EtaMode{EtaMode::Kind::Fraction, val.get<double>()};
    } else if (key == "absolute") {
        m = EtaMode{EtaMode::Kind::Absolute, val.get<double>()};
    } else {
        throw ConfigError(fmt::format("unknown eta_mode '{}'", key));
    }
    m.validate();
}

double resolve_eta(const EtaMode &mode, const kernel::Diagnostics &diag) {
    mode.validate();
    if (mode.kind == EtaMode::Kind::Absolute) {
        return mode.value;
    }
    if (!(diag.lambda_max > 0.0)) {
        throw SingularKernelError("critical learning rate needs lambda_max > 0");
    }
    const double crit = 2.0 / diag.lambda_max;
    return mode.kind == EtaMode::Kind::Crit ? crit : mode.value * crit;
}

// Diagnostic report -------------------------------------------------------------

Aggregate aggregate(std::span<const double> values) {
    Aggregate a;
    a.count = values.size();
    if (values.empty()) {
        return a;
    }
    for (double v : values) {
        a.mean += v;
    }
    a.mean /= static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) {
        var += (v - a.mean) * (v - a.mean);
    }
    a.std = std::sqrt(var / static_cast<double>(values.size()));
    return a;
}

Eigen::MatrixXd extended_inputs(const data::Dataset &dataset) {
    if (dataset.input_dim() == 1) {
        const auto xs = data::extended_test_inputs_1d(
            100, dataset.feature_scaler.target_lo,
            dataset.feature_scaler.target_hi);
        Eigen::MatrixXd out(static_cast<Eigen::Index>(xs.size()), 1);
        for (std::size_t i = 0; i < xs.size(); ++i) {
            out(static_cast<Eigen::Index>(i), 0) = xs[i];
        }
        return out;
    }
    if (dataset.input_dim() == 2) {
        return data::inference_grid_moons(0.1);
    }
    throw ConfigError("extended inputs are defined for 1 or 2 features");
}

namespace {

SeedResult run_seed(const model::QnnModel &model, const data::Dataset &dataset,
                    const Eigen::MatrixXd &ext, std::uint64_t seed,
                    const train::TrainConfig &train_config,
                    const EtaMode &eta_mode) {
    SeedResult r;
    r.seed = seed;
    const Eigen::MatrixXd x_train = dataset.train_inputs();
    const Eigen::MatrixXd x_test = dataset.test_inputs();
    const Eigen::VectorXd y_train = kernel::flatten(dataset.train_labels());
    const Eigen::VectorXd y_test = kernel::flatten(dataset.test_labels());

    const auto theta0 = train::initial_params(model.param_count(), seed);
    const Eigen::MatrixXd G_train =
        kernel::stacked_jacobian(model, theta0, x_train);
    kernel::KernelBundle bundle;
    try {
        bundle = kernel::make_bundle(kernel::gram(G_train));
        r.diagnostics = kernel::diagnostics(bundle);
        r.eta = resolve_eta(eta_mode, *r.diagnostics);
    } catch (const SingularKernelError &e) {
        r.status = "singular_kernel";
        r.message = e.what();
        return r;
    }

    const Eigen::MatrixXd map_test = kernel::inference_map(
        kernel::stacked_jacobian(model, theta0, x_test) * G_train.transpose(),
        bundle.K_inv);
    const Eigen::MatrixXd map_ext = kernel::inference_map(
        kernel::stacked_jacobian(model, theta0, ext) * G_train.transpose(),
        bundle.K_inv);
    r.qntk_test = map_test * y_train;
    r.qntk_extended = map_ext * y_train;

    train::TrainConfig tc = train_config;
    tc.eta = r.eta;
    tc.seed = seed;
    train::TrainLog log;
    try {
        log = train::train(model, dataset, tc, theta0);
    } catch (const train::DivergenceError &e) {
        r.status = "divergence";
        r.message = e.what();
        r.epochs_run = e.log().epochs_run;
        r.final_loss = e.log().final_loss;
        return r;
    }
    r.epochs_run = log.epochs_run;
    r.converged = log.converged;
    r.final_loss = log.final_loss;
    r.rel_param_change = train::lazy_metrics(log);
    r.loss_increase_fraction = train::loss_increase_fraction(log);

    r.qnn_test = train::predict(model, log.theta_final, x_test);
    r.qnn_extended = train::predict(model, log.theta_final, ext);
    if (y_test.size() > 0) {
        r.mse_qntk = mean_squared_error(as_span(r.qntk_test), as_span(y_test));
        r.mse_qnn = mean_squared_error(as_span(r.qnn_test), as_span(y_test));
        try {
            r.r2_qntk = r2_score(as_span(r.qntk_test), as_span(y_test));
            r.r2_qnn = r2_score(as_span(r.qnn_test), as_span(y_test));
        } catch (const UndefinedMetricError &) {
            r.r2_qntk.reset();
            r.r2_qnn.reset();
        }
    }
    r.aad = aad(as_span(r.qnn_extended), as_span(r.qntk_extended));
    return r;
}

void mean_and_std(const std::vector<const Eigen::VectorXd *> &curves,
                  Eigen::VectorXd &mean, Eigen::VectorXd &sd) {
    if (curves.empty()) {
        mean.resize(0);
        sd.resize(0);
        return;
    }
    const auto n = static_cast<double>(curves.size());
    mean = Eigen::VectorXd::Zero(curves.front()->size());
    for (const auto *c : curves) {
        mean += *c;
    }
    mean /= n;
    sd = Eigen::VectorXd::Zero(mean.size());
    for (const auto *c : curves) {
        sd += (*c - mean).cwiseAbs2();
    }
    sd = (sd / n).cwiseSqrt();
}

} // namespace

DiagnosticReport build_report(const model::ModelConfig &config,
                              const data::Dataset &dataset,
                              std::span<const std::uint64_t> seeds,
                              const train::TrainConfig &train_config,
                              const EtaMode &eta_mode) {
    config.validate();
    return build_report(model::build_model(config), dataset, seeds,
                        train_config, eta_mode);
}

DiagnosticReport build_report(const model::QnnModel &model,
                              const data::Dataset &dataset,
                              std::span<const std::uint64_t> seeds,
                              const train::TrainConfig &train_config,
                              const EtaMode &eta_mode) {
    const auto &config = model.config();
    eta_mode.validate();
    if (seeds.empty()) {
        throw ConfigError("at least one seed is required");
    }
    if (dataset.input_dim() != config.input_dim ||
        dataset.n_outputs() != config.n_outputs) {
        throw ConfigError(fmt::format(
            "dataset shape ({} features, {} outputs) does not match the model "
            "({} features, {} outputs)",
            dataset.input_dim(), dataset.n_outputs(), config.input_dim,
            config.n_outputs));
    }

    DiagnosticReport rep;
    rep.model = config;
    rep.train = train_config;
    rep.eta_mode = eta_mode;
    rep.dataset = dataset.generator;
    rep.test_labels = kernel::flatten(dataset.test_labels());
    rep.extended_inputs = extended_inputs(dataset);

    for (auto seed : seeds) {
        rep.seeds.push_back(run_seed(model, dataset, rep.extended_inputs, seed,
                                     train_config, eta_mode));
    }

    std::vector<const Eigen::VectorXd *> qntk_curves;
    std::vector<const Eigen::VectorXd *> qnn_curves;
    std::map<std::string, std::vector<double>> columns;
    for (const auto &r : rep.seeds) {
        if (r.diagnostics) {
            columns["lambda_min"].push_back(r.diagnostics->lambda_min);
            columns["lambda_max"].push_back(r.diagnostics->lambda_max);
            columns["kappa"].push_back(r.diagnostics->kappa);
            columns["eta_crit"].push_back(r.diagnostics->eta_crit);
            columns["tau"].push_back(r.diagnostics->tau);
        }
        if (!r.ok()) {
            continue;
        }
        qntk_curves.push_back(&r.qntk_extended);
        qnn_curves.push_back(&r.qnn_extended);
        columns["eta"].push_back(r.eta);
        columns["epochs_run"].push_back(static_cast<double>(r.epochs_run));
        columns["converged"].push_back(r.converged ? 1.0 : 0.0);
        columns["final_loss"].push_back(r.final_loss);
        columns["rel_param_change"].push_back(r.rel_param_change);
        columns["loss_increase_fraction"].push_back(r.loss_increase_fraction);
        columns["aad"].push_back(r.aad);
        if (rep.test_labels.size() > 0) {
            columns["mse_qntk"].push_back(r.mse_qntk);
            columns["mse_qnn"].push_back(r.mse_qnn);
        }
        if (r.r2_qntk) {
            columns["r2_qntk"].push_back(*r.r2_qntk);
            columns["r2_qnn"].push_back(*r.r2_qnn);
        }
    }
    for (const auto &[name, values] : columns) {
        rep.aggregates[name] = aggregate(values);
    }
    mean_and_std(qntk_curves, rep.qntk_mean, rep.qntk_std);
    mean_and_std(qnn_curves, rep.qnn_mean, rep.qnn_std);
    if (!qnn_curves.empty()) {
        rep.aad_of_means = aad(as_span(rep.qnn_mean), as_span(rep.qntk_mean));
    }
    return rep;
}

namespace {

std::vector<double> to_std(const Eigen::VectorXd &v) {
    return {v.data(), v.data() + v.size()};
}

} // namespace

void to_json(nlohmann::json &j, const DiagnosticReport &r) {
    nlohmann::json seeds = nlohmann::json::array();
    for (const auto &s : r.seeds) {
        nlohmann::json e{{"seed", s.seed},
                         {"status", s.status},
                         {"message", s.message}};
        if (s.diagnostics) {
            e["diagnostics"] = *s.diagnostics;
            e["eta"] = s.eta;
        }
        if (s.ok()) {
            e["epochs_run"] = s.epochs_run;
            e["converged"] = s.converged;
            e["final_loss"] = s.final_loss;
            e["rel_param_change"] = s.rel_param_change;
            e["loss_increase_fraction"] = s.loss_increase_fraction;
            e["mse_qntk"] = s.mse_qntk;
            e["mse_qnn"] = s.mse_qnn;
            e["r2_qntk"] = s.r2_qntk ? nlohmann::json(*s.r2_qntk) : nullptr;
            e["r2_qnn"] = s.r2_qnn ? nlohmann::json(*s.r2_qnn) : nullptr;
            e["aad"] = s.aad;
            e["qntk_test"] = to_std(s.qntk_test);
            e["qnn_test"] = to_std(s.qnn_test);
        } else if (s.status == "divergence") {
            e["epochs_run"] = s.epochs_run;
            e["final_loss"] = s.final_loss;
        }
        seeds.push_back(std::move(e));
    }
    nlohmann::json aggregates = nlohmann::json::object();
    for (const auto &[name, a] : r.aggregates) {
        aggregates[name] = {{"mean", a.mean}, {"std", a.std}, {"count", a.count}};
    }
    j = nlohmann::json{
        {"model", r.model},
        {"train", r.train},
        {"eta_mode", r.eta_mode},
        {"dataset", r.dataset},
        {"test_labels", to_std(r.test_labels)},
        {"seeds", seeds},
        {"aggregates", aggregates},
        {"aad_of_means",
         r.aad_of_means ? nlohmann::json(*r.aad_of_means) : nullptr}};
}

std::string predictions_csv(const DiagnosticReport &r) {
    const auto d = r.extended_inputs.cols();
    const auto D = r.extended_inputs.rows();
    const auto C = static_cast<Eigen::Index>(r.model.n_outputs);
    std::vector<std::string> header;
    if (d == 1) {
        header.emplace_back("x");
    } else {
        for (Eigen::Index k = 0; k < d; ++k) {
            header.push_back(fmt::format("x_{}", k));
        }
    }
    if (C > 1) {
        header.emplace_back("output");
    }
    for (const char *h : {"qntk_mean", "qntk_std", "qnn_mean", "qnn_std"}) {
        header.emplace_back(h);
    }
    std::string out = io::csv_row(header);
    if (r.qnn_mean.size() == 0) {
        return out;
    }
    for (Eigen::Index i = 0; i < D; ++i) {
        for (Eigen::Index jo = 0; jo < C; ++jo) {
            const Eigen::Index a = i * C + jo;
            std::vector<std::string> row;
            for (Eigen::Index k = 0; k < d; ++k) {
                row.push_back(io::format_double(r.extended_inputs(i, k)));
            }
            if (C > 1) {
                row.push_back(std::to_string(jo));
            }
            row.push_back(io::format_double(r.qntk_mean(a)));
            row.push_back(io::format_double(r.qntk_std(a)));
            row.push_back(io::format_double(r.qnn_mean(a)));
            row.push_back(io::format_double(r.qnn_std(a)));
            out += io::csv_row(row);
        }
    }
    return out;
}

std::string training_csv(const DiagnosticReport &r) {
    std::string out =
        io::csv_row({"seed", "epochs", "final_loss", "rel_param_change"});
    for (const auto &s : r.seeds) {
        if (!s.ok()) {
            continue;
        }
        out += io::csv_row({std::to_string(s.seed), std::to_string(s.epochs_run),
                            io::format_double(s.final_loss),
                            io::format_double(s.rel_param_change)});
    }
    return out;
}

std::string diagnostics_csv(
    const std::vector<std::pair<std::uint64_t, kernel::Diagnostics>> &rows) {
    std::string out = io::csv_row(
        {"seed", "lambda_min", "lambda_max", "kappa", "eta_crit", "tau"});
    for (const auto &[seed, d] : rows) {
        out += io::csv_row({std::to_string(seed), io::format_double(d.lambda_min),
                            io::format_double(d.lambda_max),
                            io::format_double(d.kappa),
                            io::format_double(d.eta_crit),
                            io::format_double(d.tau)});
    }
    return out;
}

std::string diagnostics_csv(const DiagnosticReport &r) {
    std::vector<std::pair<std::uint64_t, kernel::Diagnostics>> rows;
    for (const auto &s : r.seeds) {
        if (s.diagnostics) {
            rows.emplace_back(s.seed, *s.diagnostics);
        }
    }
    return diagnostics_csv(rows);
}

} // namespace qntk::analysis
