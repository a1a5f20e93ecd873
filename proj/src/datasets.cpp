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
#include "qntk/datasets.hpp"

#include "qntk/error.hpp"
#include "qntk/io.hpp"
#include "qntk/random.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/core.h>

namespace qntk::data {

// Scaling -------------------------------------------------------------------

MinMaxScaler MinMaxScaler::fit(const Eigen::MatrixXd &values, double lo,
                               double hi) {
    if (values.rows() == 0) {
        throw ConfigError("cannot fit a scaler on zero rows");
    }
    if (!(lo < hi)) {
        throw ConfigError("scaler target range must satisfy lo < hi");
    }
    MinMaxScaler s{values.colwise().minCoeff().transpose(),
                   values.colwise().maxCoeff().transpose(), lo, hi};
    for (Eigen::Index j = 0; j < s.source_min.size(); ++j) {
        if (!(s.source_max(j) > s.source_min(j))) {
            throw ConfigError(fmt::format(
                "column {} is constant; min-max scaling undefined", j));
        }
    }
    return s;
}

Eigen::MatrixXd MinMaxScaler::transform(const Eigen::MatrixXd &v) const {
    if (v.cols() != source_min.size()) {
        throw StructuralError("scaler column count mismatch");
    }
    Eigen::MatrixXd out(v.rows(), v.cols());
    for (Eigen::Index j = 0; j < v.cols(); ++j) {
        const double width = source_max(j) - source_min(j);
        for (Eigen::Index i = 0; i < v.rows(); ++i) {
            out(i, j) = target_lo +
                        (target_hi - target_lo) * ((v(i, j) - source_min(j)) / width);
        }
    }
    return out;
}

Eigen::MatrixXd MinMaxScaler::inverse(const Eigen::MatrixXd &v) const {
    if (v.cols() != source_min.size()) {
        throw StructuralError("scaler column count mismatch");
    }
    Eigen::MatrixXd out(v.rows(), v.cols());
    for (Eigen::Index j = 0; j < v.cols(); ++j) {
        const double width = source_max(j) - source_min(j);
        for (Eigen::Index i = 0; i < v.rows(); ++i) {
            out(i, j) = source_min(j) +
                        width * ((v(i, j) - target_lo) / (target_hi - target_lo));
        }
    }
    return out;
}

void to_json(nlohmann::json &j, const MinMaxScaler &s) {
    j = nlohmann::json{
        {"source_min", std::vector<double>(s.source_min.begin(), s.source_min.end())},
        {"source_max", std::vector<double>(s.source_max.begin(), s.source_max.end())},
        {"target", {s.target_lo, s.target_hi}}};
}

void from_json(const nlohmann::json &j, MinMaxScaler &s) {
    const auto lo = j.at("source_min").get<std::vector<double>>();
    const auto hi = j.at("source_max").get<std::vector<double>>();
    if (lo.size() != hi.size()) {
        throw StructuralError("scaler bounds have different lengths");
    }
    s.source_min = Eigen::Map<const Eigen::VectorXd>(
        lo.data(), static_cast<Eigen::Index>(lo.size()));
    s.source_max = Eigen::Map<const Eigen::VectorXd>(
        hi.data(), static_cast<Eigen::Index>(hi.size()));
    const auto target = j.at("target").get<std::vector<double>>();
    if (target.size() != 2) {
        throw StructuralError("scaler target must have two entries");
    }
    s.target_lo = target[0];
    s.target_hi = target[1];
}

// Dataset -------------------------------------------------------------------

std::size_t Dataset::n_train() const {
    return static_cast<std::size_t>(
        std::count(train_mask.begin(), train_mask.end(), true));
}

std::vector<std::size_t> Dataset::train_indices() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < train_mask.size(); ++i) {
        if (train_mask[i]) {
            out.push_back(i);
        }
    }
    return out;
}

std::vector<std::size_t> Dataset::test_indices() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < train_mask.size(); ++i) {
        if (!train_mask[i]) {
            out.push_back(i);
        }
    }
    return out;
}

namespace {

Eigen::MatrixXd take_rows(const Eigen::MatrixXd &m,
                          const std::vector<std::size_t> &rows) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), m.cols());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r] >= static_cast<std::size_t>(m.rows())) {
            throw StructuralError("row index out of range");
        }
        out.row(static_cast<Eigen::Index>(r)) =
            m.row(static_cast<Eigen::Index>(rows[r]));
    }
    return out;
}

Eigen::VectorXd linspace(std::size_t n, double lo, double hi) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(n));
    for (std::size_t k = 0; k < n; ++k) {
        v(static_cast<Eigen::Index>(k)) =
            n == 1 ? lo
                   : lo + (hi - lo) * (static_cast<double>(k) /
                                       static_cast<double>(n - 1));
    }
    if (n > 1) {
        v(static_cast<Eigen::Index>(n - 1)) = hi;
    }
    return v;
}

} // namespace

Eigen::MatrixXd Dataset::train_inputs() const {
    return take_rows(inputs, train_indices());
}
Eigen::MatrixXd Dataset::train_labels() const {
    return take_rows(labels, train_indices());
}
Eigen::MatrixXd Dataset::test_inputs() const {
    return take_rows(inputs, test_indices());
}
Eigen::MatrixXd Dataset::test_labels() const {
    return take_rows(labels, test_indices());
}

Dataset Dataset::training_subset(const std::vector<std::size_t> &rows) const {
    Dataset out = *this;
    out.inputs = take_rows(inputs, rows);
    out.labels = take_rows(labels, rows);
    out.train_mask.assign(rows.size(), true);
    return out;
}

std::vector<bool> split_mask(std::size_t n, double fraction,
                             std::uint64_t seed) {
    if (!(fraction >= 0.0 && fraction <= 1.0)) {
        throw ConfigError("train fraction must lie in [0, 1]");
    }
    Rng rng(seed);
    const auto perm = rng.permutation(n);
    const auto n_train = static_cast<std::size_t>(
        std::llround(fraction * static_cast<double>(n)));
    std::vector<bool> mask(n, false);
    for (std::size_t k = 0; k < n_train; ++k) {
        mask[perm[k]] = true;
    }
    return mask;
}

// TFIM ------------------------------------------------------------------------

std::vector<double> TfimConfig::default_fields() {
    std::vector<double> h(20);
    for (std::size_t k = 0; k < h.size(); ++k) {
        h[k] = -5.0 + 0.5 * static_cast<double>(k);
    }
    return h;
}

void TfimConfig::validate() const {
    if (n_spins < 2 || n_spins > kMaxSpins) {
        throw ConfigError(fmt::format("n_spins must be in [2, {}], got {}",
                                      kMaxSpins, n_spins));
    }
    if (fields.empty()) {
        throw ConfigError("TFIM field list is empty");
    }
    if (!(coupling != 0.0) || !std::isfinite(coupling)) {
        throw ConfigError("TFIM coupling must be finite and non-zero");
    }
    if (!(feature_lo < feature_hi)) {
        throw ConfigError("TFIM feature range must satisfy lo < hi");
    }
}

TfimGroundState tfim_ground_state(std::size_t n_spins, double field,
                                  double coupling) {
    if (n_spins < 2 || n_spins > kMaxSpins) {
        throw ConfigError(fmt::format("n_spins must be in [2, {}], got {}",
                                      kMaxSpins, n_spins));
    }
    const std::size_t dim = std::size_t{1} << n_spins;
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim),
                                              static_cast<Eigen::Index>(dim));
    for (std::size_t s = 0; s < dim; ++s) {
        double zz = 0.0;
        for (std::size_t i = 0; i < n_spins; ++i) {
            const std::size_t j = (i + 1) % n_spins;
            const double zi = ((s >> i) & 1U) != 0 ? -1.0 : 1.0;
            const double zj = ((s >> j) & 1U) != 0 ? -1.0 : 1.0;
            zz += zi * zj;
        }
        const auto si = static_cast<Eigen::Index>(s);
        H(si, si) = -coupling * zz;
        for (std::size_t i = 0; i < n_spins; ++i) {
            const auto flipped = static_cast<Eigen::Index>(s ^ (std::size_t{1} << i));
            H(flipped, si) += -field;
        }
    }

    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(H);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("TFIM diagonalization failed");
    }
    const auto &evals = solver.eigenvalues();
    const auto &evecs = solver.eigenvectors();

    constexpr double degeneracy_tol = 1e-10;
    Eigen::Index multiplet = 1;
    while (multiplet < evals.size() &&
           evals(multiplet) - evals(0) < degeneracy_tol) {
        ++multiplet;
    }

    auto mx = [&](const Eigen::VectorXd &g) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n_spins; ++i) {
            const std::size_t bit = std::size_t{1} << i;
            for (std::size_t s = 0; s < dim; ++s) {
                acc += g(static_cast<Eigen::Index>(s)) *
                       g(static_cast<Eigen::Index>(s ^ bit));
            }
        }
        return acc / static_cast<double>(n_spins);
    };

    TfimGroundState out;
    out.energy = evals(0);
    out.gap = evals.size() > 1 ? evals(1) - evals(0) : 0.0;
    out.degenerate = multiplet > 1;
    double total = 0.0;
    for (Eigen::Index k = 0; k < multiplet; ++k) {
        total += mx(evecs.col(k));
    }
    out.magnetization = total / static_cast<double>(multiplet);
    return out;
}

double tfim_ground_magnetization(std::size_t n_spins, double field,
                                 double coupling) {
    return tfim_ground_state(n_spins, field, coupling).magnetization;
}

Dataset make_tfim_dataset(const TfimConfig &config, std::uint64_t split_seed) {
    config.validate();
    const auto M = static_cast<Eigen::Index>(config.fields.size());
    Eigen::MatrixXd raw(M, 1);
    Eigen::MatrixXd labels(M, 1);
    for (Eigen::Index k = 0; k < M; ++k) {
        const double h = config.fields[static_cast<std::size_t>(k)];
        raw(k, 0) = h / config.coupling;
        labels(k, 0) = tfim_ground_magnetization(config.n_spins, h,
                                                 config.coupling);
    }
    Dataset ds;
    ds.feature_scaler =
        MinMaxScaler::fit(raw, config.feature_lo, config.feature_hi);
    ds.inputs = ds.feature_scaler.transform(raw);
    ds.labels = std::move(labels);
    ds.train_mask = split_mask(config.fields.size(), 0.5, split_seed);
    ds.generator = "tfim";
    ds.seed = split_seed;
    return ds;
}

// Synthetic -------------------------------------------------------------------

Dataset make_sinusoid_dataset(std::size_t n_points, double noise_std,
                              std::uint64_t seed, double amplitude) {
    if (n_points < 2) {
        throw ConfigError("sinusoid dataset needs at least 2 points");
    }
    if (!(noise_std >= 0.0)) {
        throw ConfigError("noise standard deviation must be non-negative");
    }
    Rng rng(seed);
    const Eigen::VectorXd x = linspace(n_points, -1.0, 1.0);
    Eigen::MatrixXd y(x.size(), 1);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        y(i, 0) = std::sin(std::numbers::pi * x(i)) +
                  amplitude * rng.normal(0.0, noise_std);
    }
    Dataset ds;
    const Eigen::MatrixXd xm = x;
    ds.feature_scaler = MinMaxScaler::fit(xm, -1.0, 1.0);
    ds.inputs = ds.feature_scaler.transform(xm);
    ds.label_scaler = MinMaxScaler::fit(y, -1.0, 1.0);
    ds.labels = ds.label_scaler->transform(y);
    ds.train_mask = split_mask(n_points, 0.5, seed ^ 0x5EED5EEDULL);
    ds.generator = "sinusoid";
    ds.seed = seed;
    return ds;
}

Dataset make_moons_dataset(std::size_t n_points, double noise_std,
                           std::uint64_t seed) {
    if (n_points < 2 || n_points % 2 != 0) {
        throw ConfigError("moons dataset needs an even number of points >= 2");
    }
    if (!(noise_std >= 0.0)) {
        throw ConfigError("noise standard deviation must be non-negative");
    }
    const std::size_t half = n_points / 2;
    const Eigen::VectorXd t = linspace(half, 0.0, std::numbers::pi);
    const auto n = static_cast<Eigen::Index>(n_points);
    const auto h = static_cast<Eigen::Index>(half);
    Eigen::MatrixXd raw(n, 2);
    Eigen::MatrixXd labels(n, 2);
    for (Eigen::Index k = 0; k < h; ++k) {
        raw(k, 0) = std::cos(t(k));
        raw(k, 1) = std::sin(t(k));
        labels.row(k) << 1.0, -1.0;
        raw(h + k, 0) = 1.0 - std::cos(t(k));
        raw(h + k, 1) = 0.5 - std::sin(t(k));
        labels.row(h + k) << -1.0, 1.0;
    }
    Rng rng(seed);
    if (noise_std > 0.0) {
        for (Eigen::Index i = 0; i < n; ++i) {
            raw(i, 0) += rng.normal(0.0, noise_std);
            raw(i, 1) += rng.normal(0.0, noise_std);
        }
    }
    Dataset ds;
    ds.feature_scaler = MinMaxScaler::fit(raw, -1.0, 1.0);
    ds.inputs = ds.feature_scaler.transform(raw);
    ds.labels = std::move(labels);
    ds.train_mask = split_mask(n_points, 0.5, seed ^ 0x5EED5EEDULL);
    ds.generator = "moons";
    ds.seed = seed;
    return ds;
}

Eigen::MatrixXd inference_grid_moons(double step, double lo, double hi) {
    if (!(step > 0.0)) {
        throw ConfigError("grid step must be positive");
    }
    if (!(lo < hi)) {
        throw ConfigError("grid range must satisfy lo < hi");
    }
    const auto per_axis =
        static_cast<Eigen::Index>(std::floor((hi - lo) / step + 1e-9)) + 1;
    Eigen::VectorXd axis(per_axis);
    for (Eigen::Index k = 0; k < per_axis; ++k) {
        axis(k) = std::min(hi, lo + static_cast<double>(k) * step);
    }
    Eigen::MatrixXd grid(per_axis * per_axis, 2);
    for (Eigen::Index a = 0; a < per_axis; ++a) {
        for (Eigen::Index b = 0; b < per_axis; ++b) {
            grid.row(a * per_axis + b) << axis(a), axis(b);
        }
    }
    return grid;
}

std::vector<double> extended_test_inputs_1d(std::size_t D, double lo,
                                            double hi) {
    if (D < 2) {
        throw ConfigError("extended test set needs at least 2 points");
    }
    const Eigen::VectorXd v = linspace(D, lo, hi);
    return {v.begin(), v.end()};
}

std::vector<std::size_t> argmax_classes(const Eigen::MatrixXd &outputs) {
    std::vector<std::size_t> out(static_cast<std::size_t>(outputs.rows()));
    for (Eigen::Index i = 0; i < outputs.rows(); ++i) {
        Eigen::Index best = 0;
        outputs.row(i).maxCoeff(&best);
        out[static_cast<std::size_t>(i)] = static_cast<std::size_t>(best);
    }
    return out;
}

// Serialization -----------------------------------------------------------------

std::string dataset_csv(const Dataset &ds) {
    std::vector<std::string> header;
    for (std::size_t j = 0; j < ds.input_dim(); ++j) {
        header.push_back(fmt::format("feature_{}", j));
    }
    for (std::size_t j = 0; j < ds.n_outputs(); ++j) {
        header.push_back(fmt::format("label_{}", j));
    }
    header.emplace_back("is_train");
    std::string out = io::csv_row(header);
    for (Eigen::Index i = 0; i < ds.inputs.rows(); ++i) {
        std::vector<std::string> row;
        for (Eigen::Index j = 0; j < ds.inputs.cols(); ++j) {
            row.push_back(io::format_double(ds.inputs(i, j)));
        }
        for (Eigen::Index j = 0; j < ds.labels.cols(); ++j) {
            row.push_back(io::format_double(ds.labels(i, j)));
        }
        row.emplace_back(ds.train_mask[static_cast<std::size_t>(i)] ? "1" : "0");
        out += io::csv_row(row);
    }
    return out;
}

nlohmann::json dataset_metadata(const Dataset &ds) {
    nlohmann::json j{{"generator", ds.generator},
                     {"seed", ds.seed},
                     {"n_points", ds.size()},
                     {"input_dim", ds.input_dim()},
                     {"n_outputs", ds.n_outputs()},
                     {"n_train", ds.n_train()},
                     {"feature_scaler", ds.feature_scaler}};
    j["label_scaler"] = ds.label_scaler ? nlohmann::json(*ds.label_scaler)
                                        : nlohmann::json(nullptr);
    return j;
}

void save_dataset(const Dataset &ds, const std::filesystem::path &dir,
                  const std::string &stem) {
    io::write_text(dir / (stem + ".csv"), dataset_csv(ds));
    io::write_json(dir / (stem + ".json"), dataset_metadata(ds));
}

Dataset load_dataset(const std::filesystem::path &csv,
                     const std::filesystem::path &json) {
    const auto meta = nlohmann::json::parse(io::read_text(json));
    const auto table = io::read_csv(csv);
    const auto d = meta.at("input_dim").get<std::size_t>();
    const auto c = meta.at("n_outputs").get<std::size_t>();
    const auto m = static_cast<Eigen::Index>(table.rows.size());

    Dataset ds;
    ds.inputs.resize(m, static_cast<Eigen::Index>(d));
    ds.labels.resize(m, static_cast<Eigen::Index>(c));
    ds.train_mask.resize(table.rows.size());
    std::vector<std::size_t> fcol;
    std::vector<std::size_t> lcol;
    for (std::size_t j = 0; j < d; ++j) {
        fcol.push_back(table.column(fmt::format("feature_{}", j)));
    }
    for (std::size_t j = 0; j < c; ++j) {
        lcol.push_back(table.column(fmt::format("label_{}", j)));
    }
    const auto tcol = table.column("is_train");
    for (Eigen::Index i = 0; i < m; ++i) {
        const auto &row = table.rows[static_cast<std::size_t>(i)];
        for (std::size_t j = 0; j < d; ++j) {
            ds.inputs(i, static_cast<Eigen::Index>(j)) = std::stod(row[fcol[j]]);
        }
        for (std::size_t j = 0; j < c; ++j) {
            ds.labels(i, static_cast<Eigen::Index>(j)) = std::stod(row[lcol[j]]);
        }
        ds.train_mask[static_cast<std::size_t>(i)] = row[tcol] == "1";
    }
    ds.feature_scaler = meta.at("feature_scaler").get<MinMaxScaler>();
    if (!meta.at("label_scaler").is_null()) {
        ds.label_scaler = meta.at("label_scaler").get<MinMaxScaler>();
    }
    ds.generator = meta.at("generator").get<std::string>();
    ds.seed = meta.at("seed").get<std::uint64_t>();
    return ds;
}

} // namespace qntk::data
