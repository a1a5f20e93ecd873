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
// Acceptance runner. Prints one PASS/FAIL line per criterion and exits
// non-zero when any selected criterion fails.

#include "oracles.hpp"

#include "qntk/analysis.hpp"
#include "qntk/cli.hpp"
#include "qntk/datasets.hpp"
#include "qntk/error.hpp"
#include "qntk/io.hpp"
#include "qntk/kernel.hpp"
#include "qntk/models.hpp"
#include "qntk/simulator.hpp"
#include "qntk/training.hpp"

#include <CLI11.hpp>
#include <fmt/core.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <string>
#include <vector>

using namespace qntk;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass{false};
    std::string detail;
};

struct Criterion {
    int index;
    const char *name;
    std::function<Outcome()> run;
};

Eigen::VectorXd row_vector(const Eigen::MatrixXd &m, Eigen::Index i) {
    return m.row(i).transpose();
}

std::span<const double> as_span(const Eigen::VectorXd &v) {
    return {v.data(), static_cast<std::size_t>(v.size())};
}

model::ModelConfig tfim_model(std::size_t layers) {
    model::ModelConfig c;
    c.n_qubits = 4;
    c.layers = layers;
    c.encoding = model::Encoding::HighFreq;
    c.ansatz = model::Ansatz::HEA;
    return c;
}

/// The first four training points of the default sinusoid set.
data::Dataset sinusoid_subset() {
    const auto full = data::make_sinusoid_dataset(20, 0.5, 0);
    const auto tr = full.train_indices();
    return full.training_subset({tr[0], tr[1], tr[2], tr[3]});
}

model::ModelConfig random_config(std::mt19937_64 &rng) {
    std::uniform_int_distribution<std::size_t> n_dist(1, 4);
    std::uniform_int_distribution<std::size_t> l_dist(1, 4);
    std::uniform_int_distribution<int> coin(0, 1);
    model::ModelConfig c;
    c.n_qubits = n_dist(rng);
    c.layers = l_dist(rng);
    c.encoding = coin(rng) ? model::Encoding::HighFreq : model::Encoding::LowFreq;
    c.ansatz = (c.n_qubits >= 2 && coin(rng)) ? model::Ansatz::HVA
                                              : model::Ansatz::HEA;
    c.n_outputs = std::uniform_int_distribution<std::size_t>(1, c.n_qubits)(rng);
    c.input_dim = std::uniform_int_distribution<std::size_t>(
        1, std::min<std::size_t>(2, c.n_qubits))(rng);
    return c;
}

Eigen::MatrixXd random_inputs(std::mt19937_64 &rng, std::size_t m,
                              std::size_t d) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::MatrixXd x(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(d));
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        x.data()[i] = u(rng);
    }
    return x;
}

// 1 ---------------------------------------------------------------------------

Outcome gradient_equivalence() {
    std::mt19937_64 rng(20240101);
    double worst_shift = 0.0;
    double worst_fd = 0.0;
    for (int k = 0; k < 50; ++k) {
        const auto cfg = random_config(rng);
        const auto m = model::build_model(cfg);
        const auto theta = train::initial_params(m.param_count(), rng());
        const Eigen::VectorXd x = row_vector(random_inputs(rng, 1, cfg.input_dim), 0);
        const auto adj = model::model_gradient(m, as_span(x), theta,
                                               sim::GradientMethod::Adjoint);
        const auto ps = model::model_gradient(
            m, as_span(x), theta, sim::GradientMethod::ParameterShift);
        const auto fd = testing::fd_model_gradient(m, as_span(x), theta, 1e-5);
        worst_shift = std::max(worst_shift, (adj - ps).cwiseAbs().maxCoeff());
        worst_fd = std::max({worst_fd, (adj - fd).cwiseAbs().maxCoeff(),
                             (ps - fd).cwiseAbs().maxCoeff()});
    }
    return {worst_shift < 1e-10 && worst_fd < 1e-6,
            fmt::format("50 models, max |adjoint - shift| = {:.2e} (< 1e-10), "
                        "max |exact - fd| = {:.2e} (< 1e-6)",
                        worst_shift, worst_fd)};
}

// 2 ---------------------------------------------------------------------------

Outcome kernel_algebra() {
    std::mt19937_64 rng(77);
    double worst_naive = 0.0;
    double worst_sym = 0.0;
    double worst_neg = 0.0; // min eigenvalue / lambda_max
    double worst_rec = 0.0;
    for (int k = 0; k < 20; ++k) {
        const auto cfg = random_config(rng);
        const auto m = model::build_model(cfg);
        const auto theta = train::initial_params(m.param_count(), rng());
        const std::size_t M = 1 + static_cast<std::size_t>(k % 5);
        const auto X = random_inputs(rng, M, cfg.input_dim);

        std::vector<std::vector<double>> rows;
        for (Eigen::Index i = 0; i < X.rows(); ++i) {
            const Eigen::VectorXd x = row_vector(X, i);
            const auto g = model::model_gradient(m, as_span(x), theta);
            for (Eigen::Index j = 0; j < g.rows(); ++j) {
                rows.emplace_back(g.row(j).begin(), g.row(j).end());
            }
        }
        const auto K = kernel::kernel_matrix(m, theta, X);
        worst_naive = std::max(
            worst_naive, (K - testing::naive_kernel(rows, rows)).cwiseAbs().maxCoeff());
        worst_sym = std::max(worst_sym, (K - K.transpose()).cwiseAbs().maxCoeff());
        const auto b = kernel::make_bundle(K);
        const double lmax = std::max(b.lambda_max(), 1e-300);
        worst_neg = std::min(worst_neg, b.eigenvalues.minCoeff() / lmax);
        const Eigen::MatrixXd rec =
            b.eigenvectors.transpose() * b.eigenvalues.asDiagonal() * b.eigenvectors;
        worst_rec = std::max(worst_rec, (rec - K).cwiseAbs().maxCoeff());
    }
    const bool pass = worst_naive <= 1e-12 && worst_sym == 0.0 &&
                      worst_neg >= -1e-10 && worst_rec <= 1e-9;
    return {pass, fmt::format("20 kernels, |K - naive| = {:.2e}, asymmetry = {:.1e}, "
                              "min lambda/lambda_max = {:.2e}, reconstruction = {:.2e}",
                              worst_naive, worst_sym, worst_neg, worst_rec)};
}

// 3 ---------------------------------------------------------------------------

Outcome training_indicator() {
    struct Case {
        model::ModelConfig cfg;
        data::Dataset ds;
    };
    std::vector<Case> cases;
    const auto tfim = data::make_tfim_dataset(data::TfimConfig{}, 0);
    for (std::size_t L : {10, 30, 50}) {
        cases.push_back({tfim_model(L), tfim});
    }
    model::ModelConfig two = tfim_model(20);
    two.input_dim = 2;
    two.n_outputs = 2;
    cases.push_back({two, data::make_moons_dataset(12, 0.2, 3)});

    double worst = 0.0;
    int checked = 0;
    int skipped = 0;
    for (const auto &c : cases) {
        const auto m = model::build_model(c.cfg);
        for (std::uint64_t seed = 0; seed < 3; ++seed) {
            const auto theta = train::initial_params(m.param_count(), seed);
            const auto X = c.ds.train_inputs();
            const auto b = kernel::make_bundle(kernel::kernel_matrix(m, theta, X));
            if (b.eigenvalues.minCoeff() <= b.cutoff_used) {
                ++skipped;
                continue;
            }
            const auto y = kernel::flatten(c.ds.train_labels());
            const auto pred = kernel::predict_infinite(b.K, b.K_inv, y);
            worst = std::max(worst, (pred - y).cwiseAbs().maxCoeff());
            ++checked;
        }
    }
    return {checked > 0 && worst <= 1e-8,
            fmt::format("{} full-rank kernels ({} rank-deficient skipped), "
                        "max |f - y| on training set = {:.2e} (<= 1e-8)",
                        checked, skipped, worst)};
}

// 4 ---------------------------------------------------------------------------

Outcome lazy_dynamics() {
    const auto m = model::build_model(tfim_model(30));
    const auto ds = sinusoid_subset();
    const auto theta = train::initial_params(m.param_count(), 0);
    const auto b = kernel::make_bundle(kernel::kernel_matrix(m, theta, ds.train_inputs()));
    const auto d = kernel::diagnostics(b);
    train::TrainConfig tc;
    tc.eta = 0.1 * d.eta_crit;
    tc.max_epochs = 101;
    tc.convergence_tol = std::numeric_limits<double>::min();
    const auto log = train::train(m, ds, tc, theta);

    double worst = 0.0;
    double first = 0.0;
    double worst_norm = 0.0; // ||pred - eps|| / ||eps||
    std::size_t worst_step = 0;
    for (std::size_t k = 0; k < log.residuals.size(); ++k) {
        const auto t = log.residual_epochs[k];
        if (t == 0 || t > 100) {
            continue;
        }
        const auto pred = kernel::error_trajectory(b, tc.eta, log.residuals[0],
                                                   static_cast<long long>(t));
        worst_norm = std::max(worst_norm, (pred - log.residuals[k]).norm() /
                                              log.residuals[k].norm());
        for (Eigen::Index a = 0; a < pred.size(); ++a) {
            const double e = log.residuals[k](a);
            if (std::abs(e) <= 1e-3) {
                continue;
            }
            const double rel = std::abs(pred(a) - e) / std::abs(e);
            if (t == 1) {
                first = std::max(first, rel);
            }
            if (rel > worst) {
                worst = rel;
                worst_step = t;
            }
        }
    }
    return {worst <= 0.1,
            fmt::format("n=4 L=30 M=4, eta=0.1 eta_crit: max relative error {:.3g} "
                        "at step {} (<= 0.1); step 1 error {:.2e}; worst norm-relative "
                        "error {:.3g}",
                        worst, worst_step, first, worst_norm)};
}

// 5 ---------------------------------------------------------------------------

Outcome critical_learning_rate() {
    const auto m = model::build_model(tfim_model(20));
    const auto ds = data::make_tfim_dataset(data::TfimConfig{}, 0);
    bool pass = true;
    std::string low;
    std::string high;
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        const auto theta = train::initial_params(m.param_count(), seed);
        const auto d = kernel::diagnostics(
            kernel::make_bundle(kernel::kernel_matrix(m, theta, ds.train_inputs())));

        train::TrainConfig tc;
        tc.eta = 0.5 * d.eta_crit;
        try {
            const auto log = train::train(m, ds, tc, theta);
            const double f = train::loss_increase_fraction(log);
            pass = pass && f <= 0.05;
            low += fmt::format(" {:.3f}", f);
        } catch (const train::DivergenceError &) {
            pass = false;
            low += " diverged";
        }

        tc.eta = 10.0 * d.eta_crit;
        tc.max_epochs = 250;
        try {
            const auto log = train::train(m, ds, tc, theta);
            const double f = train::loss_increase_fraction(log);
            pass = pass && (f >= 0.2 || !log.converged);
            high += fmt::format(" {:.3f}/{}", f, log.converged ? "conv" : "noconv");
        } catch (const train::DivergenceError &) {
            high += " diverged";
        }
    }
    return {pass, fmt::format("TFIM L=20 seeds 0-2, increase fraction at 0.5 eta_crit:{} "
                              "(<= 0.05); at 10 eta_crit:{} (>= 0.2 or noconv)",
                              low, high)};
}

// 6 ---------------------------------------------------------------------------

Outcome decay_time() {
    const auto m = model::build_model(tfim_model(30));
    const auto ds = sinusoid_subset();
    const auto theta = train::initial_params(m.param_count(), 0);
    const auto b = kernel::make_bundle(kernel::kernel_matrix(m, theta, ds.train_inputs()));
    const auto d = kernel::diagnostics(b);
    if (b.eigenvalues.minCoeff() <= b.cutoff_used) {
        return {false, "seed 0 kernel is rank deficient"};
    }
    train::TrainConfig tc;
    tc.eta = d.eta_crit;
    tc.max_epochs = 400;
    tc.convergence_tol = std::numeric_limits<double>::min();
    train::TrainLog log;
    try {
        log = train::train(m, ds, tc, theta);
    } catch (const train::DivergenceError &e) {
        log = e.log();
    }
    const Eigen::VectorXd slow = b.eigenvectors.row(0).transpose();
    const double e0 = std::abs(slow.dot(log.residuals.at(0)));
    long long measured = -1;
    for (std::size_t k = 0; k < log.residuals.size(); ++k) {
        if (std::abs(slow.dot(log.residuals[k])) <= e0 / std::exp(1.0)) {
            measured = static_cast<long long>(log.residual_epochs[k]);
            break;
        }
    }
    const double target = d.tau;
    const bool pass =
        measured > 0 && std::abs(static_cast<double>(measured) - target) <= 0.3 * target;
    const double linear = -1.0 / std::log(std::abs(1.0 - d.eta_crit * d.lambda_min));
    return {pass, fmt::format("L=30 M=4 seed 0, kappa={:.3f}: measured e-fold {} steps, "
                              "expected 2 kappa = {:.2f} +- 30%; linear theory {:.2f}, "
                              "kappa/2 = {:.2f}",
                              d.kappa, measured, target, linear, d.kappa / 2.0)};
}

// 7 ---------------------------------------------------------------------------

Outcome depth_trends() {
    const auto ds = data::make_tfim_dataset(data::TfimConfig{}, 0);
    const std::vector<std::uint64_t> seeds{0, 1, 2};
    std::map<std::size_t, analysis::DiagnosticReport> reps;
    for (std::size_t L : {5, 50}) {
        reps.emplace(L, analysis::build_report(tfim_model(L), ds, seeds,
                                               train::TrainConfig{}, {}));
    }
    auto mean = [&](std::size_t L, const char *key) {
        const auto &agg = reps.at(L).aggregates;
        const auto it = agg.find(key);
        return it == agg.end() || it->second.count == 0 ? std::nan("")
                                                        : it->second.mean;
    };
    const double k5 = mean(5, "kappa");
    const double k50 = mean(50, "kappa");
    const double a5 = mean(5, "aad");
    const double a50 = mean(50, "aad");
    const bool pass = k50 < k5 && a50 < a5 && a50 < 0.1;
    return {pass, fmt::format("TFIM seeds 0-2: kappa L5 {:.3g} vs L50 {:.3g}; "
                              "mean AAD L5 {:.4f} vs L50 {:.4f} (< 0.1); "
                              "AAD of ensemble means L5 {:.4f} vs L50 {:.4f}",
                              k5, k50, a5, a50,
                              reps.at(5).aad_of_means.value_or(std::nan("")),
                              reps.at(50).aad_of_means.value_or(std::nan("")))};
}

// 8 ---------------------------------------------------------------------------

Outcome tfim_oracle() {
    const double m0 = data::tfim_ground_magnetization(6, 0.0, 1.0);
    const double mp = data::tfim_ground_magnetization(6, 1e3, 1.0);
    const double mn = data::tfim_ground_magnetization(6, -1e3, 1.0);
    const auto ds = data::make_tfim_dataset(data::TfimConfig{}, 0);
    const double lo = ds.labels.minCoeff();
    const double hi = ds.labels.maxCoeff();
    const bool range = ds.size() == 20 && lo >= -0.8 && hi <= 0.8;
    const bool pass = std::abs(m0) <= 1e-9 && std::abs(mp - 1.0) <= 1e-3 &&
                      std::abs(mn + 1.0) <= 1e-3 && range;
    return {pass, fmt::format("m(h=0) = {:.1e}, m(+1e3) = {:.6f}, m(-1e3) = {:.6f}; "
                              "{} labels span [{:.4f}, {:.4f}] (required within [-0.8, 0.8])",
                              m0, mp, mn, ds.size(), lo, hi)};
}

// 9 ---------------------------------------------------------------------------

Outcome fourier_ordering() {
    std::vector<std::uint64_t> seeds(20);
    for (std::size_t s = 0; s < seeds.size(); ++s) {
        seeds[s] = s;
    }
    auto mass = [&](model::Encoding enc) {
        auto c = tfim_model(20);
        c.encoding = enc;
        const auto spec = analysis::fourier_spectrum(model::build_model(c), seeds, 64);
        return spec.high_frequency_mass(static_cast<double>(c.layers) / 2.0);
    };
    const double high = mass(model::Encoding::HighFreq);
    const double low = mass(model::Encoding::LowFreq);

    model::ModelConfig one;
    one.n_qubits = 1;
    one.layers = 1;
    one.encoding = model::Encoding::LowFreq;
    const model::QnnModel cosine(
        one, {{sim::rx(0, 0.0), model::FeatureAngle{}},
              {sim::trainable(sim::rz(0, 0.0), 0), std::nullopt}});
    const auto s = analysis::fourier_spectrum(cosine, std::vector<model::ParamVector>{{0.3}}, 64);
    const double cp = s.magnitude(1);
    const double cm = s.magnitude(-1);
    const bool pass = high > low && std::abs(cp - 0.5) <= 1e-10 &&
                      std::abs(cm - 0.5) <= 1e-10;
    return {pass, fmt::format("n=4 L=20 20 seeds, mass above |w| > 10: high_freq {:.4f} "
                              "vs low_freq {:.4f}; cos(x) |c+1| - 0.5 = {:.1e}, "
                              "|c-1| - 0.5 = {:.1e}",
                              high, low, cp - 0.5, cm - 0.5)};
}

// 10 --------------------------------------------------------------------------

std::map<std::string, std::string> csv_contents(const fs::path &root) {
    std::map<std::string, std::string> out;
    for (const auto &e : fs::recursive_directory_iterator(root)) {
        if (e.is_regular_file() && e.path().extension() == ".csv") {
            out[fs::relative(e.path(), root).string()] = io::read_text(e.path());
        }
    }
    return out;
}

Outcome determinism() {
    const fs::path base = fs::temp_directory_path() / "qntk_acceptance_determinism";
    fs::remove_all(base);
    std::vector<std::map<std::string, std::string>> runs;
    for (const char *tag : {"a", "b"}) {
        cli::RunConfig cfg;
        cfg.command = cli::Command::Sweep;
        cfg.model = tfim_model(5);
        cfg.layers = {2, 5};
        cfg.seeds = {0, 1, 2};
        cfg.train.max_epochs = 60;
        cfg.out = base / tag;
        cli::execute(cfg);
        cfg.command = cli::Command::Diagnose;
        cfg.out = base / tag / "diagnose";
        cli::execute(cfg);
        runs.push_back(csv_contents(base / tag));
    }
    fs::remove_all(base);
    const bool pass = !runs[0].empty() && runs[0] == runs[1];
    return {pass, fmt::format("{} CSV files from sweep and diagnose runs, byte-identical: {}",
                              runs[0].size(), runs[0] == runs[1] ? "yes" : "no")};
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"QNTK acceptance checks"};
    int only = 0;
    app.add_option("--only", only, "run a single criterion (1-10)")
        ->check(CLI::Range(1, 10));
    CLI11_PARSE(app, argc, argv);

    const std::vector<Criterion> criteria{
        {1, "gradient_equivalence", gradient_equivalence},
        {2, "kernel_algebra", kernel_algebra},
        {3, "training_indicator", training_indicator},
        {4, "lazy_dynamics", lazy_dynamics},
        {5, "critical_learning_rate", critical_learning_rate},
        {6, "decay_time", decay_time},
        {7, "depth_trends", depth_trends},
        {8, "tfim_oracle", tfim_oracle},
        {9, "fourier_ordering", fourier_ordering},
        {10, "determinism", determinism},
    };

    bool all = true;
    for (const auto &c : criteria) {
        if (only != 0 && c.index != only) {
            continue;
        }
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception &e) {
            o = {false, fmt::format("exception: {}", e.what())};
        }
        const std::chrono::duration<double> dt =
            std::chrono::steady_clock::now() - start;
        fmt::print("[{}] {} {}: {} ({:.1f} s)\n", o.pass ? "PASS" : "FAIL",
                   c.index, c.name, o.detail, dt.count());
        std::fflush(stdout);
        all = all && o.pass;
    }
    return all ? 0 : 1;
}
