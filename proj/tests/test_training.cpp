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
#include "qntk/kernel.hpp"
#include "qntk/training.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

using namespace qntk;
using namespace qntk::train;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

model::ModelConfig cfg(std::size_t n, std::size_t L) {
    model::ModelConfig c;
    c.n_qubits = n;
    c.layers = L;
    return c;
}

/// Dataset whose labels are the model's own outputs at theta.
data::Dataset self_labelled(const model::QnnModel &m,
                            const model::ParamVector &theta,
                            std::vector<double> xs) {
    data::Dataset ds;
    ds.inputs.resize(static_cast<Eigen::Index>(xs.size()), 1);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        ds.inputs(static_cast<Eigen::Index>(i), 0) = xs[i];
    }
    ds.labels = predict(m, theta, ds.inputs);
    ds.train_mask.assign(xs.size(), true);
    return ds;
}

} // namespace

TEST_CASE("mse_loss examples", "[training]") {
    const std::vector<double> y{0.2, -0.4};
    CHECK(mse_loss(y, y) == 0.0);
    CHECK(mse_loss(std::vector<double>{1.0, -1.0}, std::vector<double>{0.0, 0.0}) ==
          1.0);
    CHECK(mse_loss(std::vector<double>{0.5}, std::vector<double>{0.0}) == 0.125);
    CHECK_THROWS_AS(mse_loss(y, std::vector<double>{1.0}), StructuralError);
}

TEST_CASE("initial parameters are seeded uniform angles", "[training]") {
    const auto a = initial_params(500, 3);
    const auto b = initial_params(500, 3);
    CHECK(a == b);
    CHECK(a != initial_params(500, 4));
    double mean = 0.0;
    for (double v : a) {
        CHECK(v >= 0.0);
        CHECK(v < 2.0 * std::numbers::pi);
        mean += v / 500.0;
    }
    CHECK_THAT(mean, WithinAbs(std::numbers::pi, 0.3));
}

TEST_CASE("gd_step examples", "[training]") {
    const auto m = model::build_model(cfg(2, 2));
    const auto theta = initial_params(m.param_count(), 1);

    SECTION("zero residuals are a fixed point") {
        const auto ds = self_labelled(m, theta, {-0.5, 0.3});
        CHECK(gd_step(m, theta, ds, 0.3) == theta);
    }
    SECTION("single cos model with zero residual does not move") {
        // n=1 HEA at x=pi/2 with theta=0 gives f=cos(pi/2)=0.
        const auto one = model::build_model(cfg(1, 1));
        const model::ParamVector zero(one.param_count(), 0.0);
        Eigen::MatrixXd x(1, 1);
        x(0, 0) = std::numbers::pi / 2;
        const Eigen::VectorXd y = Eigen::VectorXd::Zero(1);
        const auto next = gd_step(one, zero, x, y, 0.5);
        for (std::size_t l = 0; l < next.size(); ++l) {
            CHECK_THAT(next[l], WithinAbs(0.0, 1e-15));
        }
    }
    SECTION("step follows the finite-difference descent direction") {
        auto ds = self_labelled(m, theta, {-0.8, -0.1, 0.6});
        ds.labels.array() += 0.3;
        const Eigen::MatrixXd X = ds.train_inputs();
        const Eigen::VectorXd y = kernel::flatten(ds.train_labels());
        const double eta = 0.01;
        const auto next = gd_step(m, theta, ds, eta);
        auto loss = [&](const model::ParamVector &t) {
            const Eigen::VectorXd f = predict(m, t, X);
            return 0.5 * (f - y).squaredNorm();
        };
        const double h = 1e-6;
        for (std::size_t l = 0; l < theta.size(); ++l) {
            auto up = theta;
            auto down = theta;
            up[l] += h;
            down[l] -= h;
            const double grad = (loss(up) - loss(down)) / (2 * h);
            CHECK_THAT(next[l] - theta[l], WithinAbs(-eta * grad, 1e-8));
        }
    }
    SECTION("non-finite parameters are rejected") {
        auto bad = theta;
        bad[0] = std::nan("");
        const auto ds = self_labelled(m, theta, {0.1});
        CHECK_THROWS_AS(gd_step(m, bad, ds, 0.1), StructuralError);
    }
}

TEST_CASE("training on self-generated labels converges immediately",
          "[training]") {
    const auto m = model::build_model(cfg(3, 2));
    TrainConfig tc;
    tc.eta = 0.1;
    tc.seed = 12;
    const auto theta = initial_params(m.param_count(), tc.seed);
    const auto ds = self_labelled(m, theta, {-0.6, 0.0, 0.7});
    const auto log = train::train(m, ds, tc);
    CHECK(log.converged);
    CHECK(log.epochs_run == 1);
    CHECK(log.loss.front() == 0.0);
    CHECK(log.final_loss == 0.0);
    CHECK(lazy_metrics(log) == 0.0);
    CHECK(log.theta0 == theta);
}

TEST_CASE("training log invariants and determinism", "[training]") {
    const auto m = model::build_model(cfg(3, 3));
    const auto ds = data::make_sinusoid_dataset(10, 0.5, 2);
    TrainConfig tc;
    tc.eta = 0.02;
    tc.max_epochs = 40;
    tc.seed = 5;
    const auto a = train::train(m, ds, tc);
    const auto b = train::train(m, ds, tc);
    CHECK(a.loss == b.loss);
    CHECK(a.step_norm == b.step_norm);
    CHECK(a.theta_final == b.theta_final);
    CHECK(a.epochs_run <= tc.max_epochs);
    CHECK(a.loss.size() == a.epochs_run);
    for (double l : a.loss) {
        CHECK(l >= 0.0);
    }
    // Every epoch is snapshotted for small runs, starting at epoch 0.
    REQUIRE(a.residuals.size() == a.epochs_run);
    CHECK(a.residual_epochs.front() == 0);
    const Eigen::VectorXd f0 = predict(m, a.theta0, ds.train_inputs());
    CHECK((a.residuals.front() - (f0 - kernel::flatten(ds.train_labels())))
              .cwiseAbs()
              .maxCoeff() == 0.0);
    CHECK_THAT(a.loss.front(), WithinRel(0.5 * a.residuals.front().squaredNorm(),
                                         1e-14));
}

TEST_CASE("residual snapshots thin out for large runs", "[training]") {
    const auto m = model::build_model(cfg(2, 2));
    const auto ds = data::make_sinusoid_dataset(6, 0.5, 0);
    TrainConfig tc;
    tc.eta = 0.01;
    tc.seed = 2;
    tc.convergence_tol = 1e-30;
    tc.max_epochs = 40;
    const auto reference = train::train(m, ds, tc);
    REQUIRE(reference.residuals.size() == 40);

    // Stop on the same trajectory at epoch 26 while declaring a budget large
    // enough to switch to every 10th epoch.
    tc.convergence_tol = reference.step_norm[25] * (1.0 + 1e-9);
    tc.max_epochs = kResidualBudget;
    const auto thinned = train::train(m, ds, tc);
    REQUIRE(thinned.converged);
    REQUIRE(thinned.epochs_run <= 26);
    std::vector<std::size_t> expected;
    for (std::size_t e = 0; e < thinned.epochs_run; e += 10) {
        expected.push_back(e);
    }
    CHECK(thinned.residual_epochs == expected);
    for (std::size_t k = 0; k < expected.size(); ++k) {
        CHECK(thinned.residuals[k] == reference.residuals[expected[k]]);
    }
}

TEST_CASE("descent property below half the critical rate", "[training]") {
    const auto m = model::build_model(cfg(3, 6));
    const auto ds = data::make_sinusoid_dataset(8, 0.5, 1);
    TrainConfig tc;
    tc.seed = 3;
    tc.max_epochs = 60;
    const auto theta = initial_params(m.param_count(), tc.seed);
    const auto b = kernel::make_bundle(
        kernel::kernel_matrix(m, theta, ds.train_inputs()));
    tc.eta = 0.5 * 2.0 / b.lambda_max();
    const auto log = train::train(m, ds, tc, theta);
    std::size_t ok = 0;
    for (std::size_t e = 1; e < log.loss.size(); ++e) {
        ok += log.loss[e] <= log.loss[e - 1] + 1e-9 ? 1 : 0;
    }
    CHECK(static_cast<double>(ok) >=
          0.95 * static_cast<double>(log.loss.size() - 1));
}

TEST_CASE("lazy_metrics examples", "[training]") {
    TrainLog log;
    log.epochs_run = 1;
    log.theta0 = {1.0, 0.0};
    log.theta_final = {1.0, 0.0};
    CHECK(lazy_metrics(log) == 0.0);
    log.theta_final = {1.0, 1.0};
    CHECK(lazy_metrics(log) == 1.0);
    log.theta0 = {3.0, 4.0};
    log.theta_final = {3.3, 4.4};
    CHECK_THAT(lazy_metrics(log), WithinAbs(0.1, 1e-15));
    log.theta0 = {0.0, 0.0};
    CHECK_THROWS_AS(lazy_metrics(log), UndefinedMetricError);
}

TEST_CASE("loss_increase_fraction counts rises", "[training]") {
    TrainLog log;
    log.loss = {1.0, 0.5, 0.7, 0.6};
    log.final_loss = 0.9;
    CHECK(loss_increase_fraction(log) == 0.5);
}

TEST_CASE("TrainConfig validation and JSON", "[training]") {
    TrainConfig bad;
    bad.eta = 0.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    nlohmann::json j = TrainConfig{};
    CHECK(j.at("max_epochs") == 500);
    CHECK(j.at("convergence_tol") == 1e-3);
    j["momentum"] = 0.9;
    CHECK_THROWS_AS(j.get<TrainConfig>(), ConfigError);
}

TEST_CASE("training exports", "[training]") {
    TrainLog log;
    log.epochs_run = 2;
    log.loss = {0.5, 0.25};
    log.step_norm = {0.1, 0.05};
    log.theta0 = {1.0};
    log.theta_final = {1.5};
    log.final_loss = 0.125;
    log.converged = false;
    CHECK(training_log_csv(log) ==
          "epoch,loss,step_norm\n1,0.5,0.10000000000000001\n2,0.25,"
          "0.050000000000000003\n");
    const auto s = training_summary(log);
    CHECK(s.at("epochs_run") == 2);
    CHECK(s.at("converged") == false);
    CHECK(s.at("final_loss") == 0.125);
    CHECK(s.at("relative_param_change") == 0.5);
}
