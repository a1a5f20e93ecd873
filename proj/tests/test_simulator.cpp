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
#include "oracles.hpp"

#include "qntk/error.hpp"
#include "qntk/simulator.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

using namespace qntk;
using namespace qntk::sim;
using Catch::Matchers::WithinAbs;

namespace {
constexpr double pi = std::numbers::pi;
} // namespace

TEST_CASE("init_state prepares the all-zero basis state", "[simulator]") {
    const auto s1 = init_state(1);
    REQUIRE(s1.size() == 2);
    CHECK(s1[0] == Complex{1.0, 0.0});
    CHECK(s1[1] == Complex{0.0, 0.0});

    const auto s2 = init_state(2);
    REQUIRE(s2.size() == 4);
    CHECK(s2[0] == Complex{1.0, 0.0});
    for (std::size_t i = 1; i < 4; ++i) {
        CHECK(s2[i] == Complex{0.0, 0.0});
    }

    CHECK_THROWS_AS(init_state(13), ConfigError);
    CHECK_THROWS_AS(init_state(0), ConfigError);
    CHECK_NOTHROW(init_state(12));
}

TEST_CASE("apply_gate examples", "[simulator]") {
    SECTION("RX(0) is the identity") {
        auto s = apply_gate(init_state(2), ry(0, 0.7));
        s = apply_gate(s, ry(1, -1.3));
        const auto t = apply_gate(s, rx(1, 0.0));
        for (std::size_t i = 0; i < s.size(); ++i) {
            CHECK(std::abs(s[i] - t[i]) < 1e-15);
        }
    }
    SECTION("RY(pi) maps |0> to |1>") {
        const auto s = apply_gate(init_state(1), ry(0, pi));
        CHECK_THAT(std::norm(s[1]), WithinAbs(1.0, 1e-15));
        CHECK_THAT(expectation(s, Observable::z(0, 1)), WithinAbs(-1.0, 1e-15));
    }
    SECTION("RZZ on |00> only changes the phase") {
        const auto s = apply_gate(init_state(2), rzz(0, 1, 0.83));
        CHECK_THAT(std::norm(s[0]), WithinAbs(1.0, 1e-15));
        CHECK_THAT(std::arg(s[0]), WithinAbs(-0.83 / 2.0, 1e-15));
        CHECK_THAT(expectation(s, Observable::z(0, 2)), WithinAbs(1.0, 1e-15));
    }
    SECTION("CNOT flips the target when the control is set") {
        auto s = apply_gate(init_state(2), rx(0, pi));
        s = apply_gate(s, cnot(0, 1));
        CHECK_THAT(std::norm(s[3]), WithinAbs(1.0, 1e-15));
    }
    SECTION("invalid targets are rejected") {
        CHECK_THROWS_AS(apply_gate(init_state(2), rx(2, 0.1)), StructuralError);
        CHECK_THROWS_AS(apply_gate(init_state(2), cnot(1, 1)), StructuralError);
        CHECK_THROWS_AS(apply_gate(init_state(2), rzz(0, 5, 0.1)),
                        StructuralError);
    }
}

TEST_CASE("RZZ phases against the explicit diagonal", "[simulator]") {
    // exp(-i phi Z Z / 2) is diag(e^{-i phi/2}, e^{i phi/2}, e^{i phi/2},
    // e^{-i phi/2}) on |00>, |01>, |10>, |11>.
    const double phi = 1.234;
    std::vector<Complex> amps{{0.5, 0.0}, {0.0, 0.5}, {-0.5, 0.0}, {0.0, -0.5}};
    StateVector s(2, amps);
    s.apply(rzz(0, 1, phi));
    const Complex m{std::cos(phi / 2), -std::sin(phi / 2)};
    const Complex p{std::cos(phi / 2), std::sin(phi / 2)};
    CHECK(std::abs(s[0] - amps[0] * m) < 1e-15);
    CHECK(std::abs(s[1] - amps[1] * p) < 1e-15);
    CHECK(std::abs(s[2] - amps[2] * p) < 1e-15);
    CHECK(std::abs(s[3] - amps[3] * m) < 1e-15);
}

TEST_CASE("single-qubit rotations against explicit matrices", "[simulator]") {
    const double phi = 0.77;
    const double c = std::cos(phi / 2);
    const double sn = std::sin(phi / 2);
    const Complex a0{0.6, 0.0};
    const Complex a1{0.0, 0.8};
    const Complex I{0.0, 1.0};
    auto check = [&](const Gate &g, Complex e0, Complex e1) {
        StateVector s(1, {a0, a1});
        s.apply(g);
        CHECK(std::abs(s[0] - e0) < 1e-15);
        CHECK(std::abs(s[1] - e1) < 1e-15);
        s.apply(g, true);
        CHECK(std::abs(s[0] - a0) < 1e-15);
        CHECK(std::abs(s[1] - a1) < 1e-15);
    };
    check(rx(0, phi), c * a0 - I * sn * a1, -I * sn * a0 + c * a1);
    check(ry(0, phi), c * a0 - sn * a1, sn * a0 + c * a1);
    check(rz(0, phi), (c - I * sn) * a0, (c + I * sn) * a1);
}

TEST_CASE("expectation examples", "[simulator]") {
    CHECK(expectation(init_state(1), Observable::z(0, 1)) == 1.0);
    const auto s = apply_gate(init_state(1), ry(0, pi / 3));
    CHECK_THAT(expectation(s, Observable::z(0, 1)), WithinAbs(0.5, 1e-15));

    Observable mean_x;
    const std::size_t n = 5;
    for (std::size_t q = 0; q < n; ++q) {
        std::vector<Pauli> ps(n, Pauli::I);
        ps[q] = Pauli::X;
        mean_x.add_term({1.0 / n, ps});
    }
    CHECK_THAT(expectation(init_state(n), mean_x), WithinAbs(0.0, 1e-15));
}

TEST_CASE("observable labels", "[simulator]") {
    const auto obs = Observable::from_label("IZX");
    REQUIRE(obs.n_qubits() == 3);
    auto s = apply_gate(init_state(3), ry(2, pi / 2)); // qubit 2 in |+>
    CHECK_THAT(expectation(s, obs), WithinAbs(1.0, 1e-15));
    CHECK_THROWS(Observable::from_label("IQ"));
    CHECK_THROWS(expectation(init_state(2), obs));
}

TEST_CASE("gradient examples", "[simulator]") {
    Circuit c{1, {trainable(ry(0, 0.0), 0)}};
    const auto obs = Observable::z(0, 1);
    for (auto method : {GradientMethod::Adjoint, GradientMethod::ParameterShift}) {
        const std::vector<double> at0{0.0};
        const std::vector<double> at_half_pi{pi / 2};
        CHECK_THAT(gradient(c, at0, obs, method)[0], WithinAbs(0.0, 1e-15));
        CHECK_THAT(gradient(c, at_half_pi, obs, method)[0],
                   WithinAbs(-1.0, 1e-15));
    }
}

TEST_CASE("random 3-qubit 12-parameter circuit matches finite differences",
          "[simulator]") {
    std::mt19937_64 rng(20240601);
    const auto c = testing::random_circuit(rng, 3, 12);
    std::uniform_real_distribution<double> u(0.0, 2 * pi);
    std::vector<double> params(12);
    for (auto &p : params) {
        p = u(rng);
    }
    const auto obs = Observable::from_label("ZIX", 0.7);
    const auto adj = gradient(c, params, obs);
    const auto fd = testing::fd_gradient(c, params, obs);
    for (std::size_t l = 0; l < 12; ++l) {
        CHECK_THAT(adj[l], WithinAbs(fd[l], 1e-6));
    }
}

TEST_CASE("adjoint, parameter shift and finite differences agree on 50 "
          "random circuits",
          "[simulator]") {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<std::size_t> nq(1, 4);
    std::uniform_int_distribution<std::size_t> np(1, 20);
    std::uniform_real_distribution<double> u(0.0, 2 * pi);
    double worst_shift = 0.0;
    double worst_fd = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = nq(rng);
        const std::size_t P = np(rng);
        const auto c = testing::random_circuit(rng, n, P);
        std::vector<double> params(P);
        for (auto &p : params) {
            p = u(rng);
        }
        const auto obs = Observable::z(trial % n, n);
        const auto adj = gradient(c, params, obs, GradientMethod::Adjoint);
        const auto sh = gradient(c, params, obs, GradientMethod::ParameterShift);
        const auto fd = testing::fd_gradient(c, params, obs);
        for (std::size_t l = 0; l < P; ++l) {
            worst_shift = std::max(worst_shift, std::abs(adj[l] - sh[l]));
            worst_fd = std::max(worst_fd, std::abs(adj[l] - fd[l]));
        }
    }
    CHECK(worst_shift < 1e-10);
    CHECK(worst_fd < 1e-6);
}

TEST_CASE("shared parameters accumulate every contribution", "[simulator]") {
    // RY(t) RY(t) = RY(2t): d cos(2t)/dt = -2 sin(2t).
    Circuit c{1, {trainable(ry(0, 0.0), 0), trainable(ry(0, 0.0), 0)}};
    const std::vector<double> t{0.4};
    for (auto method : {GradientMethod::Adjoint, GradientMethod::ParameterShift}) {
        CHECK_THAT(gradient(c, t, Observable::z(0, 1), method)[0],
                   WithinAbs(-2.0 * std::sin(0.8), 1e-12));
    }
}

TEST_CASE("trainable CNOT is rejected", "[simulator]") {
    Circuit c{2, {trainable(cnot(0, 1), 0)}};
    const std::vector<double> t{0.1};
    CHECK_THROWS_AS(gradient(c, t, Observable::z(0, 2),
                             GradientMethod::ParameterShift),
                    UnsupportedGateError);
    Circuit bad{1, {trainable(rx(0, 0.0), 3)}};
    CHECK_THROWS_AS(gradient(bad, t, Observable::z(0, 1)), StructuralError);
}

TEST_CASE("norm preservation and expectation bounds", "[simulator]") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(0.0, 2 * pi);
    const std::string labels = "IXYZ";
    std::uniform_int_distribution<int> pick(0, 3);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t n = 1 + static_cast<std::size_t>(trial % 4);
        const auto c = testing::random_circuit(rng, n, 15);
        std::vector<double> params(15);
        for (auto &p : params) {
            p = u(rng);
        }
        auto s = init_state(n);
        for (const auto &g : c.gates) {
            Gate fixed = g;
            fixed.angle = resolved_angle(g, params);
            fixed.param_index.reset();
            s = apply_gate(s, fixed);
            CHECK(std::abs(s.norm_squared() - 1.0) < 1e-12);
        }
        std::string label;
        for (std::size_t q = 0; q < n; ++q) {
            label += labels[static_cast<std::size_t>(pick(rng))];
        }
        const double e = expectation(s, Observable::from_label(label));
        CHECK(std::abs(e) <= 1.0 + 1e-12);
    }
}
