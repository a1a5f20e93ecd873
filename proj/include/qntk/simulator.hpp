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
 * Dense statevector simulator for small qubit registers, with exact
 * expectation values and two gradient engines (adjoint and parameter-shift).
 *
 * Rotations follow R_G(phi) = exp(-i phi G / 2) for a Pauli generator G, so
 * the two-term shift rule with shift pi/2 is exact for every parameterized
 * gate supported here.
 */
#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace qntk::sim {

using Complex = std::complex<double>;

inline constexpr std::size_t kMaxQubits = 12;

/// Largest |norm^2 - 1| tolerated after a gate application.
inline constexpr double kNormTolerance = 1e-12;

/// Largest imaginary residue tolerated on an expectation value.
inline constexpr double kImagTolerance = 1e-10;

enum class GateKind { RX, RY, RZ, RZZ, CNOT };

[[nodiscard]] std::string to_string(GateKind kind);
[[nodiscard]] bool is_rotation(GateKind kind);
[[nodiscard]] std::size_t arity(GateKind kind);

/**
 * @brief A single gate. `angle` is used as-is unless `param_index` is set, in
 * which case the angle is read from the parameter vector at evaluation time.
 *
 * For CNOT, targets[0] is the control and targets[1] the target.
 */
struct Gate {
    GateKind kind{GateKind::RX};
    std::array<std::size_t, 2> targets{0, 0};
    double angle{0.0};
    std::optional<std::size_t> param_index{};

    [[nodiscard]] std::size_t num_targets() const { return arity(kind); }
    [[nodiscard]] bool is_trainable() const { return param_index.has_value(); }
};

/// Checks arity, distinct targets and qubit bounds; throws StructuralError.
void validate(const Gate &gate, std::size_t n_qubits);

[[nodiscard]] Gate rx(std::size_t q, double angle);
[[nodiscard]] Gate ry(std::size_t q, double angle);
[[nodiscard]] Gate rz(std::size_t q, double angle);
[[nodiscard]] Gate rzz(std::size_t q0, std::size_t q1, double angle);
[[nodiscard]] Gate cnot(std::size_t control, std::size_t target);

/// Same gate, angle taken from params[index].
[[nodiscard]] Gate trainable(Gate gate, std::size_t index);

enum class Pauli : char { I = 'I', X = 'X', Y = 'Y', Z = 'Z' };

/// One weighted Pauli string; `paulis[q]` acts on qubit q.
struct PauliTerm {
    double coefficient{1.0};
    std::vector<Pauli> paulis;
};

/// Real linear combination of Pauli strings (Hermitian by construction).
class Observable {
  public:
    Observable() = default;
    explicit Observable(std::vector<PauliTerm> terms);

    /// Parses a label such as "IZX" (qubit 0 first).
    static Observable from_label(const std::string &label,
                                 double coefficient = 1.0);
    /// Single-qubit Pauli Z on `qubit` of an `n_qubits` register.
    static Observable z(std::size_t qubit, std::size_t n_qubits);

    void add_term(PauliTerm term);
    [[nodiscard]] const std::vector<PauliTerm> &terms() const {
        return terms_;
    }
    [[nodiscard]] std::size_t n_qubits() const;

  private:
    std::vector<PauliTerm> terms_;
};

/// 2^n complex amplitudes.
class StateVector {
  public:
    /// |0...0> on `n_qubits` qubits; throws ConfigError outside [1, 12].
    explicit StateVector(std::size_t n_qubits);
    StateVector(std::size_t n_qubits, std::vector<Complex> amplitudes);

    [[nodiscard]] std::size_t n_qubits() const { return n_qubits_; }
    [[nodiscard]] std::size_t size() const { return amplitudes_.size(); }
    [[nodiscard]] std::span<const Complex> amplitudes() const {
        return amplitudes_;
    }
    [[nodiscard]] const Complex &operator[](std::size_t i) const {
        return amplitudes_[i];
    }
    [[nodiscard]] double norm_squared() const;

    /// Applies the gate (angle already resolved) in place.
    void apply(const Gate &gate, bool adjoint = false);
    /// Applies exp(-i angle G / 2) for the gate's kind with an explicit angle.
    void apply_rotation(GateKind kind, std::array<std::size_t, 2> targets,
                        double angle);
    /// Multiplies by the gate's Pauli generator (RX -> X, RZZ -> Z(x)Z).
    void apply_generator(const Gate &gate);
    /// Multiplies by a single Pauli string (no coefficient).
    void apply_pauli_string(std::span<const Pauli> paulis);

    [[nodiscard]] Complex inner(const StateVector &other) const;

  private:
    std::size_t n_qubits_;
    std::vector<Complex> amplitudes_;
};

/// |0...0>.
[[nodiscard]] StateVector init_state(std::size_t n_qubits);

/// Returns a copy of `state` with `gate` applied. Parameterized gates must
/// have their angle resolved (see `resolve`).
[[nodiscard]] StateVector apply_gate(StateVector state, const Gate &gate);

/// Sum_k c_k <psi|P_k|psi>; throws NumericalError on complex residue.
[[nodiscard]] double expectation(const StateVector &state,
                                 const Observable &obs);

/// An ordered gate list acting on a fixed register.
struct Circuit {
    std::size_t n_qubits{1};
    std::vector<Gate> gates;

    /// One past the largest parameter index referenced, 0 if none.
    [[nodiscard]] std::size_t num_params() const;
};

/// Gate with its angle substituted from `params` when trainable.
[[nodiscard]] double resolved_angle(const Gate &gate,
                                    std::span<const double> params);

/// Runs the circuit from |0...0>.
[[nodiscard]] StateVector run(const Circuit &circuit,
                              std::span<const double> params);

enum class GradientMethod { Adjoint, ParameterShift };

/**
 * @brief Jacobian d<O_j>/d(theta_l) of several observables, row-major with
 * one row per observable and `num_params` columns.
 *
 * Parameters shared by several gates accumulate every contribution.
 */
[[nodiscard]] std::vector<double>
jacobian(const Circuit &circuit, std::span<const double> params,
         std::span<const Observable> observables, std::size_t num_params,
         GradientMethod method = GradientMethod::Adjoint);

struct ValueAndJacobian {
    std::vector<double> values;   // one per observable
    std::vector<double> jacobian; // row-major, observables x num_params
};

/// Expectation values and their adjoint Jacobian from a single forward pass.
[[nodiscard]] ValueAndJacobian
value_and_jacobian(const Circuit &circuit, std::span<const double> params,
                   std::span<const Observable> observables,
                   std::size_t num_params);

/// Gradient of a single expectation value, length `params.size()`.
[[nodiscard]] std::vector<double>
gradient(const Circuit &circuit, std::span<const double> params,
         const Observable &obs,
         GradientMethod method = GradientMethod::Adjoint);

} // namespace qntk::sim
