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
#include "qntk/simulator.hpp"

#include "qntk/error.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>

#include <fmt/core.h>

namespace qntk::sim {

std::string to_string(GateKind kind) {
    switch (kind) {
    case GateKind::RX:
        return "RX";
    case GateKind::RY:
        return "RY";
    case GateKind::RZ:
        return "RZ";
    case GateKind::RZZ:
        return "RZZ";
    case GateKind::CNOT:
        return "CNOT";
    }
    return "?";
}

bool is_rotation(GateKind kind) { return kind != GateKind::CNOT; }

std::size_t arity(GateKind kind) {
    return (kind == GateKind::RZZ || kind == GateKind::CNOT) ? 2 : 1;
}

void validate(const Gate &gate, std::size_t n_qubits) {
    const auto n = gate.num_targets();
    for (std::size_t k = 0; k < n; ++k) {
        if (gate.targets[k] >= n_qubits) {
            throw StructuralError(fmt::format(
                "{} target qubit {} out of range for {} qubits",
                to_string(gate.kind), gate.targets[k], n_qubits));
        }
    }
    if (n == 2 && gate.targets[0] == gate.targets[1]) {
        throw StructuralError(fmt::format("{} targets must be distinct",
                                          to_string(gate.kind)));
    }
}

Gate rx(std::size_t q, double angle) { return {GateKind::RX, {q, q}, angle}; }
Gate ry(std::size_t q, double angle) { return {GateKind::RY, {q, q}, angle}; }
Gate rz(std::size_t q, double angle) { return {GateKind::RZ, {q, q}, angle}; }
Gate rzz(std::size_t q0, std::size_t q1, double angle) {
    return {GateKind::RZZ, {q0, q1}, angle};
}
Gate cnot(std::size_t control, std::size_t target) {
    return {GateKind::CNOT, {control, target}, 0.0};
}

Gate trainable(Gate gate, std::size_t index) {
    gate.param_index = index;
    return gate;
}

// Observable ----------------------------------------------------------------

Observable::Observable(std::vector<PauliTerm> terms) {
    for (auto &t : terms) {
        add_term(std::move(t));
    }
}

Observable Observable::from_label(const std::string &label,
                                  double coefficient) {
    PauliTerm term{coefficient, {}};
    term.paulis.reserve(label.size());
    for (char c : label) {
        switch (c) {
        case 'I':
        case 'X':
        case 'Y':
        case 'Z':
            term.paulis.push_back(static_cast<Pauli>(c));
            break;
        default:
            throw StructuralError(
                fmt::format("invalid Pauli label character '{}'", c));
        }
    }
    return Observable({std::move(term)});
}

Observable Observable::z(std::size_t qubit, std::size_t n_qubits) {
    if (qubit >= n_qubits) {
        throw StructuralError("observable qubit out of range");
    }
    std::string label(n_qubits, 'I');
    label[qubit] = 'Z';
    return from_label(label);
}

void Observable::add_term(PauliTerm term) {
    if (!terms_.empty() && term.paulis.size() != terms_.front().paulis.size()) {
        throw StructuralError("Pauli strings of an observable must have equal "
                              "length");
    }
    if (!std::isfinite(term.coefficient)) {
        throw StructuralError("observable coefficient must be finite");
    }
    terms_.push_back(std::move(term));
}

std::size_t Observable::n_qubits() const {
    return terms_.empty() ? 0 : terms_.front().paulis.size();
}

// StateVector ---------------------------------------------------------------

namespace {

void check_qubit_count(std::size_t n_qubits) {
    if (n_qubits < 1 || n_qubits > kMaxQubits) {
        throw ConfigError(fmt::format(
            "qubit count {} outside supported range [1, {}]", n_qubits,
            kMaxQubits));
    }
}

struct PauliMasks {
    std::size_t flip{0};  // X or Y
    std::size_t zmask{0}; // Z or Y
    std::size_t ycount{0};
};

PauliMasks masks_of(std::span<const Pauli> paulis) {
    PauliMasks m;
    for (std::size_t q = 0; q < paulis.size(); ++q) {
        const std::size_t bit = std::size_t{1} << q;
        switch (paulis[q]) {
        case Pauli::I:
            break;
        case Pauli::X:
            m.flip |= bit;
            break;
        case Pauli::Y:
            m.flip |= bit;
            m.zmask |= bit;
            ++m.ycount;
            break;
        case Pauli::Z:
            m.zmask |= bit;
            break;
        }
    }
    return m;
}

// Phase picked up by basis state |i> under the Pauli string:
// Y = i X Z, so P|i> = i^{ycount} (-1)^{popcount(i & zmask)} |i ^ flip>.
Complex pauli_phase(const PauliMasks &m, std::size_t i) {
    static constexpr std::array<Complex, 4> ipow{
        Complex{1, 0}, Complex{0, 1}, Complex{-1, 0}, Complex{0, -1}};
    const bool odd = (std::popcount(i & m.zmask) & 1) != 0;
    const Complex base = ipow[m.ycount % 4];
    return odd ? -base : base;
}

} // namespace

StateVector::StateVector(std::size_t n_qubits) : n_qubits_(n_qubits) {
    check_qubit_count(n_qubits);
    amplitudes_.assign(std::size_t{1} << n_qubits, Complex{0.0, 0.0});
    amplitudes_[0] = Complex{1.0, 0.0};
}

StateVector::StateVector(std::size_t n_qubits, std::vector<Complex> amplitudes)
    : n_qubits_(n_qubits), amplitudes_(std::move(amplitudes)) {
    check_qubit_count(n_qubits);
    if (amplitudes_.size() != (std::size_t{1} << n_qubits)) {
        throw StructuralError("amplitude count must equal 2^n_qubits");
    }
}

double StateVector::norm_squared() const {
    double acc = 0.0;
    for (const auto &a : amplitudes_) {
        acc += std::norm(a);
    }
    return acc;
}

void StateVector::apply_rotation(GateKind kind,
                                 std::array<std::size_t, 2> targets,
                                 double angle) {
    const std::size_t dim = amplitudes_.size();
    const double c = std::cos(angle / 2);
    const double s = std::sin(angle / 2);
    auto &psi = amplitudes_;

    switch (kind) {
    case GateKind::RX: {
        const std::size_t bit = std::size_t{1} << targets[0];
        const Complex mis{0.0, -s};
        for (std::size_t i = 0; i < dim; ++i) {
            if ((i & bit) != 0) {
                continue;
            }
            const Complex a = psi[i];
            const Complex b = psi[i | bit];
            psi[i] = c * a + mis * b;
            psi[i | bit] = mis * a + c * b;
        }
        break;
    }
    case GateKind::RY: {
        const std::size_t bit = std::size_t{1} << targets[0];
        for (std::size_t i = 0; i < dim; ++i) {
            if ((i & bit) != 0) {
                continue;
            }
            const Complex a = psi[i];
            const Complex b = psi[i | bit];
            psi[i] = c * a - s * b;
            psi[i | bit] = s * a + c * b;
        }
        break;
    }
    case GateKind::RZ: {
        const std::size_t bit = std::size_t{1} << targets[0];
        const Complex down{c, -s};
        const Complex up{c, s};
        for (std::size_t i = 0; i < dim; ++i) {
            psi[i] *= ((i & bit) != 0) ? up : down;
        }
        break;
    }
    case GateKind::RZZ: {
        const std::size_t b0 = std::size_t{1} << targets[0];
        const std::size_t b1 = std::size_t{1} << targets[1];
        const Complex same{c, -s};
        const Complex diff{c, s};
        for (std::size_t i = 0; i < dim; ++i) {
            const bool z0 = (i & b0) != 0;
            const bool z1 = (i & b1) != 0;
            psi[i] *= (z0 == z1) ? same : diff;
        }
        break;
    }
    case GateKind::CNOT: {
        const std::size_t cb = std::size_t{1} << targets[0];
        const std::size_t tb = std::size_t{1} << targets[1];
        for (std::size_t i = 0; i < dim; ++i) {
            if ((i & cb) != 0 && (i & tb) == 0) {
                std::swap(psi[i], psi[i | tb]);
            }
        }
        break;
    }
    }
}

void StateVector::apply(const Gate &gate, bool adjoint) {
    validate(gate, n_qubits_);
    apply_rotation(gate.kind, gate.targets, adjoint ? -gate.angle : gate.angle);
}

void StateVector::apply_generator(const Gate &gate) {
    std::vector<Pauli> paulis(n_qubits_, Pauli::I);
    switch (gate.kind) {
    case GateKind::RX:
        paulis[gate.targets[0]] = Pauli::X;
        break;
    case GateKind::RY:
        paulis[gate.targets[0]] = Pauli::Y;
        break;
    case GateKind::RZ:
        paulis[gate.targets[0]] = Pauli::Z;
        break;
    case GateKind::RZZ:
        paulis[gate.targets[0]] = Pauli::Z;
        paulis[gate.targets[1]] = Pauli::Z;
        break;
    case GateKind::CNOT:
        throw UnsupportedGateError("CNOT has no rotation generator");
    }
    apply_pauli_string(paulis);
}

void StateVector::apply_pauli_string(std::span<const Pauli> paulis) {
    if (paulis.size() != n_qubits_) {
        throw StructuralError(fmt::format(
            "Pauli string of length {} applied to {} qubits", paulis.size(),
            n_qubits_));
    }
    const auto m = masks_of(paulis);
    std::vector<Complex> out(amplitudes_.size());
    for (std::size_t i = 0; i < amplitudes_.size(); ++i) {
        out[i ^ m.flip] = pauli_phase(m, i) * amplitudes_[i];
    }
    amplitudes_ = std::move(out);
}

Complex StateVector::inner(const StateVector &other) const {
    if (other.size() != size()) {
        throw StructuralError("inner product of states of different size");
    }
    Complex acc{0.0, 0.0};
    for (std::size_t i = 0; i < amplitudes_.size(); ++i) {
        acc += std::conj(amplitudes_[i]) * other.amplitudes_[i];
    }
    return acc;
}

StateVector init_state(std::size_t n_qubits) { return StateVector(n_qubits); }

StateVector apply_gate(StateVector state, const Gate &gate) {
    if (gate.is_trainable()) {
        throw StructuralError(
            "apply_gate requires a resolved angle; use run() for trainable "
            "gates");
    }
    state.apply(gate);
    if (std::abs(state.norm_squared() - 1.0) > kNormTolerance) {
        throw NumericalError("state norm drifted after gate application");
    }
    return state;
}

double expectation(const StateVector &state, const Observable &obs) {
    if (obs.n_qubits() != state.n_qubits()) {
        throw StructuralError(fmt::format(
            "observable on {} qubits evaluated on a {}-qubit state",
            obs.n_qubits(), state.n_qubits()));
    }
    const auto psi = state.amplitudes();
    Complex total{0.0, 0.0};
    for (const auto &term : obs.terms()) {
        const auto m = masks_of(term.paulis);
        Complex acc{0.0, 0.0};
        for (std::size_t i = 0; i < psi.size(); ++i) {
            acc += std::conj(psi[i ^ m.flip]) * pauli_phase(m, i) * psi[i];
        }
        total += term.coefficient * acc;
    }
    if (std::abs(total.imag()) > kImagTolerance) {
        throw NumericalError(fmt::format(
            "expectation value has imaginary residue {:.3e}", total.imag()));
    }
    return total.real();
}

// Circuits ------------------------------------------------------------------

std::size_t Circuit::num_params() const {
    std::size_t n = 0;
    for (const auto &g : gates) {
        if (g.param_index) {
            n = std::max(n, *g.param_index + 1);
        }
    }
    return n;
}

double resolved_angle(const Gate &gate, std::span<const double> params) {
    if (!gate.param_index) {
        return gate.angle;
    }
    if (*gate.param_index >= params.size()) {
        throw StructuralError(
            fmt::format("parameter index {} out of range for {} parameters",
                        *gate.param_index, params.size()));
    }
    return params[*gate.param_index];
}

namespace {

void check_circuit(const Circuit &circuit, std::span<const double> params) {
    for (const auto &g : circuit.gates) {
        validate(g, circuit.n_qubits);
        if (g.param_index && !is_rotation(g.kind)) {
            throw UnsupportedGateError(fmt::format(
                "parameterized {} gate has no Pauli generator",
                to_string(g.kind)));
        }
        if (g.param_index && *g.param_index >= params.size()) {
            throw StructuralError(fmt::format(
                "parameter index {} out of range for {} parameters",
                *g.param_index, params.size()));
        }
    }
}

StateVector run_unchecked(const Circuit &circuit,
                          std::span<const double> params) {
    StateVector psi(circuit.n_qubits);
    for (const auto &g : circuit.gates) {
        psi.apply_rotation(g.kind, g.targets, resolved_angle(g, params));
    }
    return psi;
}

StateVector apply_observable(const StateVector &psi, const Observable &obs) {
    std::vector<Complex> acc(psi.size(), Complex{0.0, 0.0});
    for (const auto &term : obs.terms()) {
        StateVector tmp = psi;
        tmp.apply_pauli_string(term.paulis);
        const auto amps = tmp.amplitudes();
        for (std::size_t i = 0; i < acc.size(); ++i) {
            acc[i] += term.coefficient * amps[i];
        }
    }
    return StateVector(psi.n_qubits(), std::move(acc));
}

ValueAndJacobian adjoint_jacobian(const Circuit &circuit,
                                  std::span<const double> params,
                                  std::span<const Observable> observables,
                                  std::size_t num_params) {
    const std::size_t n_obs = observables.size();
    ValueAndJacobian out{std::vector<double>(n_obs, 0.0),
                         std::vector<double>(n_obs * num_params, 0.0)};
    auto &jac = out.jacobian;

    StateVector lambda = run_unchecked(circuit, params);
    if (std::abs(lambda.norm_squared() - 1.0) > kNormTolerance) {
        throw NumericalError("state norm drifted during circuit execution");
    }
    std::vector<StateVector> phis;
    phis.reserve(n_obs);
    for (std::size_t o = 0; o < n_obs; ++o) {
        phis.push_back(apply_observable(lambda, observables[o]));
        const Complex v = lambda.inner(phis.back());
        if (std::abs(v.imag()) > kImagTolerance) {
            throw NumericalError("expectation value has imaginary residue");
        }
        out.values[o] = v.real();
    }

    // Walk backwards: lambda holds the state right after gate k, phis hold
    // the observable-weighted states propagated back to the same point.
    for (std::size_t k = circuit.gates.size(); k-- > 0;) {
        const Gate &g = circuit.gates[k];
        const double angle = resolved_angle(g, params);
        if (g.param_index) {
            StateVector mu = lambda;
            mu.apply_generator(g);
            for (std::size_t o = 0; o < n_obs; ++o) {
                jac[o * num_params + *g.param_index] +=
                    std::imag(phis[o].inner(mu));
            }
        }
        if (k == 0) {
            break;
        }
        lambda.apply_rotation(g.kind, g.targets, -angle);
        for (auto &phi : phis) {
            phi.apply_rotation(g.kind, g.targets, -angle);
        }
    }
    return out;
}

std::vector<double> shift_jacobian(const Circuit &circuit,
                                   std::span<const double> params,
                                   std::span<const Observable> observables,
                                   std::size_t num_params) {
    constexpr double shift = std::numbers::pi / 2;
    const std::size_t n_obs = observables.size();
    std::vector<double> jac(n_obs * num_params, 0.0);

    Circuit shifted = circuit;
    for (std::size_t k = 0; k < circuit.gates.size(); ++k) {
        const Gate &g = circuit.gates[k];
        if (!g.param_index) {
            continue;
        }
        const double base = resolved_angle(g, params);
        Gate &slot = shifted.gates[k];
        slot.param_index.reset();

        slot.angle = base + shift;
        const StateVector plus = run_unchecked(shifted, params);
        slot.angle = base - shift;
        const StateVector minus = run_unchecked(shifted, params);
        for (std::size_t o = 0; o < n_obs; ++o) {
            jac[o * num_params + *g.param_index] +=
                0.5 * (expectation(plus, observables[o]) -
                       expectation(minus, observables[o]));
        }
        slot = g;
    }
    return jac;
}

} // namespace

StateVector run(const Circuit &circuit, std::span<const double> params) {
    check_qubit_count(circuit.n_qubits);
    check_circuit(circuit, params);
    StateVector psi = run_unchecked(circuit, params);
    if (std::abs(psi.norm_squared() - 1.0) > kNormTolerance) {
        throw NumericalError("state norm drifted during circuit execution");
    }
    return psi;
}

namespace {

void check_jacobian_inputs(const Circuit &circuit,
                           std::span<const double> params,
                           std::span<const Observable> observables,
                           std::size_t num_params) {
    check_qubit_count(circuit.n_qubits);
    check_circuit(circuit, params);
    if (circuit.num_params() > num_params) {
        throw StructuralError("circuit references more parameters than "
                              "requested Jacobian columns");
    }
    for (const auto &obs : observables) {
        if (obs.n_qubits() != circuit.n_qubits) {
            throw StructuralError("observable width does not match circuit");
        }
    }
}

} // namespace

std::vector<double> jacobian(const Circuit &circuit,
                             std::span<const double> params,
                             std::span<const Observable> observables,
                             std::size_t num_params, GradientMethod method) {
    check_jacobian_inputs(circuit, params, observables, num_params);
    return method == GradientMethod::Adjoint
               ? adjoint_jacobian(circuit, params, observables, num_params)
                     .jacobian
               : shift_jacobian(circuit, params, observables, num_params);
}

ValueAndJacobian value_and_jacobian(const Circuit &circuit,
                                    std::span<const double> params,
                                    std::span<const Observable> observables,
                                    std::size_t num_params) {
    check_jacobian_inputs(circuit, params, observables, num_params);
    return adjoint_jacobian(circuit, params, observables, num_params);
}

std::vector<double> gradient(const Circuit &circuit,
                             std::span<const double> params,
                             const Observable &obs, GradientMethod method) {
    return jacobian(circuit, params, std::span<const Observable>(&obs, 1),
                    params.size(), method);
}

} // namespace qntk::sim
