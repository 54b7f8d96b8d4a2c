#pragma once

#include <cstddef>

#include "dyncirc/circuit.hpp"

namespace dyncirc {
namespace synth {

struct InvalidState : CircuitError {
    using CircuitError::CircuitError;
};
struct SynthesisCapExceeded : CircuitError {
    using CircuitError::CircuitError;
};
struct NotUnitary : CircuitError {
    using CircuitError::CircuitError;
};

struct TargetState {
    std::size_t n_qubits{};
    Eigen::VectorXcd amps;  // length 2^n, l2-normalized
};

/// Gate count bound of state_prep: at most kGateCountFactor * 2^n gates.
inline constexpr std::size_t kGateCountFactor = 6;

/// Ancilla-free preparation of psi from |0...0>, up to global phase. Uses a
/// multiplexed-rotation disentangling decomposition, with short special cases
/// for basis states, single qubits, and states with two nonzero amplitudes.
Circuit state_prep(const TargetState& psi, std::size_t cap = 12);

/// Reversed instruction order with every gate replaced by its adjoint.
Circuit invert(const Circuit& circuit);

/// Static circuit mapping psi to phi up to global phase: SP_phi o SP_psi^-1.
Circuit transform(const TargetState& psi, const TargetState& phi);

}  // namespace synth
}  // namespace dyncirc
