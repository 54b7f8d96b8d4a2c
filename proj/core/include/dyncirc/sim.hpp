#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dyncirc/circuit.hpp"

namespace dyncirc {

struct TooLarge : CircuitError {
    using CircuitError::CircuitError;
};

/// One classical trajectory of a dynamic/probabilistic circuit: the classical
/// bits written along the way, the path probability, and the final pure state.
struct BranchOutcome {
    std::vector<bool> clbits;
    double probability{};
    Eigen::VectorXcd state;
};

/// Classical outcome bitstring (clbit 0 first) -> probability.
using OutcomeDistribution = std::map<std::string, double>;

struct EnumLimits {
    std::size_t max_branches = std::size_t{1} << 20;
    std::size_t max_qubits = 14;
};

/// Exact branch enumeration. Measurements and resets split the trajectory with
/// Born-rule weights (reset is the exact two-Kraus channel), probabilistic
/// gates split per branch. Zero-probability trajectories are pruned.
std::vector<BranchOutcome> enumerate(const Circuit& circuit, const EnumLimits& limits = {});

OutcomeDistribution distribution(const Circuit& circuit, const EnumLimits& limits = {});

/// Total variation distance, 0.5 * sum |a(x)-b(x)|.
double tvd(const OutcomeDistribution& a, const OutcomeDistribution& b);

/// Empirical distribution from per-shot compilation and trajectory sampling.
OutcomeDistribution sample(const Circuit& circuit, std::size_t shots, std::uint64_t seed);

/// Applies a gate to a full statevector over n qubits (qubit q = bit q).
void apply_gate_to_state(Eigen::VectorXcd& state, const Gate& gate);

std::string clbits_to_string(const std::vector<bool>& clbits);

}  // namespace dyncirc
