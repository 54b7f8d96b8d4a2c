#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "dyncirc/circuit.hpp"

namespace dyncirc {
namespace randgen {

/// Random dynamic-circuit recipe. `scale` expands to scale*10 qubits and a
/// target depth of scale*200; explicit sizes override it. Densities are per
/// generated layer. The paper-style defaults below are documented knobs, not
/// fixed constants.
struct GenConfig {
    std::optional<unsigned> scale;
    std::size_t n_qubits = 0;
    std::size_t depth = 0;
    double meas_density = 0.05;
    double cond_density = 0.5;   // fraction of measurements trailed by conditional gates
    double reset_density = 0.03;
    double idle_density = 0.35;  // chance a qubit sits out of a layer
    double reuse_fraction = 0.25;  // resets placed directly after this layer's measurement
    std::uint64_t seed = 0;
};

struct ResolvedSize {
    std::size_t n_qubits;
    std::size_t depth;
};
ResolvedSize resolve_size(const GenConfig& config);

/// Deterministic under seed; layers of random 1-3 qubit gates (arity mix
/// roughly 5:4:1) plus density-controlled measurements, resets, and
/// classically controlled sub-circuits. Layers are added until the wire
/// dependency depth reaches the target.
Circuit generate(const GenConfig& config);

/// `count` circuits with per-circuit seeds derived from config.seed.
std::vector<Circuit> generate_suite(const GenConfig& config, std::size_t count);

/// Longest wire-dependency chain.
std::size_t circuit_depth(const Circuit& circuit);

}  // namespace randgen
}  // namespace dyncirc
