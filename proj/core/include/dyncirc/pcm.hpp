#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "dyncirc/circuit.hpp"
#include "dyncirc/qcp.hpp"

namespace dyncirc {
namespace pcm {

enum class PassMode { Faithful, Conservative };
enum class ResetSoundness { Strict, Paper };

struct PassConfig {
    std::size_t n_pcm = 1;   // state-size budget for replacements
    std::size_t n_max = 8;   // analysis group-size cap
    PassMode mode = PassMode::Conservative;
    ResetSoundness reset_soundness = ResetSoundness::Strict;
    std::uint64_t seed = 0;
};

struct SiteDecision {
    std::size_t instr_index{};
    bool is_measure{};
    bool fired{};
    std::string reason;       // "fired" or the skip reason
    std::size_t state_size{}; // 0 when the input state is Top
    std::size_t group_size{};
};

struct PassReport {
    std::size_t removed_measurements{};
    std::size_t removed_resets{};
    std::size_t introduced_static_gates{};
    double synthesis_time_s{};
    std::vector<SiteDecision> decisions;
};

/// Runs the analysis once, then replaces every eligible measurement and reset
/// site against that single upfront analysis.
std::pair<Circuit, PassReport> run_pass(const Circuit& circuit, const PassConfig& config);

/// Replacement for one measurement site: the state-to-zero transformation on
/// the group qubits followed by one probabilistic parallel-X gate whose
/// branches carry the precomputed outcome on the measurement's clbit.
std::vector<Instruction> replace_measurement(const qcp::AmplitudeTable& state,
                                             std::size_t qubit_pos, ClbitRef clbit);

/// Replacement for one reset site: the static transformation from the input
/// state to the post-reset state. Empty when the wire is already |0>.
std::vector<Instruction> replace_reset(const qcp::AmplitudeTable& state, std::size_t qubit_pos);

/// Deletes resets on wires that are provably |0> by local pattern matching.
std::pair<Circuit, std::size_t> baseline_remove_reset_in_zero(const Circuit& circuit);

/// Rewrites measure-then-reset on the same wire into measure + conditional X.
std::pair<Circuit, std::size_t> baseline_reset_after_measure(const Circuit& circuit);

}  // namespace pcm
}  // namespace dyncirc
