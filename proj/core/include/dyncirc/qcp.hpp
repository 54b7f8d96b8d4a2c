#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "dyncirc/circuit.hpp"

namespace dyncirc {
namespace qcp {

/// Sparse amplitude table for one entanglement group. Qubits are kept in
/// ascending index order; bit p of a basis key is the value of qubits[p].
struct AmplitudeTable {
    std::vector<std::uint32_t> qubits;
    std::map<std::uint64_t, cplx> amps;

    std::size_t size_qubits() const { return qubits.size(); }
    std::optional<std::size_t> position_of(std::uint32_t qubit) const;
};

/// Number of stored amplitudes with magnitude >= the pruning threshold.
std::size_t state_size(const AmplitudeTable& table);

/// Top (no static information) or a fully known group state.
struct AbstractState {
    std::optional<AmplitudeTable> table;  // nullopt = Top
    bool is_top() const { return !table.has_value(); }
};

struct QcpConfig {
    std::size_t n_max = 8;
    bool strict_reset = true;   // false reproduces the unconditional reset formula
    double prune_tol = kAmpPruneTol;
    double rank_tol = 1e-10;
};

/// Qubit -> entanglement-group map with per-group abstract states.
class UnionTable {
public:
    UnionTable(std::size_t n_qubits, const QcpConfig& config);

    std::size_t n_qubits() const { return group_of_.size(); }
    const QcpConfig& config() const { return config_; }

    /// Abstract state of the group containing `qubit`.
    const AbstractState& state_of(std::uint32_t qubit) const;
    std::vector<std::uint32_t> group_members(std::uint32_t qubit) const;

    void apply_gate(const Gate& gate);
    /// Returns the deterministic outcome when the measured bit is fixed across
    /// all amplitudes; otherwise the group becomes Top.
    std::optional<bool> apply_measure(std::uint32_t qubit);
    void apply_reset(std::uint32_t qubit);
    /// Drops all information on the groups of the given qubits.
    void make_top(const std::vector<QubitRef>& qubits);

    /// All distinct groups (each qubit appears in exactly one entry).
    std::vector<std::pair<std::vector<std::uint32_t>, const AbstractState*>> groups() const;

private:
    struct Group {
        std::vector<std::uint32_t> qubits;  // ascending
        AbstractState state;
    };

    std::uint32_t merge(const std::vector<std::uint32_t>& qubits);
    void split_group(std::uint32_t gid);
    void detach_as_zero(std::uint32_t qubit);

    QcpConfig config_;
    std::vector<std::uint32_t> group_of_;
    std::vector<Group> groups_;
};

/// Greedy product-state factorization: splits off every qubit whose 2 x 2^(k-1)
/// reshape of the dense amplitude vector is numerically rank 1.
std::vector<AmplitudeTable> try_split(const AmplitudeTable& table, double rank_tol = 1e-10,
                                      double prune_tol = kAmpPruneTol);

/// Recorded facts at one Measure or Reset site.
struct SiteRecord {
    std::size_t instr_index{};
    bool is_measure{};
    AbstractState input_state;       // deep copy at the program point
    std::size_t qubit_pos{};         // position of the target within the group ordering
};

struct AnalysisResult {
    std::vector<SiteRecord> sites;
    UnionTable final_table;
};

/// Forward analysis over the whole circuit with group-size cap n_max.
AnalysisResult run(const Circuit& circuit, const QcpConfig& config);

}  // namespace qcp
}  // namespace dyncirc
