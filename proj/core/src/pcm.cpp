#include "dyncirc/pcm.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <set>

#include "dyncirc/synth.hpp"

namespace dyncirc {
namespace pcm {

namespace {

synth::TargetState to_target(const qcp::AmplitudeTable& table) {
    synth::TargetState psi;
    psi.n_qubits = table.qubits.size();
    psi.amps = Eigen::VectorXcd::Zero(std::int64_t{1} << psi.n_qubits);
    for (const auto& [key, amp] : table.amps) psi.amps[static_cast<std::int64_t>(key)] = amp;
    psi.amps.normalize();
    return psi;
}

// Remaps gates synthesized on local wires 0..k-1 onto the group's qubits.
std::vector<Instruction> remap(const Circuit& local, const std::vector<std::uint32_t>& qubits) {
    std::vector<Instruction> out;
    for (const auto& instr : local.instructions) {
        Gate g = std::get<Gate>(instr);
        for (auto& qr : g.qubits) qr.index = qubits[qr.index];
        out.emplace_back(std::move(g));
    }
    return out;
}

struct ResetOutcome {
    bool removable = false;   // wire already |0>, reset deleted outright
    bool mixed = false;       // strict mode: channel output is not pure
    synth::TargetState phi;
};

ResetOutcome post_reset_state(const qcp::AmplitudeTable& state, std::size_t qubit_pos,
                              bool strict) {
    const std::uint64_t bit = std::uint64_t{1} << qubit_pos;
    std::map<std::uint64_t, cplx> zero_branch, one_branch;
    for (const auto& [key, amp] : state.amps) {
        if (key & bit) {
            one_branch[key & ~bit] = amp;
        } else {
            zero_branch[key] = amp;
        }
    }
    ResetOutcome out;
    if (one_branch.empty()) {
        out.removable = true;
        return out;
    }
    const std::map<std::uint64_t, cplx>* kept = &zero_branch;
    if (zero_branch.empty()) {
        kept = &one_branch;
    } else if (strict) {
        cplx inner = 0.0;
        double nz = 0.0, no = 0.0;
        for (const auto& [key, amp] : zero_branch) {
            nz += std::norm(amp);
            auto it = one_branch.find(key);
            if (it != one_branch.end()) inner += std::conj(amp) * it->second;
        }
        for (const auto& [key, amp] : one_branch) {
            (void)key;
            no += std::norm(amp);
        }
        if (std::norm(inner) < (1.0 - kNormTol) * nz * no) {
            out.mixed = true;
            return out;
        }
    }
    out.phi.n_qubits = state.qubits.size();
    out.phi.amps = Eigen::VectorXcd::Zero(std::int64_t{1} << out.phi.n_qubits);
    for (const auto& [key, amp] : *kept) out.phi.amps[static_cast<std::int64_t>(key)] = amp;
    out.phi.amps.normalize();
    return out;
}

bool touches_qubit(const Instruction& instr, std::uint32_t qubit) {
    if (const auto* g = std::get_if<Gate>(&instr)) {
        for (auto qr : g->qubits) {
            if (qr.index == qubit) return true;
        }
    } else if (const auto* m = std::get_if<Measure>(&instr)) {
        return m->qubit.index == qubit;
    } else if (const auto* r = std::get_if<Reset>(&instr)) {
        return r->qubit.index == qubit;
    } else if (const auto* cg = std::get_if<CondGate>(&instr)) {
        for (auto qr : cg->gate.qubits) {
            if (qr.index == qubit) return true;
        }
    } else if (const auto* pg = std::get_if<ProbGate>(&instr)) {
        for (auto qr : pg->qubits) {
            if (qr.index == qubit) return true;
        }
    }
    return false;
}

// Conservative guard for a multi-qubit measurement replacement: the group's
// remaining coherence must never be consumed, i.e. every other group qubit is
// measured or reset before any gate touches it again.
bool coherence_never_consumed(const Circuit& circuit, std::size_t site,
                              const std::vector<std::uint32_t>& group, std::uint32_t measured) {
    for (auto qb : group) {
        if (qb == measured) continue;
        for (std::size_t j = site + 1; j < circuit.instructions.size(); ++j) {
            const Instruction& instr = circuit.instructions[j];
            if (!touches_qubit(instr, qb)) continue;
            const auto* m = std::get_if<Measure>(&instr);
            const auto* r = std::get_if<Reset>(&instr);
            if ((m && m->qubit.index == qb) || (r && r->qubit.index == qb)) break;
            return false;
        }
    }
    return true;
}

std::size_t count_gates(const std::vector<Instruction>& instrs) {
    std::size_t count = 0;
    for (const auto& instr : instrs) {
        if (std::holds_alternative<Gate>(instr)) {
            ++count;
        } else if (const auto* pg = std::get_if<ProbGate>(&instr)) {
            for (const auto& b : pg->branches) count += b.ops.size();
        }
    }
    return count;
}

}  // namespace

std::vector<Instruction> replace_measurement(const qcp::AmplitudeTable& state,
                                             std::size_t qubit_pos, ClbitRef clbit) {
    std::vector<Instruction> out;
    const std::uint64_t bit = std::uint64_t{1} << qubit_pos;

    if (qcp::state_size(state) == 1) {
        // Deterministic outcome: the measurement collapses nothing, only the
        // classical wire needs its precomputed value.
        const std::uint64_t key = state.amps.begin()->first;
        Branch b;
        b.prob = 1.0;
        b.clbit_writes.emplace_back(clbit, (key & bit) != 0);
        out.emplace_back(make_prob_gate({QubitRef{state.qubits[qubit_pos]}}, {std::move(b)}));
        return out;
    }

    synth::TargetState psi = to_target(state);
    synth::TargetState zero;
    zero.n_qubits = psi.n_qubits;
    zero.amps = Eigen::VectorXcd::Zero(psi.amps.size());
    zero.amps[0] = 1.0;
    out = remap(synth::transform(psi, zero), state.qubits);

    std::vector<QubitRef> group;
    for (auto qb : state.qubits) group.push_back(QubitRef{qb});
    std::vector<Branch> branches;
    for (const auto& [key, amp] : state.amps) {
        Branch b;
        b.prob = std::norm(amp);
        std::string mask(state.qubits.size(), '0');
        for (std::size_t p = 0; p < state.qubits.size(); ++p) {
            if (key & (std::uint64_t{1} << p)) mask[p] = '1';
        }
        b.ops = parallel_x(mask, group);
        b.clbit_writes.emplace_back(clbit, (key & bit) != 0);
        branches.push_back(std::move(b));
    }
    // Normalize away numerical drift in the squared amplitudes.
    double sum = 0.0;
    for (const auto& b : branches) sum += b.prob;
    for (auto& b : branches) b.prob /= sum;
    out.emplace_back(make_prob_gate(std::move(group), std::move(branches)));
    return out;
}

std::vector<Instruction> replace_reset(const qcp::AmplitudeTable& state, std::size_t qubit_pos) {
    ResetOutcome rc = post_reset_state(state, qubit_pos, /*strict=*/false);
    if (rc.removable) return {};
    return remap(synth::transform(to_target(state), rc.phi), state.qubits);
}

std::pair<Circuit, PassReport> run_pass(const Circuit& circuit, const PassConfig& config) {
    validate(circuit);
    qcp::QcpConfig qcfg;
    qcfg.n_max = config.n_max;
    qcfg.strict_reset = config.reset_soundness == ResetSoundness::Strict;
    const qcp::AnalysisResult analysis = qcp::run(circuit, qcfg);

    PassReport report;
    std::map<std::size_t, std::vector<Instruction>> replacements;
    std::set<std::uint32_t> stale;

    auto decide = [&](const qcp::SiteRecord& rec, bool fired, std::string reason,
                      std::size_t size, std::size_t group) {
        report.decisions.push_back(
            SiteDecision{rec.instr_index, rec.is_measure, fired, std::move(reason), size, group});
    };

    auto overlaps_stale = [&](const std::vector<std::uint32_t>& qubits) {
        return std::any_of(qubits.begin(), qubits.end(),
                           [&](std::uint32_t qb) { return stale.contains(qb); });
    };

    double synth_seconds = 0.0;
    auto timed = [&](auto&& fn) {
        auto start = std::chrono::steady_clock::now();
        auto result = fn();
        synth_seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        return result;
    };

    // Algorithm order: all measurement sites first, then all reset sites, both
    // against the single upfront analysis.
    for (const auto& rec : analysis.sites) {
        if (!rec.is_measure) continue;
        if (rec.input_state.is_top()) {
            decide(rec, false, "top", 0, 0);
            continue;
        }
        const qcp::AmplitudeTable& state = *rec.input_state.table;
        const std::size_t size = qcp::state_size(state);
        const std::size_t group_size = state.qubits.size();
        if (size > config.n_pcm) {
            decide(rec, false, "size>n_pcm", size, group_size);
            continue;
        }
        if (overlaps_stale(state.qubits)) {
            decide(rec, false, "stale-state", size, group_size);
            continue;
        }
        const auto& m = std::get<Measure>(circuit.instructions[rec.instr_index]);
        if (config.mode == PassMode::Conservative && group_size > 1 && size > 1 &&
            !coherence_never_consumed(circuit, rec.instr_index, state.qubits, m.qubit.index)) {
            decide(rec, false, "coherence-consumed", size, group_size);
            continue;
        }
        auto repl = timed([&] { return replace_measurement(state, rec.qubit_pos, m.clbit); });
        report.introduced_static_gates += count_gates(repl);
        replacements[rec.instr_index] = std::move(repl);
        ++report.removed_measurements;
        decide(rec, true, "fired", size, group_size);
        if (config.mode == PassMode::Faithful && group_size > 1 && size > 1) {
            // The replacement decoheres the group; recorded states of later
            // overlapping sites are no longer trustworthy.
            stale.insert(state.qubits.begin(), state.qubits.end());
        }
    }

    for (const auto& rec : analysis.sites) {
        if (rec.is_measure) continue;
        if (rec.input_state.is_top()) {
            decide(rec, false, "top", 0, 0);
            continue;
        }
        const qcp::AmplitudeTable& state = *rec.input_state.table;
        const std::size_t size = qcp::state_size(state);
        const std::size_t group_size = state.qubits.size();
        if (size > config.n_pcm) {
            decide(rec, false, "size>n_pcm", size, group_size);
            continue;
        }
        if (overlaps_stale(state.qubits)) {
            decide(rec, false, "stale-state", size, group_size);
            continue;
        }
        if (config.reset_soundness == ResetSoundness::Strict &&
            post_reset_state(state, rec.qubit_pos, true).mixed) {
            decide(rec, false, "mixed-reset", size, group_size);
            continue;
        }
        auto repl = timed([&] { return replace_reset(state, rec.qubit_pos); });
        report.introduced_static_gates += count_gates(repl);
        replacements[rec.instr_index] = std::move(repl);
        ++report.removed_resets;
        decide(rec, true, "fired", size, group_size);
    }

    Circuit out;
    out.n_qubits = circuit.n_qubits;
    out.n_clbits = circuit.n_clbits;
    for (std::size_t idx = 0; idx < circuit.instructions.size(); ++idx) {
        auto it = replacements.find(idx);
        if (it == replacements.end()) {
            out.instructions.push_back(circuit.instructions[idx]);
        } else {
            for (auto& instr : it->second) out.instructions.push_back(std::move(instr));
        }
    }
    report.synthesis_time_s = synth_seconds;
    return {std::move(out), std::move(report)};
}

std::pair<Circuit, std::size_t> baseline_remove_reset_in_zero(const Circuit& circuit) {
    Circuit out;
    out.n_qubits = circuit.n_qubits;
    out.n_clbits = circuit.n_clbits;
    std::vector<bool> in_zero(circuit.n_qubits, true);
    std::size_t removed = 0;
    for (const auto& instr : circuit.instructions) {
        if (const auto* r = std::get_if<Reset>(&instr)) {
            if (in_zero[r->qubit.index]) {
                ++removed;
                continue;
            }
            in_zero[r->qubit.index] = true;
            out.instructions.push_back(instr);
            continue;
        }
        if (std::holds_alternative<Measure>(instr)) {
            // Measuring a |0> wire reads 0 and leaves |0>; anything else is unknown.
            out.instructions.push_back(instr);
            continue;
        }
        std::visit(
            [&](const auto& op) {
                using T = std::decay_t<decltype(op)>;
                if constexpr (std::is_same_v<T, Gate>) {
                    for (auto qr : op.qubits) in_zero[qr.index] = false;
                } else if constexpr (std::is_same_v<T, CondGate>) {
                    for (auto qr : op.gate.qubits) in_zero[qr.index] = false;
                } else if constexpr (std::is_same_v<T, ProbGate>) {
                    for (auto qr : op.qubits) in_zero[qr.index] = false;
                }
            },
            instr);
        out.instructions.push_back(instr);
    }
    return {std::move(out), removed};
}

std::pair<Circuit, std::size_t> baseline_reset_after_measure(const Circuit& circuit) {
    Circuit out;
    out.n_qubits = circuit.n_qubits;
    out.n_clbits = circuit.n_clbits;
    std::size_t rewritten = 0;
    for (std::size_t idx = 0; idx < circuit.instructions.size(); ++idx) {
        const Instruction& instr = circuit.instructions[idx];
        if (const auto* r = std::get_if<Reset>(&instr); r && idx > 0) {
            if (const auto* m = std::get_if<Measure>(&circuit.instructions[idx - 1]);
                m && m->qubit == r->qubit) {
                out.instructions.emplace_back(
                    CondGate{m->clbit, true, make_gate(GateKind::X, {r->qubit})});
                ++rewritten;
                continue;
            }
        }
        out.instructions.push_back(instr);
    }
    return {std::move(out), rewritten};
}

}  // namespace pcm
}  // namespace dyncirc
