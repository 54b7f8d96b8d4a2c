#include "dyncirc/sim.hpp"

#include <algorithm>
#include <cmath>

namespace dyncirc {

namespace {

// Measurement probability of reading bit value 1 on one qubit.
double prob_one(const Eigen::VectorXcd& state, std::uint32_t qubit) {
    const std::uint64_t bit = std::uint64_t{1} << qubit;
    double p = 0.0;
    for (Eigen::Index idx = 0; idx < state.size(); ++idx) {
        if (static_cast<std::uint64_t>(idx) & bit) p += std::norm(state[idx]);
    }
    return p;
}

// Projects onto the subspace where the qubit reads `value`, unnormalized.
Eigen::VectorXcd project(const Eigen::VectorXcd& state, std::uint32_t qubit, bool value) {
    const std::uint64_t bit = std::uint64_t{1} << qubit;
    Eigen::VectorXcd out = state;
    for (Eigen::Index idx = 0; idx < out.size(); ++idx) {
        if ((static_cast<std::uint64_t>(idx) & bit) != 0 != value) out[idx] = 0.0;
    }
    return out;
}

Eigen::VectorXcd flip_bit(const Eigen::VectorXcd& state, std::uint32_t qubit) {
    const std::uint64_t bit = std::uint64_t{1} << qubit;
    Eigen::VectorXcd out(state.size());
    for (Eigen::Index idx = 0; idx < state.size(); ++idx) {
        out[static_cast<std::uint64_t>(idx) ^ bit] = state[idx];
    }
    return out;
}

struct Enumerator {
    const Circuit& circuit;
    const EnumLimits& limits;
    std::vector<BranchOutcome> out;

    void expand(Eigen::VectorXcd state, std::vector<bool> clbits, double prob, std::size_t pc) {
        for (; pc < circuit.instructions.size(); ++pc) {
            const Instruction& instr = circuit.instructions[pc];
            if (const auto* g = std::get_if<Gate>(&instr)) {
                apply_gate_to_state(state, *g);
            } else if (const auto* cg = std::get_if<CondGate>(&instr)) {
                if (clbits[cg->clbit.index] == cg->expected) apply_gate_to_state(state, cg->gate);
            } else if (const auto* m = std::get_if<Measure>(&instr)) {
                const double p1 = prob_one(state, m->qubit.index);
                for (bool value : {false, true}) {
                    const double p = value ? p1 : 1.0 - p1;
                    if (p < kAmpPruneTol) continue;
                    Eigen::VectorXcd sub = project(state, m->qubit.index, value) / std::sqrt(p);
                    std::vector<bool> cl = clbits;
                    cl[m->clbit.index] = value;
                    expand(std::move(sub), std::move(cl), prob * p, pc + 1);
                }
                return;
            } else if (const auto* r = std::get_if<Reset>(&instr)) {
                // Exact reset channel: measure, then flip the 1 branch to 0.
                const double p1 = prob_one(state, r->qubit.index);
                for (bool value : {false, true}) {
                    const double p = value ? p1 : 1.0 - p1;
                    if (p < kAmpPruneTol) continue;
                    Eigen::VectorXcd sub = project(state, r->qubit.index, value) / std::sqrt(p);
                    if (value) sub = flip_bit(sub, r->qubit.index);
                    expand(std::move(sub), clbits, prob * p, pc + 1);
                }
                return;
            } else if (const auto* pg = std::get_if<ProbGate>(&instr)) {
                for (const Branch& b : pg->branches) {
                    if (b.prob < kAmpPruneTol) continue;
                    Eigen::VectorXcd sub = state;
                    for (const Gate& g : b.ops) apply_gate_to_state(sub, g);
                    std::vector<bool> cl = clbits;
                    for (const auto& [c, bit] : b.clbit_writes) cl[c.index] = bit;
                    expand(std::move(sub), std::move(cl), prob * b.prob, pc + 1);
                }
                return;
            }
        }
        if (out.size() >= limits.max_branches) {
            throw TooLarge("branch enumeration exceeds limit");
        }
        out.push_back(BranchOutcome{std::move(clbits), prob, std::move(state)});
    }
};

}  // namespace

void apply_gate_to_state(Eigen::VectorXcd& state, const Gate& gate) {
    const Eigen::MatrixXcd u = unitary_of(gate);
    const std::size_t k = gate.qubits.size();
    const std::uint64_t dim = std::uint64_t{1} << k;
    std::vector<std::uint64_t> bits(k);
    for (std::size_t p = 0; p < k; ++p) bits[p] = std::uint64_t{1} << gate.qubits[p].index;

    std::uint64_t target_mask = 0;
    for (auto b : bits) target_mask |= b;

    Eigen::VectorXcd in(dim), res(dim);
    const std::uint64_t n = static_cast<std::uint64_t>(state.size());
    for (std::uint64_t base = 0; base < n; ++base) {
        if (base & target_mask) continue;
        for (std::uint64_t sub = 0; sub < dim; ++sub) {
            std::uint64_t idx = base;
            for (std::size_t p = 0; p < k; ++p) {
                if (sub & (std::uint64_t{1} << p)) idx |= bits[p];
            }
            in[sub] = state[idx];
        }
        res.noalias() = u * in;
        for (std::uint64_t sub = 0; sub < dim; ++sub) {
            std::uint64_t idx = base;
            for (std::size_t p = 0; p < k; ++p) {
                if (sub & (std::uint64_t{1} << p)) idx |= bits[p];
            }
            state[idx] = res[sub];
        }
    }
}

std::vector<BranchOutcome> enumerate(const Circuit& circuit, const EnumLimits& limits) {
    validate(circuit);
    if (circuit.n_qubits > limits.max_qubits) throw TooLarge("too many qubits to enumerate");
    Eigen::VectorXcd init = Eigen::VectorXcd::Zero(std::int64_t{1} << circuit.n_qubits);
    init[0] = 1.0;
    Enumerator e{circuit, limits, {}};
    e.expand(std::move(init), std::vector<bool>(circuit.n_clbits, false), 1.0, 0);
    return std::move(e.out);
}

std::string clbits_to_string(const std::vector<bool>& clbits) {
    std::string s(clbits.size(), '0');
    for (std::size_t i = 0; i < clbits.size(); ++i) {
        if (clbits[i]) s[i] = '1';
    }
    return s;
}

OutcomeDistribution distribution(const Circuit& circuit, const EnumLimits& limits) {
    OutcomeDistribution dist;
    for (const auto& b : enumerate(circuit, limits)) {
        dist[clbits_to_string(b.clbits)] += b.probability;
    }
    return dist;
}

double tvd(const OutcomeDistribution& a, const OutcomeDistribution& b) {
    double acc = 0.0;
    for (const auto& [key, pa] : a) {
        auto it = b.find(key);
        acc += std::abs(pa - (it == b.end() ? 0.0 : it->second));
    }
    for (const auto& [key, pb] : b) {
        if (!a.contains(key)) acc += pb;
    }
    return acc / 2.0;
}

OutcomeDistribution sample(const Circuit& circuit, std::size_t shots, std::uint64_t seed) {
    validate(circuit);
    std::map<std::string, std::size_t> counts;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (std::size_t shot = 0; shot < shots; ++shot) {
        Eigen::VectorXcd state = Eigen::VectorXcd::Zero(std::int64_t{1} << circuit.n_qubits);
        state[0] = 1.0;
        std::vector<bool> clbits(circuit.n_clbits, false);
        for (const auto& instr : circuit.instructions) {
            if (const auto* g = std::get_if<Gate>(&instr)) {
                apply_gate_to_state(state, *g);
            } else if (const auto* cg = std::get_if<CondGate>(&instr)) {
                if (clbits[cg->clbit.index] == cg->expected) apply_gate_to_state(state, cg->gate);
            } else if (const auto* m = std::get_if<Measure>(&instr)) {
                const double p1 = prob_one(state, m->qubit.index);
                const bool value = uni(rng) < p1;
                const double p = value ? p1 : 1.0 - p1;
                state = project(state, m->qubit.index, value) / std::sqrt(p);
                clbits[m->clbit.index] = value;
            } else if (const auto* r = std::get_if<Reset>(&instr)) {
                const double p1 = prob_one(state, r->qubit.index);
                const bool value = uni(rng) < p1;
                const double p = value ? p1 : 1.0 - p1;
                state = project(state, r->qubit.index, value) / std::sqrt(p);
                if (value) state = flip_bit(state, r->qubit.index);
            } else if (const auto* pg = std::get_if<ProbGate>(&instr)) {
                double r2 = uni(rng);
                const Branch* chosen = &pg->branches.back();
                for (const auto& b : pg->branches) {
                    if (r2 < b.prob) {
                        chosen = &b;
                        break;
                    }
                    r2 -= b.prob;
                }
                for (const auto& g : chosen->ops) apply_gate_to_state(state, g);
                for (const auto& [c, bit] : chosen->clbit_writes) clbits[c.index] = bit;
            }
        }
        ++counts[clbits_to_string(clbits)];
    }
    OutcomeDistribution dist;
    for (const auto& [key, count] : counts) {
        dist[key] = static_cast<double>(count) / static_cast<double>(shots);
    }
    return dist;
}

}  // namespace dyncirc
