#include "dyncirc/circuit.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

namespace dyncirc {

namespace {

struct GateInfo {
    GateKind kind;
    std::string_view name;
    std::size_t arity;
    std::size_t params;
};

constexpr GateInfo kGateInfo[] = {
    {GateKind::H, "h", 1, 0},     {GateKind::X, "x", 1, 0},
    {GateKind::Y, "y", 1, 0},     {GateKind::Z, "z", 1, 0},
    {GateKind::S, "s", 1, 0},     {GateKind::Sdg, "sdg", 1, 0},
    {GateKind::T, "t", 1, 0},     {GateKind::Tdg, "tdg", 1, 0},
    {GateKind::RX, "rx", 1, 1},   {GateKind::RY, "ry", 1, 1},
    {GateKind::RZ, "rz", 1, 1},   {GateKind::U, "u", 1, 3},
    {GateKind::CX, "cx", 2, 0},   {GateKind::CZ, "cz", 2, 0},
    {GateKind::CCX, "ccx", 3, 0}, {GateKind::SWAP, "swap", 2, 0},
};

const GateInfo& info(GateKind kind) {
    return kGateInfo[static_cast<std::size_t>(kind)];
}

}  // namespace

std::size_t gate_arity(GateKind kind) { return info(kind).arity; }
std::size_t gate_param_count(GateKind kind) { return info(kind).params; }
std::string_view gate_name(GateKind kind) { return info(kind).name; }

std::optional<GateKind> gate_from_name(std::string_view name) {
    for (const auto& gi : kGateInfo) {
        if (gi.name == name) return gi.kind;
    }
    return std::nullopt;
}

Gate make_gate(GateKind kind, std::vector<QubitRef> qubits, std::vector<double> params) {
    Gate g{kind, std::move(params), std::move(qubits)};
    if (g.qubits.size() != gate_arity(kind)) {
        throw WireError("gate arity mismatch for " + std::string(gate_name(kind)));
    }
    if (g.params.size() != gate_param_count(kind)) {
        throw InvalidParameter("gate parameter count mismatch for " + std::string(gate_name(kind)));
    }
    return g;
}

ProbGate make_prob_gate(std::vector<QubitRef> qubits, std::vector<Branch> branches) {
    ProbGate pg{std::move(qubits), std::move(branches)};
    double sum = 0.0;
    for (const auto& b : pg.branches) {
        if (b.prob < 0.0 || b.prob > 1.0 || !std::isfinite(b.prob)) {
            throw InvalidDistribution("branch probability outside [0,1]");
        }
        sum += b.prob;
    }
    if (std::abs(sum - 1.0) > kProbSumTol) {
        throw InvalidDistribution("branch probabilities sum to " + std::to_string(sum));
    }
    return pg;
}

namespace {

void check_qubits(const std::vector<QubitRef>& qubits, std::size_t n_qubits) {
    std::set<std::uint32_t> seen;
    for (auto q : qubits) {
        if (q.index >= n_qubits) throw WireError("qubit index out of range");
        if (!seen.insert(q.index).second) throw WireError("duplicate qubit operand");
    }
}

void check_gate(const Gate& g, std::size_t n_qubits) {
    if (g.qubits.size() != gate_arity(g.kind)) throw WireError("gate arity mismatch");
    if (g.params.size() != gate_param_count(g.kind)) throw InvalidParameter("gate parameter count mismatch");
    for (double p : g.params) {
        if (!std::isfinite(p)) throw InvalidParameter("non-finite gate parameter");
    }
    check_qubits(g.qubits, n_qubits);
}

}  // namespace

void validate(const Circuit& circuit) {
    for (const auto& instr : circuit.instructions) {
        std::visit(
            [&](const auto& op) {
                using T = std::decay_t<decltype(op)>;
                if constexpr (std::is_same_v<T, Gate>) {
                    check_gate(op, circuit.n_qubits);
                } else if constexpr (std::is_same_v<T, Measure>) {
                    if (op.qubit.index >= circuit.n_qubits) throw WireError("measure qubit out of range");
                    if (op.clbit.index >= circuit.n_clbits) throw WireError("measure clbit out of range");
                } else if constexpr (std::is_same_v<T, Reset>) {
                    if (op.qubit.index >= circuit.n_qubits) throw WireError("reset qubit out of range");
                } else if constexpr (std::is_same_v<T, CondGate>) {
                    if (op.clbit.index >= circuit.n_clbits) throw WireError("condition clbit out of range");
                    check_gate(op.gate, circuit.n_qubits);
                } else if constexpr (std::is_same_v<T, ProbGate>) {
                    check_qubits(op.qubits, circuit.n_qubits);
                    double sum = 0.0;
                    for (const auto& b : op.branches) {
                        sum += b.prob;
                        for (const auto& g : b.ops) {
                            check_gate(g, circuit.n_qubits);
                            for (auto q : g.qubits) {
                                if (std::find(op.qubits.begin(), op.qubits.end(), q) == op.qubits.end()) {
                                    throw WireError("branch gate outside probabilistic gate qubits");
                                }
                            }
                        }
                        for (const auto& [c, bit] : b.clbit_writes) {
                            (void)bit;
                            if (c.index >= circuit.n_clbits) throw WireError("branch clbit out of range");
                        }
                    }
                    if (std::abs(sum - 1.0) > kProbSumTol) {
                        throw InvalidDistribution("branch probabilities do not sum to 1");
                    }
                }
            },
            instr);
    }
}

Eigen::MatrixXcd unitary_of(GateKind kind, const std::vector<double>& params) {
    using std::numbers::pi;
    const cplx i(0.0, 1.0);
    if (params.size() != gate_param_count(kind)) {
        throw InvalidParameter("wrong number of gate parameters");
    }
    for (double p : params) {
        if (!std::isfinite(p)) throw InvalidParameter("non-finite gate parameter");
    }
    Eigen::MatrixXcd m;
    switch (kind) {
        case GateKind::H:
            m.resize(2, 2);
            m << 1, 1, 1, -1;
            m /= std::sqrt(2.0);
            break;
        case GateKind::X:
            m.resize(2, 2);
            m << 0, 1, 1, 0;
            break;
        case GateKind::Y:
            m.resize(2, 2);
            m << 0, -i, i, 0;
            break;
        case GateKind::Z:
            m.resize(2, 2);
            m << 1, 0, 0, -1;
            break;
        case GateKind::S:
            m.resize(2, 2);
            m << 1, 0, 0, i;
            break;
        case GateKind::Sdg:
            m.resize(2, 2);
            m << 1, 0, 0, -i;
            break;
        case GateKind::T:
            m.resize(2, 2);
            m << 1, 0, 0, std::exp(i * (pi / 4));
            break;
        case GateKind::Tdg:
            m.resize(2, 2);
            m << 1, 0, 0, std::exp(-i * (pi / 4));
            break;
        case GateKind::RX: {
            double t = params[0] / 2;
            m.resize(2, 2);
            m << std::cos(t), -i * std::sin(t), -i * std::sin(t), std::cos(t);
            break;
        }
        case GateKind::RY: {
            double t = params[0] / 2;
            m.resize(2, 2);
            m << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
            break;
        }
        case GateKind::RZ: {
            double t = params[0] / 2;
            m.resize(2, 2);
            m << std::exp(-i * t), 0, 0, std::exp(i * t);
            break;
        }
        case GateKind::U: {
            double theta = params[0], phi = params[1], lambda = params[2];
            double t = theta / 2;
            m.resize(2, 2);
            m << std::cos(t), -std::exp(i * lambda) * std::sin(t),
                std::exp(i * phi) * std::sin(t), std::exp(i * (phi + lambda)) * std::cos(t);
            break;
        }
        case GateKind::CX:
            // control = qubit 0 (low bit), target = qubit 1
            m = Eigen::MatrixXcd::Zero(4, 4);
            m(0, 0) = 1;
            m(2, 2) = 1;
            m(3, 1) = 1;
            m(1, 3) = 1;
            break;
        case GateKind::CZ:
            m = Eigen::MatrixXcd::Identity(4, 4);
            m(3, 3) = -1;
            break;
        case GateKind::CCX:
            // controls = qubits 0,1; target = qubit 2
            m = Eigen::MatrixXcd::Identity(8, 8);
            m(3, 3) = 0;
            m(7, 7) = 0;
            m(3, 7) = 1;
            m(7, 3) = 1;
            break;
        case GateKind::SWAP:
            m = Eigen::MatrixXcd::Zero(4, 4);
            m(0, 0) = 1;
            m(3, 3) = 1;
            m(1, 2) = 1;
            m(2, 1) = 1;
            break;
    }
    return m;
}

Eigen::MatrixXcd unitary_of(const Gate& gate) { return unitary_of(gate.kind, gate.params); }

std::vector<Gate> parallel_x(const std::string& mask) {
    std::vector<Gate> gates;
    for (std::size_t p = 0; p < mask.size(); ++p) {
        if (mask[p] == '1') {
            gates.push_back(make_gate(GateKind::X, {QubitRef{static_cast<std::uint32_t>(p)}}));
        } else if (mask[p] != '0') {
            throw InvalidParameter("mask must consist of 0/1 characters");
        }
    }
    return gates;
}

std::vector<Gate> parallel_x(const std::string& mask, const std::vector<QubitRef>& qubits) {
    if (mask.size() != qubits.size()) throw WireError("mask length does not match qubit list");
    std::vector<Gate> gates;
    for (std::size_t p = 0; p < mask.size(); ++p) {
        if (mask[p] == '1') gates.push_back(make_gate(GateKind::X, {qubits[p]}));
    }
    return gates;
}

DynamicOpCounts count_dynamic_ops(const Circuit& circuit) {
    DynamicOpCounts counts;
    for (const auto& instr : circuit.instructions) {
        if (std::holds_alternative<Measure>(instr)) {
            ++counts.n_measurements;
        } else if (std::holds_alternative<Reset>(instr)) {
            ++counts.n_resets;
        } else if (std::holds_alternative<Gate>(instr) || std::holds_alternative<CondGate>(instr)) {
            ++counts.n_static_gates;
        }
    }
    return counts;
}

CompiledShot compile_shot(const Circuit& circuit, std::mt19937_64& rng) {
    CompiledShot shot;
    shot.circuit.n_qubits = circuit.n_qubits;
    shot.circuit.n_clbits = circuit.n_clbits;
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (const auto& instr : circuit.instructions) {
        if (const auto* pg = std::get_if<ProbGate>(&instr)) {
            double sum = 0.0;
            for (const auto& b : pg->branches) sum += b.prob;
            if (std::abs(sum - 1.0) > kProbSumTol) {
                throw InvalidDistribution("branch probabilities do not sum to 1");
            }
            double r = uni(rng) * sum;
            const Branch* chosen = &pg->branches.back();
            for (const auto& b : pg->branches) {
                if (r < b.prob) {
                    chosen = &b;
                    break;
                }
                r -= b.prob;
            }
            for (const auto& g : chosen->ops) shot.circuit.instructions.emplace_back(g);
            for (const auto& w : chosen->clbit_writes) shot.presets.push_back(w);
        } else {
            shot.circuit.instructions.push_back(instr);
        }
    }
    return shot;
}

}  // namespace dyncirc
