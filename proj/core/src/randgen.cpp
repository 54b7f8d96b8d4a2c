#include "dyncirc/randgen.hpp"

#include <algorithm>
#include <numbers>

namespace dyncirc {
namespace randgen {

namespace {

constexpr GateKind kOneQubit[] = {GateKind::H,  GateKind::X,  GateKind::Y,  GateKind::Z,
                                  GateKind::S,  GateKind::Sdg, GateKind::T, GateKind::Tdg,
                                  GateKind::RX, GateKind::RY, GateKind::RZ, GateKind::U};
constexpr GateKind kTwoQubit[] = {GateKind::CX, GateKind::CZ, GateKind::SWAP};

struct Builder {
    const GenConfig& cfg;
    std::mt19937_64 rng;
    Circuit circuit;
    std::vector<std::size_t> wire_depth;   // includes dynamic ops
    std::uniform_real_distribution<double> uni{0.0, 1.0};

    void bump(const std::vector<QubitRef>& qubits) {
        std::size_t d = 0;
        for (auto qb : qubits) d = std::max(d, wire_depth[qb.index]);
        for (auto qb : qubits) wire_depth[qb.index] = d + 1;
    }

    Gate random_gate(const std::vector<std::uint32_t>& qubits) {
        GateKind kind;
        if (qubits.size() == 1) {
            kind = kOneQubit[rng() % std::size(kOneQubit)];
        } else if (qubits.size() == 2) {
            kind = kTwoQubit[rng() % std::size(kTwoQubit)];
        } else {
            kind = GateKind::CCX;
        }
        std::vector<double> params(gate_param_count(kind));
        for (auto& p : params) p = uni(rng) * 2.0 * std::numbers::pi;
        std::vector<QubitRef> refs;
        for (auto q : qubits) refs.push_back(QubitRef{q});
        return make_gate(kind, std::move(refs), std::move(params));
    }

    void add_gate(Gate g) {
        bump(g.qubits);
        circuit.instructions.emplace_back(std::move(g));
    }

    void add_layer() {
        std::vector<std::uint32_t> avail;
        for (std::uint32_t q = 0; q < circuit.n_qubits; ++q) {
            if (uni(rng) >= cfg.idle_density) avail.push_back(q);
        }
        std::shuffle(avail.begin(), avail.end(), rng);
        std::size_t i = 0;
        while (i < avail.size()) {
            // arity mix 1:2:3 at weights 5:4:1
            double r = uni(rng) * 10.0;
            std::size_t arity = r < 5.0 ? 1 : (r < 9.0 ? 2 : 3);
            arity = std::min(arity, avail.size() - i);
            std::vector<std::uint32_t> chunk(avail.begin() + i, avail.begin() + i + arity);
            add_gate(random_gate(chunk));
            i += arity;
        }

        std::optional<std::uint32_t> measured;
        if (circuit.n_qubits > 0 && uni(rng) < cfg.meas_density) {
            std::uint32_t q = static_cast<std::uint32_t>(rng() % circuit.n_qubits);
            std::uint32_t cl = static_cast<std::uint32_t>(circuit.n_clbits++);
            bump({QubitRef{q}});
            circuit.instructions.emplace_back(Measure{QubitRef{q}, ClbitRef{cl}});
            measured = q;
            if (uni(rng) < cfg.cond_density) {
                std::size_t count = 1 + rng() % 3;
                for (std::size_t k = 0; k < count; ++k) {
                    std::uint32_t target = static_cast<std::uint32_t>(rng() % circuit.n_qubits);
                    Gate g = random_gate({target});
                    bump(g.qubits);
                    circuit.instructions.emplace_back(CondGate{ClbitRef{cl}, true, std::move(g)});
                }
            }
        }
        if (circuit.n_qubits > 0 && uni(rng) < cfg.reset_density) {
            std::uint32_t q;
            if (measured && uni(rng) < cfg.reuse_fraction) {
                q = *measured;  // qubit-reuse idiom: reset straight after the measurement
            } else {
                q = static_cast<std::uint32_t>(rng() % circuit.n_qubits);
            }
            bump({QubitRef{q}});
            circuit.instructions.emplace_back(Reset{QubitRef{q}});
        }
    }
};

}  // namespace

ResolvedSize resolve_size(const GenConfig& config) {
    ResolvedSize size{config.n_qubits, config.depth};
    if (config.scale) {
        if (size.n_qubits == 0) size.n_qubits = static_cast<std::size_t>(*config.scale) * 10;
        if (size.depth == 0) size.depth = static_cast<std::size_t>(*config.scale) * 200;
    }
    return size;
}

std::size_t circuit_depth(const Circuit& circuit) {
    std::vector<std::size_t> depth(circuit.n_qubits, 0);
    auto bump = [&](const std::vector<QubitRef>& qubits) {
        std::size_t d = 0;
        for (auto qb : qubits) d = std::max(d, depth[qb.index]);
        for (auto qb : qubits) depth[qb.index] = d + 1;
    };
    for (const auto& instr : circuit.instructions) {
        std::visit(
            [&](const auto& op) {
                using T = std::decay_t<decltype(op)>;
                if constexpr (std::is_same_v<T, Gate>) {
                    bump(op.qubits);
                } else if constexpr (std::is_same_v<T, Measure> || std::is_same_v<T, Reset>) {
                    bump({op.qubit});
                } else if constexpr (std::is_same_v<T, CondGate>) {
                    bump(op.gate.qubits);
                } else if constexpr (std::is_same_v<T, ProbGate>) {
                    bump(op.qubits);
                }
            },
            instr);
    }
    return depth.empty() ? 0 : *std::max_element(depth.begin(), depth.end());
}

Circuit generate(const GenConfig& config) {
    const ResolvedSize size = resolve_size(config);
    Builder b{config, std::mt19937_64(config.seed), {}, {}};
    b.circuit.n_qubits = size.n_qubits;
    b.wire_depth.assign(size.n_qubits, 0);
    if (size.n_qubits == 0) return std::move(b.circuit);

    // Each layer raises the dependency depth by at most one; stop exactly at
    // the target.
    std::size_t guard = 0;
    while (*std::max_element(b.wire_depth.begin(), b.wire_depth.end()) < size.depth &&
           guard < size.depth * 10 + 100) {
        b.add_layer();
        ++guard;
    }
    validate(b.circuit);
    return std::move(b.circuit);
}

std::vector<Circuit> generate_suite(const GenConfig& config, std::size_t count) {
    std::vector<Circuit> out;
    std::mt19937_64 seeder(config.seed);
    for (std::size_t i = 0; i < count; ++i) {
        GenConfig c = config;
        c.seed = seeder();
        out.push_back(generate(c));
    }
    return out;
}

}  // namespace randgen
}  // namespace dyncirc
