#include "dyncirc/synth.hpp"

#include <cmath>
#include <numbers>

namespace dyncirc {
namespace synth {

namespace {

constexpr double kAngleTol = 1e-12;

QubitRef q(std::size_t index) { return QubitRef{static_cast<std::uint32_t>(index)}; }

void check_normalized(const TargetState& psi) {
    if (psi.amps.size() != (std::int64_t{1} << psi.n_qubits)) {
        throw InvalidState("amplitude vector length does not match qubit count");
    }
    if (std::abs(psi.amps.norm() - 1.0) > kNormTol) {
        throw InvalidState("state is not l2-normalized");
    }
}

// Gates preparing a*|0> + b*|1> from |0>, up to global phase.
std::vector<Gate> prep_single(cplx a, cplx b, std::size_t qubit) {
    std::vector<Gate> gates;
    const double ra = std::abs(a), rb = std::abs(b);
    if (rb < kAngleTol) return gates;
    if (ra < kAngleTol) {
        gates.push_back(make_gate(GateKind::X, {q(qubit)}));
        return gates;
    }
    const double theta = 2.0 * std::atan2(rb, ra);
    double phi = std::arg(b) - std::arg(a);
    if (std::abs(theta - std::numbers::pi / 2) < kAngleTol && std::abs(phi) < kAngleTol) {
        gates.push_back(make_gate(GateKind::H, {q(qubit)}));
        return gates;
    }
    gates.push_back(make_gate(GateKind::RY, {q(qubit)}, {theta}));
    if (std::abs(phi) > kAngleTol) {
        gates.push_back(make_gate(GateKind::RZ, {q(qubit)}, {phi}));
    }
    return gates;
}

// Uniformly controlled rotation: for each assignment j of the control qubits
// (bit p of j = control qubit controls[p]) rotate the target by angles[j].
// Decomposed recursively into plain rotations and CX conjugations.
void emit_ucr(std::vector<Gate>& out, GateKind kind, std::size_t target,
              const std::vector<std::size_t>& controls, const std::vector<double>& angles) {
    bool all_zero = true;
    for (double a : angles) {
        if (std::abs(a) > kAngleTol) {
            all_zero = false;
            break;
        }
    }
    if (all_zero) return;
    if (controls.empty()) {
        out.push_back(make_gate(kind, {q(target)}, {angles[0]}));
        return;
    }
    const std::size_t half = angles.size() / 2;
    const std::size_t top = controls.back();
    std::vector<std::size_t> rest(controls.begin(), controls.end() - 1);
    std::vector<double> left(half), right(half);
    for (std::size_t j = 0; j < half; ++j) {
        left[j] = (angles[j] + angles[j + half]) / 2.0;
        right[j] = (angles[j] - angles[j + half]) / 2.0;
    }
    emit_ucr(out, kind, target, rest, left);
    out.push_back(make_gate(GateKind::CX, {q(top), q(target)}));
    emit_ucr(out, kind, target, rest, right);
    out.push_back(make_gate(GateKind::CX, {q(top), q(target)}));
}

// Disentangling circuit D with D|psi> = |0...0> up to global phase.
std::vector<Gate> disentangle(Eigen::VectorXcd v, std::size_t n) {
    std::vector<Gate> gates;
    for (std::size_t m = n; m >= 1; --m) {
        const std::size_t half = std::size_t{1} << (m - 1);
        std::vector<double> phis(half, 0.0), thetas(half, 0.0);
        for (std::size_t j = 0; j < half; ++j) {
            const cplx a = v[static_cast<std::int64_t>(j)];
            const cplx b = v[static_cast<std::int64_t>(j + half)];
            const double ra = std::abs(a), rb = std::abs(b);
            if (rb < kAngleTol) {
                continue;  // already disentangled on this branch, v[j] stays a
            }
            const double alpha = ra < kAngleTol ? 0.0 : std::arg(a);
            const double beta = std::arg(b);
            phis[j] = alpha - beta;
            thetas[j] = -2.0 * std::atan2(rb, ra);
            v[static_cast<std::int64_t>(j)] =
                std::hypot(ra, rb) * std::exp(cplx(0.0, (alpha + beta) / 2.0));
        }
        std::vector<std::size_t> controls(m - 1);
        for (std::size_t p = 0; p + 1 < m; ++p) controls[p] = p;
        emit_ucr(gates, GateKind::RZ, m - 1, controls, phis);
        emit_ucr(gates, GateKind::RY, m - 1, controls, thetas);
    }
    return gates;
}

std::vector<std::int64_t> nonzero_indices(const Eigen::VectorXcd& v) {
    std::vector<std::int64_t> idx;
    for (std::int64_t i = 0; i < v.size(); ++i) {
        if (std::abs(v[i]) >= kAmpPruneTol) idx.push_back(i);
    }
    return idx;
}

}  // namespace

Circuit state_prep(const TargetState& psi, std::size_t cap) {
    check_normalized(psi);
    if (psi.n_qubits > cap) {
        throw SynthesisCapExceeded("state has more qubits than the synthesis cap");
    }
    Circuit out;
    out.n_qubits = psi.n_qubits;

    const auto nz = nonzero_indices(psi.amps);
    if (nz.size() == 1) {
        // Basis state: an X chain suffices.
        for (std::size_t p = 0; p < psi.n_qubits; ++p) {
            if (nz[0] & (std::int64_t{1} << p)) {
                out.instructions.emplace_back(make_gate(GateKind::X, {q(p)}));
            }
        }
        return out;
    }
    if (psi.n_qubits == 1) {
        for (auto& g : prep_single(psi.amps[0], psi.amps[1], 0)) {
            out.instructions.emplace_back(std::move(g));
        }
        return out;
    }
    if (nz.size() == 2) {
        // Two-amplitude fast path: one rotation, a CX chain, an X mask.
        const std::int64_t s = nz[0], t = nz[1];
        const std::int64_t diff = s ^ t;
        std::size_t pivot = 0;
        while (!(diff & (std::int64_t{1} << pivot))) ++pivot;
        for (auto& g : prep_single(psi.amps[s], psi.amps[t], pivot)) {
            out.instructions.emplace_back(std::move(g));
        }
        for (std::size_t p = 0; p < psi.n_qubits; ++p) {
            if (p != pivot && (diff & (std::int64_t{1} << p))) {
                out.instructions.emplace_back(make_gate(GateKind::CX, {q(pivot), q(p)}));
            }
        }
        for (std::size_t p = 0; p < psi.n_qubits; ++p) {
            if (s & (std::int64_t{1} << p)) {
                out.instructions.emplace_back(make_gate(GateKind::X, {q(p)}));
            }
        }
        return out;
    }

    Circuit dis;
    dis.n_qubits = psi.n_qubits;
    for (auto& g : disentangle(psi.amps, psi.n_qubits)) {
        dis.instructions.emplace_back(std::move(g));
    }
    return invert(dis);
}

Circuit invert(const Circuit& circuit) {
    Circuit out;
    out.n_qubits = circuit.n_qubits;
    out.n_clbits = circuit.n_clbits;
    for (auto it = circuit.instructions.rbegin(); it != circuit.instructions.rend(); ++it) {
        const Gate* g = std::get_if<Gate>(&*it);
        if (!g) throw NotUnitary("circuit contains a non-gate instruction");
        Gate adj = *g;
        switch (g->kind) {
            case GateKind::S:
                adj.kind = GateKind::Sdg;
                break;
            case GateKind::Sdg:
                adj.kind = GateKind::S;
                break;
            case GateKind::T:
                adj.kind = GateKind::Tdg;
                break;
            case GateKind::Tdg:
                adj.kind = GateKind::T;
                break;
            case GateKind::RX:
            case GateKind::RY:
            case GateKind::RZ:
                adj.params[0] = -adj.params[0];
                break;
            case GateKind::U:
                adj.params = {-g->params[0], -g->params[2], -g->params[1]};
                break;
            default:
                break;  // self-inverse
        }
        out.instructions.emplace_back(std::move(adj));
    }
    return out;
}

Circuit transform(const TargetState& psi, const TargetState& phi) {
    check_normalized(psi);
    check_normalized(phi);
    if (psi.n_qubits != phi.n_qubits) throw InvalidState("state dimension mismatch");
    Circuit out;
    out.n_qubits = psi.n_qubits;
    if (std::abs(phi.amps.dot(psi.amps)) >= 1.0 - kAngleTol) {
        return out;  // identical up to global phase
    }
    Circuit undo = invert(state_prep(psi));
    Circuit redo = state_prep(phi);
    out.instructions = std::move(undo.instructions);
    out.instructions.insert(out.instructions.end(),
                            std::make_move_iterator(redo.instructions.begin()),
                            std::make_move_iterator(redo.instructions.end()));
    return out;
}

}  // namespace synth
}  // namespace dyncirc
