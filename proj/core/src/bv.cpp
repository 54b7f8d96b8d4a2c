#include "dyncirc/bv.hpp"

namespace dyncirc {

Circuit build_bv_reuse(const std::string& secret) {
    if (secret.empty()) throw InvalidParameter("secret must not be empty");
    for (char c : secret) {
        if (c != '0' && c != '1') throw InvalidParameter("secret must be a 0/1 string");
    }
    const QubitRef top{0}, bottom{1};
    Circuit circuit;
    circuit.n_qubits = 2;
    circuit.n_clbits = secret.size();
    circuit.instructions.emplace_back(make_gate(GateKind::H, {bottom}));
    circuit.instructions.emplace_back(make_gate(GateKind::Z, {bottom}));
    for (std::size_t i = 0; i < secret.size(); ++i) {
        circuit.instructions.emplace_back(make_gate(GateKind::H, {top}));
        if (secret[i] == '1') {
            circuit.instructions.emplace_back(make_gate(GateKind::CX, {top, bottom}));
        }
        circuit.instructions.emplace_back(make_gate(GateKind::H, {top}));
        circuit.instructions.emplace_back(
            Measure{top, ClbitRef{static_cast<std::uint32_t>(i)}});
        circuit.instructions.emplace_back(Reset{top});
    }
    circuit.instructions.emplace_back(make_gate(GateKind::H, {bottom}));
    return circuit;
}

}  // namespace dyncirc
