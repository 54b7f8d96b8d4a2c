#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace dyncirc {

using cplx = std::complex<double>;

/// Probability/amplitude tolerances used across the toolkit.
inline constexpr double kProbSumTol = 1e-9;
inline constexpr double kAmpPruneTol = 1e-12;
inline constexpr double kNormTol = 1e-9;

struct CircuitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InvalidParameter : CircuitError {
    using CircuitError::CircuitError;
};
struct InvalidDistribution : CircuitError {
    using CircuitError::CircuitError;
};
struct WireError : CircuitError {
    using CircuitError::CircuitError;
};

struct QubitRef {
    std::uint32_t index{};
    auto operator<=>(const QubitRef&) const = default;
};
struct ClbitRef {
    std::uint32_t index{};
    auto operator<=>(const ClbitRef&) const = default;
};

enum class GateKind {
    H, X, Y, Z, S, Sdg, T, Tdg,
    RX, RY, RZ, U,
    CX, CZ, CCX, SWAP,
};

std::size_t gate_arity(GateKind kind);
std::size_t gate_param_count(GateKind kind);
std::string_view gate_name(GateKind kind);
std::optional<GateKind> gate_from_name(std::string_view name);

struct Gate {
    GateKind kind{};
    std::vector<double> params;
    std::vector<QubitRef> qubits;
    bool operator==(const Gate&) const = default;
};

Gate make_gate(GateKind kind, std::vector<QubitRef> qubits, std::vector<double> params = {});

struct Measure {
    QubitRef qubit;
    ClbitRef clbit;
    bool operator==(const Measure&) const = default;
};

struct Reset {
    QubitRef qubit;
    bool operator==(const Reset&) const = default;
};

/// Single gate applied iff a classical bit equals the expected value.
struct CondGate {
    ClbitRef clbit;
    bool expected{};
    Gate gate;
    bool operator==(const CondGate&) const = default;
};

struct Branch {
    std::vector<Gate> ops;          // static gates only
    double prob{};
    std::vector<std::pair<ClbitRef, bool>> clbit_writes;
    bool operator==(const Branch&) const = default;
};

/// Compile-time stochastic instruction: per shot exactly one branch is
/// instantiated according to the branch probabilities.
struct ProbGate {
    std::vector<QubitRef> qubits;
    std::vector<Branch> branches;
    bool operator==(const ProbGate&) const = default;
};

ProbGate make_prob_gate(std::vector<QubitRef> qubits, std::vector<Branch> branches);

using Instruction = std::variant<Gate, Measure, Reset, CondGate, ProbGate>;

struct Circuit {
    std::size_t n_qubits{};
    std::size_t n_clbits{};
    std::vector<Instruction> instructions;
    bool operator==(const Circuit&) const = default;
};

/// Throws WireError / InvalidParameter / InvalidDistribution on a malformed circuit.
void validate(const Circuit& circuit);

/// Unitary matrix of a gate kind, dimension 2^arity. Qubit 0 of the gate is
/// the least significant bit of the matrix index.
Eigen::MatrixXcd unitary_of(GateKind kind, const std::vector<double>& params = {});
Eigen::MatrixXcd unitary_of(const Gate& gate);

/// X gates on every qubit i where bit i of the mask is '1'. Mask character 0
/// addresses qubit 0.
std::vector<Gate> parallel_x(const std::string& mask);
/// Same, with mask position p mapped onto qubits[p].
std::vector<Gate> parallel_x(const std::string& mask, const std::vector<QubitRef>& qubits);

struct DynamicOpCounts {
    std::size_t n_measurements{};
    std::size_t n_resets{};
    std::size_t n_static_gates{};   // Gate and CondGate instructions
    bool operator==(const DynamicOpCounts&) const = default;
};

DynamicOpCounts count_dynamic_ops(const Circuit& circuit);

struct CompiledShot {
    Circuit circuit;   // no ProbGate instructions remain
    std::vector<std::pair<ClbitRef, bool>> presets;
};

/// Resolves every probabilistic gate into one of its branches, drawn per the
/// branch probabilities. Branch clbit writes are returned as compile-time
/// presets on the same classical wires.
CompiledShot compile_shot(const Circuit& circuit, std::mt19937_64& rng);

}  // namespace dyncirc
