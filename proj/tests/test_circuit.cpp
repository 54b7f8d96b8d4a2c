#include <doctest.h>

#include <numbers>

#include "dyncirc/circuit.hpp"
#include "dyncirc/sim.hpp"
#include "test_util.hpp"

using namespace dyncirc;

namespace {

Circuit fig1_circuit() {
    // X(0.4); Y(0.6); Z on one wire.
    Circuit c;
    c.n_qubits = 1;
    auto prob_of = [](GateKind kind, double p) {
        Branch taken{{make_gate(kind, {QubitRef{0}})}, p, {}};
        Branch skipped{{}, 1.0 - p, {}};
        return make_prob_gate({QubitRef{0}}, {taken, skipped});
    };
    c.instructions.emplace_back(prob_of(GateKind::X, 0.4));
    c.instructions.emplace_back(prob_of(GateKind::Y, 0.6));
    c.instructions.emplace_back(make_gate(GateKind::Z, {QubitRef{0}}));
    return c;
}

}  // namespace

TEST_CASE("unitary_of basic matrices") {
    Eigen::MatrixXcd x = unitary_of(GateKind::X);
    CHECK(x(0, 0) == cplx(0.0));
    CHECK(x(0, 1) == cplx(1.0));
    CHECK(x(1, 0) == cplx(1.0));
    CHECK(x(1, 1) == cplx(0.0));

    Eigen::MatrixXcd h = unitary_of(GateKind::H);
    CHECK(((h * h) - Eigen::MatrixXcd::Identity(2, 2)).norm() < 1e-12);
}

TEST_CASE("all gate kinds are unitary") {
    for (int k = 0; k <= static_cast<int>(GateKind::SWAP); ++k) {
        GateKind kind = static_cast<GateKind>(k);
        std::vector<double> params(gate_param_count(kind), 0.731);
        Eigen::MatrixXcd u = unitary_of(kind, params);
        CHECK((u * u.adjoint() - Eigen::MatrixXcd::Identity(u.rows(), u.cols())).norm() < 1e-12);
    }
}

TEST_CASE("unitary_of rejects non-finite parameters") {
    CHECK_THROWS_AS(unitary_of(GateKind::RX, {std::nan("")}), InvalidParameter);
    CHECK_THROWS_AS(unitary_of(GateKind::RZ, {}), InvalidParameter);
}

TEST_CASE("ry/rz composition reaches |1> from |0> up to global phase") {
    // The end state of the compressed oracle wire: RY(-pi) then RZ(-pi) on |0>.
    using std::numbers::pi;
    Eigen::Vector2cd v(1.0, 0.0);
    Eigen::VectorXcd state = unitary_of(GateKind::RZ, {-pi}) * unitary_of(GateKind::RY, {-pi}) * v;
    Eigen::VectorXcd one(2);
    one << 0.0, 1.0;
    CHECK(testutil::fidelity(state, one) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("parallel_x places X on mask-1 positions") {
    auto gates = parallel_x("101");
    REQUIRE(gates.size() == 2);
    CHECK(gates[0].qubits[0].index == 0);
    CHECK(gates[1].qubits[0].index == 2);

    CHECK(parallel_x("000").empty());
}

TEST_CASE("parallel_x acts as bitwise xor on basis states") {
    Circuit c;
    c.n_qubits = 2;
    for (auto& g : parallel_x("11")) c.instructions.emplace_back(g);
    Eigen::VectorXcd state = testutil::run_static(c);
    CHECK(std::abs(state[3] - cplx(1.0)) < 1e-12);

    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        std::size_t n = 1 + rng() % 4;
        std::string mask(n, '0');
        std::uint64_t m = rng() & ((1u << n) - 1);
        for (std::size_t p = 0; p < n; ++p) {
            if (m & (1u << p)) mask[p] = '1';
        }
        std::uint64_t basis = rng() & ((1u << n) - 1);
        Eigen::VectorXcd state2 = Eigen::VectorXcd::Zero(std::int64_t{1} << n);
        state2[static_cast<std::int64_t>(basis)] = 1.0;
        for (auto& g : parallel_x(mask)) apply_gate_to_state(state2, g);
        CHECK(std::abs(state2[static_cast<std::int64_t>(basis ^ m)] - cplx(1.0)) < 1e-12);
    }
}

TEST_CASE("count_dynamic_ops by variant") {
    Circuit c;
    c.n_qubits = 3;
    c.n_clbits = 1;
    c.instructions.emplace_back(make_gate(GateKind::H, {QubitRef{0}}));
    c.instructions.emplace_back(Measure{QubitRef{0}, ClbitRef{0}});
    c.instructions.emplace_back(CondGate{ClbitRef{0}, true, make_gate(GateKind::Y, {QubitRef{1}})});
    c.instructions.emplace_back(make_gate(GateKind::H, {QubitRef{2}}));
    c.instructions.emplace_back(Reset{QubitRef{2}});
    auto counts = count_dynamic_ops(c);
    CHECK(counts.n_measurements == 1);
    CHECK(counts.n_resets == 1);
    CHECK(counts.n_static_gates == 3);

    CHECK(count_dynamic_ops(Circuit{}) == DynamicOpCounts{});
}

TEST_CASE("probabilistic gate constructor enforces the distribution") {
    Branch a{{}, 0.5, {}};
    Branch b{{}, 0.4, {}};
    CHECK_THROWS_AS(make_prob_gate({QubitRef{0}}, {a, b}), InvalidDistribution);
}

TEST_CASE("compile_shot picks exactly one branch per probabilistic gate") {
    Circuit c = fig1_circuit();
    std::mt19937_64 rng(123);
    for (int shot = 0; shot < 50; ++shot) {
        CompiledShot s = compile_shot(c, rng);
        // Only gate instructions remain, ending with the fixed Z.
        for (const auto& instr : s.circuit.instructions) {
            CHECK(std::holds_alternative<Gate>(instr));
        }
        std::size_t n = s.circuit.instructions.size();
        REQUIRE(n >= 1);
        CHECK(std::get<Gate>(s.circuit.instructions[n - 1]).kind == GateKind::Z);
        CHECK(n <= 3);  // XYZ, XZ, YZ or Z
    }
}

TEST_CASE("compile_shot with a single certain branch") {
    Circuit c;
    c.n_qubits = 1;
    c.n_clbits = 1;
    Branch only{{make_gate(GateKind::X, {QubitRef{0}})}, 1.0, {{ClbitRef{0}, true}}};
    c.instructions.emplace_back(make_prob_gate({QubitRef{0}}, {only}));
    std::mt19937_64 rng(9);
    for (int shot = 0; shot < 10; ++shot) {
        CompiledShot s = compile_shot(c, rng);
        REQUIRE(s.circuit.instructions.size() == 1);
        CHECK(std::get<Gate>(s.circuit.instructions[0]).kind == GateKind::X);
        REQUIRE(s.presets.size() == 1);
        CHECK(s.presets[0] == std::make_pair(ClbitRef{0}, true));
    }
}

TEST_CASE("compile_shot branch frequencies follow the distribution") {
    // Four-branch extended gate at probabilities 0.1 / 0.2 / 0.3 / 0.4.
    Circuit c;
    c.n_qubits = 2;
    std::vector<Branch> branches = {
        {{make_gate(GateKind::H, {QubitRef{0}})}, 0.1, {}},
        {{make_gate(GateKind::X, {QubitRef{1}})}, 0.2, {}},
        {{make_gate(GateKind::Z, {QubitRef{0}}), make_gate(GateKind::Z, {QubitRef{1}})}, 0.3, {}},
        {{make_gate(GateKind::X, {QubitRef{0}}), make_gate(GateKind::Y, {QubitRef{1}})}, 0.4, {}},
    };
    c.instructions.emplace_back(make_prob_gate({QubitRef{0}, QubitRef{1}}, branches));

    const std::size_t shots = 100000;
    std::vector<std::size_t> hits(4, 0);
    std::mt19937_64 rng(2024);
    for (std::size_t shot = 0; shot < shots; ++shot) {
        CompiledShot s = compile_shot(c, rng);
        const auto& first = std::get<Gate>(s.circuit.instructions[0]);
        if (first.kind == GateKind::H) {
            ++hits[0];
        } else if (first.kind == GateKind::X && first.qubits[0].index == 1) {
            ++hits[1];
        } else if (first.kind == GateKind::Z) {
            ++hits[2];
        } else {
            ++hits[3];
        }
    }
    const double expected[] = {0.1, 0.2, 0.3, 0.4};
    for (int i = 0; i < 4; ++i) {
        double freq = static_cast<double>(hits[i]) / shots;
        CHECK(std::abs(freq - expected[i]) < 0.01);
        // 5-sigma binomial bound as well
        double sigma = std::sqrt(expected[i] * (1 - expected[i]) / shots);
        CHECK(std::abs(freq - expected[i]) < 5 * sigma);
    }
}

TEST_CASE("compile_shot is reproducible under seed") {
    Circuit c = fig1_circuit();
    std::mt19937_64 a(77), b(77);
    for (int shot = 0; shot < 20; ++shot) {
        CHECK(compile_shot(c, a).circuit == compile_shot(c, b).circuit);
    }
}

TEST_CASE("validate rejects malformed circuits") {
    Circuit c;
    c.n_qubits = 1;
    c.instructions.emplace_back(Gate{GateKind::CX, {}, {QubitRef{0}, QubitRef{0}}});
    CHECK_THROWS_AS(validate(c), WireError);

    Circuit d;
    d.n_qubits = 1;
    d.instructions.emplace_back(Gate{GateKind::X, {}, {QubitRef{3}}});
    CHECK_THROWS_AS(validate(d), WireError);
}
