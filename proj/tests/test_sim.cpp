#include <doctest.h>

#include <cmath>
#include <set>

#include "dyncirc/circuit.hpp"
#include "dyncirc/sim.hpp"
#include "test_util.hpp"

using namespace dyncirc;

namespace {

Circuit bell_measure_both() {
    Circuit c;
    c.n_qubits = 2;
    c.n_clbits = 2;
    c.instructions.emplace_back(make_gate(GateKind::H, {QubitRef{0}}));
    c.instructions.emplace_back(make_gate(GateKind::CX, {QubitRef{0}, QubitRef{1}}));
    c.instructions.emplace_back(Measure{QubitRef{0}, ClbitRef{0}});
    c.instructions.emplace_back(Measure{QubitRef{1}, ClbitRef{1}});
    return c;
}

}  // namespace

TEST_CASE("born rule on a plain H measurement") {
    Circuit c;
    c.n_qubits = 1;
    c.n_clbits = 1;
    c.instructions.emplace_back(make_gate(GateKind::H, {QubitRef{0}}));
    c.instructions.emplace_back(Measure{QubitRef{0}, ClbitRef{0}});
    auto dist = distribution(c);
    REQUIRE(dist.size() == 2);
    CHECK(dist.at("0") == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(dist.at("1") == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("bell measurement is perfectly correlated") {
    auto dist = distribution(bell_measure_both());
    REQUIRE(dist.size() == 2);
    CHECK(dist.at("00") == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(dist.at("11") == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("biased rotation measurement") {
    // RY(theta)|0> measures 1 with probability sin^2(theta/2).
    double theta = 1.234;
    Circuit c;
    c.n_qubits = 1;
    c.n_clbits = 1;
    c.instructions.emplace_back(make_gate(GateKind::RY, {QubitRef{0}}, {theta}));
    c.instructions.emplace_back(Measure{QubitRef{0}, ClbitRef{0}});
    auto dist = distribution(c);
    double p1 = std::sin(theta / 2) * std::sin(theta / 2);
    CHECK(dist.at("1") == doctest::Approx(p1).epsilon(1e-12));
    CHECK(dist.at("0") == doctest::Approx(1 - p1).epsilon(1e-12));
}

TEST_CASE("probabilistic gate enumeration yields the branch mixture") {
    // Two stacked two-branch gates: applied/skipped at 0.4 and 0.6.
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

    auto branches = enumerate(c);
    REQUIRE(branches.size() == 4);
    std::multiset<double> probs;
    double total = 0.0;
    for (const auto& b : branches) {
        probs.insert(std::round(b.probability * 100) / 100);
        total += b.probability;
        CHECK(std::abs(b.state.norm() - 1.0) < 1e-9);
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(probs == std::multiset<double>{0.16, 0.24, 0.24, 0.36});
}

TEST_CASE("reset acts as the exact two-outcome channel") {
    // H then reset: both Kraus branches land on |0>, each with weight 1/2.
    Circuit c;
    c.n_qubits = 1;
    c.instructions.emplace_back(make_gate(GateKind::H, {QubitRef{0}}));
    c.instructions.emplace_back(Reset{QubitRef{0}});
    auto branches = enumerate(c);
    REQUIRE(branches.size() == 2);
    for (const auto& b : branches) {
        CHECK(b.probability == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(std::abs(b.state[0] - cplx(1.0)) < 1e-9);
        CHECK(std::abs(b.state[1]) < 1e-12);
    }
}

TEST_CASE("reset of a deterministic wire does not branch") {
    Circuit c;
    c.n_qubits = 1;
    c.instructions.emplace_back(make_gate(GateKind::X, {QubitRef{0}}));
    c.instructions.emplace_back(Reset{QubitRef{0}});
    auto branches = enumerate(c);
    REQUIRE(branches.size() == 1);
    CHECK(branches[0].probability == doctest::Approx(1.0));
    CHECK(std::abs(branches[0].state[0] - cplx(1.0)) < 1e-12);
}

TEST_CASE("conditional gates follow the trajectory clbits") {
    // Measure H, conditionally flip the second wire, measure it.
    Circuit c;
    c.n_qubits = 2;
    c.n_clbits = 2;
    c.instructions.emplace_back(make_gate(GateKind::H, {QubitRef{0}}));
    c.instructions.emplace_back(Measure{QubitRef{0}, ClbitRef{0}});
    c.instructions.emplace_back(CondGate{ClbitRef{0}, true, make_gate(GateKind::X, {QubitRef{1}})});
    c.instructions.emplace_back(Measure{QubitRef{1}, ClbitRef{1}});
    auto dist = distribution(c);
    REQUIRE(dist.size() == 2);
    CHECK(dist.at("00") == doctest::Approx(0.5));
    CHECK(dist.at("11") == doctest::Approx(0.5));
}

TEST_CASE("prob gate clbit writes enter the outcome string") {
    Circuit c;
    c.n_qubits = 1;
    c.n_clbits = 1;
    Branch w1{{}, 0.3, {{ClbitRef{0}, true}}};
    Branch w0{{}, 0.7, {{ClbitRef{0}, false}}};
    c.instructions.emplace_back(make_prob_gate({QubitRef{0}}, {w1, w0}));
    auto dist = distribution(c);
    CHECK(dist.at("1") == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(dist.at("0") == doctest::Approx(0.7).epsilon(1e-12));
}

TEST_CASE("enumeration limits are enforced") {
    Circuit c;
    c.n_qubits = 15;
    CHECK_THROWS_AS(enumerate(c), TooLarge);

    Circuit d;
    d.n_qubits = 1;
    d.n_clbits = 8;
    for (std::uint32_t i = 0; i < 8; ++i) {
        d.instructions.emplace_back(make_gate(GateKind::H, {QubitRef{0}}));
        d.instructions.emplace_back(Measure{QubitRef{0}, ClbitRef{i}});
    }
    EnumLimits tight;
    tight.max_branches = 16;
    CHECK_THROWS_AS(enumerate(d, tight), TooLarge);
}

TEST_CASE("tvd basics") {
    OutcomeDistribution a{{"0", 0.5}, {"1", 0.5}};
    OutcomeDistribution b{{"0", 0.75}, {"1", 0.25}};
    CHECK(tvd(a, a) == doctest::Approx(0.0));
    CHECK(tvd(a, b) == doctest::Approx(0.25));
    OutcomeDistribution c{{"0", 1.0}};
    CHECK(tvd(a, c) == doctest::Approx(0.5));
}

TEST_CASE("sampling matches enumeration within five sigma") {
    Circuit c = bell_measure_both();
    const std::size_t shots = 40000;
    auto emp = sample(c, shots, 31);
    auto exact = distribution(c);
    for (const auto& [key, p] : exact) {
        double freq = emp.count(key) ? emp.at(key) : 0.0;
        double sigma = std::sqrt(p * (1 - p) / shots);
        CHECK(std::abs(freq - p) < 5 * sigma + 1e-12);
    }
    // No stray outcomes.
    for (const auto& [key, p] : emp) CHECK(exact.count(key) == 1);
}

TEST_CASE("sampling a probabilistic circuit matches enumeration") {
    Circuit c;
    c.n_qubits = 1;
    c.n_clbits = 2;
    Branch flip{{make_gate(GateKind::X, {QubitRef{0}})}, 0.35, {{ClbitRef{0}, true}}};
    Branch stay{{}, 0.65, {{ClbitRef{0}, false}}};
    c.instructions.emplace_back(make_prob_gate({QubitRef{0}}, {flip, stay}));
    c.instructions.emplace_back(make_gate(GateKind::H, {QubitRef{0}}));
    c.instructions.emplace_back(Measure{QubitRef{0}, ClbitRef{1}});
    const std::size_t shots = 40000;
    auto emp = sample(c, shots, 17);
    auto exact = distribution(c);
    CHECK(tvd(emp, exact) < 0.02);
}

TEST_CASE("sample is deterministic under seed") {
    Circuit c = bell_measure_both();
    auto a = sample(c, 500, 99);
    auto b = sample(c, 500, 99);
    CHECK(a == b);
    auto d = sample(c, 500, 100);
    CHECK(a != d);  // virtually certain with 500 shots
}

TEST_CASE("apply_gate_to_state agrees with the kronecker-built matrix") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 30; ++trial) {
        std::size_t n = 2 + rng() % 3;
        Circuit c = testutil::random_static_circuit(n, 10, rng);
        Eigen::VectorXcd fast = testutil::run_static(c);

        // Oracle: expand each gate to the full 2^n matrix by explicit index
        // arithmetic and multiply.
        Eigen::Index dim = Eigen::Index{1} << n;
        Eigen::VectorXcd slow = Eigen::VectorXcd::Zero(dim);
        slow[0] = 1.0;
        for (const auto& instr : c.instructions) {
            const auto& g = std::get<Gate>(instr);
            Eigen::MatrixXcd u = unitary_of(g);
            Eigen::MatrixXcd full = Eigen::MatrixXcd::Zero(dim, dim);
            std::size_t k = g.qubits.size();
            for (Eigen::Index col = 0; col < dim; ++col) {
                std::uint64_t sub = 0;
                for (std::size_t p = 0; p < k; ++p) {
                    if (col & (Eigen::Index{1} << g.qubits[p].index)) sub |= 1ull << p;
                }
                for (std::uint64_t r = 0; r < (1ull << k); ++r) {
                    Eigen::Index row = col;
                    for (std::size_t p = 0; p < k; ++p) {
                        Eigen::Index bit = Eigen::Index{1} << g.qubits[p].index;
                        row = (r & (1ull << p)) ? (row | bit) : (row & ~bit);
                    }
                    full(row, col) += u(static_cast<Eigen::Index>(r),
                                        static_cast<Eigen::Index>(sub));
                }
            }
            slow = full * slow;
        }
        CHECK((fast - slow).norm() < 1e-9);
    }
}

TEST_CASE("clbits_to_string puts clbit 0 first") {
    CHECK(clbits_to_string({true, false, true}) == "101");
    CHECK(clbits_to_string({}) == "");
}
