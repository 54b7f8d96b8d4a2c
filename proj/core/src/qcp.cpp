#include "dyncirc/qcp.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "dyncirc/sim.hpp"

namespace dyncirc {
namespace qcp {

namespace {

Eigen::VectorXcd to_dense(const AmplitudeTable& table) {
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(std::int64_t{1} << table.qubits.size());
    for (const auto& [key, amp] : table.amps) v[static_cast<std::int64_t>(key)] = amp;
    return v;
}

AmplitudeTable from_dense(std::vector<std::uint32_t> qubits, const Eigen::VectorXcd& v,
                          double prune_tol) {
    AmplitudeTable table;
    table.qubits = std::move(qubits);
    double norm = v.norm();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        cplx a = v[i] / norm;
        if (std::abs(a) >= prune_tol) table.amps[static_cast<std::uint64_t>(i)] = a;
    }
    return table;
}

}  // namespace

std::optional<std::size_t> AmplitudeTable::position_of(std::uint32_t qubit) const {
    auto it = std::find(qubits.begin(), qubits.end(), qubit);
    if (it == qubits.end()) return std::nullopt;
    return static_cast<std::size_t>(it - qubits.begin());
}

std::size_t state_size(const AmplitudeTable& table) {
    std::size_t count = 0;
    for (const auto& [key, amp] : table.amps) {
        (void)key;
        if (std::abs(amp) >= kAmpPruneTol) ++count;
    }
    return count;
}

std::vector<AmplitudeTable> try_split(const AmplitudeTable& table, double rank_tol,
                                      double prune_tol) {
    if (table.qubits.size() <= 1) return {table};
    const std::size_t k = table.qubits.size();
    const std::uint64_t half = std::uint64_t{1} << (k - 1);
    const Eigen::VectorXcd v = to_dense(table);

    for (std::size_t p = 0; p < k; ++p) {
        // Reshape into 2 x 2^(k-1): row = bit p, column = remaining bits packed.
        Eigen::MatrixXcd m(2, static_cast<Eigen::Index>(half));
        const std::uint64_t low_mask = (std::uint64_t{1} << p) - 1;
        for (std::uint64_t rest = 0; rest < half; ++rest) {
            const std::uint64_t base = (rest & low_mask) | ((rest & ~low_mask) << 1);
            m(0, static_cast<Eigen::Index>(rest)) = v[static_cast<std::int64_t>(base)];
            m(1, static_cast<Eigen::Index>(rest)) =
                v[static_cast<std::int64_t>(base | (std::uint64_t{1} << p))];
        }
        Eigen::Matrix2cd gram = m * m.adjoint();
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(gram);
        const double sigma2 = std::sqrt(std::max(0.0, es.eigenvalues()(0)));
        if (sigma2 >= rank_tol) continue;

        // Rank 1: factor qubit p out and recurse on the remainder.
        Eigen::Vector2cd u = es.eigenvectors().col(1);
        Eigen::VectorXcd rest_vec = (u.adjoint() * m).transpose();
        rest_vec.normalize();

        AmplitudeTable qubit_table;
        qubit_table.qubits = {table.qubits[p]};
        for (int b = 0; b < 2; ++b) {
            if (std::abs(u(b)) >= prune_tol) qubit_table.amps[static_cast<std::uint64_t>(b)] = u(b);
        }

        std::vector<std::uint32_t> rest_qubits;
        for (std::size_t q = 0; q < k; ++q) {
            if (q != p) rest_qubits.push_back(table.qubits[q]);
        }
        std::vector<AmplitudeTable> out = {std::move(qubit_table)};
        for (auto& sub : try_split(from_dense(std::move(rest_qubits), rest_vec, prune_tol),
                                   rank_tol, prune_tol)) {
            out.push_back(std::move(sub));
        }
        return out;
    }
    return {table};
}

UnionTable::UnionTable(std::size_t n_qubits, const QcpConfig& config) : config_(config) {
    group_of_.resize(n_qubits);
    groups_.resize(n_qubits);
    for (std::size_t q = 0; q < n_qubits; ++q) {
        group_of_[q] = static_cast<std::uint32_t>(q);
        AmplitudeTable table;
        table.qubits = {static_cast<std::uint32_t>(q)};
        table.amps[0] = 1.0;
        groups_[q].qubits = {static_cast<std::uint32_t>(q)};
        groups_[q].state.table = std::move(table);
    }
}

const AbstractState& UnionTable::state_of(std::uint32_t qubit) const {
    return groups_[group_of_[qubit]].state;
}

std::vector<std::uint32_t> UnionTable::group_members(std::uint32_t qubit) const {
    return groups_[group_of_[qubit]].qubits;
}

std::vector<std::pair<std::vector<std::uint32_t>, const AbstractState*>> UnionTable::groups() const {
    std::vector<std::pair<std::vector<std::uint32_t>, const AbstractState*>> out;
    std::set<std::uint32_t> seen;
    for (std::uint32_t q = 0; q < group_of_.size(); ++q) {
        std::uint32_t gid = group_of_[q];
        if (seen.insert(gid).second) {
            out.emplace_back(groups_[gid].qubits, &groups_[gid].state);
        }
    }
    return out;
}

std::uint32_t UnionTable::merge(const std::vector<std::uint32_t>& qubits) {
    std::set<std::uint32_t> gids;
    for (auto q : qubits) gids.insert(group_of_[q]);
    if (gids.size() == 1) return *gids.begin();

    std::vector<std::uint32_t> merged_qubits;
    bool any_top = false;
    for (auto gid : gids) {
        const auto& g = groups_[gid];
        merged_qubits.insert(merged_qubits.end(), g.qubits.begin(), g.qubits.end());
        if (g.state.is_top()) any_top = true;
    }
    std::sort(merged_qubits.begin(), merged_qubits.end());

    Group merged;
    merged.qubits = merged_qubits;
    if (any_top || merged_qubits.size() > config_.n_max) {
        merged.state.table.reset();
    } else {
        // Tensor product of the member tables, re-canonicalized to ascending order.
        AmplitudeTable table;
        table.qubits = merged_qubits;
        table.amps[0] = 1.0;
        for (auto gid : gids) {
            const AmplitudeTable& part = *groups_[gid].state.table;
            std::vector<std::size_t> pos(part.qubits.size());
            for (std::size_t p = 0; p < part.qubits.size(); ++p) {
                pos[p] = static_cast<std::size_t>(
                    std::find(merged_qubits.begin(), merged_qubits.end(), part.qubits[p]) -
                    merged_qubits.begin());
            }
            std::map<std::uint64_t, cplx> next;
            for (const auto& [key, amp] : table.amps) {
                for (const auto& [pkey, pamp] : part.amps) {
                    std::uint64_t nk = key;
                    for (std::size_t p = 0; p < pos.size(); ++p) {
                        if (pkey & (std::uint64_t{1} << p)) nk |= std::uint64_t{1} << pos[p];
                    }
                    next[nk] = amp * pamp;
                }
            }
            table.amps = std::move(next);
        }
        merged.state.table = std::move(table);
    }

    std::uint32_t target = *gids.begin();
    groups_[target] = std::move(merged);
    for (auto q : groups_[target].qubits) group_of_[q] = target;
    return target;
}

void UnionTable::split_group(std::uint32_t gid) {
    Group& g = groups_[gid];
    if (g.state.is_top() || g.qubits.size() <= 1) return;
    auto parts = try_split(*g.state.table, config_.rank_tol, config_.prune_tol);
    if (parts.size() <= 1) return;
    for (auto& part : parts) {
        std::uint32_t ngid = part.qubits.front();  // reuse the qubit's slot as group id
        Group ng;
        ng.qubits = part.qubits;
        ng.state.table = std::move(part);
        groups_[ngid] = std::move(ng);
        for (auto q : groups_[ngid].qubits) group_of_[q] = ngid;
    }
}

void UnionTable::detach_as_zero(std::uint32_t qubit) {
    std::uint32_t gid = group_of_[qubit];
    Group& g = groups_[gid];
    std::erase(g.qubits, qubit);

    Group fresh;
    fresh.qubits = {qubit};
    AmplitudeTable table;
    table.qubits = {qubit};
    table.amps[0] = 1.0;
    fresh.state.table = std::move(table);

    if (g.qubits.empty()) {
        groups_[gid] = std::move(fresh);
        return;
    }
    // Keep the remainder where it is, move the fresh group into the qubit's slot.
    if (gid == qubit) {
        std::uint32_t ngid = g.qubits.front();
        groups_[ngid] = std::move(g);
        for (auto q : groups_[ngid].qubits) group_of_[q] = ngid;
    }
    groups_[qubit] = std::move(fresh);
    group_of_[qubit] = qubit;
}

void UnionTable::apply_gate(const Gate& gate) {
    std::vector<std::uint32_t> qubits;
    for (auto q : gate.qubits) qubits.push_back(q.index);
    std::uint32_t gid = merge(qubits);
    Group& g = groups_[gid];
    if (g.state.is_top()) return;

    AmplitudeTable& table = *g.state.table;
    Eigen::VectorXcd v = to_dense(table);
    Gate local = gate;
    for (std::size_t p = 0; p < gate.qubits.size(); ++p) {
        local.qubits[p].index =
            static_cast<std::uint32_t>(*table.position_of(gate.qubits[p].index));
    }
    apply_gate_to_state(v, local);
    table = from_dense(table.qubits, v, config_.prune_tol);
    split_group(gid);
}

std::optional<bool> UnionTable::apply_measure(std::uint32_t qubit) {
    std::uint32_t gid = group_of_[qubit];
    Group& g = groups_[gid];
    if (g.state.is_top()) return std::nullopt;
    const AmplitudeTable& table = *g.state.table;
    const std::size_t pos = *table.position_of(qubit);
    const std::uint64_t bit = std::uint64_t{1} << pos;
    std::optional<bool> outcome;
    for (const auto& [key, amp] : table.amps) {
        (void)amp;
        bool value = (key & bit) != 0;
        if (!outcome) {
            outcome = value;
        } else if (*outcome != value) {
            g.state.table.reset();  // both outcomes possible: no sound single post-state
            return std::nullopt;
        }
    }
    return outcome;
}

void UnionTable::apply_reset(std::uint32_t qubit) {
    std::uint32_t gid = group_of_[qubit];
    Group& g = groups_[gid];
    if (g.state.is_top()) {
        // The reset output on this wire is exactly |0>, independent of the rest.
        detach_as_zero(qubit);
        return;
    }
    AmplitudeTable& table = *g.state.table;
    const std::size_t pos = *table.position_of(qubit);
    const std::uint64_t bit = std::uint64_t{1} << pos;

    std::map<std::uint64_t, cplx> zero_branch, one_branch;
    for (const auto& [key, amp] : table.amps) {
        if (key & bit) {
            one_branch[key & ~bit] = amp;
        } else {
            zero_branch[key] = amp;
        }
    }

    auto keep = [&](std::map<std::uint64_t, cplx> amps) {
        double norm = 0.0;
        for (const auto& [key, amp] : amps) {
            (void)key;
            norm += std::norm(amp);
        }
        norm = std::sqrt(norm);
        for (auto& [key, amp] : amps) {
            (void)key;
            amp /= norm;
        }
        table.amps = std::move(amps);
        split_group(gid);
    };

    if (one_branch.empty()) {
        return;  // already |0> on this wire
    }
    if (zero_branch.empty()) {
        keep(std::move(one_branch));
        return;
    }
    if (config_.strict_reset) {
        // The channel output is pure only when the two branches are proportional.
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
            g.state.table.reset();  // mixed output
            return;
        }
    }
    keep(std::move(zero_branch));
}

void UnionTable::make_top(const std::vector<QubitRef>& qubits) {
    for (auto q : qubits) groups_[group_of_[q.index]].state.table.reset();
}

AnalysisResult run(const Circuit& circuit, const QcpConfig& config) {
    validate(circuit);
    UnionTable table(circuit.n_qubits, config);
    // Classical bits start at 0 and stay known until a nondeterministic write.
    std::vector<std::optional<bool>> clbit(circuit.n_clbits, false);
    std::vector<SiteRecord> sites;

    for (std::size_t idx = 0; idx < circuit.instructions.size(); ++idx) {
        const Instruction& instr = circuit.instructions[idx];
        if (const auto* g = std::get_if<Gate>(&instr)) {
            table.apply_gate(*g);
        } else if (const auto* m = std::get_if<Measure>(&instr)) {
            SiteRecord rec;
            rec.instr_index = idx;
            rec.is_measure = true;
            rec.input_state = table.state_of(m->qubit.index);
            if (!rec.input_state.is_top()) {
                rec.qubit_pos = *rec.input_state.table->position_of(m->qubit.index);
            }
            sites.push_back(std::move(rec));
            clbit[m->clbit.index] = table.apply_measure(m->qubit.index);
        } else if (const auto* r = std::get_if<Reset>(&instr)) {
            SiteRecord rec;
            rec.instr_index = idx;
            rec.is_measure = false;
            rec.input_state = table.state_of(r->qubit.index);
            if (!rec.input_state.is_top()) {
                rec.qubit_pos = *rec.input_state.table->position_of(r->qubit.index);
            }
            sites.push_back(std::move(rec));
            table.apply_reset(r->qubit.index);
        } else if (const auto* cg = std::get_if<CondGate>(&instr)) {
            const auto& known = clbit[cg->clbit.index];
            if (known.has_value()) {
                if (*known == cg->expected) table.apply_gate(cg->gate);
            } else {
                table.make_top(cg->gate.qubits);
            }
        } else if (const auto* pg = std::get_if<ProbGate>(&instr)) {
            table.make_top(pg->qubits);
            // A clbit written identically by every branch stays known.
            std::set<std::uint32_t> written;
            for (const auto& b : pg->branches) {
                for (const auto& [c, bit] : b.clbit_writes) {
                    (void)bit;
                    written.insert(c.index);
                }
            }
            for (auto c : written) {
                std::optional<bool> common;
                bool consistent = true;
                for (const auto& b : pg->branches) {
                    std::optional<bool> value;
                    for (const auto& [wc, bit] : b.clbit_writes) {
                        if (wc.index == c) value = bit;
                    }
                    if (!value.has_value()) {
                        consistent = false;  // some branch leaves the clbit untouched
                        break;
                    }
                    if (!common) {
                        common = value;
                    } else if (*common != *value) {
                        consistent = false;
                        break;
                    }
                }
                clbit[c] = consistent ? common : std::nullopt;
            }
        }
    }
    return AnalysisResult{std::move(sites), std::move(table)};
}

}  // namespace qcp
}  // namespace dyncirc
