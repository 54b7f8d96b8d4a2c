#include "dyncirc/qasm.hpp"

#include <cctype>
#include <cstdio>
#include <optional>
#include <sstream>
#include <vector>

namespace dyncirc {
namespace qasm {

ParseError::ParseError(std::string message, SourceSpan s)
    : CircuitError("line " + std::to_string(s.line) + ":" + std::to_string(s.column) + ": " +
                   message),
      span(s) {}

namespace {

std::string fmt_double(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

void write_gate(std::ostringstream& os, const Gate& g) {
    os << gate_name(g.kind);
    if (!g.params.empty()) {
        os << '(';
        for (std::size_t i = 0; i < g.params.size(); ++i) {
            if (i) os << ',';
            os << fmt_double(g.params[i]);
        }
        os << ')';
    }
    os << ' ';
    for (std::size_t i = 0; i < g.qubits.size(); ++i) {
        if (i) os << ',';
        os << "q[" << g.qubits[i].index << ']';
    }
    os << ";\n";
}

}  // namespace

std::string serialize(const Circuit& circuit) {
    std::ostringstream os;
    os << "OPENQASM 2.0;\n";
    os << "include \"qelib1.inc\";\n";
    if (circuit.n_qubits > 0) os << "qreg q[" << circuit.n_qubits << "];\n";
    if (circuit.n_clbits > 0) os << "creg c[" << circuit.n_clbits << "];\n";
    for (const auto& instr : circuit.instructions) {
        if (const auto* g = std::get_if<Gate>(&instr)) {
            write_gate(os, *g);
        } else if (const auto* m = std::get_if<Measure>(&instr)) {
            os << "measure q[" << m->qubit.index << "] -> c[" << m->clbit.index << "];\n";
        } else if (const auto* r = std::get_if<Reset>(&instr)) {
            os << "reset q[" << r->qubit.index << "];\n";
        } else if (const auto* cg = std::get_if<CondGate>(&instr)) {
            os << "if (c[" << cg->clbit.index << "]==" << (cg->expected ? 1 : 0) << ") ";
            write_gate(os, cg->gate);
        } else if (const auto* pg = std::get_if<ProbGate>(&instr)) {
            os << "// @prob begin qubits=";
            for (std::size_t i = 0; i < pg->qubits.size(); ++i) {
                if (i) os << ',';
                os << "q[" << pg->qubits[i].index << ']';
            }
            os << '\n';
            for (const auto& b : pg->branches) {
                os << "// @prob branch p=" << fmt_double(b.prob) << " writes=";
                for (std::size_t i = 0; i < b.clbit_writes.size(); ++i) {
                    if (i) os << ',';
                    os << "c[" << b.clbit_writes[i].first.index << "]:"
                       << (b.clbit_writes[i].second ? 1 : 0);
                }
                os << '\n';
                for (const auto& g : b.ops) write_gate(os, g);
            }
            os << "// @prob end\n";
        }
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

namespace {

// Cursor over a single line; spans report 1-based line/column.
struct LineCursor {
    std::string_view text;
    std::size_t line;
    std::size_t pos = 0;

    SourceSpan here(std::size_t len = 1) const { return SourceSpan{line, pos + 1, pos + len}; }

    void skip_ws() {
        while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t')) ++pos;
    }
    bool done() {
        skip_ws();
        return pos >= text.size();
    }
    char peek() const { return pos < text.size() ? text[pos] : '\0'; }

    void expect(char c) {
        skip_ws();
        if (peek() != c) {
            throw ParseError(std::string("expected '") + c + "'", here());
        }
        ++pos;
    }
    bool accept(char c) {
        skip_ws();
        if (peek() == c) {
            ++pos;
            return true;
        }
        return false;
    }

    std::string ident() {
        skip_ws();
        std::size_t start = pos;
        while (pos < text.size() && (std::isalnum(static_cast<unsigned char>(text[pos])) ||
                                     text[pos] == '_' || text[pos] == '.')) {
            ++pos;
        }
        if (start == pos) throw ParseError("expected identifier", here());
        return std::string(text.substr(start, pos - start));
    }

    std::size_t number() {
        skip_ws();
        std::size_t start = pos;
        while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
        if (start == pos) throw ParseError("expected integer", here());
        std::size_t value = 0;
        for (std::size_t i = start; i < pos; ++i) value = value * 10 + (text[i] - '0');
        return value;
    }

    double real() {
        skip_ws();
        std::size_t start = pos;
        while (pos < text.size() &&
               (std::isdigit(static_cast<unsigned char>(text[pos])) || text[pos] == '.' ||
                text[pos] == '-' || text[pos] == '+' || text[pos] == 'e' || text[pos] == 'E')) {
            ++pos;
        }
        if (start == pos) throw ParseError("expected number", here());
        std::string tok(text.substr(start, pos - start));
        char* end = nullptr;
        double value = std::strtod(tok.c_str(), &end);
        if (end != tok.c_str() + tok.size()) throw ParseError("malformed number", here());
        return value;
    }
};

struct Parser {
    Circuit circuit;
    std::string qreg_name, creg_name;
    bool saw_qreg = false, saw_creg = false;

    // @prob block state
    bool in_prob = false;
    ProbGate prob;
    bool have_branch = false;
    SourceSpan prob_begin_span;

    QubitRef parse_qubit(LineCursor& c) {
        SourceSpan span = c.here();
        std::string name = c.ident();
        if (!saw_qreg || name != qreg_name) throw ParseError("unknown quantum register", span);
        c.expect('[');
        std::size_t idx = c.number();
        c.expect(']');
        if (idx >= circuit.n_qubits) {
            throw WireError("qubit index out of range at line " + std::to_string(c.line));
        }
        return QubitRef{static_cast<std::uint32_t>(idx)};
    }

    ClbitRef parse_clbit(LineCursor& c) {
        SourceSpan span = c.here();
        std::string name = c.ident();
        if (!saw_creg || name != creg_name) throw ParseError("unknown classical register", span);
        c.expect('[');
        std::size_t idx = c.number();
        c.expect(']');
        if (idx >= circuit.n_clbits) {
            throw WireError("clbit index out of range at line " + std::to_string(c.line));
        }
        return ClbitRef{static_cast<std::uint32_t>(idx)};
    }

    Gate parse_gate(LineCursor& c, const std::string& name, SourceSpan name_span) {
        auto kind = gate_from_name(name);
        if (!kind) throw UnsupportedGate("unsupported gate '" + name + "'", name_span);
        std::vector<double> params;
        if (c.accept('(')) {
            if (!c.accept(')')) {
                do {
                    params.push_back(c.real());
                } while (c.accept(','));
                c.expect(')');
            }
        }
        if (params.size() != gate_param_count(*kind)) {
            throw ParseError("wrong parameter count for '" + name + "'", name_span);
        }
        std::vector<QubitRef> qubits;
        do {
            qubits.push_back(parse_qubit(c));
        } while (c.accept(','));
        if (qubits.size() != gate_arity(*kind)) {
            throw ParseError("wrong operand count for '" + name + "'", name_span);
        }
        return make_gate(*kind, std::move(qubits), std::move(params));
    }

    void emit(Instruction instr, SourceSpan span) {
        if (in_prob) {
            Gate* g = std::get_if<Gate>(&instr);
            if (!g || !have_branch) {
                throw ParseError("only plain gates may appear inside a @prob branch", span);
            }
            prob.branches.back().ops.push_back(std::move(*g));
        } else {
            circuit.instructions.push_back(std::move(instr));
        }
    }

    void parse_prob_directive(LineCursor& c) {
        std::string word = c.ident();
        if (word == "begin") {
            if (in_prob) throw ParseError("nested @prob block", c.here());
            in_prob = true;
            have_branch = false;
            prob = ProbGate{};
            prob_begin_span = c.here();
            std::string key = c.ident();
            if (key != "qubits") throw ParseError("expected qubits= after @prob begin", c.here());
            c.expect('=');
            do {
                prob.qubits.push_back(parse_qubit(c));
            } while (c.accept(','));
        } else if (word == "branch") {
            if (!in_prob) throw ParseError("@prob branch outside a block", c.here());
            std::string key = c.ident();
            if (key != "p") throw ParseError("expected p= after @prob branch", c.here());
            c.expect('=');
            Branch b;
            b.prob = c.real();
            key = c.ident();
            if (key != "writes") throw ParseError("expected writes= in @prob branch", c.here());
            c.expect('=');
            if (!c.done()) {
                do {
                    ClbitRef cl = parse_clbit(c);
                    c.expect(':');
                    std::size_t bit = c.number();
                    if (bit > 1) throw ParseError("clbit write value must be 0 or 1", c.here());
                    b.clbit_writes.emplace_back(cl, bit == 1);
                } while (c.accept(','));
            }
            prob.branches.push_back(std::move(b));
            have_branch = true;
        } else if (word == "end") {
            if (!in_prob) throw ParseError("@prob end outside a block", c.here());
            in_prob = false;
            try {
                circuit.instructions.emplace_back(
                    make_prob_gate(std::move(prob.qubits), std::move(prob.branches)));
            } catch (const InvalidDistribution&) {
                throw ParseError("@prob branch probabilities do not sum to 1", prob_begin_span);
            }
        } else {
            throw ParseError("unknown @prob directive '" + word + "'", c.here());
        }
        if (!c.done()) throw ParseError("trailing input after @prob directive", c.here());
    }

    void parse_statement(LineCursor& c) {
        SourceSpan span = c.here();
        std::string word = c.ident();
        if (word == "OPENQASM") {
            c.real();
            c.expect(';');
        } else if (word == "include") {
            // consume the rest of the statement, the file itself is ignored
            while (!c.done() && c.peek() != ';') ++c.pos;
            c.expect(';');
        } else if (word == "qreg") {
            if (saw_qreg) throw ParseError("only a single qreg is supported", span);
            qreg_name = c.ident();
            c.expect('[');
            circuit.n_qubits = c.number();
            c.expect(']');
            c.expect(';');
            saw_qreg = true;
        } else if (word == "creg") {
            if (saw_creg) throw ParseError("only a single creg is supported", span);
            creg_name = c.ident();
            c.expect('[');
            circuit.n_clbits = c.number();
            c.expect(']');
            c.expect(';');
            saw_creg = true;
        } else if (word == "measure") {
            QubitRef qb = parse_qubit(c);
            c.expect('-');
            c.expect('>');
            ClbitRef cl = parse_clbit(c);
            c.expect(';');
            emit(Measure{qb, cl}, span);
        } else if (word == "reset") {
            QubitRef qb = parse_qubit(c);
            c.expect(';');
            emit(Reset{qb}, span);
        } else if (word == "if") {
            c.expect('(');
            ClbitRef cl = parse_clbit(c);
            c.expect('=');
            c.expect('=');
            std::size_t value = c.number();
            if (value > 1) throw ParseError("conditional compares a single bit", c.here());
            c.expect(')');
            SourceSpan gate_span = c.here();
            std::string gname = c.ident();
            Gate g = parse_gate(c, gname, gate_span);
            c.expect(';');
            emit(CondGate{cl, value == 1, std::move(g)}, span);
        } else if (word == "barrier") {
            while (!c.done() && c.peek() != ';') ++c.pos;
            c.expect(';');
        } else {
            Gate g = parse_gate(c, word, span);
            c.expect(';');
            emit(std::move(g), span);
        }
    }
};

}  // namespace

Circuit parse(std::string_view text) {
    Parser parser;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t eol = text.find('\n', start);
        std::string_view line =
            text.substr(start, eol == std::string_view::npos ? std::string_view::npos : eol - start);
        ++line_no;

        // Comments: either a @prob directive or ignored entirely.
        std::size_t comment = line.find("//");
        if (comment != std::string_view::npos) {
            std::string_view rest = line.substr(comment + 2);
            std::size_t at = rest.find_first_not_of(" \t");
            if (at != std::string_view::npos && rest.substr(at).starts_with("@prob")) {
                LineCursor c{rest, line_no, at + 5};
                parser.parse_prob_directive(c);
                if (eol == std::string_view::npos) break;
                start = eol + 1;
                continue;
            }
            line = line.substr(0, comment);
        }

        LineCursor c{line, line_no, 0};
        while (!c.done()) parser.parse_statement(c);

        if (eol == std::string_view::npos) break;
        start = eol + 1;
    }
    if (parser.in_prob) {
        throw ParseError("unterminated @prob block", parser.prob_begin_span);
    }
    validate(parser.circuit);
    return std::move(parser.circuit);
}

// ---------------------------------------------------------------------------
// JSON export
// ---------------------------------------------------------------------------

namespace {

nlohmann::json gate_to_json(const Gate& g) {
    nlohmann::json j;
    j["name"] = std::string(gate_name(g.kind));
    j["qubits"] = nlohmann::json::array();
    for (auto qb : g.qubits) j["qubits"].push_back(qb.index);
    j["params"] = g.params;
    return j;
}

Gate gate_from_json(const nlohmann::json& j) {
    auto kind = gate_from_name(j.at("name").get<std::string>());
    if (!kind) throw CircuitError("unknown gate name in JSON");
    std::vector<QubitRef> qubits;
    for (const auto& q : j.at("qubits")) qubits.push_back(QubitRef{q.get<std::uint32_t>()});
    return make_gate(*kind, std::move(qubits), j.at("params").get<std::vector<double>>());
}

}  // namespace

nlohmann::json to_json(const Circuit& circuit) {
    nlohmann::json j;
    j["n_qubits"] = circuit.n_qubits;
    j["n_clbits"] = circuit.n_clbits;
    auto& instrs = j["instructions"] = nlohmann::json::array();
    for (const auto& instr : circuit.instructions) {
        nlohmann::json ji;
        if (const auto* g = std::get_if<Gate>(&instr)) {
            ji = gate_to_json(*g);
            ji["type"] = "gate";
        } else if (const auto* m = std::get_if<Measure>(&instr)) {
            ji["type"] = "measure";
            ji["qubit"] = m->qubit.index;
            ji["clbit"] = m->clbit.index;
        } else if (const auto* r = std::get_if<Reset>(&instr)) {
            ji["type"] = "reset";
            ji["qubit"] = r->qubit.index;
        } else if (const auto* cg = std::get_if<CondGate>(&instr)) {
            ji["type"] = "cond_gate";
            ji["clbit"] = cg->clbit.index;
            ji["expected"] = cg->expected ? 1 : 0;
            ji["gate"] = gate_to_json(cg->gate);
        } else if (const auto* pg = std::get_if<ProbGate>(&instr)) {
            ji["type"] = "prob_gate";
            ji["qubits"] = nlohmann::json::array();
            for (auto qb : pg->qubits) ji["qubits"].push_back(qb.index);
            auto& branches = ji["branches"] = nlohmann::json::array();
            for (const auto& b : pg->branches) {
                nlohmann::json jb;
                jb["prob"] = b.prob;
                jb["ops"] = nlohmann::json::array();
                for (const auto& g : b.ops) jb["ops"].push_back(gate_to_json(g));
                jb["writes"] = nlohmann::json::array();
                for (const auto& [cl, bit] : b.clbit_writes) {
                    jb["writes"].push_back({{"clbit", cl.index}, {"value", bit ? 1 : 0}});
                }
                branches.push_back(std::move(jb));
            }
        }
        instrs.push_back(std::move(ji));
    }
    return j;
}

Circuit from_json(const nlohmann::json& j) {
    Circuit circuit;
    circuit.n_qubits = j.at("n_qubits").get<std::size_t>();
    circuit.n_clbits = j.at("n_clbits").get<std::size_t>();
    for (const auto& ji : j.at("instructions")) {
        const std::string type = ji.at("type").get<std::string>();
        if (type == "gate") {
            circuit.instructions.emplace_back(gate_from_json(ji));
        } else if (type == "measure") {
            circuit.instructions.emplace_back(Measure{QubitRef{ji.at("qubit").get<std::uint32_t>()},
                                                      ClbitRef{ji.at("clbit").get<std::uint32_t>()}});
        } else if (type == "reset") {
            circuit.instructions.emplace_back(Reset{QubitRef{ji.at("qubit").get<std::uint32_t>()}});
        } else if (type == "cond_gate") {
            circuit.instructions.emplace_back(CondGate{ClbitRef{ji.at("clbit").get<std::uint32_t>()},
                                                       ji.at("expected").get<int>() == 1,
                                                       gate_from_json(ji.at("gate"))});
        } else if (type == "prob_gate") {
            std::vector<QubitRef> qubits;
            for (const auto& q : ji.at("qubits")) qubits.push_back(QubitRef{q.get<std::uint32_t>()});
            std::vector<Branch> branches;
            for (const auto& jb : ji.at("branches")) {
                Branch b;
                b.prob = jb.at("prob").get<double>();
                for (const auto& g : jb.at("ops")) b.ops.push_back(gate_from_json(g));
                for (const auto& w : jb.at("writes")) {
                    b.clbit_writes.emplace_back(ClbitRef{w.at("clbit").get<std::uint32_t>()},
                                                w.at("value").get<int>() == 1);
                }
                branches.push_back(std::move(b));
            }
            circuit.instructions.emplace_back(make_prob_gate(std::move(qubits), std::move(branches)));
        } else {
            throw CircuitError("unknown instruction type in JSON: " + type);
        }
    }
    validate(circuit);
    return circuit;
}

}  // namespace qasm
}  // namespace dyncirc
