#pragma once

#include <string>
#include <string_view>

#include <json.hpp>

#include "dyncirc/circuit.hpp"

namespace dyncirc {
namespace qasm {

struct SourceSpan {
    std::size_t line = 1;       // 1-based
    std::size_t column = 1;
    std::size_t end_column = 1;
};

struct ParseError : CircuitError {
    ParseError(std::string message, SourceSpan span);
    SourceSpan span;
};
struct UnsupportedGate : ParseError {
    using ParseError::ParseError;
};

/// Parses the OpenQASM-2 dialect used by this toolkit: qreg/creg, the fixed
/// gate alphabet, measure, reset, single-clbit `if (c[i]==b)` conditionals,
/// and `// @prob` annotated blocks for probabilistic gates.
Circuit parse(std::string_view text);

/// Deterministic serialization (one statement per line, 17 significant digits
/// for floats). parse(serialize(c)) == c.
std::string serialize(const Circuit& circuit);

/// Explicit-variant JSON export of the IR, for tooling.
nlohmann::json to_json(const Circuit& circuit);
Circuit from_json(const nlohmann::json& j);

}  // namespace qasm
}  // namespace dyncirc
