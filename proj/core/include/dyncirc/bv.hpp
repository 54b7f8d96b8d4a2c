#pragma once

#include <string>

#include "dyncirc/circuit.hpp"

namespace dyncirc {

/// Bernstein-Vazirani with qubit reuse on two wires: the top wire is measured
/// and reset once per secret bit, the bottom wire carries the phase oracle
/// (H then Z up front, CX per 1-bit of the secret, H at the end).
Circuit build_bv_reuse(const std::string& secret);

}  // namespace dyncirc
