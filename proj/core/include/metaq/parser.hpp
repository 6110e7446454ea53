#pragma once

#include <string>

#include "metaq/circuit.hpp"

namespace metaq {

/// Parses the line-oriented circuit DSL and validates the result.
/// Throws ParseError (with line number) on syntax errors and ValidationError
/// when an invariant is violated.
Circuit parse_circuit(const std::string& text);

/// Reads a circuit from a .mq file.
Circuit load_circuit(const std::string& path);

}  // namespace metaq
