#pragma once

#include <map>
#include <string>
#include <variant>
#include <vector>

#include "metaq/errors.hpp"

namespace metaq {

struct HadamardOp {
    int target;
    bool operator==(const HadamardOp&) const = default;
};

struct XOp {
    int target;
    bool operator==(const XOp&) const = default;
};

struct ToffoliOp {
    int control1;
    int control2;
    int target;
    bool operator==(const ToffoliOp&) const = default;
};

/// Computational-basis measurement; a multi-qubit target list is sugar for a
/// sequence of single-qubit measurements and records one joint outcome.
struct MeasureOp {
    std::vector<int> targets;
    bool operator==(const MeasureOp&) const = default;
};

/// Projection onto |1>; invalid when the projected mass is zero.
struct PostselectOp {
    int target;
    bool operator==(const PostselectOp&) const = default;
};

/// Correlated measurement over k equisized disjoint partitions; partition 0
/// is the leader whose marginal dictates the outcome distribution.
struct CorrMeasureOp {
    std::vector<std::vector<int>> partitions;
    bool operator==(const CorrMeasureOp&) const = default;
};

/// Samples the listed qubits without disturbing the state.
struct NonCollapseOp {
    std::vector<int> targets;
    bool operator==(const NonCollapseOp&) const = default;
};

/// Classical subroutine call: classical input bits are copied into a fresh
/// instance of the named subcircuit, whose measured output lands on `output`.
struct SubCallOp {
    std::string name;
    std::vector<int> inputs;
    int output;
    bool operator==(const SubCallOp&) const = default;
};

/// Query gate |i,b> -> |i, b XOR x_i>. Index qubits are listed least
/// significant first; indices beyond the input length read 0.
struct OracleQueryOp {
    std::vector<int> index_qubits;
    int target;
    bool operator==(const OracleQueryOp&) const = default;
};

using CircuitOp = std::variant<HadamardOp, XOp, ToffoliOp, MeasureOp, PostselectOp,
                               CorrMeasureOp, NonCollapseOp, SubCallOp, OracleQueryOp>;

struct Circuit {
    int width = 0;
    std::vector<CircuitOp> ops;
    int output = -1;
    /// Designated input register; empty means "the first k qubits" for an
    /// input of length k.
    std::vector<int> inputs;
    std::map<std::string, Circuit> subcircuits;

    std::vector<int> effective_inputs(std::size_t input_len) const;

    bool operator==(const Circuit&) const = default;
};

struct ValidationIssue {
    std::size_t op_index;  // ops.size() marks circuit-level issues
    std::string message;
};

/// Static well-formedness check. Tracks which registers have collapsed to
/// classical bits and rejects quantum operations on them.
std::vector<ValidationIssue> validate(const Circuit& circuit);
void validate_or_throw(const Circuit& circuit);

/// Final register kinds after all ops (assuming a valid circuit).
enum class RegKind { Quantum, Classical };
std::vector<RegKind> final_register_kinds(const Circuit& circuit);

/// Static Hadamard count, with each SubCall body counted once (the m=1
/// inlining).
int count_hadamards(const Circuit& circuit);

/// Canonical DSL rendering; parse_circuit is its exact inverse on validated
/// circuits.
std::string render_circuit(const Circuit& circuit);

/// Number of transcript events (branch outcomes) the ops produce, plus the
/// implicit final output measurement when the output is still quantum.
std::size_t transcript_event_count(const Circuit& circuit);

}  // namespace metaq
