#pragma once

#include "metaq/circuit.hpp"
#include "metaq/simulator.hpp"

namespace metaq {

/// A compiled circuit plus the permutation that realigns its transcript
/// events with the source circuit's (compiled event `event_map[i]`
/// corresponds to source event `i`).
struct CompiledCircuit {
    Circuit circuit;
    std::vector<std::size_t> event_map;
};

/// Replaces each Postselect(q) with a correlated measurement whose leader is
/// a fresh register prepared in |1>.
CompiledCircuit compile_postselect_to_corr(const Circuit& circuit);

/// Additionally replaces each Measure with a correlated measurement whose
/// leader is the measured register and whose partner is a fresh register in
/// equal superposition; the result uses correlated measurements only.
CompiledCircuit compile_adpost_to_corr(const Circuit& circuit);

/// Simulates non-collapsing measurements with correlated measurements over
/// parallel circuit copies. Copy i runs the op sequence up to just before
/// the i-th NonCollapse and is standard-measured at its frozen qubits at
/// circuit end; collapsing measurements become correlated measurements over
/// all still-active copies. Classical post-processing of the samples, when
/// needed, must be supplied by the caller as further reversible ops.
CompiledCircuit compile_pdqp_to_corr(const Circuit& circuit);

/// m parallel copies plus a Toffoli/X majority network on the measured copy
/// outputs; m must be odd.
Circuit amplify(const Circuit& circuit, int m);

/// Replaces every SubCall with a fresh-register copy of its classical
/// inputs, the (m-fold amplified) subroutine body, an end measurement, and a
/// copy of the result onto the call's output register.
Circuit inline_subcalls(const Circuit& circuit, int m = 1);

/// Removes the first measurement (one target of a multi-qubit measure);
/// the register stays quantum. Distribution-preserving only for circuits
/// with deterministic output.
Circuit elide_first_measurement(const Circuit& circuit);

/// Reorders a compiled circuit's transcripts into source order so exact
/// distribution equality can be checked.
OutcomeDistribution remap_events(const OutcomeDistribution& dist,
                                 const std::vector<std::size_t>& event_map);

}  // namespace metaq
