#pragma once

#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <utility>

#include "metaq/circuit.hpp"
#include "metaq/simulator.hpp"

namespace metaq {

enum class SamplerMode { Literal, Filtered };

/// Exact conditional-probability oracle backed by the exhaustive simulator.
///
/// The target circuit may contain Hadamard/X/Toffoli gates, correlated
/// measurements and standard measurements (treated as single-partition
/// correlated measurements). Queries condition on the outcomes chosen for
/// earlier measurement ops and on already-fixed bits of the current op.
/// Answers are cached; the cache is safe for concurrent readers.
class ProbOracle {
public:
    ProbOracle(Circuit circuit, std::vector<bool> input, ExecLimits limits = {});

    /// Indices (into circuit.ops) of the measurement-like ops, in order.
    const std::vector<std::size_t>& measurement_ops() const { return meas_ops_; }
    /// Partitions of measurement op `k` (a Measure op is one partition).
    const std::vector<std::vector<int>>& partitions(std::size_t k) const { return parts_[k]; }
    int output_qubit() const { return circuit_.output; }
    bool output_needs_final_coin() const { return output_quantum_at_end_; }

    /// P[ partition i's bit j reads 1 | prior outcomes; all partitions'
    /// bits < j fixed to `prefix` ]. Unconditioned queries (first bit of the
    /// first measurement) are asserted dyadic.
    Rational bit_prob(std::size_t op_ordinal, std::size_t partition, std::size_t bit,
                      const std::vector<std::string>& prior_outcomes,
                      const std::string& prefix) const;

    /// W(prefix): total leader marginal over valid outcome strings extending
    /// `prefix` (Def-3.1 validity filter).
    Rational valid_weight(std::size_t op_ordinal, const std::vector<std::string>& prior_outcomes,
                          const std::string& prefix) const;

    /// P[output = 1 | all measurement outcomes].
    Rational output1_prob(const std::vector<std::string>& outcomes) const;

private:
    ExactState conditioned_state(std::size_t op_ordinal,
                                 const std::vector<std::string>& prior_outcomes) const;

    Circuit circuit_;
    std::vector<bool> input_;
    ExecLimits limits_;
    std::vector<std::size_t> meas_ops_;
    std::vector<std::vector<std::vector<int>>> parts_;
    bool output_quantum_at_end_ = false;
    std::optional<std::pair<std::size_t, std::size_t>> output_slot_;

    mutable std::shared_mutex mutex_;
    mutable std::map<std::string, Rational> cache_;
};

struct SamplerTranscript {
    TranscriptKey events;          // one outcome string per measurement op (+ output)
    std::vector<Rational> biases;  // coin bias used at every flipped coin, in order
    std::vector<bool> draws;
};

struct SamplerResult {
    bool output_bit;
    SamplerTranscript transcript;
};

/// The literal bitwise procedure: per bit, query every partition; a 0/1
/// answer forces the bit (contradictory forcings raise IntegrityError);
/// otherwise flip a coin with the leader's bias.
SamplerResult sample_literal(const ProbOracle& oracle, std::mt19937_64& rng);

/// Validity-filtered variant: the bit-j bias is W(prefix1)/W(prefix), which
/// reproduces the correlated-measurement semantics exactly.
SamplerResult sample_filtered(const ProbOracle& oracle, std::mt19937_64& rng);

/// Exact distribution of the sampler, by enumerating every coin outcome with
/// its exact bias (no Monte Carlo). Errors reachable with positive
/// probability propagate.
OutcomeDistribution distribution_of_sampler(const Circuit& circuit, const std::vector<bool>& input,
                                            SamplerMode mode, const ExecLimits& limits = {});

}  // namespace metaq
