#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "metaq/circuit.hpp"
#include "metaq/rational.hpp"
#include "metaq/sqrt_dyadic.hpp"

namespace metaq {

struct ExecLimits {
    int max_live_qubits = 16;
    std::uint64_t max_leaves = 1u << 20;
};

/// One entry per branch event (measure, postselect, corr, noncollapse,
/// implicit final output measure), each a string of outcome bits.
using TranscriptKey = std::vector<std::string>;

std::string flatten_transcript(const TranscriptKey& key);

struct StateBranch;

/// Exact quantum state of one execution branch.
///
/// Amplitudes are integer mantissas over a shared power of sqrt(2); only
/// genuinely superposed qubits occupy the dense vector. A qubit is Live
/// (in the vector), Known (quantum, but in a definite basis state — fresh
/// ancillas and gate-propagated constants stay here), or Classical
/// (collapsed by a measurement-like op).
class ExactState {
public:
    enum class Kind { Live, Known, Classical };

    static ExactState initial(const Circuit& circuit, const std::vector<bool>& input);
    /// Test helper: all qubits live, amplitudes given basis-index order
    /// (qubit 0 is the least significant index bit).
    static ExactState from_amplitudes(int width, std::vector<BigInt> mantissas,
                                      unsigned half_exponent);

    int width() const { return width_; }
    unsigned half_exponent() const { return half_exponent_; }
    int live_count() const { return static_cast<int>(live_.size()); }
    Kind kind(int qubit) const { return slots_[qubit].kind; }
    /// Definite bit of a Known or Classical qubit.
    bool bit(int qubit) const;

    /// Joint probability of the transcript so far, including postselection
    /// mass (the spec's `weight`).
    const Rational& weight() const { return weight_; }
    /// Product of the postselection mass ratios applied so far.
    const Rational& postselect_mass() const { return post_mass_; }
    /// Sequential branch probability: weight / postselect_mass.
    Rational sequential_probability() const { return weight_ / post_mass_; }
    /// False once a correlated or non-collapsing measurement branched this
    /// path; while true, every measurement weight is asserted dyadic.
    bool dyadic_path() const { return dyadic_path_; }

    const TranscriptKey& transcript() const { return transcript_; }

    /// Total squared mass of the amplitude vector.
    BigInt mass() const;
    /// Amplitude of a full basis assignment over the quantum (Live + Known)
    /// qubits; classical qubits are ignored.
    SqrtDyadic amplitude(const std::vector<bool>& basis) const;

    /// Canonical form for state comparisons: live qubits sorted, shared
    /// sqrt(2) power reduced.
    void canonicalize_for_compare();
    bool same_quantum_state(const ExactState& other) const;

    // -- gates ---------------------------------------------------------
    void apply(const HadamardOp& op, const ExecLimits& limits);
    void apply(const XOp& op);
    void apply(const ToffoliOp& op, const ExecLimits& limits);
    void apply(const OracleQueryOp& op, const ExecLimits& limits);

    // -- branching operations -----------------------------------------
    /// Standard computational-basis measurement of the listed qubits; one
    /// joint outcome event. Zero-probability outcomes are absent.
    std::vector<StateBranch> measure(const std::vector<int>& targets) const;
    /// Projects onto |1>, multiplying weight and postselection mass by the
    /// conditional mass ratio. Throws InvalidPostselection on zero mass.
    ExactState postselect(int qubit) const;
    /// Correlated measurement per the leader-marginal semantics; throws
    /// InvalidCorrelatedMeasurement when the valid set V is empty.
    std::vector<StateBranch> corr_measure(const std::vector<std::vector<int>>& partitions) const;
    /// Samples the marginal of the listed qubits without touching the state.
    std::vector<StateBranch> noncollapse(const std::vector<int>& targets) const;

    /// Projection without weight bookkeeping, for oracle conditioning.
    /// Returns false when the projected mass is zero.
    bool force_project(const std::vector<int>& qubits, const std::string& bits);

    /// Leader marginals and the valid-output set of a correlated
    /// measurement, without branching.
    struct CorrOutcomeTable {
        std::map<std::string, BigInt> leader_mass;
        std::set<std::string> valid;
        BigInt total_mass;
    };
    CorrOutcomeTable corr_outcome_table(const std::vector<std::vector<int>>& partitions) const;

    /// Marginal probability that `qubit` reads 1.
    Rational marginal_one(int qubit) const;

private:
    struct Slot {
        Kind kind = Kind::Known;
        bool bit = false;  // Known/Classical value
        int live_index = -1;
    };

    void promote(int qubit, const ExecLimits& limits);
    void reduce_shared_exponent();
    void remove_from_live(const std::vector<int>& qubits);
    // Restriction of an amplitude-vector entry to the given qubits.
    std::string restrict_entry(std::size_t entry, const std::vector<int>& qubits) const;
    void record_event(std::string outcome) { transcript_.push_back(std::move(outcome)); }

    int width_ = 0;
    std::vector<Slot> slots_;
    std::vector<int> live_;
    std::vector<BigInt> amps_;
    unsigned half_exponent_ = 0;
    Rational weight_{1};
    Rational post_mass_{1};
    bool dyadic_path_ = true;
    TranscriptKey transcript_;
    std::vector<bool> oracle_input_;

    friend struct StateOps;
};

struct StateBranch {
    std::string outcome;
    ExactState state;
};

struct OutcomeDistribution {
    /// Sequential-semantics probabilities; sums to exactly 1.
    std::map<TranscriptKey, Rational> probabilities;
    /// Unconditioned joint mass per transcript (includes postselection
    /// factors); sums to the overall postselection success mass.
    std::map<TranscriptKey, Rational> joint_mass;
    Rational output1;       // P(output = 1), sequential semantics
    Rational mass_all;      // Pr[every postselection succeeds]
    Rational mass_output1;  // Pr[success AND output = 1]

    std::map<std::string, Rational> flat() const;
    std::string to_tsv() const;
    bool operator==(const OutcomeDistribution& o) const {
        return probabilities == o.probabilities;
    }
};

/// Enumerates every measurement branch with its exact probability.
/// Propagates Invalid* errors raised on any reachable branch. `jobs` > 1
/// evaluates independent branches concurrently.
OutcomeDistribution run_exhaustive(const Circuit& circuit, const std::vector<bool>& input = {},
                                   const ExecLimits& limits = {}, int jobs = 1);

struct SampleReport {
    std::map<TranscriptKey, std::uint64_t> counts;
    std::uint64_t output1_count = 0;
    std::uint64_t shots = 0;
    std::string to_tsv() const;
};

/// Seeded sampling run; every branch point draws one uniform
/// arbitrary-precision integer below the exact common denominator, so the
/// sampler has zero bias and is a deterministic function of the seed.
SampleReport run_sampled(const Circuit& circuit, const std::vector<bool>& input, std::uint64_t seed,
                         std::uint64_t shots, const ExecLimits& limits = {});

/// Uniform BigInt in [0, bound) drawn by rejection from random bits.
BigInt uniform_below(std::mt19937_64& rng, const BigInt& bound);

std::vector<bool> parse_bits(const std::string& text);

}  // namespace metaq
