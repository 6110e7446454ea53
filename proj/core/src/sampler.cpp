#include "metaq/sampler.hpp"

#include <sstream>

namespace metaq {

namespace {

std::string cache_key(char tag, std::size_t op, std::size_t partition, std::size_t bit,
                      const std::vector<std::string>& prior, const std::string& prefix) {
    std::ostringstream out;
    out << tag << op << ':' << partition << ':' << bit;
    for (const auto& o : prior) out << '|' << o;
    out << '#' << prefix;
    return out.str();
}

bool coin(std::mt19937_64& rng, const Rational& bias) {
    return uniform_below(rng, bias.den()) < bias.num();
}

}  // namespace

ProbOracle::ProbOracle(Circuit circuit, std::vector<bool> input, ExecLimits limits)
    : circuit_(std::move(circuit)), input_(std::move(input)), limits_(limits) {
    validate_or_throw(circuit_);
    for (std::size_t i = 0; i < circuit_.ops.size(); ++i) {
        const CircuitOp& op = circuit_.ops[i];
        if (const auto* m = std::get_if<MeasureOp>(&op)) {
            meas_ops_.push_back(i);
            parts_.push_back({m->targets});
        } else if (const auto* c = std::get_if<CorrMeasureOp>(&op)) {
            meas_ops_.push_back(i);
            parts_.push_back(c->partitions);
        } else if (!std::holds_alternative<HadamardOp>(op) && !std::holds_alternative<XOp>(op) &&
                   !std::holds_alternative<ToffoliOp>(op) &&
                   !std::holds_alternative<OracleQueryOp>(op)) {
            throw DomainError(
                "the classical sampler handles Hadamard/X/Toffoli gates, measurements and "
                "correlated measurements only; compile other ops away first");
        }
    }
    output_quantum_at_end_ = final_register_kinds(circuit_)[circuit_.output] == RegKind::Quantum;
    for (std::size_t k = 0; k < parts_.size(); ++k) {
        for (const auto& part : parts_[k]) {
            for (std::size_t b = 0; b < part.size(); ++b) {
                if (part[b] == circuit_.output) {
                    output_slot_ = {k, b};
                }
            }
        }
    }
}

ExactState ProbOracle::conditioned_state(std::size_t op_ordinal,
                                         const std::vector<std::string>& prior_outcomes) const {
    ExactState state = ExactState::initial(circuit_, input_);
    std::size_t stop =
        op_ordinal < meas_ops_.size() ? meas_ops_[op_ordinal] : circuit_.ops.size();
    std::size_t seen = 0;
    for (std::size_t i = 0; i < stop; ++i) {
        const CircuitOp& op = circuit_.ops[i];
        if (const auto* h = std::get_if<HadamardOp>(&op)) {
            state.apply(*h, limits_);
        } else if (const auto* x = std::get_if<XOp>(&op)) {
            state.apply(*x);
        } else if (const auto* t = std::get_if<ToffoliOp>(&op)) {
            state.apply(*t, limits_);
        } else if (const auto* q = std::get_if<OracleQueryOp>(&op)) {
            state.apply(*q, limits_);
        } else {
            if (seen >= prior_outcomes.size())
                throw DomainError("missing outcome for a prior measurement");
            const std::string& outcome = prior_outcomes[seen];
            for (const auto& part : parts_[seen]) {
                if (!state.force_project(part, outcome)) {
                    throw ZeroProbabilityConditioning(
                        "conditioning event has probability zero at measurement op " +
                        std::to_string(seen));
                }
            }
            ++seen;
        }
    }
    return state;
}

Rational ProbOracle::bit_prob(std::size_t op_ordinal, std::size_t partition, std::size_t bit,
                              const std::vector<std::string>& prior_outcomes,
                              const std::string& prefix) const {
    std::string key = cache_key('b', op_ordinal, partition, bit, prior_outcomes, prefix);
    {
        std::shared_lock lock(mutex_);
        if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    }
    ExactState state = conditioned_state(op_ordinal, prior_outcomes);
    const auto& partitions = parts_[op_ordinal];
    for (const auto& part : partitions) {
        std::vector<int> fixed(part.begin(), part.begin() + static_cast<std::ptrdiff_t>(bit));
        if (!fixed.empty() && !state.force_project(fixed, prefix)) {
            throw ZeroProbabilityConditioning("bit prefix '" + prefix +
                                              "' has probability zero at measurement op " +
                                              std::to_string(op_ordinal));
        }
    }
    Rational p = state.marginal_one(partitions[partition][bit]);
    if (op_ordinal == 0 && bit == 0 && prior_outcomes.empty() && prefix.empty() &&
        !p.is_dyadic()) {
        // §3.4 form 2^c / 2^h: unconditioned Hadamard+Toffoli marginals are
        // dyadic; anything else is a simulator bug.
        throw std::logic_error("unconditioned oracle answer " + p.str() + " is not dyadic");
    }
    std::unique_lock lock(mutex_);
    cache_.emplace(key, p);
    return p;
}

Rational ProbOracle::valid_weight(std::size_t op_ordinal,
                                  const std::vector<std::string>& prior_outcomes,
                                  const std::string& prefix) const {
    std::string key = cache_key('w', op_ordinal, 0, 0, prior_outcomes, prefix);
    {
        std::shared_lock lock(mutex_);
        if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    }
    ExactState state = conditioned_state(op_ordinal, prior_outcomes);
    auto table = state.corr_outcome_table(parts_[op_ordinal]);
    BigInt mass = 0;
    for (const auto& a : table.valid) {
        if (a.compare(0, prefix.size(), prefix) == 0) mass += table.leader_mass.at(a);
    }
    Rational w(mass, table.total_mass);
    std::unique_lock lock(mutex_);
    cache_.emplace(key, w);
    return w;
}

Rational ProbOracle::output1_prob(const std::vector<std::string>& outcomes) const {
    if (output_slot_) {
        // The output register collapsed inside a measurement op; its bit is
        // part of that op's outcome string and needs no state query.
        auto [op, bit] = *output_slot_;
        return Rational(outcomes.at(op).at(bit) == '1' ? 1 : 0);
    }
    std::string key = cache_key('o', meas_ops_.size(), 0, 0, outcomes, "");
    {
        std::shared_lock lock(mutex_);
        if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    }
    ExactState state = conditioned_state(meas_ops_.size(), outcomes);
    Rational p = state.marginal_one(circuit_.output);
    std::unique_lock lock(mutex_);
    cache_.emplace(key, p);
    return p;
}

namespace {

// Chooses the bits of measurement op `k` one position at a time, invoking
// `flip(bias)` whenever a genuine coin is needed. Returns the outcome string.
template <typename Flip>
std::string sample_op_literal(const ProbOracle& oracle, std::size_t k,
                              const std::vector<std::string>& outcomes, Flip&& flip) {
    const auto& partitions = oracle.partitions(k);
    std::size_t len = partitions[0].size();
    std::string prefix;
    for (std::size_t j = 0; j < len; ++j) {
        int forced = -1;
        for (std::size_t i = 0; i < partitions.size(); ++i) {
            Rational p = oracle.bit_prob(k, i, j, outcomes, prefix);
            if (p == Rational(0) || p == Rational(1)) {
                int f = p == Rational(1) ? 1 : 0;
                if (forced >= 0 && forced != f) {
                    throw IntegrityError(
                        "partitions force contradictory bits; no valid correlated output exists");
                }
                forced = f;
            }
        }
        bool b;
        if (forced >= 0) {
            b = forced == 1;
        } else {
            b = flip(oracle.bit_prob(k, 0, j, outcomes, prefix));
        }
        prefix.push_back(b ? '1' : '0');
    }
    return prefix;
}

template <typename Flip>
std::string sample_op_filtered(const ProbOracle& oracle, std::size_t k,
                               const std::vector<std::string>& outcomes, Flip&& flip) {
    std::size_t len = oracle.partitions(k)[0].size();
    std::string prefix;
    Rational total = oracle.valid_weight(k, outcomes, prefix);
    if (total.is_zero()) {
        throw InvalidCorrelatedMeasurement("correlated measurement has no valid output");
    }
    for (std::size_t j = 0; j < len; ++j) {
        Rational w1 = oracle.valid_weight(k, outcomes, prefix + "1");
        Rational bias = w1 / total;
        bool b;
        if (bias.is_zero()) {
            b = false;
        } else if (bias == Rational(1)) {
            b = true;
        } else {
            b = flip(bias);
        }
        prefix.push_back(b ? '1' : '0');
        total = b ? w1 : total - w1;
    }
    return prefix;
}

template <typename SampleOp>
SamplerResult run_sampler(const ProbOracle& oracle, std::mt19937_64& rng, SampleOp&& sample_op) {
    SamplerResult result;
    auto flip = [&](const Rational& bias) {
        result.transcript.biases.push_back(bias);
        bool b = coin(rng, bias);
        result.transcript.draws.push_back(b);
        return b;
    };
    std::vector<std::string> outcomes;
    for (std::size_t k = 0; k < oracle.measurement_ops().size(); ++k) {
        outcomes.push_back(sample_op(oracle, k, outcomes, flip));
    }
    Rational p1 = oracle.output1_prob(outcomes);
    bool out;
    if (p1.is_zero()) {
        out = false;
    } else if (p1 == Rational(1)) {
        out = true;
    } else {
        out = flip(p1);
    }
    result.output_bit = out;
    result.transcript.events = outcomes;
    if (oracle.output_needs_final_coin()) {
        result.transcript.events.push_back(out ? "1" : "0");
    }
    return result;
}

}  // namespace

SamplerResult sample_literal(const ProbOracle& oracle, std::mt19937_64& rng) {
    return run_sampler(oracle, rng, [](const ProbOracle& o, std::size_t k,
                                       const std::vector<std::string>& outcomes, auto& flip) {
        return sample_op_literal(o, k, outcomes, flip);
    });
}

SamplerResult sample_filtered(const ProbOracle& oracle, std::mt19937_64& rng) {
    return run_sampler(oracle, rng, [](const ProbOracle& o, std::size_t k,
                                       const std::vector<std::string>& outcomes, auto& flip) {
        return sample_op_filtered(o, k, outcomes, flip);
    });
}

namespace {

struct Enumerator {
    const ProbOracle& oracle;
    SamplerMode mode;
    OutcomeDistribution dist;

    void finish(const std::vector<std::string>& outcomes, const Rational& prob) {
        Rational p1 = oracle.output1_prob(outcomes);
        auto leaf = [&](bool bit, const Rational& p) {
            if (p.is_zero()) return;
            TranscriptKey key(outcomes.begin(), outcomes.end());
            if (oracle.output_needs_final_coin()) key.push_back(bit ? "1" : "0");
            dist.probabilities[key] += p;
            dist.joint_mass[key] += p;
            dist.mass_all += p;
            if (bit) {
                dist.output1 += p;
                dist.mass_output1 += p;
            }
        };
        if (oracle.output_needs_final_coin()) {
            leaf(true, prob * p1);
            leaf(false, prob * (Rational(1) - p1));
        } else {
            leaf(p1 == Rational(1), prob);
        }
    }

    void walk_op(std::size_t k, std::vector<std::string>& outcomes, std::string prefix,
                 std::size_t bit, const Rational& prob) {
        const auto& partitions = oracle.partitions(k);
        std::size_t len = partitions[0].size();
        if (bit == len) {
            outcomes.push_back(prefix);
            walk(k + 1, outcomes, prob);
            outcomes.pop_back();
            return;
        }
        if (mode == SamplerMode::Literal) {
            int forced = -1;
            for (std::size_t i = 0; i < partitions.size(); ++i) {
                Rational p = oracle.bit_prob(k, i, bit, outcomes, prefix);
                if (p == Rational(0) || p == Rational(1)) {
                    int f = p == Rational(1) ? 1 : 0;
                    if (forced >= 0 && forced != f) {
                        throw IntegrityError(
                            "partitions force contradictory bits; no valid correlated output "
                            "exists");
                    }
                    forced = f;
                }
            }
            if (forced >= 0) {
                walk_op(k, outcomes, prefix + (forced ? "1" : "0"), bit + 1, prob);
            } else {
                Rational bias = oracle.bit_prob(k, 0, bit, outcomes, prefix);
                walk_op(k, outcomes, prefix + "1", bit + 1, prob * bias);
                walk_op(k, outcomes, prefix + "0", bit + 1, prob * (Rational(1) - bias));
            }
        } else {
            Rational total = oracle.valid_weight(k, outcomes, prefix);
            if (bit == 0 && total.is_zero()) {
                throw InvalidCorrelatedMeasurement("correlated measurement has no valid output");
            }
            Rational w1 = oracle.valid_weight(k, outcomes, prefix + "1");
            Rational w0 = total - w1;
            if (!w1.is_zero()) walk_op(k, outcomes, prefix + "1", bit + 1, prob * (w1 / total));
            if (!w0.is_zero()) walk_op(k, outcomes, prefix + "0", bit + 1, prob * (w0 / total));
        }
    }

    void walk(std::size_t k, std::vector<std::string>& outcomes, const Rational& prob) {
        if (k == oracle.measurement_ops().size()) {
            finish(outcomes, prob);
            return;
        }
        walk_op(k, outcomes, "", 0, prob);
    }
};

}  // namespace

OutcomeDistribution distribution_of_sampler(const Circuit& circuit, const std::vector<bool>& input,
                                            SamplerMode mode, const ExecLimits& limits) {
    ProbOracle oracle(circuit, input, limits);
    Enumerator e{oracle, mode, {}};
    std::vector<std::string> outcomes;
    e.walk(0, outcomes, Rational(1));
    return std::move(e.dist);
}

}  // namespace metaq
