#include "metaq/simulator.hpp"

#include <algorithm>
#include <deque>
#include <future>
#include <numeric>
#include <sstream>

namespace metaq {

std::string flatten_transcript(const TranscriptKey& key) {
    std::string out;
    for (const auto& part : key) out += part;
    return out;
}

std::vector<bool> parse_bits(const std::string& text) {
    std::vector<bool> bits;
    bits.reserve(text.size());
    for (char c : text) {
        if (c == '0')
            bits.push_back(false);
        else if (c == '1')
            bits.push_back(true);
        else
            throw DomainError("bitstring may contain only 0 and 1, got '" + text + "'");
    }
    return bits;
}

// ---------------------------------------------------------------------------
// ExactState
// ---------------------------------------------------------------------------

namespace {

bool has_oracle_query(const Circuit& circuit) {
    for (const auto& op : circuit.ops) {
        if (std::holds_alternative<OracleQueryOp>(op)) return true;
    }
    return false;
}

}  // namespace

ExactState ExactState::initial(const Circuit& circuit, const std::vector<bool>& input) {
    ExactState st;
    st.width_ = circuit.width;
    st.slots_.assign(circuit.width, Slot{});
    st.amps_ = {BigInt(1)};
    if (has_oracle_query(circuit)) {
        // Query circuits read the input through the oracle gate only.
        st.oracle_input_ = input;
        return st;
    }
    if (!input.empty()) {
        std::vector<int> regs = circuit.effective_inputs(input.size());
        // A register list that is an exact multiple of the input length
        // tiles the input (amplified circuits replicate it per copy).
        if (regs.size() % input.size() != 0) {
            throw DomainError("input length " + std::to_string(input.size()) +
                              " does not fit the designated input register of size " +
                              std::to_string(regs.size()));
        }
        for (std::size_t i = 0; i < regs.size(); ++i) {
            int q = regs[i];
            if (q < 0 || q >= circuit.width) throw DomainError("input qubit out of range");
            st.slots_[q].bit = input[i % input.size()];
        }
    }
    return st;
}

ExactState ExactState::from_amplitudes(int width, std::vector<BigInt> mantissas,
                                       unsigned half_exponent) {
    if (mantissas.size() != (std::size_t{1} << width))
        throw DomainError("amplitude vector size must be 2^width");
    ExactState st;
    st.width_ = width;
    st.slots_.assign(width, Slot{});
    st.live_.resize(width);
    std::iota(st.live_.begin(), st.live_.end(), 0);
    for (int q = 0; q < width; ++q) {
        st.slots_[q].kind = Kind::Live;
        st.slots_[q].live_index = q;
    }
    st.amps_ = std::move(mantissas);
    st.half_exponent_ = half_exponent;
    if (st.mass() == 0) throw DomainError("state must have nonzero mass");
    st.reduce_shared_exponent();
    return st;
}

bool ExactState::bit(int qubit) const {
    const Slot& s = slots_[qubit];
    if (s.kind == Kind::Live) throw DomainError("qubit is in superposition");
    return s.bit;
}

BigInt ExactState::mass() const {
    BigInt total = 0;
    for (const BigInt& a : amps_) total += a * a;
    return total;
}

SqrtDyadic ExactState::amplitude(const std::vector<bool>& basis) const {
    std::size_t entry = 0;
    for (int q = 0; q < width_; ++q) {
        const Slot& s = slots_[q];
        if (s.kind == Kind::Classical) continue;
        bool want = q < static_cast<int>(basis.size()) && basis[q];
        if (s.kind == Kind::Known) {
            if (s.bit != want) return SqrtDyadic::zero();
        } else if (want) {
            entry |= std::size_t{1} << s.live_index;
        }
    }
    return SqrtDyadic(amps_[entry], half_exponent_);
}

void ExactState::promote(int qubit, const ExecLimits& limits) {
    Slot& s = slots_[qubit];
    if (s.kind == Kind::Live) return;
    if (s.kind == Kind::Classical) throw DomainError("cannot promote classical register");
    if (static_cast<int>(live_.size()) + 1 > limits.max_live_qubits) {
        throw LimitExceeded("live quantum register count would exceed the configured limit of " +
                            std::to_string(limits.max_live_qubits));
    }
    int pos = static_cast<int>(live_.size());
    live_.push_back(qubit);
    s.kind = Kind::Live;
    std::size_t half = amps_.size();
    std::vector<BigInt> next(half * 2, BigInt(0));
    std::size_t offset = s.bit ? half : 0;
    for (std::size_t e = 0; e < half; ++e) next[e + offset] = std::move(amps_[e]);
    amps_ = std::move(next);
    s.live_index = pos;
    s.bit = false;
}

void ExactState::reduce_shared_exponent() {
    while (half_exponent_ >= 2) {
        bool all_even = true;
        bool any_nonzero = false;
        for (const BigInt& a : amps_) {
            if (a != 0) any_nonzero = true;
            if ((a & 1) != 0) {
                all_even = false;
                break;
            }
        }
        if (!all_even || !any_nonzero) break;
        for (BigInt& a : amps_) a >>= 1;
        half_exponent_ -= 2;
    }
}

void ExactState::apply(const HadamardOp& op, const ExecLimits& limits) {
    promote(op.target, limits);
    std::size_t mask = std::size_t{1} << slots_[op.target].live_index;
    for (std::size_t e = 0; e < amps_.size(); ++e) {
        if (e & mask) continue;
        BigInt a = amps_[e];
        BigInt b = amps_[e | mask];
        amps_[e] = a + b;
        amps_[e | mask] = a - b;
    }
    ++half_exponent_;
    reduce_shared_exponent();
}

void ExactState::apply(const XOp& op) {
    Slot& s = slots_[op.target];
    if (s.kind != Kind::Live) {
        s.bit = !s.bit;
        return;
    }
    std::size_t mask = std::size_t{1} << s.live_index;
    for (std::size_t e = 0; e < amps_.size(); ++e) {
        if (e & mask) continue;
        std::swap(amps_[e], amps_[e | mask]);
    }
}

void ExactState::apply(const ToffoliOp& op, const ExecLimits& limits) {
    std::size_t cmask = 0;
    for (int c : {op.control1, op.control2}) {
        const Slot& s = slots_[c];
        if (s.kind == Kind::Live) {
            cmask |= std::size_t{1} << s.live_index;
        } else if (!s.bit) {
            return;  // definite 0 control: identity
        }
    }
    Slot& t = slots_[op.target];
    if (t.kind != Kind::Live) {
        if (cmask == 0) {
            t.bit = !t.bit;
            return;
        }
        if (t.kind == Kind::Classical)
            throw DomainError("ccx with quantum control and classical target");
        promote(op.target, limits);
    }
    std::size_t tmask = std::size_t{1} << t.live_index;
    for (std::size_t e = 0; e < amps_.size(); ++e) {
        if ((e & tmask) || (e & cmask) != cmask) continue;
        std::swap(amps_[e], amps_[e | tmask]);
    }
}

void ExactState::apply(const OracleQueryOp& op, const ExecLimits& limits) {
    std::size_t fixed_value = 0;
    std::vector<std::pair<std::size_t, std::size_t>> live_bits;  // (entry mask, index weight)
    for (std::size_t i = 0; i < op.index_qubits.size(); ++i) {
        const Slot& s = slots_[op.index_qubits[i]];
        if (s.kind == Kind::Live) {
            live_bits.push_back({std::size_t{1} << s.live_index, std::size_t{1} << i});
        } else if (s.bit) {
            fixed_value |= std::size_t{1} << i;
        }
    }
    auto x_at = [&](std::size_t i) {
        return i < oracle_input_.size() && oracle_input_[i];
    };
    if (live_bits.empty()) {
        if (x_at(fixed_value)) apply(XOp{op.target});
        return;
    }
    promote(op.target, limits);
    std::size_t tmask = std::size_t{1} << slots_[op.target].live_index;
    for (std::size_t e = 0; e < amps_.size(); ++e) {
        if (e & tmask) continue;
        std::size_t idx = fixed_value;
        for (const auto& [emask, weight] : live_bits) {
            if (e & emask) idx |= weight;
        }
        if (x_at(idx)) std::swap(amps_[e], amps_[e | tmask]);
    }
}

std::string ExactState::restrict_entry(std::size_t entry, const std::vector<int>& qubits) const {
    std::string bits(qubits.size(), '0');
    for (std::size_t i = 0; i < qubits.size(); ++i) {
        const Slot& s = slots_[qubits[i]];
        bool v = s.kind == Kind::Live ? ((entry >> s.live_index) & 1) != 0 : s.bit;
        bits[i] = v ? '1' : '0';
    }
    return bits;
}

void ExactState::remove_from_live(const std::vector<int>& qubits) {
    std::vector<int> positions;
    for (int q : qubits) {
        if (slots_[q].kind == Kind::Live) positions.push_back(slots_[q].live_index);
    }
    if (positions.empty()) return;
    std::sort(positions.begin(), positions.end());
    std::size_t drop_mask = 0;
    for (int p : positions) drop_mask |= std::size_t{1} << p;

    std::vector<BigInt> next(amps_.size() >> positions.size(), BigInt(0));
    for (std::size_t e = 0; e < amps_.size(); ++e) {
        if (amps_[e] == 0) continue;
        if (e & drop_mask) continue;  // caller already zeroed non-selected entries and
                                      // re-based survivors onto dropped-bits=0
        std::size_t packed = 0;
        std::size_t out_pos = 0;
        for (std::size_t p = 0; p < live_.size(); ++p) {
            if (drop_mask & (std::size_t{1} << p)) continue;
            if (e & (std::size_t{1} << p)) packed |= std::size_t{1} << out_pos;
            ++out_pos;
        }
        next[packed] = amps_[e];
    }
    amps_ = std::move(next);
    std::vector<int> new_live;
    for (std::size_t p = 0; p < live_.size(); ++p) {
        if (drop_mask & (std::size_t{1} << p)) continue;
        new_live.push_back(live_[p]);
    }
    live_ = std::move(new_live);
    for (std::size_t p = 0; p < live_.size(); ++p) slots_[live_[p]].live_index = static_cast<int>(p);
}

namespace {

void assert_dyadic(const Rational& weight, bool dyadic_path) {
    // §-style invariant: probabilities of measurement transcripts on
    // Hadamard+Toffoli histories are c / 2^h. Violation means a simulator bug.
    if (dyadic_path && !weight.is_dyadic()) {
        throw std::logic_error("unconditioned measurement probability " + weight.str() +
                               " is not dyadic");
    }
}

}  // namespace

std::vector<StateBranch> ExactState::measure(const std::vector<int>& targets) const {
    std::map<std::string, BigInt> masses;
    BigInt total = 0;
    for (std::size_t e = 0; e < amps_.size(); ++e) {
        if (amps_[e] == 0) continue;
        BigInt sq = amps_[e] * amps_[e];
        masses[restrict_entry(e, targets)] += sq;
        total += sq;
    }
    if (total == 0) throw std::logic_error("measurement on zero-mass state");

    std::vector<StateBranch> branches;
    for (const auto& [outcome, mass_o] : masses) {
        ExactState child = *this;
        // Project: zero out entries that disagree, then drop the collapsed
        // qubits from the live set.
        for (std::size_t e = 0; e < child.amps_.size(); ++e) {
            if (child.amps_[e] != 0 && child.restrict_entry(e, targets) != outcome)
                child.amps_[e] = 0;
        }
        // Re-base survivors so dropped live bits read 0.
        std::size_t keep_mask = 0;
        for (int q : targets) {
            if (slots_[q].kind == Kind::Live) keep_mask |= std::size_t{1} << slots_[q].live_index;
        }
        if (keep_mask) {
            std::vector<BigInt> rebased(child.amps_.size(), BigInt(0));
            for (std::size_t e = 0; e < child.amps_.size(); ++e) {
                if (child.amps_[e] != 0) rebased[e & ~keep_mask] = std::move(child.amps_[e]);
            }
            child.amps_ = std::move(rebased);
        }
        child.remove_from_live(targets);
        for (std::size_t i = 0; i < targets.size(); ++i) {
            Slot& s = child.slots_[targets[i]];
            s.kind = Kind::Classical;
            s.bit = outcome[i] == '1';
            s.live_index = -1;
        }
        Rational p(mass_o, total);
        child.weight_ *= p;
        child.post_mass_ = post_mass_;
        assert_dyadic(child.weight_, dyadic_path_);
        child.reduce_shared_exponent();
        child.record_event(outcome);
        branches.push_back({outcome, std::move(child)});
    }
    return branches;
}

ExactState ExactState::postselect(int qubit) const {
    auto branches = measure({qubit});
    for (auto& b : branches) {
        if (b.outcome == "1") {
            ExactState st = std::move(b.state);
            // Weight already picked up the conditional mass ratio via
            // measure(); fold the same ratio into the postselection mass so
            // sequential probabilities stay conditioned.
            Rational ratio = st.weight_ / weight_;
            st.post_mass_ = post_mass_ * ratio;
            return st;
        }
    }
    throw InvalidPostselection("postselected register " + std::to_string(qubit) +
                               " has zero probability of reading 1");
}

ExactState::CorrOutcomeTable ExactState::corr_outcome_table(
    const std::vector<std::vector<int>>& partitions) const {
    CorrOutcomeTable table;
    table.total_mass = 0;
    for (std::size_t e = 0; e < amps_.size(); ++e) {
        if (amps_[e] == 0) continue;
        BigInt sq = amps_[e] * amps_[e];
        table.total_mass += sq;
        std::string leader = restrict_entry(e, partitions[0]);
        table.leader_mass[leader] += sq;
        bool aligned = true;
        for (std::size_t i = 1; i < partitions.size() && aligned; ++i) {
            aligned = restrict_entry(e, partitions[i]) == leader;
        }
        if (aligned) table.valid.insert(leader);
    }
    return table;
}

std::vector<StateBranch> ExactState::corr_measure(
    const std::vector<std::vector<int>>& partitions) const {
    const std::size_t j = partitions.front().size();
    CorrOutcomeTable table = corr_outcome_table(partitions);
    if (table.valid.empty()) {
        throw InvalidCorrelatedMeasurement(
            "correlated measurement has no valid output: every length-" + std::to_string(j) +
            " string lacks joint support");
    }
    BigInt denom = 0;
    for (const auto& a : table.valid) denom += table.leader_mass[a];

    std::vector<int> all_qubits;
    for (const auto& part : partitions) all_qubits.insert(all_qubits.end(), part.begin(), part.end());

    std::vector<StateBranch> branches;
    for (const auto& a : table.valid) {
        Rational p(table.leader_mass[a], denom);
        // Every valid branch carries probability at least 1/2^h.
        if (table.leader_mass[a] * pow2(half_exponent_) < denom) {
            throw std::logic_error("correlated branch probability below 1/2^h");
        }
        ExactState child = *this;
        for (std::size_t e = 0; e < child.amps_.size(); ++e) {
            if (child.amps_[e] == 0) continue;
            bool keep = true;
            for (const auto& part : partitions) {
                if (child.restrict_entry(e, part) != a) {
                    keep = false;
                    break;
                }
            }
            if (!keep) child.amps_[e] = 0;
        }
        std::size_t keep_mask = 0;
        for (int q : all_qubits) {
            if (slots_[q].kind == Kind::Live) keep_mask |= std::size_t{1} << slots_[q].live_index;
        }
        if (keep_mask) {
            std::vector<BigInt> rebased(child.amps_.size(), BigInt(0));
            for (std::size_t e = 0; e < child.amps_.size(); ++e) {
                if (child.amps_[e] != 0) rebased[e & ~keep_mask] = std::move(child.amps_[e]);
            }
            child.amps_ = std::move(rebased);
        }
        child.remove_from_live(all_qubits);
        for (const auto& part : partitions) {
            for (std::size_t i = 0; i < part.size(); ++i) {
                Slot& s = child.slots_[part[i]];
                s.kind = Kind::Classical;
                s.bit = a[i] == '1';
                s.live_index = -1;
            }
        }
        child.weight_ *= p;
        child.post_mass_ = post_mass_;
        child.dyadic_path_ = false;
        child.reduce_shared_exponent();
        child.record_event(a);
        branches.push_back({a, std::move(child)});
    }
    return branches;
}

std::vector<StateBranch> ExactState::noncollapse(const std::vector<int>& targets) const {
    std::map<std::string, BigInt> masses;
    BigInt total = 0;
    for (std::size_t e = 0; e < amps_.size(); ++e) {
        if (amps_[e] == 0) continue;
        BigInt sq = amps_[e] * amps_[e];
        masses[restrict_entry(e, targets)] += sq;
        total += sq;
    }
    std::vector<StateBranch> branches;
    for (const auto& [outcome, mass_o] : masses) {
        ExactState child = *this;  // state vector untouched by design
        child.weight_ *= Rational(mass_o, total);
        child.dyadic_path_ = false;
        child.record_event(outcome);
        branches.push_back({outcome, std::move(child)});
    }
    return branches;
}

bool ExactState::force_project(const std::vector<int>& qubits, const std::string& bits) {
    if (qubits.size() != bits.size()) throw DomainError("projection length mismatch");
    BigInt remaining = 0;
    for (std::size_t e = 0; e < amps_.size(); ++e) {
        if (amps_[e] == 0) continue;
        if (restrict_entry(e, qubits) != bits) {
            amps_[e] = 0;
        } else {
            remaining += amps_[e] * amps_[e];
        }
    }
    if (remaining == 0) return false;
    std::size_t keep_mask = 0;
    for (int q : qubits) {
        if (slots_[q].kind == Kind::Live) keep_mask |= std::size_t{1} << slots_[q].live_index;
    }
    if (keep_mask) {
        std::vector<BigInt> rebased(amps_.size(), BigInt(0));
        for (std::size_t e = 0; e < amps_.size(); ++e) {
            if (amps_[e] != 0) rebased[e & ~keep_mask] = std::move(amps_[e]);
        }
        amps_ = std::move(rebased);
    }
    remove_from_live(qubits);
    for (std::size_t i = 0; i < qubits.size(); ++i) {
        Slot& s = slots_[qubits[i]];
        s.kind = Kind::Classical;
        s.bit = bits[i] == '1';
        s.live_index = -1;
    }
    reduce_shared_exponent();
    return true;
}

Rational ExactState::marginal_one(int qubit) const {
    const Slot& s = slots_[qubit];
    if (s.kind != Kind::Live) return Rational(s.bit ? 1 : 0);
    std::size_t mask = std::size_t{1} << s.live_index;
    BigInt one_mass = 0;
    BigInt total = 0;
    for (std::size_t e = 0; e < amps_.size(); ++e) {
        if (amps_[e] == 0) continue;
        BigInt sq = amps_[e] * amps_[e];
        total += sq;
        if (e & mask) one_mass += sq;
    }
    if (total == 0) throw std::logic_error("marginal on zero-mass state");
    return Rational(one_mass, total);
}

void ExactState::canonicalize_for_compare() {
    // Demote live qubits that are definite in every supported entry.
    for (int q = 0; q < width_; ++q) {
        Slot& s = slots_[q];
        if (s.kind != Kind::Live) continue;
        std::size_t mask = std::size_t{1} << s.live_index;
        int seen = -1;
        bool definite = true;
        for (std::size_t e = 0; e < amps_.size() && definite; ++e) {
            if (amps_[e] == 0) continue;
            int b = (e & mask) ? 1 : 0;
            if (seen < 0)
                seen = b;
            else if (seen != b)
                definite = false;
        }
        if (definite && seen >= 0) {
            std::vector<BigInt> packed(amps_.size() >> 1, BigInt(0));
            for (std::size_t e = 0; e < amps_.size(); ++e) {
                if (amps_[e] == 0) continue;
                std::size_t base = e & ~mask;
                std::size_t idx = 0;
                std::size_t out = 0;
                for (std::size_t p = 0; p < live_.size(); ++p) {
                    if (static_cast<int>(p) == s.live_index) continue;
                    if (base & (std::size_t{1} << p)) idx |= std::size_t{1} << out;
                    ++out;
                }
                packed[idx] = std::move(amps_[e]);
            }
            amps_ = std::move(packed);
            live_.erase(live_.begin() + s.live_index);
            for (std::size_t p = 0; p < live_.size(); ++p)
                slots_[live_[p]].live_index = static_cast<int>(p);
            s.kind = Kind::Known;
            s.bit = seen == 1;
            s.live_index = -1;
            --q;  // live indices shifted; rescan this qubit id is harmless
        }
    }
    // Sort live qubits ascending by qubit id.
    std::vector<int> order(live_.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return live_[a] < live_[b]; });
    bool sorted = true;
    for (std::size_t i = 0; i < order.size(); ++i) sorted &= order[i] == static_cast<int>(i);
    if (!sorted) {
        std::vector<BigInt> permuted(amps_.size(), BigInt(0));
        for (std::size_t e = 0; e < amps_.size(); ++e) {
            if (amps_[e] == 0) continue;
            std::size_t ne = 0;
            for (std::size_t np = 0; np < order.size(); ++np) {
                if (e & (std::size_t{1} << order[np])) ne |= std::size_t{1} << np;
            }
            permuted[ne] = std::move(amps_[e]);
        }
        amps_ = std::move(permuted);
        std::vector<int> new_live;
        for (int o : order) new_live.push_back(live_[o]);
        live_ = std::move(new_live);
        for (std::size_t p = 0; p < live_.size(); ++p)
            slots_[live_[p]].live_index = static_cast<int>(p);
    }
    reduce_shared_exponent();
}

bool ExactState::same_quantum_state(const ExactState& other) const {
    ExactState a = *this;
    ExactState b = other;
    a.canonicalize_for_compare();
    b.canonicalize_for_compare();
    if (a.width_ != b.width_ || a.half_exponent_ != b.half_exponent_ || a.live_ != b.live_ ||
        a.amps_ != b.amps_)
        return false;
    for (int q = 0; q < a.width_; ++q) {
        if (a.slots_[q].kind != b.slots_[q].kind) return false;
        if (a.slots_[q].kind != Kind::Live && a.slots_[q].bit != b.slots_[q].bit) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Exhaustive runner
// ---------------------------------------------------------------------------

namespace {

struct Leaf {
    TranscriptKey transcript;
    Rational prob;
    Rational joint;
    bool output_bit;
};

class ExhaustiveRunner {
public:
    ExhaustiveRunner(const Circuit& circuit, const ExecLimits& limits)
        : circuit_(circuit), limits_(limits) {}

    std::vector<Leaf> run(ExactState state, std::size_t op_index) {
        std::vector<Leaf> leaves;
        exec(std::move(state), op_index, leaves);
        return leaves;
    }

private:
    void exec(ExactState state, std::size_t op_index, std::vector<Leaf>& leaves) {
        for (; op_index < circuit_.ops.size(); ++op_index) {
            const CircuitOp& op = circuit_.ops[op_index];
            if (const auto* h = std::get_if<HadamardOp>(&op)) {
                state.apply(*h, limits_);
            } else if (const auto* x = std::get_if<XOp>(&op)) {
                state.apply(*x);
            } else if (const auto* t = std::get_if<ToffoliOp>(&op)) {
                state.apply(*t, limits_);
            } else if (const auto* q = std::get_if<OracleQueryOp>(&op)) {
                state.apply(*q, limits_);
            } else if (const auto* p = std::get_if<PostselectOp>(&op)) {
                state = state.postselect(p->target);
            } else if (const auto* m = std::get_if<MeasureOp>(&op)) {
                for (auto& br : state.measure(m->targets))
                    exec(std::move(br.state), op_index + 1, leaves);
                return;
            } else if (const auto* c = std::get_if<CorrMeasureOp>(&op)) {
                for (auto& br : state.corr_measure(c->partitions))
                    exec(std::move(br.state), op_index + 1, leaves);
                return;
            } else if (const auto* n = std::get_if<NonCollapseOp>(&op)) {
                for (auto& br : state.noncollapse(n->targets))
                    exec(std::move(br.state), op_index + 1, leaves);
                return;
            } else {
                throw DomainError("inline subroutine calls before simulation");
            }
        }
        if (state.kind(circuit_.output) != ExactState::Kind::Classical) {
            for (auto& br : state.measure({circuit_.output})) emit(std::move(br.state), leaves);
        } else {
            emit(std::move(state), leaves);
        }
    }

    void emit(ExactState state, std::vector<Leaf>& leaves) {
        if (leaves.size() + 1 > limits_.max_leaves) {
            throw LimitExceeded("exhaustive branch count would exceed the configured limit of " +
                                std::to_string(limits_.max_leaves) + " leaves");
        }
        leaves.push_back({state.transcript(), state.sequential_probability(), state.weight(),
                          state.bit(circuit_.output)});
    }

    const Circuit& circuit_;
    const ExecLimits& limits_;
};

OutcomeDistribution collect(std::vector<Leaf> leaves) {
    OutcomeDistribution dist;
    Rational sum;
    for (auto& leaf : leaves) {
        auto [it, inserted] = dist.probabilities.emplace(leaf.transcript, leaf.prob);
        if (!inserted) throw std::logic_error("duplicate transcript in exhaustive run");
        dist.joint_mass.emplace(leaf.transcript, leaf.joint);
        sum += leaf.prob;
        dist.mass_all += leaf.joint;
        if (leaf.output_bit) {
            dist.output1 += leaf.prob;
            dist.mass_output1 += leaf.joint;
        }
    }
    if (!(sum == Rational(1))) {
        throw std::logic_error("exhaustive probabilities sum to " + sum.str() + ", expected 1/1");
    }
    return dist;
}

}  // namespace

OutcomeDistribution run_exhaustive(const Circuit& circuit, const std::vector<bool>& input,
                                   const ExecLimits& limits, int jobs) {
    validate_or_throw(circuit);
    ExactState initial = ExactState::initial(circuit, input);
    ExhaustiveRunner runner(circuit, limits);
    if (jobs <= 1) return collect(runner.run(std::move(initial), 0));

    // Expand a frontier of independent branches, then evaluate them
    // concurrently; states are value snapshots so no mutation is shared.
    struct Pending {
        ExactState state;
        std::size_t op_index;
    };
    std::deque<Pending> frontier;
    frontier.push_back(Pending{std::move(initial), 0});
    std::vector<Leaf> done;
    auto want = static_cast<std::size_t>(jobs) * 4;
    while (frontier.size() < want) {
        bool advanced = false;
        std::size_t count = frontier.size();
        for (std::size_t i = 0; i < count; ++i) {
            Pending item = std::move(frontier.front());
            frontier.pop_front();
            const auto& ops = circuit.ops;
            if (item.op_index >= ops.size()) {
                for (auto& leaf : runner.run(std::move(item.state), item.op_index))
                    done.push_back(std::move(leaf));
                continue;
            }
            const CircuitOp& op = ops[item.op_index];
            if (const auto* m = std::get_if<MeasureOp>(&op)) {
                for (auto& br : item.state.measure(m->targets))
                    frontier.push_back(Pending{std::move(br.state), item.op_index + 1});
                advanced = true;
            } else if (const auto* c = std::get_if<CorrMeasureOp>(&op)) {
                for (auto& br : item.state.corr_measure(c->partitions))
                    frontier.push_back(Pending{std::move(br.state), item.op_index + 1});
                advanced = true;
            } else if (const auto* n = std::get_if<NonCollapseOp>(&op)) {
                for (auto& br : item.state.noncollapse(n->targets))
                    frontier.push_back(Pending{std::move(br.state), item.op_index + 1});
                advanced = true;
            } else {
                if (const auto* h = std::get_if<HadamardOp>(&op)) {
                    item.state.apply(*h, limits);
                } else if (const auto* x = std::get_if<XOp>(&op)) {
                    item.state.apply(*x);
                } else if (const auto* t = std::get_if<ToffoliOp>(&op)) {
                    item.state.apply(*t, limits);
                } else if (const auto* q = std::get_if<OracleQueryOp>(&op)) {
                    item.state.apply(*q, limits);
                } else if (const auto* p = std::get_if<PostselectOp>(&op)) {
                    item.state = item.state.postselect(p->target);
                } else {
                    throw DomainError("inline subroutine calls before simulation");
                }
                frontier.push_back(Pending{std::move(item.state), item.op_index + 1});
                advanced = true;
            }
        }
        if (!advanced) break;
    }
    std::vector<std::future<std::vector<Leaf>>> futures;
    for (auto& item : frontier) {
        futures.push_back(std::async(std::launch::async, [&runner, st = std::move(item.state),
                                                          idx = item.op_index]() mutable {
            return runner.run(std::move(st), idx);
        }));
    }
    for (auto& f : futures) {
        for (auto& leaf : f.get()) done.push_back(std::move(leaf));
    }
    return collect(std::move(done));
}

// ---------------------------------------------------------------------------
// Sampling runner
// ---------------------------------------------------------------------------

BigInt uniform_below(std::mt19937_64& rng, const BigInt& bound) {
    if (bound <= 0) throw DomainError("uniform_below requires a positive bound");
    if (bound == 1) return 0;
    unsigned bits = boost::multiprecision::msb(bound) + 1;
    while (true) {
        BigInt v = 0;
        unsigned filled = 0;
        while (filled < bits) {
            unsigned take = std::min(64u, bits - filled);
            std::uint64_t chunk = rng();
            if (take < 64) chunk &= (std::uint64_t{1} << take) - 1;
            v |= BigInt(chunk) << filled;
            filled += take;
        }
        if (v < bound) return v;
    }
}

namespace {

std::size_t pick_branch(std::mt19937_64& rng, const std::vector<Rational>& probs) {
    BigInt denom = 1;
    for (const auto& p : probs) {
        denom = denom / boost::multiprecision::gcd(denom, p.den()) * p.den();
    }
    BigInt draw = uniform_below(rng, denom);
    BigInt cumulative = 0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        cumulative += probs[i].num() * (denom / probs[i].den());
        if (draw < cumulative) return i;
    }
    return probs.size() - 1;
}

}  // namespace

SampleReport run_sampled(const Circuit& circuit, const std::vector<bool>& input, std::uint64_t seed,
                         std::uint64_t shots, const ExecLimits& limits) {
    validate_or_throw(circuit);
    SampleReport report;
    report.shots = shots;
    std::mt19937_64 rng(seed);
    for (std::uint64_t shot = 0; shot < shots; ++shot) {
        ExactState state = ExactState::initial(circuit, input);
        auto choose = [&](std::vector<StateBranch> branches) {
            std::vector<Rational> probs;
            Rational base = state.sequential_probability();
            for (const auto& b : branches) probs.push_back(b.state.sequential_probability() / base);
            std::size_t pick = pick_branch(rng, probs);
            return std::move(branches[pick].state);
        };
        for (const auto& op : circuit.ops) {
            if (const auto* h = std::get_if<HadamardOp>(&op)) {
                state.apply(*h, limits);
            } else if (const auto* x = std::get_if<XOp>(&op)) {
                state.apply(*x);
            } else if (const auto* t = std::get_if<ToffoliOp>(&op)) {
                state.apply(*t, limits);
            } else if (const auto* q = std::get_if<OracleQueryOp>(&op)) {
                state.apply(*q, limits);
            } else if (const auto* p = std::get_if<PostselectOp>(&op)) {
                state = state.postselect(p->target);
            } else if (const auto* m = std::get_if<MeasureOp>(&op)) {
                state = choose(state.measure(m->targets));
            } else if (const auto* c = std::get_if<CorrMeasureOp>(&op)) {
                state = choose(state.corr_measure(c->partitions));
            } else if (const auto* n = std::get_if<NonCollapseOp>(&op)) {
                state = choose(state.noncollapse(n->targets));
            } else {
                throw DomainError("inline subroutine calls before simulation");
            }
        }
        if (state.kind(circuit.output) != ExactState::Kind::Classical) {
            state = choose(state.measure({circuit.output}));
        }
        ++report.counts[state.transcript()];
        if (state.bit(circuit.output)) ++report.output1_count;
    }
    return report;
}

// ---------------------------------------------------------------------------
// Output formats
// ---------------------------------------------------------------------------

std::map<std::string, Rational> OutcomeDistribution::flat() const {
    std::map<std::string, Rational> out;
    for (const auto& [key, p] : probabilities) out[flatten_transcript(key)] += p;
    return out;
}

std::string OutcomeDistribution::to_tsv() const {
    std::ostringstream out;
    for (const auto& [key, p] : flat()) out << key << "\t" << p.str() << "\n";
    out << "OUTPUT1\t" << output1.str() << "\n";
    return out.str();
}

std::string SampleReport::to_tsv() const {
    std::map<std::string, std::uint64_t> flat;
    for (const auto& [key, c] : counts) flat[flatten_transcript(key)] += c;
    std::ostringstream out;
    for (const auto& [key, c] : flat) out << key << "\t" << c << "\n";
    out << "OUTPUT1\t" << output1_count << "\t" << shots << "\n";
    return out.str();
}

}  // namespace metaq
