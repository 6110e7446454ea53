#include "metaq/reductions.hpp"

#include <algorithm>
#include <functional>
#include <set>

namespace metaq {

namespace {

CircuitOp remap_op(const CircuitOp& op, const std::function<int(int)>& f) {
    if (const auto* h = std::get_if<HadamardOp>(&op)) return HadamardOp{f(h->target)};
    if (const auto* x = std::get_if<XOp>(&op)) return XOp{f(x->target)};
    if (const auto* t = std::get_if<ToffoliOp>(&op))
        return ToffoliOp{f(t->control1), f(t->control2), f(t->target)};
    if (const auto* m = std::get_if<MeasureOp>(&op)) {
        MeasureOp out;
        for (int q : m->targets) out.targets.push_back(f(q));
        return out;
    }
    if (const auto* p = std::get_if<PostselectOp>(&op)) return PostselectOp{f(p->target)};
    if (const auto* c = std::get_if<CorrMeasureOp>(&op)) {
        CorrMeasureOp out;
        for (const auto& part : c->partitions) {
            std::vector<int> mapped;
            for (int q : part) mapped.push_back(f(q));
            out.partitions.push_back(std::move(mapped));
        }
        return out;
    }
    if (const auto* n = std::get_if<NonCollapseOp>(&op)) {
        NonCollapseOp out;
        for (int q : n->targets) out.targets.push_back(f(q));
        return out;
    }
    if (const auto* s = std::get_if<SubCallOp>(&op)) {
        SubCallOp out{s->name, {}, f(s->output)};
        for (int q : s->inputs) out.inputs.push_back(f(q));
        return out;
    }
    const auto& q = std::get<OracleQueryOp>(op);
    OracleQueryOp out{{}, f(q.target)};
    for (int i : q.index_qubits) out.index_qubits.push_back(f(i));
    return out;
}

bool is_event_op(const CircuitOp& op) {
    return std::holds_alternative<MeasureOp>(op) || std::holds_alternative<PostselectOp>(op) ||
           std::holds_alternative<CorrMeasureOp>(op) || std::holds_alternative<NonCollapseOp>(op);
}

std::vector<std::size_t> identity_event_map(const Circuit& circuit) {
    std::vector<std::size_t> map(transcript_event_count(circuit));
    for (std::size_t i = 0; i < map.size(); ++i) map[i] = i;
    return map;
}

}  // namespace

CompiledCircuit compile_postselect_to_corr(const Circuit& circuit) {
    validate_or_throw(circuit);
    Circuit out = circuit;
    out.ops.clear();
    int fresh = circuit.width;
    for (const auto& op : circuit.ops) {
        if (const auto* p = std::get_if<PostselectOp>(&op)) {
            int leader = fresh++;
            out.ops.push_back(XOp{leader});
            out.ops.push_back(CorrMeasureOp{{{leader}, {p->target}}});
        } else {
            out.ops.push_back(op);
        }
    }
    out.width = fresh;
    return {std::move(out), identity_event_map(circuit)};
}

CompiledCircuit compile_adpost_to_corr(const Circuit& circuit) {
    validate_or_throw(circuit);
    Circuit out = circuit;
    out.ops.clear();
    int fresh = circuit.width;
    for (const auto& op : circuit.ops) {
        if (const auto* p = std::get_if<PostselectOp>(&op)) {
            int leader = fresh++;
            out.ops.push_back(XOp{leader});
            out.ops.push_back(CorrMeasureOp{{{leader}, {p->target}}});
        } else if (const auto* m = std::get_if<MeasureOp>(&op)) {
            // Leader = the measured register; partner = fresh qubits in equal
            // superposition, so every outcome the leader supports is valid.
            std::vector<int> partners;
            for (std::size_t i = 0; i < m->targets.size(); ++i) {
                int f = fresh++;
                out.ops.push_back(HadamardOp{f});
                partners.push_back(f);
            }
            out.ops.push_back(CorrMeasureOp{{m->targets, partners}});
        } else {
            out.ops.push_back(op);
        }
    }
    out.width = fresh;
    return {std::move(out), identity_event_map(circuit)};
}

CompiledCircuit compile_pdqp_to_corr(const Circuit& circuit) {
    validate_or_throw(circuit);
    int copies = 0;  // P frozen copies; the main run is copy index P
    for (const auto& op : circuit.ops) {
        if (std::holds_alternative<NonCollapseOp>(op)) ++copies;
        if (std::holds_alternative<PostselectOp>(op) || std::holds_alternative<CorrMeasureOp>(op) ||
            std::holds_alternative<SubCallOp>(op) || std::holds_alternative<OracleQueryOp>(op)) {
            throw DomainError(
                "pdqp compilation accepts Hadamard/X/Toffoli, measure and noncollapse ops only");
        }
    }
    const int w = circuit.width;
    const int main_copy = copies;
    auto map_to = [w](int copy) {
        return [copy, w](int q) { return copy * w + q; };
    };

    Circuit out;
    out.width = (copies + 1) * w;
    out.output = main_copy * w + circuit.output;
    if (!circuit.inputs.empty()) {
        for (int c = 0; c <= copies; ++c)
            for (int q : circuit.inputs) out.inputs.push_back(c * w + q);
    }

    std::vector<std::pair<int, std::vector<int>>> pending;  // (copy, frozen qubits)
    int seen_nc = 0;
    std::size_t measure_events = 0;
    std::vector<std::size_t> source_slots;  // per source event: compiled index
    for (const auto& op : circuit.ops) {
        if (const auto* n = std::get_if<NonCollapseOp>(&op)) {
            // Copy `seen_nc` stops right before this non-collapsing
            // measurement; its sample is read out at circuit end.
            pending.push_back({seen_nc, n->targets});
            source_slots.push_back(0);  // placeholder, fixed below
            ++seen_nc;
        } else if (const auto* m = std::get_if<MeasureOp>(&op)) {
            CorrMeasureOp corr;
            corr.partitions.push_back([&] {
                std::vector<int> part;
                for (int q : m->targets) part.push_back(main_copy * w + q);
                return part;
            }());
            for (int c = seen_nc; c < copies; ++c) {
                std::vector<int> part;
                for (int q : m->targets) part.push_back(c * w + q);
                corr.partitions.push_back(std::move(part));
            }
            out.ops.push_back(std::move(corr));
            source_slots.push_back(measure_events++);
        } else {
            for (int c = seen_nc; c <= copies; ++c)
                out.ops.push_back(remap_op(op, map_to(c)));
        }
    }
    // Frozen copies are standard-measured at circuit end, in copy order.
    int nc_index = 0;
    std::size_t event_cursor = 0;
    for (std::size_t i = 0; i < circuit.ops.size(); ++i) {
        if (!is_event_op(circuit.ops[i])) continue;
        if (std::holds_alternative<NonCollapseOp>(circuit.ops[i])) {
            source_slots[event_cursor] = measure_events + nc_index;
            ++nc_index;
        }
        ++event_cursor;
    }
    for (const auto& [copy, targets] : pending) {
        MeasureOp m;
        for (int q : targets) m.targets.push_back(copy * w + q);
        out.ops.push_back(std::move(m));
    }

    std::vector<std::size_t> event_map = source_slots;
    if (final_register_kinds(circuit)[circuit.output] == RegKind::Quantum) {
        event_map.push_back(measure_events + copies);
    }
    return {std::move(out), std::move(event_map)};
}

Circuit amplify(const Circuit& circuit, int m) {
    validate_or_throw(circuit);
    if (m < 1 || m % 2 == 0) throw DomainError("amplification repetition count must be odd");
    if (m == 1) return circuit;
    for (const auto& op : circuit.ops) {
        if (std::holds_alternative<SubCallOp>(op))
            throw DomainError("inline subroutine calls before amplification");
    }
    const int w = circuit.width;
    Circuit out;
    out.subcircuits = circuit.subcircuits;
    bool output_quantum = final_register_kinds(circuit)[circuit.output] == RegKind::Quantum;
    for (int c = 0; c < m; ++c) {
        auto f = [c, w](int q) { return c * w + q; };
        for (const auto& op : circuit.ops) out.ops.push_back(remap_op(op, f));
        if (output_quantum) out.ops.push_back(MeasureOp{{c * w + circuit.output}});
        if (!circuit.inputs.empty()) {
            for (int q : circuit.inputs) out.inputs.push_back(c * w + q);
        }
    }
    std::vector<int> votes;
    for (int c = 0; c < m; ++c) votes.push_back(c * w + circuit.output);

    int next = m * w;
    auto chain_and = [&](const std::vector<int>& bits) {
        int acc = bits[0];
        for (std::size_t i = 1; i < bits.size(); ++i) {
            int t = next++;
            out.ops.push_back(ToffoliOp{acc, bits[i], t});
            acc = t;
        }
        return acc;
    };

    // Majority = OR over AND of every minimal winning subset of vote bits.
    std::vector<int> subset_bits((m + 1) / 2);
    std::vector<int> or_inputs;
    std::function<void(int, int)> enumerate = [&](int start, int chosen) {
        if (chosen == static_cast<int>(subset_bits.size())) {
            or_inputs.push_back(chain_and(subset_bits));
            return;
        }
        for (int i = start; i <= m - (static_cast<int>(subset_bits.size()) - chosen); ++i) {
            subset_bits[chosen] = votes[i];
            enumerate(i + 1, chosen + 1);
        }
    };
    enumerate(0, 0);

    int result;
    if (or_inputs.size() == 1) {
        result = or_inputs[0];
    } else {
        for (int r : or_inputs) out.ops.push_back(XOp{r});
        result = chain_and(or_inputs);
        out.ops.push_back(XOp{result});
    }
    out.width = next;
    out.output = result;
    return out;
}

namespace {

Circuit inline_rec(const Circuit& circuit, int m, std::set<std::string>& stack);

struct Inliner {
    const Circuit& source;
    int m;
    std::set<std::string>& stack;
    Circuit out;
    int next;
    int one_q = -1;

    Circuit run() {
        out.width = source.width;
        out.output = source.output;
        out.inputs = source.inputs;
        next = source.width;
        bool any_call = false;
        for (const auto& op : source.ops)
            if (std::holds_alternative<SubCallOp>(op)) any_call = true;
        if (any_call) {
            one_q = next++;
            out.ops.push_back(XOp{one_q});  // constant-1 ancilla for classical copies
        }
        for (const auto& op : source.ops) {
            if (const auto* call = std::get_if<SubCallOp>(&op)) {
                expand(*call);
            } else {
                out.ops.push_back(op);
            }
        }
        out.width = next;
        return std::move(out);
    }

    void expand(const SubCallOp& call) {
        auto it = source.subcircuits.find(call.name);
        if (it == source.subcircuits.end())
            throw ValidationError("unknown subroutine '" + call.name + "'");
        if (stack.count(call.name))
            throw ValidationError("cyclic subroutine reference through '" + call.name + "'");
        stack.insert(call.name);
        Circuit sub = it->second;
        sub.subcircuits = source.subcircuits;
        Circuit flat = inline_rec(sub, m, stack);
        stack.erase(call.name);

        const int sub_width = flat.width;
        Circuit body = m == 1 ? flat : amplify(flat, m);
        const int base = next;
        next += body.width;

        // Toffoli fanout of the classical input bits into every copy's input
        // register; quantum data is never cloned.
        std::vector<int> slots = flat.effective_inputs(call.inputs.size());
        int copy_count = m == 1 ? 1 : m;
        for (int c = 0; c < copy_count; ++c) {
            for (std::size_t i = 0; i < call.inputs.size(); ++i) {
                out.ops.push_back(ToffoliOp{call.inputs[i], one_q, base + c * sub_width + slots[i]});
            }
        }
        for (const auto& op : body.ops)
            out.ops.push_back(remap_op(op, [base](int q) { return base + q; }));
        int sub_out = base + body.output;
        if (final_register_kinds(body)[body.output] == RegKind::Quantum) {
            out.ops.push_back(MeasureOp{{sub_out}});
        }
        out.ops.push_back(ToffoliOp{sub_out, one_q, call.output});
    }
};

Circuit inline_rec(const Circuit& circuit, int m, std::set<std::string>& stack) {
    Inliner inliner{circuit, m, stack, {}, 0};
    Circuit result = inliner.run();
    result.subcircuits.clear();
    return result;
}

}  // namespace

Circuit inline_subcalls(const Circuit& circuit, int m) {
    validate_or_throw(circuit);
    if (m < 1 || m % 2 == 0) throw DomainError("amplification repetition count must be odd");
    std::set<std::string> stack;
    return inline_rec(circuit, m, stack);
}

Circuit elide_first_measurement(const Circuit& circuit) {
    Circuit out = circuit;
    for (std::size_t i = 0; i < out.ops.size(); ++i) {
        if (auto* mop = std::get_if<MeasureOp>(&out.ops[i])) {
            if (mop->targets.size() > 1) {
                mop->targets.erase(mop->targets.begin());
            } else {
                out.ops.erase(out.ops.begin() + static_cast<std::ptrdiff_t>(i));
            }
            return out;
        }
    }
    throw DomainError("circuit contains no measurement to elide");
}

OutcomeDistribution remap_events(const OutcomeDistribution& dist,
                                 const std::vector<std::size_t>& event_map) {
    OutcomeDistribution out;
    out.output1 = dist.output1;
    out.mass_all = dist.mass_all;
    out.mass_output1 = dist.mass_output1;
    for (const auto& [key, p] : dist.probabilities) {
        if (key.size() != event_map.size())
            throw DomainError("transcript length does not match the event map");
        TranscriptKey mapped(key.size());
        for (std::size_t i = 0; i < event_map.size(); ++i) mapped[i] = key[event_map[i]];
        out.probabilities[mapped] = p;
        out.joint_mass[mapped] = dist.joint_mass.at(key);
    }
    return out;
}

}  // namespace metaq
