#include "metaq/circuit.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>

namespace metaq {

std::vector<int> Circuit::effective_inputs(std::size_t input_len) const {
    if (!inputs.empty()) return inputs;
    std::vector<int> result(input_len);
    std::iota(result.begin(), result.end(), 0);
    return result;
}

namespace {

class Validator {
public:
    explicit Validator(const Circuit& circuit) : circuit_(circuit) {
        kinds_.assign(circuit.width, RegKind::Quantum);
    }

    std::vector<ValidationIssue> run() {
        if (circuit_.width <= 0) issue(circuit_.ops.size(), "circuit width must be positive");
        for (int q : circuit_.inputs) check_index(circuit_.ops.size(), q, "input");
        for (idx_ = 0; idx_ < circuit_.ops.size(); ++idx_) {
            std::visit([this](const auto& op) { check(op); }, circuit_.ops[idx_]);
        }
        if (circuit_.output < 0 || circuit_.output >= circuit_.width) {
            issue(circuit_.ops.size(), "missing or out-of-range output qubit");
        }
        for (const auto& [name, sub] : circuit_.subcircuits) {
            for (const auto& sub_issue : validate_subcircuit(name, sub)) issues_.push_back(sub_issue);
        }
        check_subcall_acyclicity();
        return issues_;
    }

    std::vector<RegKind> kinds() && { return std::move(kinds_); }

private:
    void issue(std::size_t at, std::string message) { issues_.push_back({at, std::move(message)}); }

    bool check_index(std::size_t at, int q, const std::string& role) {
        if (q < 0 || q >= circuit_.width) {
            issue(at, role + " qubit " + std::to_string(q) + " out of range");
            return false;
        }
        return true;
    }

    bool quantum(int q) const { return kinds_[q] == RegKind::Quantum; }

    bool require_quantum(int q, const std::string& what) {
        if (!check_index(idx_, q, what)) return false;
        if (!quantum(q)) {
            issue(idx_, "quantum op on classical register " + std::to_string(q) + " (" + what + ")");
            return false;
        }
        return true;
    }

    bool distinct(const std::vector<int>& qs) {
        std::set<int> seen(qs.begin(), qs.end());
        if (seen.size() != qs.size()) {
            issue(idx_, "duplicate qubit index within one op");
            return false;
        }
        return true;
    }

    void check(const HadamardOp& op) { require_quantum(op.target, "h target"); }

    void check(const XOp& op) {
        // X is a permutation; flipping a collapsed register is a classical
        // bit flip, so classical targets are allowed.
        check_index(idx_, op.target, "x target");
    }

    void check(const ToffoliOp& op) {
        bool ok = check_index(idx_, op.control1, "ccx control") &
                  check_index(idx_, op.control2, "ccx control") &
                  check_index(idx_, op.target, "ccx target");
        distinct({op.control1, op.control2, op.target});
        if (!ok) return;
        // A classical target may only be driven by classical controls;
        // otherwise the collapsed bit would have to re-entangle.
        if (!quantum(op.target) && (quantum(op.control1) || quantum(op.control2))) {
            issue(idx_, "ccx with quantum control and classical target");
        }
    }

    void check(const MeasureOp& op) {
        if (op.targets.empty()) issue(idx_, "measure requires at least one target");
        distinct(op.targets);
        for (int q : op.targets) {
            if (require_quantum(q, "measure target")) kinds_[q] = RegKind::Classical;
        }
    }

    void check(const PostselectOp& op) {
        if (require_quantum(op.target, "postselect target")) kinds_[op.target] = RegKind::Classical;
    }

    void check(const CorrMeasureOp& op) {
        if (op.partitions.empty()) {
            issue(idx_, "correlated measurement requires at least one partition");
            return;
        }
        std::size_t size = op.partitions.front().size();
        if (size == 0) issue(idx_, "empty correlated-measurement partition");
        std::vector<int> all;
        for (const auto& part : op.partitions) {
            if (part.size() != size) issue(idx_, "partitions not equisized");
            all.insert(all.end(), part.begin(), part.end());
        }
        if (!distinct(all)) issue(idx_, "partitions not disjoint");
        for (int q : all) {
            // Correlated measurements on classical registers are rejected
            // rather than given ad-hoc semantics.
            if (require_quantum(q, "corr target")) kinds_[q] = RegKind::Classical;
        }
    }

    void check(const NonCollapseOp& op) {
        if (op.targets.empty()) issue(idx_, "noncollapse requires at least one target");
        distinct(op.targets);
        for (int q : op.targets) require_quantum(q, "noncollapse target");
    }

    void check(const SubCallOp& op) {
        if (!circuit_.subcircuits.count(op.name)) {
            issue(idx_, "unknown subroutine '" + op.name + "'");
        } else {
            const Circuit& sub = circuit_.subcircuits.at(op.name);
            if (!sub.inputs.empty() && sub.inputs.size() != op.inputs.size()) {
                issue(idx_, "subroutine '" + op.name + "' expects " +
                                std::to_string(sub.inputs.size()) + " inputs");
            }
            if (static_cast<int>(op.inputs.size()) > sub.width) {
                issue(idx_, "subroutine '" + op.name + "' narrower than its input list");
            }
        }
        std::vector<int> all = op.inputs;
        all.push_back(op.output);
        distinct(all);
        for (int q : op.inputs) {
            if (!check_index(idx_, q, "call input")) continue;
            if (quantum(q)) issue(idx_, "subroutine input qubit " + std::to_string(q) + " is not classical");
        }
        require_quantum(op.output, "call output");
        // The measured subroutine result is copied onto the output register,
        // which stays a quantum register holding a basis value.
    }

    void check(const OracleQueryOp& op) {
        distinct([&] {
            std::vector<int> all = op.index_qubits;
            all.push_back(op.target);
            return all;
        }());
        if (op.index_qubits.empty()) issue(idx_, "query requires at least one index qubit");
        for (int q : op.index_qubits) check_index(idx_, q, "query index");
        require_quantum(op.target, "query target");
    }

    std::vector<ValidationIssue> validate_subcircuit(const std::string& name, const Circuit& sub) {
        Circuit standalone = sub;
        standalone.subcircuits = circuit_.subcircuits;  // subs may call siblings
        standalone.subcircuits.erase(name);             // direct self-recursion is cyclic anyway
        std::vector<ValidationIssue> nested;
        Validator v(standalone);
        for (auto& i : v.run_without_subs()) {
            nested.push_back({circuit_.ops.size(), "in sub '" + name + "': " + i.message});
        }
        return nested;
    }

    std::vector<ValidationIssue> run_without_subs() {
        if (circuit_.width <= 0) issue(circuit_.ops.size(), "circuit width must be positive");
        for (idx_ = 0; idx_ < circuit_.ops.size(); ++idx_) {
            std::visit([this](const auto& op) { check(op); }, circuit_.ops[idx_]);
        }
        if (circuit_.output < 0 || circuit_.output >= circuit_.width) {
            issue(circuit_.ops.size(), "missing or out-of-range output qubit");
        }
        return issues_;
    }

    void check_subcall_acyclicity() {
        std::map<std::string, int> state;  // 0 unseen, 1 visiting, 2 done
        for (const auto& [name, sub] : circuit_.subcircuits) {
            if (!visit_sub(name, state)) {
                issue(circuit_.ops.size(), "cyclic subroutine reference through '" + name + "'");
                return;
            }
        }
    }

    bool visit_sub(const std::string& name, std::map<std::string, int>& state) {
        auto it = circuit_.subcircuits.find(name);
        if (it == circuit_.subcircuits.end()) return true;  // reported elsewhere
        int& s = state[name];
        if (s == 1) return false;
        if (s == 2) return true;
        s = 1;
        for (const auto& op : it->second.ops) {
            if (const auto* call = std::get_if<SubCallOp>(&op)) {
                if (!visit_sub(call->name, state)) return false;
            }
        }
        s = 2;
        return true;
    }

    const Circuit& circuit_;
    std::vector<RegKind> kinds_;
    std::vector<ValidationIssue> issues_;
    std::size_t idx_ = 0;
};

}  // namespace

std::vector<ValidationIssue> validate(const Circuit& circuit) {
    return Validator(circuit).run();
}

void validate_or_throw(const Circuit& circuit) {
    auto issues = validate(circuit);
    if (issues.empty()) return;
    std::ostringstream msg;
    msg << "invalid circuit:";
    for (const auto& i : issues) {
        msg << " [op " << i.op_index << "] " << i.message << ";";
    }
    throw ValidationError(msg.str());
}

std::vector<RegKind> final_register_kinds(const Circuit& circuit) {
    std::vector<RegKind> kinds(circuit.width, RegKind::Quantum);
    for (const auto& op : circuit.ops) {
        if (const auto* m = std::get_if<MeasureOp>(&op)) {
            for (int q : m->targets) kinds[q] = RegKind::Classical;
        } else if (const auto* p = std::get_if<PostselectOp>(&op)) {
            kinds[p->target] = RegKind::Classical;
        } else if (const auto* c = std::get_if<CorrMeasureOp>(&op)) {
            for (const auto& part : c->partitions)
                for (int q : part) kinds[q] = RegKind::Classical;
        }
    }
    return kinds;
}

namespace {

int count_hadamards_rec(const Circuit& circuit, const std::map<std::string, Circuit>& subs,
                        int depth) {
    if (depth > 64) throw ValidationError("cyclic subroutine reference");
    int count = 0;
    for (const auto& op : circuit.ops) {
        if (std::holds_alternative<HadamardOp>(op)) {
            ++count;
        } else if (const auto* call = std::get_if<SubCallOp>(&op)) {
            auto it = subs.find(call->name);
            if (it == subs.end()) throw ValidationError("unknown subroutine '" + call->name + "'");
            count += count_hadamards_rec(it->second, subs, depth + 1);
        }
    }
    return count;
}

}  // namespace

int count_hadamards(const Circuit& circuit) {
    return count_hadamards_rec(circuit, circuit.subcircuits, 0);
}

namespace {

std::string join(const std::vector<int>& v, const char* sep) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += sep;
        out += std::to_string(v[i]);
    }
    return out;
}

void render_ops(std::ostringstream& out, const Circuit& circuit, const std::string& indent) {
    for (const auto& op : circuit.ops) {
        out << indent;
        if (const auto* h = std::get_if<HadamardOp>(&op)) {
            out << "h " << h->target;
        } else if (const auto* x = std::get_if<XOp>(&op)) {
            out << "x " << x->target;
        } else if (const auto* t = std::get_if<ToffoliOp>(&op)) {
            out << "ccx " << t->control1 << " " << t->control2 << " " << t->target;
        } else if (const auto* m = std::get_if<MeasureOp>(&op)) {
            out << "measure " << join(m->targets, " ");
        } else if (const auto* p = std::get_if<PostselectOp>(&op)) {
            out << "postselect " << p->target;
        } else if (const auto* c = std::get_if<CorrMeasureOp>(&op)) {
            out << "corr";
            for (const auto& part : c->partitions) out << " [" << join(part, ",") << "]";
        } else if (const auto* n = std::get_if<NonCollapseOp>(&op)) {
            out << "noncollapse " << join(n->targets, " ");
        } else if (const auto* s = std::get_if<SubCallOp>(&op)) {
            out << "call " << s->name << " in " << join(s->inputs, ",") << " out " << s->output;
        } else if (const auto* q = std::get_if<OracleQueryOp>(&op)) {
            out << "query [" << join(q->index_qubits, ",") << "] " << q->target;
        }
        out << "\n";
    }
}

}  // namespace

std::string render_circuit(const Circuit& circuit) {
    std::ostringstream out;
    out << "qubits " << circuit.width << "\n";
    if (!circuit.inputs.empty()) out << "inputs " << join(circuit.inputs, ",") << "\n";
    for (const auto& [name, sub] : circuit.subcircuits) {
        out << "sub " << name << "\n";
        out << "  qubits " << sub.width << "\n";
        if (!sub.inputs.empty()) out << "  inputs " << join(sub.inputs, ",") << "\n";
        render_ops(out, sub, "  ");
        out << "  output " << sub.output << "\n";
        out << "endsub\n";
    }
    render_ops(out, circuit, "");
    out << "output " << circuit.output << "\n";
    return out.str();
}

std::size_t transcript_event_count(const Circuit& circuit) {
    std::size_t events = 0;
    for (const auto& op : circuit.ops) {
        if (std::holds_alternative<MeasureOp>(op) || std::holds_alternative<PostselectOp>(op) ||
            std::holds_alternative<CorrMeasureOp>(op) || std::holds_alternative<NonCollapseOp>(op)) {
            ++events;
        }
    }
    if (final_register_kinds(circuit)[circuit.output] == RegKind::Quantum) ++events;
    return events;
}

}  // namespace metaq
