#include "metaq/parser.hpp"

#include <fstream>
#include <optional>
#include <sstream>

namespace metaq {

namespace {

struct Line {
    std::size_t number;
    std::vector<std::string> tokens;
};

std::vector<Line> tokenize(const std::string& text) {
    std::vector<Line> lines;
    std::istringstream in(text);
    std::string raw;
    std::size_t number = 0;
    while (std::getline(in, raw)) {
        ++number;
        if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
        std::istringstream ls(raw);
        Line line{number, {}};
        std::string tok;
        while (ls >> tok) line.tokens.push_back(tok);
        if (!line.tokens.empty()) lines.push_back(std::move(line));
    }
    return lines;
}

int parse_int(const Line& line, const std::string& tok) {
    try {
        std::size_t pos = 0;
        int v = std::stoi(tok, &pos);
        if (pos != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw ParseError(line.number, "expected integer, got '" + tok + "'");
    }
}

std::vector<int> parse_int_list(const Line& line, const std::string& tok) {
    std::vector<int> out;
    std::string item;
    std::istringstream in(tok);
    while (std::getline(in, item, ',')) {
        if (item.empty()) throw ParseError(line.number, "empty entry in qubit list '" + tok + "'");
        out.push_back(parse_int(line, item));
    }
    if (out.empty()) throw ParseError(line.number, "empty qubit list");
    return out;
}

std::vector<int> parse_bracket_group(const Line& line, const std::string& tok) {
    if (tok.size() < 2 || tok.front() != '[' || tok.back() != ']')
        throw ParseError(line.number, "expected bracketed qubit list, got '" + tok + "'");
    return parse_int_list(line, tok.substr(1, tok.size() - 2));
}

class Parser {
public:
    explicit Parser(const std::string& text) : lines_(tokenize(text)) {}

    Circuit run() {
        Circuit circuit = parse_body(/*in_sub=*/false);
        if (pos_ < lines_.size())
            throw ParseError(lines_[pos_].number, "unexpected '" + lines_[pos_].tokens[0] + "'");
        auto issues = validate(circuit);
        if (!issues.empty()) {
            std::ostringstream msg;
            msg << "validation failed:";
            for (const auto& i : issues) msg << " [op " << i.op_index << "] " << i.message << ";";
            throw ValidationError(msg.str());
        }
        return circuit;
    }

private:
    Circuit parse_body(bool in_sub) {
        Circuit circuit;
        bool saw_width = false;
        bool saw_output = false;
        while (pos_ < lines_.size()) {
            const Line& line = lines_[pos_];
            const std::string& head = line.tokens[0];
            if (head == "endsub") {
                if (!in_sub) throw ParseError(line.number, "endsub outside of sub block");
                break;
            }
            ++pos_;
            if (head == "qubits") {
                expect_arity(line, 2);
                if (saw_width) throw ParseError(line.number, "duplicate qubits directive");
                circuit.width = parse_int(line, line.tokens[1]);
                saw_width = true;
            } else if (head == "inputs") {
                expect_arity(line, 2);
                circuit.inputs = parse_int_list(line, line.tokens[1]);
            } else if (head == "output") {
                expect_arity(line, 2);
                if (saw_output) throw ParseError(line.number, "duplicate output directive");
                circuit.output = parse_int(line, line.tokens[1]);
                saw_output = true;
            } else if (head == "sub") {
                if (in_sub) throw ParseError(line.number, "nested sub blocks are not supported");
                expect_arity(line, 2);
                std::string name = line.tokens[1];
                if (circuit.subcircuits.count(name))
                    throw ParseError(line.number, "duplicate subroutine '" + name + "'");
                Circuit sub = parse_body(/*in_sub=*/true);
                if (pos_ >= lines_.size()) throw ParseError(line.number, "sub without endsub");
                ++pos_;  // consume endsub
                circuit.subcircuits.emplace(std::move(name), std::move(sub));
            } else {
                circuit.ops.push_back(parse_op(line));
            }
        }
        if (!saw_width) {
            std::size_t n = lines_.empty() ? 1 : lines_.back().number;
            throw ParseError(n, "missing qubits directive");
        }
        return circuit;
    }

    CircuitOp parse_op(const Line& line) {
        const auto& t = line.tokens;
        const std::string& head = t[0];
        if (head == "h") {
            expect_arity(line, 2);
            return HadamardOp{parse_int(line, t[1])};
        }
        if (head == "x") {
            expect_arity(line, 2);
            return XOp{parse_int(line, t[1])};
        }
        if (head == "ccx") {
            expect_arity(line, 4);
            return ToffoliOp{parse_int(line, t[1]), parse_int(line, t[2]), parse_int(line, t[3])};
        }
        if (head == "measure") {
            if (t.size() < 2) throw ParseError(line.number, "measure requires targets");
            MeasureOp op;
            for (std::size_t i = 1; i < t.size(); ++i) op.targets.push_back(parse_int(line, t[i]));
            return op;
        }
        if (head == "postselect") {
            expect_arity(line, 2);
            return PostselectOp{parse_int(line, t[1])};
        }
        if (head == "corr") {
            if (t.size() < 2) throw ParseError(line.number, "corr requires partitions");
            CorrMeasureOp op;
            for (std::size_t i = 1; i < t.size(); ++i)
                op.partitions.push_back(parse_bracket_group(line, t[i]));
            return op;
        }
        if (head == "noncollapse") {
            if (t.size() < 2) throw ParseError(line.number, "noncollapse requires targets");
            NonCollapseOp op;
            for (std::size_t i = 1; i < t.size(); ++i) op.targets.push_back(parse_int(line, t[i]));
            return op;
        }
        if (head == "call") {
            // call NAME in Q,... out Q
            if (t.size() != 6 || t[2] != "in" || t[4] != "out")
                throw ParseError(line.number, "expected: call NAME in Q,... out Q");
            return SubCallOp{t[1], parse_int_list(line, t[3]), parse_int(line, t[5])};
        }
        if (head == "query") {
            expect_arity(line, 3);
            return OracleQueryOp{parse_bracket_group(line, t[1]), parse_int(line, t[2])};
        }
        throw ParseError(line.number, "unknown directive '" + head + "'");
    }

    void expect_arity(const Line& line, std::size_t n) {
        if (line.tokens.size() != n)
            throw ParseError(line.number, "'" + line.tokens[0] + "' expects " +
                                              std::to_string(n - 1) + " argument(s)");
    }

    std::vector<Line> lines_;
    std::size_t pos_ = 0;
};

}  // namespace

Circuit parse_circuit(const std::string& text) {
    return Parser(text).run();
}

Circuit load_circuit(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open circuit file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_circuit(buf.str());
}

}  // namespace metaq
