#include <cctype>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "gridcep/milp.hpp"

namespace gridcep::milp {

namespace {

void write_terms(std::ostream& out, const ModelInstance& m,
                 const std::vector<std::pair<std::int32_t, double>>& terms) {
    bool first = true;
    for (auto& [i, c] : terms) {
        double coef = c;
        if (first) {
            if (coef < 0) out << "- ";
            first = false;
        } else {
            out << (coef < 0 ? " - " : " + ");
        }
        out << format_full(std::abs(coef)) << ' '
            << m.render(m.variables()[static_cast<std::size_t>(i)].key);
    }
    if (first) out << "0 __zero";  // empty expression placeholder
}

}  // namespace

void write_lp(const ModelInstance& model, std::ostream& out) {
    out << "\\ gridcep LP export\n";
    if (model.objective_constant() != 0.0)
        out << "\\ objective_constant: " << format_full(model.objective_constant()) << "\n";
    out << "Minimize\n obj: ";
    write_terms(out, model, model.objective_terms());
    out << "\nSubject To\n";
    for (const auto& c : model.constraints()) {
        out << ' ' << model.render(c.key) << ": ";
        write_terms(out, model, c.terms);
        switch (c.sense) {
            case Sense::le: out << " <= "; break;
            case Sense::ge: out << " >= "; break;
            case Sense::eq: out << " = "; break;
        }
        out << format_full(c.rhs) << "\n";
    }
    out << "Bounds\n";
    for (const auto& v : model.variables()) {
        std::string name = model.render(v.key);
        if (v.lo == -kInf && v.hi == kInf) {
            out << ' ' << name << " free\n";
        } else {
            out << ' ';
            out << (v.lo == -kInf ? std::string("-inf") : format_full(v.lo));
            out << " <= " << name << " <= ";
            out << (v.hi == kInf ? std::string("inf") : format_full(v.hi));
            out << "\n";
        }
    }
    bool any_bin = false;
    for (const auto& v : model.variables())
        if (v.domain == VarDomain::binary) {
            if (!any_bin) out << "Binaries\n";
            any_bin = true;
            out << ' ' << model.render(v.key) << "\n";
        }
    out << "End\n";
}

namespace {

bool is_name_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_name_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '(' || c == ')' ||
           c == ',' || c == '.' || c == '[' || c == ']' || c == '#' || c == '@' || c == '-' ||
           c == '+';
}

struct LpParser {
    std::istream& in;
    std::string line;
    std::size_t pos = 0;
    double objective_constant = 0.0;

    bool next_line() {
        while (std::getline(in, line)) {
            if (line.rfind("\\ objective_constant:", 0) == 0) {
                objective_constant = std::strtod(line.c_str() + 21, nullptr);
                continue;
            }
            if (!line.empty() && line[0] == '\\') continue;
            pos = 0;
            if (!only_space()) return true;
        }
        return false;
    }
    bool only_space() const {
        for (std::size_t i = pos; i < line.size(); ++i)
            if (!std::isspace(static_cast<unsigned char>(line[i]))) return false;
        return true;
    }
    void skip_space() {
        while (pos < line.size() && std::isspace(static_cast<unsigned char>(line[pos]))) ++pos;
    }
    bool at_end() {
        skip_space();
        return pos >= line.size();
    }
    std::string peek_name() {
        skip_space();
        if (pos >= line.size() || !is_name_start(line[pos])) return {};
        std::size_t p = pos;
        while (p < line.size() && is_name_char(line[p])) ++p;
        return line.substr(pos, p - pos);
    }
    std::string take_name() {
        std::string n = peek_name();
        pos += n.size();
        return n;
    }
    bool take_token(const char* tok) {
        skip_space();
        std::size_t n = std::string(tok).size();
        if (line.compare(pos, n, tok) == 0) {
            pos += n;
            return true;
        }
        return false;
    }
    std::optional<double> take_number() {
        skip_space();
        if (take_token("-inf") || take_token("-Inf")) return -kInf;
        if (take_token("inf") || take_token("Inf")) return kInf;
        const char* start = line.c_str() + pos;
        char* end = nullptr;
        double v = std::strtod(start, &end);
        if (end == start) return std::nullopt;
        pos += static_cast<std::size_t>(end - start);
        return v;
    }
};

std::string lower(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

}  // namespace

ModelInstance read_lp(std::istream& in) {
    LpParser p{in};
    ModelInstance model;

    struct PendingCon {
        std::string name;
        std::vector<std::pair<std::string, double>> terms;
        Sense sense;
        double rhs;
    };
    std::vector<std::pair<std::string, double>> obj_terms;
    std::vector<PendingCon> pending;
    std::map<std::string, std::pair<double, double>> bounds;
    std::map<std::string, bool> binary;
    std::vector<std::string> var_order;
    std::map<std::string, bool> seen;

    auto note_var = [&](const std::string& name) {
        if (name == "__zero") return;
        if (!seen.count(name)) {
            seen[name] = true;
            var_order.push_back(name);
        }
    };

    enum class Section { none, objective, constraints, bounds, binaries, done };
    Section section = Section::none;

    auto parse_expr = [&](std::vector<std::pair<std::string, double>>& terms) -> bool {
        // parses "[+-] [coef] name ..." until a relation or line end; returns
        // true if a relation follows.
        for (;;) {
            p.skip_space();
            if (p.at_end()) return false;
            if (p.line.compare(p.pos, 2, "<=") == 0 || p.line.compare(p.pos, 2, ">=") == 0 ||
                p.line[p.pos] == '=')
                return true;
            double sign = 1.0;
            if (p.take_token("+")) sign = 1.0;
            else if (p.take_token("-")) sign = -1.0;
            auto num = p.take_number();
            double coef = num.value_or(1.0) * sign;
            std::string name = p.take_name();
            if (name.empty()) {
                if (num) continue;  // bare constant inside expression: ignored
                throw EngineError("lp_parse", "expected variable name: " + p.line);
            }
            note_var(name);
            if (name != "__zero") terms.emplace_back(name, coef);
        }
    };

    while (p.next_line()) {
        std::string head = lower(p.peek_name());
        if (section == Section::none || head == "minimize" || head == "subject" ||
            head == "bounds" || head == "binaries" || head == "binary" || head == "end" ||
            head == "st") {
            if (head == "minimize") {
                p.take_name();
                section = Section::objective;
                if (p.at_end()) continue;
            } else if (head == "subject" || head == "st") {
                p.take_name();
                if (head == "subject") p.take_name();  // "To"
                section = Section::constraints;
                if (p.at_end()) continue;
            } else if (head == "bounds") {
                p.take_name();
                section = Section::bounds;
                if (p.at_end()) continue;
            } else if (head == "binaries" || head == "binary") {
                p.take_name();
                section = Section::binaries;
                if (p.at_end()) continue;
            } else if (head == "end") {
                section = Section::done;
                break;
            }
        }
        switch (section) {
            case Section::objective: {
                // optional "obj:" label
                std::size_t save = p.pos;
                std::string label = p.take_name();
                if (!label.empty() && p.take_token(":")) {
                } else {
                    p.pos = save;
                }
                parse_expr(obj_terms);
                break;
            }
            case Section::constraints: {
                PendingCon con;
                std::size_t save = p.pos;
                std::string label = p.take_name();
                if (!label.empty() && p.take_token(":")) {
                    con.name = label;
                } else {
                    p.pos = save;
                    con.name = "c" + std::to_string(pending.size());
                }
                if (!parse_expr(con.terms))
                    throw EngineError("lp_parse", "constraint missing relation: " + p.line);
                if (p.take_token("<=")) con.sense = Sense::le;
                else if (p.take_token(">=")) con.sense = Sense::ge;
                else if (p.take_token("=")) con.sense = Sense::eq;
                else throw EngineError("lp_parse", "bad relation: " + p.line);
                auto rhs = p.take_number();
                if (!rhs) throw EngineError("lp_parse", "missing rhs: " + p.line);
                con.rhs = *rhs;
                pending.push_back(std::move(con));
                break;
            }
            case Section::bounds: {
                // forms: "lo <= x <= hi" | "x free" | "x <= hi" | "x >= lo"
                p.skip_space();
                auto first_num = p.take_number();
                if (first_num) {
                    p.take_token("<=");
                    std::string name = p.take_name();
                    note_var(name);
                    double lo = *first_num, hi = kInf;
                    if (p.take_token("<=")) {
                        auto h = p.take_number();
                        if (h) hi = *h;
                    }
                    bounds[name] = {lo, hi};
                } else {
                    std::string name = p.take_name();
                    if (name.empty()) break;
                    note_var(name);
                    if (p.take_token("free") || lower(p.peek_name()) == "free") {
                        bounds[name] = {-kInf, kInf};
                    } else if (p.take_token("<=")) {
                        auto h = p.take_number();
                        bounds[name] = {0.0, h.value_or(kInf)};
                    } else if (p.take_token(">=")) {
                        auto l = p.take_number();
                        bounds[name] = {l.value_or(0.0), kInf};
                    }
                }
                break;
            }
            case Section::binaries: {
                for (;;) {
                    std::string name = p.take_name();
                    if (name.empty()) break;
                    note_var(name);
                    binary[name] = true;
                }
                break;
            }
            default: break;
        }
        if (section == Section::done) break;
    }

    std::map<std::string, VarRef> refs;
    for (const auto& name : var_order) {
        double lo = 0.0, hi = kInf;
        if (auto it = bounds.find(name); it != bounds.end()) {
            lo = it->second.first;
            hi = it->second.second;
        }
        VarDomain dom = binary.count(name) ? VarDomain::binary : VarDomain::continuous;
        if (dom == VarDomain::binary) {
            lo = std::max(lo, 0.0);
            hi = std::min(hi, 1.0);
        }
        refs[name] = model.add_variable(name, "", -1, -1, dom, lo, hi);
    }
    LinExpr obj;
    obj.constant = p.objective_constant;
    for (auto& [name, coef] : obj_terms) obj.add(refs.at(name), coef);
    model.set_objective(obj);
    for (const auto& con : pending) {
        LinExpr e;
        for (auto& [name, coef] : con.terms) e.add(refs.at(name), coef);
        model.add_constraint(con.name, "", -1, -1, e, con.sense, con.rhs);
    }
    return model;
}

}  // namespace gridcep::milp
