#include "gridcep/milp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>

namespace gridcep::milp {

const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::optimal: return "optimal";
        case SolveStatus::gap_limit: return "gap_limit";
        case SolveStatus::time_limit: return "time_limit";
        case SolveStatus::infeasible: return "infeasible";
        case SolveStatus::unbounded: return "unbounded";
        case SolveStatus::error: return "error";
    }
    return "?";
}

SolveOptions SolveOptions::with_env_overrides(SolveOptions base) {
    if (const char* g = std::getenv("CEP_MIP_GAP")) base.mip_gap = std::atof(g);
    if (const char* t = std::getenv("CEP_TIME_LIMIT")) base.time_limit = std::atof(t);
    return base;
}

std::optional<Key> ModelInstance::lookup_key(const std::string& family, const std::string& elem,
                                             int t, int scen) const {
    auto fit = symbol_index_.find(family);
    if (fit == symbol_index_.end()) return std::nullopt;
    std::int32_t elem_id = -1;
    if (!elem.empty()) {
        auto eit = symbol_index_.find(elem);
        if (eit == symbol_index_.end()) return std::nullopt;
        elem_id = eit->second;
    }
    return Key{fit->second, elem_id, t, scen};
}

std::int32_t ModelInstance::intern(const std::string& s) {
    auto it = symbol_index_.find(s);
    if (it != symbol_index_.end()) return it->second;
    std::int32_t id = static_cast<std::int32_t>(symbols_.size());
    symbols_.push_back(s);
    symbol_index_.emplace(s, id);
    return id;
}

VarRef ModelInstance::add_variable(const Key& key, VarDomain domain, double lo, double hi) {
    if (lo > hi) throw EngineError("bad_bounds", "lo > hi for " + render(key));
    if (domain == VarDomain::binary && (lo < 0.0 || hi > 1.0))
        throw EngineError("bad_bounds", "binary bounds outside [0,1] for " + render(key));
    if (var_index_.count(key)) throw EngineError("duplicate_name", "variable " + render(key));
    std::int32_t idx = static_cast<std::int32_t>(vars_.size());
    vars_.push_back(Variable{key, domain, lo, hi});
    var_index_.emplace(key, idx);
    return VarRef{idx};
}

namespace {

std::vector<std::pair<std::int32_t, double>> merge_terms(
    const std::vector<std::pair<std::int32_t, double>>& raw, std::size_t num_vars,
    const char* what, int* dropped) {
    std::vector<std::pair<std::int32_t, double>> terms(raw);
    for (auto& [i, c] : terms) {
        if (i < 0 || static_cast<std::size_t>(i) >= num_vars)
            throw EngineError("foreign_variable",
                              std::string(what) + " references variable outside this model");
        (void)c;
    }
    std::sort(terms.begin(), terms.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<std::pair<std::int32_t, double>> merged;
    merged.reserve(terms.size());
    for (auto& [i, c] : terms) {
        if (!merged.empty() && merged.back().first == i)
            merged.back().second += c;
        else
            merged.emplace_back(i, c);
    }
    std::vector<std::pair<std::int32_t, double>> out;
    out.reserve(merged.size());
    for (auto& [i, c] : merged) {
        if (!std::isfinite(c))
            throw EngineError("bad_coefficient", std::string(what) + " has non-finite coefficient");
        if (std::abs(c) < kCoefDropTol) {
            if (c != 0.0 && dropped) ++*dropped;
            continue;
        }
        out.emplace_back(i, c);
    }
    return out;
}

}  // namespace

void ModelInstance::add_constraint(const Key& key, const LinExpr& expr, Sense sense, double rhs) {
    if (con_index_.count(key)) throw EngineError("duplicate_name", "constraint " + render(key));
    if (!std::isfinite(rhs - expr.constant))
        throw EngineError("bad_coefficient", "non-finite rhs for " + render(key));
    LinearConstraint con;
    con.key = key;
    con.terms = merge_terms(expr.terms, vars_.size(), "constraint", &dropped_coefficients_);
    con.sense = sense;
    con.rhs = rhs - expr.constant;
    std::int32_t idx = static_cast<std::int32_t>(cons_.size());
    cons_.push_back(std::move(con));
    con_index_.emplace(key, idx);
}

void ModelInstance::set_objective(const LinExpr& expr) {
    if (has_objective_) objective_replaced_ = true;
    obj_terms_ = merge_terms(expr.terms, vars_.size(), "objective", &dropped_coefficients_);
    obj_constant_ = expr.constant;
    has_objective_ = true;
}

void ModelInstance::set_bounds(VarRef v, double lo, double hi) {
    if (lo > hi) throw EngineError("bad_bounds", "lo > hi");
    auto& var = vars_.at(static_cast<std::size_t>(v.index));
    var.lo = lo;
    var.hi = hi;
}

VarRef ModelInstance::find_variable(const Key& key) const {
    auto it = var_index_.find(key);
    if (it == var_index_.end()) return VarRef{};
    return VarRef{it->second};
}

VarRef ModelInstance::require_variable(const Key& key) const {
    VarRef r = find_variable(key);
    if (!r.valid()) throw EngineError("unknown_variable", render(key));
    return r;
}

std::size_t ModelInstance::num_binaries() const {
    std::size_t n = 0;
    for (const auto& v : vars_)
        if (v.domain == VarDomain::binary) ++n;
    return n;
}

std::string ModelInstance::render(const Key& key) const {
    std::ostringstream os;
    if (key.family >= 0 && static_cast<std::size_t>(key.family) < symbols_.size())
        os << symbols_[static_cast<std::size_t>(key.family)];
    else
        os << "?";
    os << '(';
    bool first = true;
    auto put = [&](const std::string& s) {
        if (!first) os << ',';
        os << s;
        first = false;
    };
    if (key.elem >= 0) put(symbols_.at(static_cast<std::size_t>(key.elem)));
    if (key.t >= 0) put("t" + std::to_string(key.t));
    if (key.scen >= 0) put("s" + std::to_string(key.scen));
    os << ')';
    return os.str();
}

ModelInstance ModelInstance::relax_integrality() const {
    ModelInstance copy(*this);
    for (auto& v : copy.vars_) {
        if (v.domain == VarDomain::binary) v.domain = VarDomain::continuous;
    }
    return copy;
}

}  // namespace gridcep::milp
