#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "gridcep/common.hpp"

namespace gridcep::milp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Coefficients below this magnitude are dropped at build time (counted).
inline constexpr double kCoefDropTol = 1e-12;

enum class VarDomain : std::uint8_t { continuous, binary };
enum class Sense : std::uint8_t { le, eq, ge };

// Structured name: (family, element, time, scenario). family/elem are ids
// interned per model; t/scen are -1 when not applicable. Strings are only
// materialized for diagnostics and LP export.
struct Key {
    std::int32_t family = -1;
    std::int32_t elem = -1;
    std::int32_t t = -1;
    std::int32_t scen = -1;

    friend bool operator==(const Key& a, const Key& b) {
        return a.family == b.family && a.elem == b.elem && a.t == b.t && a.scen == b.scen;
    }
};

struct KeyHash {
    std::size_t operator()(const Key& k) const {
        std::uint64_t h = 0x9e3779b97f4a7c15ULL;
        auto mix = [&h](std::uint64_t v) {
            h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        };
        mix(static_cast<std::uint32_t>(k.family));
        mix(static_cast<std::uint32_t>(k.elem));
        mix(static_cast<std::uint32_t>(k.t));
        mix(static_cast<std::uint32_t>(k.scen));
        return static_cast<std::size_t>(h);
    }
};

// Index of a variable within its owning ModelInstance. Stable for the
// model's lifetime.
struct VarRef {
    std::int32_t index = -1;
    bool valid() const { return index >= 0; }
    friend bool operator==(VarRef a, VarRef b) { return a.index == b.index; }
};

struct Variable {
    Key key;
    VarDomain domain = VarDomain::continuous;
    double lo = 0.0;
    double hi = kInf;
};

struct LinearConstraint {
    Key key;
    std::vector<std::pair<std::int32_t, double>> terms;  // (var index, coef), merged
    Sense sense = Sense::le;
    double rhs = 0.0;
};

// Small helper for building linear expressions term by term.
struct LinExpr {
    std::vector<std::pair<std::int32_t, double>> terms;
    double constant = 0.0;

    LinExpr& add(VarRef v, double coef) {
        terms.emplace_back(v.index, coef);
        return *this;
    }
    LinExpr& add(const LinExpr& other, double scale = 1.0) {
        for (auto& [i, c] : other.terms) terms.emplace_back(i, c * scale);
        constant += other.constant * scale;
        return *this;
    }
    double value(const std::vector<double>& x) const {
        double s = constant;
        for (auto& [i, c] : terms) s += c * x[static_cast<std::size_t>(i)];
        return s;
    }
};

enum class SolveStatus : std::uint8_t {
    optimal,
    gap_limit,
    time_limit,
    infeasible,
    unbounded,
    error,
};

const char* to_string(SolveStatus s);

struct SolveResult {
    SolveStatus status = SolveStatus::error;
    double objective = 0.0;
    double best_bound = -kInf;
    std::vector<double> values;  // indexed by VarRef::index
    double wall_time = 0.0;
    std::string message;

    bool feasible() const {
        return status == SolveStatus::optimal || status == SolveStatus::gap_limit ||
               status == SolveStatus::time_limit;
    }
    double gap() const {
        double denom = std::max(std::abs(objective), 1.0);
        return (objective - best_bound) / denom;
    }
    double value(VarRef v) const { return values.at(static_cast<std::size_t>(v.index)); }
};

struct SolveOptions {
    double mip_gap = 1e-6;
    std::optional<double> time_limit;  // seconds
    int threads = 1;
    int seed = 0;
    bool log = false;

    // Applies CEP_MIP_GAP / CEP_TIME_LIMIT environment overrides.
    static SolveOptions with_env_overrides(SolveOptions base);
};

// Solver-agnostic MILP: variables, linear constraints, linear objective,
// and a structured-name registry. Single-owner while mutable; distinct
// instances may solve concurrently.
class ModelInstance {
public:
    // --- symbol interning -------------------------------------------------
    std::int32_t intern(const std::string& s);
    const std::string& symbol(std::int32_t id) const { return symbols_.at(static_cast<std::size_t>(id)); }

    Key make_key(const std::string& family, const std::string& elem, int t = -1, int scen = -1) {
        return Key{intern(family), elem.empty() ? -1 : intern(elem), t, scen};
    }

    // Lookup-only variant: nullopt when a symbol was never interned.
    std::optional<Key> lookup_key(const std::string& family, const std::string& elem, int t = -1,
                                  int scen = -1) const;

    // --- building ---------------------------------------------------------
    VarRef add_variable(const Key& key, VarDomain domain, double lo, double hi);
    VarRef add_variable(const std::string& family, const std::string& elem, int t, int scen,
                        VarDomain domain, double lo, double hi) {
        return add_variable(make_key(family, elem, t, scen), domain, lo, hi);
    }

    // Terms with duplicate variables are merged; |coef| < kCoefDropTol dropped.
    void add_constraint(const Key& key, const LinExpr& expr, Sense sense, double rhs);
    void add_constraint(const std::string& family, const std::string& elem, int t, int scen,
                        const LinExpr& expr, Sense sense, double rhs) {
        add_constraint(make_key(family, elem, t, scen), expr, sense, rhs);
    }

    // Replaces any previous objective (sets objective_replaced()).
    void set_objective(const LinExpr& expr);

    void set_bounds(VarRef v, double lo, double hi);

    // --- lookup -----------------------------------------------------------
    VarRef find_variable(const Key& key) const;
    VarRef require_variable(const Key& key) const;
    const Variable& variable(VarRef ref) const { return vars_.at(static_cast<std::size_t>(ref.index)); }
    const std::vector<Variable>& variables() const { return vars_; }
    const std::vector<LinearConstraint>& constraints() const { return cons_; }
    const std::vector<std::pair<std::int32_t, double>>& objective_terms() const { return obj_terms_; }
    double objective_constant() const { return obj_constant_; }
    bool objective_replaced() const { return objective_replaced_; }
    int dropped_coefficients() const { return dropped_coefficients_; }
    std::size_t num_variables() const { return vars_.size(); }
    std::size_t num_constraints() const { return cons_.size(); }
    std::size_t num_binaries() const;

    std::string render(const Key& key) const;  // diagnostics / LP export

    // Copy with every binary converted to continuous within its bounds.
    ModelInstance relax_integrality() const;

private:
    std::vector<std::string> symbols_;
    std::unordered_map<std::string, std::int32_t> symbol_index_;
    std::vector<Variable> vars_;
    std::unordered_map<Key, std::int32_t, KeyHash> var_index_;
    std::vector<LinearConstraint> cons_;
    std::unordered_map<Key, std::int32_t, KeyHash> con_index_;
    std::vector<std::pair<std::int32_t, double>> obj_terms_;
    double obj_constant_ = 0.0;
    bool has_objective_ = false;
    bool objective_replaced_ = false;
    int dropped_coefficients_ = 0;
};

// Solves with the HiGHS backend. Blocking; never throws on backend
// failure (surfaces status=error instead).
SolveResult solve(const ModelInstance& model, const SolveOptions& options = {});

// LP-format text interchange (objective, constraints, bounds, binaries).
void write_lp(const ModelInstance& model, std::ostream& out);
ModelInstance read_lp(std::istream& in);

}  // namespace gridcep::milp
