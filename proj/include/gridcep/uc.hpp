#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "gridcep/milp.hpp"
#include "gridcep/plan.hpp"
#include "gridcep/scenario.hpp"
#include "gridcep/system.hpp"

namespace gridcep::uc {

// References to the first-stage variables a subproblem links against.
// Shared refs in extensive-form mode, per-scenario local copies in PH mode,
// pinned (fixed-bound) variables when evaluating a given plan.
struct FirstStageRefs {
    std::map<std::string, milp::VarRef> thermal_build;
    std::map<std::string, milp::VarRef> renewable_build;
    std::map<std::string, milp::VarRef> storage_build;
    std::map<std::string, milp::VarRef> retire;
};

// Upper bound in units for a candidate build variable, derived from the
// tightest applicable site limit (falls back to config.max_units_default).
double candidate_unit_upper_bound(const PowerSystem& system, SiteLimitDomain domain,
                                  const std::string& tech_class, const std::string& bus,
                                  double unit_capacity);

struct DispatchSolution {
    std::string scenario_id;
    milp::SolveStatus status = milp::SolveStatus::error;
    double operational_cost = 0.0;  // objective of the day ($, tau-scaled)
    double production_cost = 0.0;   // $/day, no penalties
    double shed_penalty = 0.0;
    double reserve_penalty = 0.0;
    double util_penalty = 0.0;
    double load_shed_mwh = 0.0;
    double lolh = 0.0;              // hours with any shed
    double min_reserve_mw = 0.0;
    std::map<std::string, double> fuel_use;  // fuel id -> MMBtu over the window
    milp::SolveResult result;
    // (period, family, element, value) rows for dispatch_<scenario>.csv
    std::vector<std::tuple<int, std::string, std::string, double>> rows;
};

// Builds the second-stage unit-commitment / dispatch constraints and costs
// for one scenario window (a single representative day, or several days
// stitched into one chronological horizon) inside a shared ModelInstance.
class ScenarioSubproblem {
public:
    ScenarioSubproblem(milp::ModelInstance& model, const PowerSystem& system,
                       std::vector<const ScenarioDay*> days, int scen_index);

    // Registers every second-stage variable family.
    void add_variables();

    // Constraint groups; add_variables() must run first.
    void build_commitment_constraints();
    void build_dispatch_limits();
    void build_ramping_constraints();
    void build_startup_costs();
    void build_storage_constraints();
    void build_network_constraints(NetworkMode mode);
    void build_reserve_constraints();
    void build_fuel_constraints();
    void build_operational_objective();
    void build_linking_constraints(const FirstStageRefs& first_stage);

    // Everything above in order, with the system's network mode.
    void build_all(const FirstStageRefs& first_stage);

    // Cost expressions (unscaled C2 terms; the owner applies weights).
    const milp::LinExpr& operational_cost() const { return operational_cost_; }
    const milp::LinExpr& production_cost_expr() const { return production_; }
    const milp::LinExpr& shed_penalty_expr() const { return shed_penalty_; }
    const milp::LinExpr& reserve_penalty_expr() const { return reserve_penalty_; }
    const milp::LinExpr& util_penalty_expr() const { return util_penalty_; }

    DispatchSolution extract_solution(const milp::SolveResult& result) const;

    int horizon() const { return horizon_; }
    int scen_index() const { return scen_; }
    const std::vector<std::string>& warnings() const { return warnings_; }

    // Variable lookup for tests and exports.
    milp::VarRef var(const char* family, const std::string& elem, int t = -1) const;
    milp::ModelInstance& model() { return model_; }

    // Hourly rows (period, family, element, value) for dispatch export.
    std::vector<std::tuple<int, std::string, std::string, double>> dispatch_rows(
        const milp::SolveResult& result) const;

private:
    struct ThermalCtx {
        const ThermalGenerator* gen;
        int bus;
        bool dual_fuel;
        int primary_fuel = -1;
        int secondary_fuel = -1;
        int min_up_p;    // periods
        int min_down_p;  // periods
        double init_periods = 0.0;  // initial_status_hours in period units
        std::vector<int> category_lookback_p;
        std::vector<double> availability;  // per period
        // On/off at period offset 1, 2, ... before the window start,
        // derived from initial_status_hours.
        double history(int offset) const;
    };
    struct RenewableCtx {
        const RenewableGenerator* gen;
        int bus;
        std::vector<double> availability;
    };
    struct StorageCtx {
        const StorageUnit* s;
        int bus;
        double gate_mw;  // charge/discharge gating capacity
    };

    milp::ModelInstance& model_;
    const PowerSystem& sys_;
    std::vector<const ScenarioDay*> days_;
    int scen_;
    int ppd_;      // periods per day
    int horizon_;  // total periods
    double tau_;

    std::vector<ThermalCtx> thermal_;
    std::vector<RenewableCtx> renewable_;
    std::vector<StorageCtx> storage_;
    std::vector<const Line*> lines_;
    std::vector<std::vector<double>> demand_;       // [bus][t]
    std::vector<double> reserve_req_;               // [t]
    std::vector<std::optional<double>> fuel_supply_;  // pooled over the window

    milp::LinExpr production_;
    milp::LinExpr shed_penalty_;
    milp::LinExpr reserve_penalty_;
    milp::LinExpr util_penalty_;
    milp::LinExpr operational_cost_;
    std::vector<std::string> warnings_;
    bool variables_added_ = false;
};

// Adds pinned first-stage variables for a fixed plan (bounds clamp each
// candidate/retirement to its planned value).
FirstStageRefs add_pinned_first_stage(milp::ModelInstance& model, const PowerSystem& system,
                                      const InvestmentPlan& plan);

// Builds and solves one scenario day under a fixed plan. Solver infeasible
// is a hard error: the formulation is feasible by construction, so it
// signals a build bug.
DispatchSolution solve_operational(const PowerSystem& system, const ScenarioDay& scenario,
                                   const InvestmentPlan& plan, const milp::SolveOptions& options);

// Solves several days as one chronological UC problem (commitment state,
// ramps and storage chain across day boundaries; fuel supplies pooled).
DispatchSolution solve_operational_stitched(const PowerSystem& system,
                                            const std::vector<ScenarioDay>& days,
                                            const InvestmentPlan& plan,
                                            const milp::SolveOptions& options);

}  // namespace gridcep::uc
