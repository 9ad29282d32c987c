#pragma once

#include <memory>
#include <vector>

#include "gridcep/milp.hpp"
#include "gridcep/plan.hpp"
#include "gridcep/scenario.hpp"
#include "gridcep/system.hpp"
#include "gridcep/uc.hpp"

namespace gridcep::planner {

// One entry of the (deterministically ordered) first-stage vector,
// shared between the extensive form, PH, and plan (de)serialization.
struct FirstStageVar {
    enum class Kind { thermal_build, renewable_build, storage_build, retirement };
    Kind kind;
    std::string element;    // candidate or retirable unit id
    bool binary = true;
    double upper = 1.0;     // units
    double cost_coef = 0.0; // first-stage objective coefficient
    double unit_mw = 0.0;
};

// Deterministic first-stage layout for a system (candidates expanded).
std::vector<FirstStageVar> first_stage_layout(const PowerSystem& system);

struct InvestmentStage {
    uc::FirstStageRefs refs;
    std::vector<FirstStageVar> layout;
    std::vector<milp::VarRef> layout_refs;  // aligned with layout
    milp::LinExpr cost;                     // first-stage cost, incl. constant FOM
    double fixed_fom = 0.0;                 // constant part (existing FOM)
};

// Adds first-stage variables, site-limit constraints, and the first-stage
// cost expression to `model`.
InvestmentStage build_investment_stage(milp::ModelInstance& model, const PowerSystem& system);

struct ExtensiveForm {
    milp::ModelInstance model;
    InvestmentStage stage;
    std::vector<std::unique_ptr<uc::ScenarioSubproblem>> subproblems;
    std::vector<double> scale;  // T_rep * tau * rho per scenario
};

// One model holding the shared first stage plus every scenario's second
// stage. Refuses to assemble above config.ef_variable_cap variables.
ExtensiveForm assemble_extensive_form(const PowerSystem& system,
                                      const std::vector<ScenarioDay>& scenarios);

InvestmentPlan extract_plan(const PowerSystem& system, const InvestmentStage& stage,
                            const milp::SolveResult& result);

// Checks a plan against site limits Eqs. (4)-(7); returns violations.
std::vector<Violation> check_plan(const PowerSystem& system, const InvestmentPlan& plan);

// First-stage cost of a concrete plan (Eq. (2) evaluated at the plan).
struct FirstStageCost {
    double investment = 0.0;      // new builds only
    double retirement = 0.0;
    double fom_existing = 0.0;    // kept units
    double total = 0.0;
};
FirstStageCost first_stage_cost(const PowerSystem& system, const InvestmentPlan& plan);

struct EvaluationResult {
    PlanReport report;
    std::vector<uc::DispatchSolution> per_scenario;
};

// Fixes the first stage to `plan`, solves every scenario (worker pool of
// config.workers), aggregates probability-weighted metrics and annualizes
// by T_rep * tau.
EvaluationResult evaluate_plan(const PowerSystem& system, const InvestmentPlan& plan,
                               const std::vector<ScenarioDay>& scenarios,
                               const milp::SolveOptions& options);

}  // namespace gridcep::planner
