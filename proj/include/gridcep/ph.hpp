#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gridcep/milp.hpp"
#include "gridcep/plan.hpp"
#include "gridcep/planner.hpp"
#include "gridcep/scenario.hpp"
#include "gridcep/system.hpp"

namespace gridcep::ph {

struct PHOptions {
    double rho_scale = 1.0;        // multiplies the cost-proportional rho
    int max_iterations = 200;
    double convergence_tol = 1e-4; // consensus deviation threshold, units of x
    double subproblem_mip_gap = 1e-4;
    std::optional<double> time_limit;  // wall clock, seconds
    int bound_interval = 5;            // iterations between Lagrangian bounds
    int checkpoint_interval = 0;       // 0 = no checkpoints
    std::string checkpoint_path;
    int seed = 0;
    int threads = 1;
    int workers = 2;

    static PHOptions from_config(const PlannerConfig& cfg);
};

struct TraceRow {
    int iteration = 0;
    double deviation = 0.0;
    double lower_bound = -milp::kInf;
    double incumbent = milp::kInf;
    double wall_time = 0.0;
};

struct PHState {
    int iteration = 0;
    std::vector<std::string> names;           // first-stage layout names
    std::vector<double> xbar;                 // consensus, aligned with names
    std::vector<std::vector<double>> weights; // [scenario][var]
    std::optional<InvestmentPlan> incumbent_plan;
    double incumbent_objective = milp::kInf;
    PlanReport incumbent_report;
    double lower_bound = -milp::kInf;
    bool converged = false;
    std::vector<TraceRow> trace;

    double gap() const {
        if (!incumbent_plan || lower_bound == -milp::kInf) return milp::kInf;
        return (incumbent_objective - lower_bound) / std::max(std::abs(incumbent_objective), 1.0);
    }
};

// Progressive Hedging over per-scenario subproblems with local first-stage
// copies. One scenario short-circuits to the extensive form.
PHState run_ph(const PowerSystem& system, const std::vector<ScenarioDay>& scenarios,
               const PHOptions& options);

// Resumes from a checkpointed state (weights, consensus, incumbent).
PHState run_ph(const PowerSystem& system, const std::vector<ScenarioDay>& scenarios,
               const PHOptions& options, const PHState& resume_from);

// Lagrangian lower bound at the given weights: sum of probability-weighted
// subproblem dual bounds with the w*x term and no proximal term. Requires
// sum_w rho_w w_w = 0 (asserted).
double compute_lower_bound(const PowerSystem& system, const std::vector<ScenarioDay>& scenarios,
                           const std::vector<std::vector<double>>& weights,
                           const PHOptions& options);

// Rounds/projects the consensus vector onto a feasible plan and evaluates
// it; returns nullopt when repair fails.
std::optional<std::pair<InvestmentPlan, PlanReport>> find_incumbent(
    const PowerSystem& system, const std::vector<ScenarioDay>& scenarios,
    const std::vector<double>& xbar, const PHOptions& options);

void save_checkpoint(const PHState& state, const std::string& path);
PHState load_checkpoint(const std::string& path);

void write_trace_csv(const PHState& state, const std::string& path);

}  // namespace gridcep::ph
