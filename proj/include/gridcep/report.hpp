#pragma once

#include <string>
#include <vector>

#include "gridcep/plan.hpp"
#include "gridcep/uc.hpp"

namespace gridcep::report {

struct CaseResult {
    std::string case_id;
    std::string mode;
    double optimality_gap = 0.0;  // fraction; < 0 means not applicable
    PlanReport report;
};

// report.csv (costs at 2 decimals, stable column order, rows sorted by case
// id) and report.json (full precision mirror).
void write_report(const std::vector<CaseResult>& results, const std::string& csv_path,
                  const std::string& json_path);

// Human-readable summary table in the paper's units (M$/y, B$/y).
std::string summary_table(const std::vector<CaseResult>& results);

// Per-scenario dispatch metrics block for metrics.json.
void write_metrics(const std::string& path, const std::string& case_id, const std::string& mode,
                   const std::vector<uc::DispatchSolution>& per_scenario,
                   const PlanReport& aggregate, double optimality_gap);

void write_dispatch_csv(const std::string& path,
                        const std::vector<std::tuple<int, std::string, std::string, double>>& rows);

}  // namespace gridcep::report
