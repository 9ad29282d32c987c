#pragma once

#include <map>
#include <string>

namespace gridcep {

// First-stage decision vector. Thermal builds and retirements are 0/1;
// renewable/storage builds are units (MW = units * unit capacity).
struct InvestmentPlan {
    std::map<std::string, int> thermal_builds;
    std::map<std::string, double> renewable_builds;
    std::map<std::string, double> storage_builds;
    std::map<std::string, int> retirements;

    bool empty() const {
        return thermal_builds.empty() && renewable_builds.empty() && storage_builds.empty() &&
               retirements.empty();
    }
};

// Objective decomposition and operational metrics on the scale of a year,
// except where a field name says otherwise.
struct PlanReport {
    double investment_cost = 0.0;   // $/y, new builds only
    double retirement_cost = 0.0;   // $/y
    double fom_existing = 0.0;      // $/y, kept existing units
    double production_cost = 0.0;   // $/y, no penalties
    double shed_penalty = 0.0;      // $/y
    double reserve_penalty = 0.0;   // $/y
    double util_penalty = 0.0;      // $/y
    double overall_cost = 0.0;      // $/y, full objective
    double new_gen_mw = 0.0;
    double new_storage_mw = 0.0;
    double retired_mw = 0.0;
    double expected_daily_shed_mwh = 0.0;
    double expected_lolh = 0.0;     // hours/day
    double min_reserves_mw = 0.0;
    int failed_scenarios = 0;
};

}  // namespace gridcep
