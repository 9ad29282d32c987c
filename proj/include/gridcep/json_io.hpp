#pragma once

#include <nlohmann/json_fwd.hpp>
#include <string>
#include <vector>

#include "gridcep/scenario.hpp"
#include "gridcep/system.hpp"

namespace gridcep::io {

using json = nlohmann::json;

json system_to_json(const PowerSystem& system);
PowerSystem system_from_json(const json& j);

// limits.json: an array of SiteLimit records merged into the system.
std::vector<SiteLimit> site_limits_from_json(const json& j);

json scenarios_to_json(const PowerSystem& system, const std::vector<ScenarioDay>& days);
std::vector<ScenarioDay> scenarios_from_json(const PowerSystem& system, const json& j);

json plan_to_json(const InvestmentPlan& plan);
InvestmentPlan plan_from_json(const json& j);

// Named fuel scenarios (e.g. existing / future / future+): price rules and
// supplies per fuel, plus index prices the affine rules refer to.
struct FuelScenarioEntry {
    FuelId fuel;
    std::optional<FuelPriceRule> rule;
    bool has_supply = false;                    // when false, keep system value
    std::optional<double> supply_per_day;       // nullopt = unlimited
    std::optional<double> supply_horizon_total; // divided by day count at build
};

struct FuelScenario {
    std::string name;
    std::map<std::string, double> index_prices;  // e.g. {"HH": 2.24}
    std::vector<FuelScenarioEntry> entries;
};

std::map<std::string, FuelScenario> fuel_scenarios_from_json(const json& j);

// Applies price rules and per-day supplies to the fuel catalog.
void apply_fuel_scenario(PowerSystem& system, const FuelScenario& scenario, int day_count);

std::string dump_canonical(const json& j);  // sorted keys, stable float text

json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const json& j);

}  // namespace gridcep::io
