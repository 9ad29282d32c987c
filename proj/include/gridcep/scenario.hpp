#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gridcep/common.hpp"
#include "gridcep/plan.hpp"
#include "gridcep/system.hpp"

namespace gridcep {

enum class SeriesUnit { mw, factor };

// Hourly series with a deferred scale factor, so repeated scaling composes
// exactly (values are materialized with a single multiply).
struct TimeSeries {
    std::string id;
    SeriesUnit unit = SeriesUnit::mw;
    std::vector<double> base;
    double scale = 1.0;

    std::size_t size() const { return base.size(); }
    double at(std::size_t i) const { return base[i] * scale; }
    std::vector<double> values() const {
        std::vector<double> out(base.size());
        for (std::size_t i = 0; i < base.size(); ++i) out[i] = base[i] * scale;
        return out;
    }
};

// Pointwise multiplication by `factor` (> 0); length preserved.
TimeSeries scale_load(const TimeSeries& base, double factor);

struct OutageModel {
    std::string generator;
    double forced_outage_rate = 0.0;  // fraction of hours in [0,1)
    int outage_duration = 40;         // hours
    std::vector<std::pair<int, int>> planned_outages;  // inclusive [start, end] hours
    std::optional<std::uint64_t> seed;                 // default derived from master seed
};

// Binary availability series ({0,1}, 1 = available): contiguous forced
// outage blocks of `outage_duration` hours (the last block may truncate at
// the horizon end), planned outages forced to zero, non-overlapping,
// deterministic for a given seed.
std::vector<std::uint8_t> generate_outage_series(const OutageModel& model, int horizon_hours,
                                                 std::uint64_t master_seed = 0);

struct FuelPriceRule {
    enum class Form { constant, affine_on_index };
    FuelId fuel;
    Form form = Form::constant;
    double constant = 0.0;
    double intercept = 0.0;
    double slope = 0.0;
    double adder = 0.0;  // e.g. trucking cost per MMBtu
    std::string index;   // name of the reference price, e.g. "HH"
};

// Evaluates a price rule at the given index price ($/MMBtu). Throws
// EngineError("negative_price") if the result is negative.
double fuel_price(const FuelPriceRule& rule, double index_price);

// One representative day of operations.
struct ScenarioDay {
    std::string id;
    double probability = 0.0;
    // demand[bus][hour], aligned to PowerSystem::buses; 24 hourly values.
    std::vector<std::vector<double>> demand;
    // availability[gen id] -> 24 hourly factors in [0,1]; thermal and
    // renewable generators share the namespace.
    std::map<std::string, std::vector<double>> availability;
    // Daily supply per fuel, aligned to PowerSystem::fuels; nullopt = unlimited.
    std::vector<std::optional<double>> fuel_supply;
    std::vector<double> reserve_req;  // 24 hourly MW

    const std::vector<double>& availability_for(const std::string& gen_id) const;
};

struct ScenarioBuildInputs {
    // Per-bus MW series (id = bus id) or one system-wide series distributed
    // by bus load fractions.
    std::vector<TimeSeries> loads;
    // Per-generator availability factor series (existing renewables; also
    // accepted for thermal units, combined with sampled outages).
    std::vector<TimeSeries> availabilities;
    std::vector<OutageModel> outage_models;
    std::uint64_t master_seed = 0;
    // Per-fuel daily supply overrides; nullopt entry = unlimited. Missing
    // fuels fall back to the system catalog value.
    std::map<std::string, std::optional<double>> fuel_supply_per_day;
    // Horizon totals divided evenly across selected days.
    std::map<std::string, double> fuel_supply_horizon_total;
};

// Builds one ScenarioDay per selected day index. Probabilities default to
// uniform; weights, when given, must sum to 1.
std::vector<ScenarioDay> build_scenario_set(const PowerSystem& system,
                                            const ScenarioBuildInputs& inputs,
                                            const std::vector<int>& day_selection,
                                            const std::optional<std::vector<double>>& weights = {});

}  // namespace gridcep
