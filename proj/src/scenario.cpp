#include "gridcep/scenario.hpp"

#include <algorithm>
#include <cmath>

namespace gridcep {

TimeSeries scale_load(const TimeSeries& base, double factor) {
    if (factor <= 0) throw EngineError("nonpositive_factor", base.id);
    TimeSeries out = base;
    out.scale = base.scale * factor;
    return out;
}

std::vector<std::uint8_t> generate_outage_series(const OutageModel& model, int horizon_hours,
                                                 std::uint64_t master_seed) {
    if (model.forced_outage_rate < 0 || model.forced_outage_rate >= 1)
        throw EngineError("bad_outage_rate", model.generator);
    if (model.outage_duration < 1) throw EngineError("bad_outage_duration", model.generator);
    if (horizon_hours < model.outage_duration)
        throw EngineError("horizon_too_short", model.generator);

    std::vector<std::uint8_t> series(static_cast<std::size_t>(horizon_hours), 1);
    std::vector<std::uint8_t> blocked(static_cast<std::size_t>(horizon_hours), 0);

    for (auto [start, end] : model.planned_outages) {
        if (start < 0 || end < start) throw EngineError("bad_planned_outage", model.generator);
        for (int h = start; h <= end && h < horizon_hours; ++h) {
            series[static_cast<std::size_t>(h)] = 0;
            blocked[static_cast<std::size_t>(h)] = 1;
        }
    }

    int duration = model.outage_duration;
    int n_blocks = static_cast<int>(
        std::floor(model.forced_outage_rate * horizon_hours / duration + 0.5));
    if (n_blocks == 0) return series;

    std::uint64_t seed = model.seed ? *model.seed : (master_seed ^ fnv1a(model.generator));
    SplitMix64 rng(seed);

    auto fits = [&](int start, bool truncated_used) -> bool {
        int end = std::min(start + duration, horizon_hours);
        if (start + duration > horizon_hours && truncated_used) return false;
        for (int h = start; h < end; ++h)
            if (blocked[static_cast<std::size_t>(h)]) return false;
        return true;
    };

    bool truncated_used = false;
    int placed = 0;
    // Uniform random placement by rejection; forced outages may not overlap
    // each other or planned outages, and at most one block truncates at the
    // horizon end.
    const int max_attempts = 10000 * n_blocks + 100000;
    int attempts = 0;
    while (placed < n_blocks) {
        if (++attempts > max_attempts)
            throw EngineError("rate_unachievable",
                              model.generator + ": cannot place " + std::to_string(n_blocks) +
                                  " non-overlapping blocks of " + std::to_string(duration) + "h");
        int start = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(horizon_hours)));
        if (!fits(start, truncated_used)) continue;
        int end = std::min(start + duration, horizon_hours);
        if (start + duration > horizon_hours) truncated_used = true;
        for (int h = start; h < end; ++h) {
            series[static_cast<std::size_t>(h)] = 0;
            blocked[static_cast<std::size_t>(h)] = 1;
        }
        ++placed;
    }
    return series;
}

double fuel_price(const FuelPriceRule& rule, double index_price) {
    double price = 0.0;
    switch (rule.form) {
        case FuelPriceRule::Form::constant:
            price = rule.constant + rule.adder;
            break;
        case FuelPriceRule::Form::affine_on_index:
            if (index_price < 0) throw EngineError("negative_index_price", rule.index);
            price = rule.intercept + rule.slope * index_price + rule.adder;
            break;
    }
    if (price < 0) throw EngineError("negative_price", rule.fuel.str());
    return price;
}

const std::vector<double>& ScenarioDay::availability_for(const std::string& gen_id) const {
    auto it = availability.find(gen_id);
    if (it == availability.end()) throw EngineError("missing_availability", gen_id);
    return it->second;
}

namespace {

const TimeSeries* find_series(const std::vector<TimeSeries>& list, const std::string& id) {
    for (const auto& s : list)
        if (s.id == id) return &s;
    return nullptr;
}

std::vector<double> slice_day(const TimeSeries& s, int day) {
    std::size_t start = static_cast<std::size_t>(day) * 24;
    if (start + 24 > s.size())
        throw EngineError("date_outside_coverage",
                          s.id + " day " + std::to_string(day));
    std::vector<double> out(24);
    for (std::size_t h = 0; h < 24; ++h) out[h] = s.at(start + h);
    return out;
}

}  // namespace

std::vector<ScenarioDay> build_scenario_set(const PowerSystem& system,
                                            const ScenarioBuildInputs& inputs,
                                            const std::vector<int>& day_selection,
                                            const std::optional<std::vector<double>>& weights) {
    if (day_selection.empty()) throw EngineError("no_scenarios", "empty day selection");
    if (weights) {
        if (weights->size() != day_selection.size())
            throw EngineError("bad_weights", "weight count != day count");
        double sum = 0.0;
        for (double w : *weights) sum += w;
        if (std::abs(sum - 1.0) > 1e-9) throw EngineError("bad_weights", "weights must sum to 1");
    }

    int n_days = static_cast<int>(day_selection.size());
    int horizon = 0;
    for (int d : day_selection) horizon = std::max(horizon, (d + 1) * 24);

    // Sampled outage series per existing thermal generator, over the full
    // horizon so multi-day selections share one realization.
    std::map<std::string, std::vector<std::uint8_t>> outage_series;
    for (const auto& m : inputs.outage_models) {
        outage_series[m.generator] = generate_outage_series(m, horizon, inputs.master_seed);
    }

    const TimeSeries* system_load = find_series(inputs.loads, "system");

    std::vector<ScenarioDay> days;
    days.reserve(static_cast<std::size_t>(n_days));
    for (int k = 0; k < n_days; ++k) {
        int d = day_selection[static_cast<std::size_t>(k)];
        if (d < 0) throw EngineError("date_outside_coverage", "day " + std::to_string(d));
        ScenarioDay day;
        day.id = "day" + std::to_string(d);
        day.probability = weights ? (*weights)[static_cast<std::size_t>(k)] : 1.0 / n_days;

        day.demand.resize(system.buses.size());
        if (system_load) {
            std::vector<double> sys24 = slice_day(*system_load, d);
            for (std::size_t b = 0; b < system.buses.size(); ++b) {
                const auto& bus = system.buses[b];
                day.demand[b].assign(24, 0.0);
                if (!bus.in_service) continue;
                for (int h = 0; h < 24; ++h)
                    day.demand[b][static_cast<std::size_t>(h)] =
                        sys24[static_cast<std::size_t>(h)] * bus.load_fraction;
            }
        } else {
            for (std::size_t b = 0; b < system.buses.size(); ++b) {
                const auto& bus = system.buses[b];
                if (!bus.in_service) {
                    day.demand[b].assign(24, 0.0);
                    continue;
                }
                const TimeSeries* s = find_series(inputs.loads, bus.id);
                if (!s) throw EngineError("missing_series", "load for bus " + bus.id);
                day.demand[b] = slice_day(*s, d);
            }
        }
        for (auto& series : day.demand)
            for (double v : series)
                if (v < 0) throw EngineError("negative_demand", day.id);

        // Existing thermal: sampled outage series, ANDed with any explicit
        // availability input. Candidates: constant derate factor.
        for (const auto& g : system.thermal_generators) {
            std::vector<double> a(24, 1.0);
            if (!g.existing) {
                a.assign(24, system.config.candidate_derate);
            } else {
                if (auto it = outage_series.find(g.id); it != outage_series.end()) {
                    for (int h = 0; h < 24; ++h)
                        a[static_cast<std::size_t>(h)] =
                            static_cast<double>(it->second[static_cast<std::size_t>(d * 24 + h)]);
                }
                if (const TimeSeries* s = find_series(inputs.availabilities, g.id)) {
                    auto f = slice_day(*s, d);
                    for (int h = 0; h < 24; ++h)
                        a[static_cast<std::size_t>(h)] =
                            std::min(a[static_cast<std::size_t>(h)], f[static_cast<std::size_t>(h)]);
                }
            }
            day.availability[g.id] = std::move(a);
        }
        // Renewables: availability series for existing; donor series at the
        // same bus (same tech) for candidates, scaled by the derate factor.
        for (const auto& g : system.renewable_generators) {
            if (g.existing) {
                const TimeSeries* s = find_series(inputs.availabilities, g.id);
                if (!s) throw EngineError("missing_series", "availability for " + g.id);
                day.availability[g.id] = slice_day(*s, d);
            } else {
                const RenewableGenerator* donor = nullptr;
                for (const auto& e : system.renewable_generators)
                    if (e.existing && e.bus == g.bus && e.tech == g.tech) {
                        donor = &e;
                        break;
                    }
                std::vector<double> a;
                if (donor) {
                    const TimeSeries* s = find_series(inputs.availabilities, donor->id);
                    if (!s) throw EngineError("missing_series", "availability for " + donor->id);
                    a = slice_day(*s, d);
                } else if (const TimeSeries* s = find_series(inputs.availabilities, g.id)) {
                    a = slice_day(*s, d);
                } else {
                    throw EngineError("missing_series",
                                      "no donor or explicit availability for candidate " + g.id);
                }
                for (auto& v : a) v *= system.config.candidate_derate;
                day.availability[g.id] = std::move(a);
            }
        }
        for (auto& [id, series] : day.availability)
            for (double v : series)
                if (v < 0 || v > 1) throw EngineError("availability_range", id);

        day.fuel_supply.resize(system.fuels.size());
        for (std::size_t f = 0; f < system.fuels.size(); ++f) {
            const auto& spec = system.fuels[f];
            std::optional<double> supply = spec.supply_per_day;
            std::string key = spec.id.str();
            if (auto it = inputs.fuel_supply_per_day.find(key);
                it != inputs.fuel_supply_per_day.end())
                supply = it->second;
            if (auto it = inputs.fuel_supply_horizon_total.find(key);
                it != inputs.fuel_supply_horizon_total.end())
                supply = it->second / n_days;  // daily average over the horizon
            day.fuel_supply[f] = supply;
        }

        if (system.config.reserve_margin_series) {
            const auto& rm = *system.config.reserve_margin_series;
            if (rm.size() != 24) throw EngineError("bad_reserve_series", "expected 24 values");
            day.reserve_req = rm;
        } else {
            day.reserve_req.assign(24, system.config.reserve_margin);
        }
        days.push_back(std::move(day));
    }
    return days;
}

}  // namespace gridcep
