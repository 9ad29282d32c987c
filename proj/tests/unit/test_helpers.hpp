#pragma once

#include <string>
#include <vector>

#include "gridcep/scenario.hpp"
#include "gridcep/system.hpp"

namespace testutil {

using namespace gridcep;

inline FuelId ng_fuel() { return FuelId{FuelKind::NG, "island"}; }
inline FuelId diesel_fuel() { return FuelId{FuelKind::diesel, "island"}; }

// Bare system: n equal-load buses, one unlimited NG fuel, toy-friendly
// config (no reserve margin, copperplate, single thread).
inline PowerSystem base_system(int n_buses = 1) {
    PowerSystem sys;
    for (int b = 0; b < n_buses; ++b)
        sys.buses.push_back(Bus{"b" + std::to_string(b), 1.0 / n_buses, true});
    sys.fuels.push_back(FuelSpec{ng_fuel(), 5.0, std::nullopt});
    sys.config.voll = 30000.0;
    sys.config.reserve_penalty = 2000.0;
    sys.config.util_penalty = 2000.0;
    sys.config.reserve_margin = 0.0;
    sys.config.network_mode = NetworkMode::copperplate;
    sys.config.mip_gap = 1e-6;
    sys.config.threads = 1;
    sys.config.workers = 1;
    sys.config.seed = 7;
    return sys;
}

inline ThermalGenerator thermal(const std::string& id, const std::string& bus, double cap,
                                double pmin, double heat_rate = 10.0, double vom = 1.0) {
    ThermalGenerator g;
    g.id = id;
    g.bus = bus;
    g.existing = true;
    g.capacity = cap;
    g.min_power = pmin;
    g.min_up = 1;
    g.min_down = 1;
    g.ramp_up = cap;
    g.ramp_down = cap;
    g.startup_limit = cap;
    g.shutdown_limit = cap;
    g.heat_rate = HeatRateCurve::linear(heat_rate, pmin, cap);
    g.primary_fuel = ng_fuel();
    g.vom = vom;
    g.fom = 0.0;
    g.min_utilization = 0.0;
    g.initial_status_hours = 24;
    g.tech_class = "ST";
    return g;
}

inline StorageUnit storage(const std::string& id, const std::string& bus, double power,
                           double duration, double eff = 1.0) {
    StorageUnit s;
    s.id = id;
    s.bus = bus;
    s.existing = true;
    s.power_rating = power;
    s.duration = duration;
    s.eff_charge = eff;
    s.eff_discharge = eff;
    s.discharge_cost = 0.1;
    return s;
}

inline RenewableGenerator renewable(const std::string& id, const std::string& bus, double cap,
                                    RenewableTech tech = RenewableTech::solar) {
    RenewableGenerator g;
    g.id = id;
    g.bus = bus;
    g.existing = true;
    g.capacity = cap;
    g.tech = tech;
    return g;
}

// One scenario day with the given system-wide hourly demand, split across
// buses by load fraction; flat availability for every generator.
inline ScenarioDay flat_day(const PowerSystem& sys, const std::vector<double>& system_demand24,
                            double thermal_avail = 1.0, double renewable_avail = 1.0) {
    ScenarioDay day;
    day.id = "day0";
    day.probability = 1.0;
    day.demand.resize(sys.buses.size());
    for (std::size_t b = 0; b < sys.buses.size(); ++b) {
        day.demand[b].resize(24);
        for (int h = 0; h < 24; ++h)
            day.demand[b][static_cast<std::size_t>(h)] =
                system_demand24[static_cast<std::size_t>(h)] * sys.buses[b].load_fraction;
    }
    for (const auto& g : sys.thermal_generators)
        day.availability[g.id].assign(24, g.existing ? thermal_avail : sys.config.candidate_derate);
    for (const auto& g : sys.renewable_generators)
        day.availability[g.id].assign(24, renewable_avail);
    day.fuel_supply.assign(sys.fuels.size(), std::nullopt);
    day.reserve_req.assign(24, sys.config.reserve_margin);
    return day;
}

inline std::vector<double> constant24(double v) { return std::vector<double>(24, v); }

}  // namespace testutil
