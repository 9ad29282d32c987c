#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gridcep/common.hpp"

namespace gridcep {

enum class FuelKind { NG, bunker, diesel, coal, other };
enum class RenewableTech { solar, wind, hydro, other };
enum class NetworkMode { copperplate, pipe_and_bubble };
enum class SiteLimitDomain { generation, storage };

const char* to_string(FuelKind k);
const char* to_string(RenewableTech t);
const char* to_string(NetworkMode m);
std::optional<FuelKind> fuel_kind_from_string(const std::string& s);
std::optional<RenewableTech> renewable_tech_from_string(const std::string& s);
std::optional<NetworkMode> network_mode_from_string(const std::string& s);

struct FuelId {
    FuelKind kind = FuelKind::other;
    std::string location;

    std::string str() const { return std::string(to_string(kind)) + "/" + location; }
    friend bool operator==(const FuelId& a, const FuelId& b) {
        return a.kind == b.kind && a.location == b.location;
    }
    friend bool operator<(const FuelId& a, const FuelId& b) {
        if (a.kind != b.kind) return a.kind < b.kind;
        return a.location < b.location;
    }
};

struct FuelSpec {
    FuelId id;
    double price = 0.0;                          // $/MMBtu
    std::optional<double> supply_per_day;        // MMBtu/day; nullopt = unlimited
};

struct Bus {
    std::string id;
    double load_fraction = 0.0;  // share of system load served here
    bool in_service = true;
};

struct Line {
    std::string id;
    std::string from_bus;
    std::string to_bus;
    double thermal_limit = 0.0;  // MW
    bool in_service = true;
};

struct StartupCategory {
    double min_hours_offline = 0.0;
    double cost = 0.0;
};

struct HeatRatePoint {
    double power = 0.0;      // MW
    double fuel_rate = 0.0;  // MMBtu/h
};

// Convex piecewise-linear fuel input curve over [P_min, P_max].
struct HeatRateCurve {
    std::vector<HeatRatePoint> breakpoints;

    double max_fuel_rate() const {
        return breakpoints.empty() ? 0.0 : breakpoints.back().fuel_rate;
    }
    // Fuel input at power p; clamps outside the breakpoint range.
    double at(double p) const;
    // Two-breakpoint linear curve through (pmin, hr*pmin) and (pmax, hr*pmax).
    static HeatRateCurve linear(double avg_heat_rate, double pmin, double pmax);
};

struct ThermalGenerator {
    std::string id;
    std::string bus;
    bool existing = true;
    // Nameplate capacity for existing units; capacity of one investable unit
    // for candidates.
    double capacity = 0.0;
    double min_power = 0.0;
    int min_up = 1;    // hours
    int min_down = 1;  // hours
    double ramp_up = 0.0;        // MW/h
    double ramp_down = 0.0;      // MW/h
    double startup_limit = 0.0;  // MW
    double shutdown_limit = 0.0; // MW
    std::vector<StartupCategory> startup_categories;
    HeatRateCurve heat_rate;
    FuelId primary_fuel;
    std::optional<FuelId> secondary_fuel;
    double vom = 0.0;              // $/MWh
    double fom = 0.0;              // $/MW-y
    double capex_annualized = 0.0; // $/MW-y, candidates
    bool retirable = false;
    double retirement_cost = 0.0;  // $/y
    double min_utilization = 0.0;  // kappa in [0,1]
    int initial_status_hours = 0;  // >0 on for that long, <0 off for that long
    std::string tech_class;
};

struct RenewableGenerator {
    std::string id;
    std::string bus;
    bool existing = true;
    double capacity = 0.0;  // nameplate (existing) or unit capacity (candidate)
    double vom = 0.0;
    double fom = 0.0;
    double capex_annualized = 0.0;
    RenewableTech tech = RenewableTech::solar;
};

struct StorageUnit {
    std::string id;
    std::string bus;
    bool existing = true;
    double power_rating = 0.0;  // MW (existing) or unit capacity (candidate)
    double duration = 0.0;      // hours
    double eff_charge = 1.0;
    double eff_discharge = 1.0;
    double vom = 0.0;
    double discharge_cost = 0.0;  // $/MWh extra on discharge
    double fom = 0.0;
    double capex_annualized = 0.0;
    std::string tech_class = "BESS";
};

struct SiteLimit {
    std::string bus;
    SiteLimitDomain applies_to = SiteLimitDomain::generation;
    std::string tech_class = "ALL";          // class tag or ALL
    std::optional<double> max_capacity;      // MW; nullopt = unlimited
};

struct PHConfig {
    double rho_scale = 1.0;
    int max_iterations = 200;
    double convergence_tol = 1e-4;
    double subproblem_mip_gap = 1e-4;
    std::optional<double> time_limit;  // seconds
    int bound_interval = 5;
    int checkpoint_interval = 10;
};

struct PlannerConfig {
    double voll = 30000.0;            // $/MWh
    double reserve_penalty = 2000.0;  // $/MW
    double util_penalty = 2000.0;     // $/MWh
    double reserve_margin = 900.0;    // MW, constant over t
    std::optional<std::vector<double>> reserve_margin_series;  // hourly override
    double period_hours = 1.0;        // tau
    double periods_per_year = 365.0;  // T_rep
    NetworkMode network_mode = NetworkMode::pipe_and_bubble;
    double candidate_derate = 0.85;
    bool enforce_utilization = true;
    double mip_gap = 1e-4;
    std::optional<double> time_limit;
    int threads = 1;
    int seed = 0;
    int workers = 2;
    std::size_t ef_variable_cap = 5'000'000;
    double max_units_default = 100.0;  // fallback build cap (units) when no site limit applies
    PHConfig ph;
};

// Candidate class templates, expanded into concrete units by
// expand_candidate_catalog. Thermal classes are instantiated per copy
// (binary build decisions); renewable/storage classes once per bus
// (continuous builds).
struct CandidateCatalog {
    std::vector<ThermalGenerator> thermal;    // tech_class names the class
    std::vector<RenewableGenerator> renewable;
    std::vector<StorageUnit> storage;
    std::map<std::string, std::vector<std::string>> eligible_buses;  // class -> buses
    std::map<std::string, int> earliest_year;                        // class -> first year
    std::map<std::string, std::string> renewable_class_name;         // candidate class -> tag
};

struct PowerSystem {
    std::vector<Bus> buses;
    std::vector<Line> lines;
    std::vector<ThermalGenerator> thermal_generators;
    std::vector<RenewableGenerator> renewable_generators;
    std::vector<StorageUnit> storage_units;
    std::vector<FuelSpec> fuels;
    std::vector<SiteLimit> site_limits;
    CandidateCatalog candidate_catalog;
    PlannerConfig config;

    int bus_index(const std::string& id) const;
    const FuelSpec* find_fuel(const FuelId& id) const;
    int periods_per_day() const;

    // Tech class of a renewable candidate/unit (its tech name).
    static std::string renewable_class(const RenewableGenerator& g) { return to_string(g.tech); }
};

// Returns every invariant violation, sorted by (element id, rule).
// Deterministic and pure; an empty list means the system is valid.
std::vector<Violation> validate_system(const PowerSystem& system);

// Per-bus copy counts for thermal candidate classes. Classes may be given
// a blanket count (applied at every eligible bus) or explicit per-bus
// counts. Renewable/storage candidates are emitted once per (bus, class)
// irrespective of counts.
struct CandidateCounts {
    std::map<std::string, int> per_class;                          // blanket
    std::map<std::string, std::map<std::string, int>> per_bus;     // explicit
};

PowerSystem expand_candidate_catalog(const PowerSystem& system, const CandidateCounts& counts);

// Filters the candidate catalog: keep classes available by `year` (per the
// catalog's earliest_year) and, optionally, renewable/storage only.
void filter_candidate_catalog(PowerSystem& system, std::optional<int> year, bool renewables_only);

// Sum of existing capacity in MW for a (domain, class, bus) triple; class
// "ALL" aggregates over classes.
double existing_capacity_at(const PowerSystem& system, SiteLimitDomain domain,
                            const std::string& tech_class, const std::string& bus);

}  // namespace gridcep
