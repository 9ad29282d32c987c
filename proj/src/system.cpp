#include "gridcep/system.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace gridcep {

const char* to_string(FuelKind k) {
    switch (k) {
        case FuelKind::NG: return "NG";
        case FuelKind::bunker: return "bunker";
        case FuelKind::diesel: return "diesel";
        case FuelKind::coal: return "coal";
        case FuelKind::other: return "other";
    }
    return "?";
}

const char* to_string(RenewableTech t) {
    switch (t) {
        case RenewableTech::solar: return "solar";
        case RenewableTech::wind: return "wind";
        case RenewableTech::hydro: return "hydro";
        case RenewableTech::other: return "other";
    }
    return "?";
}

const char* to_string(NetworkMode m) {
    return m == NetworkMode::copperplate ? "copperplate" : "pipe_and_bubble";
}

std::optional<FuelKind> fuel_kind_from_string(const std::string& s) {
    if (s == "NG") return FuelKind::NG;
    if (s == "bunker") return FuelKind::bunker;
    if (s == "diesel") return FuelKind::diesel;
    if (s == "coal") return FuelKind::coal;
    if (s == "other") return FuelKind::other;
    return std::nullopt;
}

std::optional<RenewableTech> renewable_tech_from_string(const std::string& s) {
    if (s == "solar") return RenewableTech::solar;
    if (s == "wind") return RenewableTech::wind;
    if (s == "hydro") return RenewableTech::hydro;
    if (s == "other") return RenewableTech::other;
    return std::nullopt;
}

std::optional<NetworkMode> network_mode_from_string(const std::string& s) {
    if (s == "copperplate") return NetworkMode::copperplate;
    if (s == "pipe_and_bubble" || s == "pipe") return NetworkMode::pipe_and_bubble;
    return std::nullopt;
}

double HeatRateCurve::at(double p) const {
    if (breakpoints.empty()) return 0.0;
    if (p <= breakpoints.front().power) return breakpoints.front().fuel_rate;
    if (p >= breakpoints.back().power) return breakpoints.back().fuel_rate;
    for (std::size_t k = 0; k + 1 < breakpoints.size(); ++k) {
        const auto& a = breakpoints[k];
        const auto& b = breakpoints[k + 1];
        if (p <= b.power) {
            double w = (p - a.power) / (b.power - a.power);
            return a.fuel_rate + w * (b.fuel_rate - a.fuel_rate);
        }
    }
    return breakpoints.back().fuel_rate;
}

HeatRateCurve HeatRateCurve::linear(double avg_heat_rate, double pmin, double pmax) {
    HeatRateCurve c;
    if (pmax <= pmin) {
        c.breakpoints = {{pmax, avg_heat_rate * pmax}};
    } else {
        c.breakpoints = {{pmin, avg_heat_rate * pmin}, {pmax, avg_heat_rate * pmax}};
    }
    return c;
}

int PowerSystem::bus_index(const std::string& id) const {
    for (std::size_t i = 0; i < buses.size(); ++i)
        if (buses[i].id == id) return static_cast<int>(i);
    return -1;
}

const FuelSpec* PowerSystem::find_fuel(const FuelId& id) const {
    for (const auto& f : fuels)
        if (f.id == id) return &f;
    return nullptr;
}

int PowerSystem::periods_per_day() const {
    double tau = config.period_hours;
    if (tau <= 0) return 24;
    return static_cast<int>(std::lround(24.0 / tau));
}

namespace {

struct Collector {
    std::vector<Violation> out;
    void add(const std::string& element, const std::string& rule, std::string detail = {}) {
        out.push_back(Violation{element, rule, std::move(detail)});
    }
};

void check_thermal(const PowerSystem& sys, const ThermalGenerator& g, Collector& c) {
    if (sys.bus_index(g.bus) < 0) c.add(g.id, "unknown_bus", g.bus);
    if (g.capacity <= 0) c.add(g.id, "nonpositive_capacity");
    if (g.min_power < 0 || g.min_power > g.capacity) c.add(g.id, "min_power_range");
    if (g.startup_limit < g.min_power) c.add(g.id, "startup_below_min_power");
    if (g.shutdown_limit < g.min_power) c.add(g.id, "shutdown_below_min_power");
    if (g.min_up < 1 || g.min_down < 1) c.add(g.id, "min_time_hours");
    if (g.ramp_up < 0 || g.ramp_down < 0) c.add(g.id, "negative_ramp");
    if (g.retirable && !g.existing) c.add(g.id, "retirable_not_existing");
    if (g.secondary_fuel && *g.secondary_fuel == g.primary_fuel)
        c.add(g.id, "secondary_equals_primary");
    if (!sys.find_fuel(g.primary_fuel)) c.add(g.id, "unknown_fuel", g.primary_fuel.str());
    if (g.secondary_fuel && !sys.find_fuel(*g.secondary_fuel))
        c.add(g.id, "unknown_fuel", g.secondary_fuel->str());

    for (std::size_t i = 0; i < g.startup_categories.size(); ++i) {
        const auto& cat = g.startup_categories[i];
        if (cat.min_hours_offline < 0 || cat.cost < 0) c.add(g.id, "startup_category_negative");
        if (i > 0) {
            const auto& prev = g.startup_categories[i - 1];
            if (cat.min_hours_offline <= prev.min_hours_offline || cat.cost < prev.cost)
                c.add(g.id, "startup_categories_order");
        }
    }

    const auto& bp = g.heat_rate.breakpoints;
    if (bp.empty()) {
        c.add(g.id, "heat_rate_missing");
        return;
    }
    for (std::size_t i = 0; i < bp.size(); ++i) {
        if (bp[i].fuel_rate < 0) c.add(g.id, "negative_fuel_rate");
        if (i > 0 && bp[i].power <= bp[i - 1].power) c.add(g.id, "heat_rate_powers");
    }
    if (std::abs(bp.front().power - g.min_power) > 1e-6 ||
        std::abs(bp.back().power - g.capacity) > 1e-6)
        c.add(g.id, "heat_rate_range");
    double prev_slope = -1e300;
    for (std::size_t i = 0; i + 1 < bp.size(); ++i) {
        double dp = bp[i + 1].power - bp[i].power;
        if (dp <= 0) continue;  // already reported
        double slope = (bp[i + 1].fuel_rate - bp[i].fuel_rate) / dp;
        if (slope < prev_slope - 1e-9) c.add(g.id, "heat_rate_convexity");
        prev_slope = slope;
    }
}

}  // namespace

double existing_capacity_at(const PowerSystem& system, SiteLimitDomain domain,
                            const std::string& tech_class, const std::string& bus) {
    double total = 0.0;
    bool all = tech_class == "ALL";
    if (domain == SiteLimitDomain::generation) {
        for (const auto& g : system.thermal_generators)
            if (g.existing && g.bus == bus && (all || g.tech_class == tech_class))
                total += g.capacity;
        for (const auto& g : system.renewable_generators)
            if (g.existing && g.bus == bus && (all || PowerSystem::renewable_class(g) == tech_class))
                total += g.capacity;
    } else {
        for (const auto& s : system.storage_units)
            if (s.existing && s.bus == bus && (all || s.tech_class == tech_class))
                total += s.power_rating;
    }
    return total;
}

std::vector<Violation> validate_system(const PowerSystem& sys) {
    Collector c;

    // id uniqueness, per family (generators share one namespace)
    auto check_dupes = [&c](const std::vector<std::string>& ids, const char* what) {
        std::set<std::string> seen;
        for (const auto& id : ids)
            if (!seen.insert(id).second) c.add(id, "duplicate_id", what);
    };
    {
        std::vector<std::string> ids;
        for (const auto& b : sys.buses) ids.push_back(b.id);
        check_dupes(ids, "bus");
        ids.clear();
        for (const auto& l : sys.lines) ids.push_back(l.id);
        check_dupes(ids, "line");
        ids.clear();
        for (const auto& g : sys.thermal_generators) ids.push_back(g.id);
        for (const auto& g : sys.renewable_generators) ids.push_back(g.id);
        check_dupes(ids, "generator");
        ids.clear();
        for (const auto& s : sys.storage_units) ids.push_back(s.id);
        check_dupes(ids, "storage");
    }

    double frac_sum = 0.0;
    for (const auto& b : sys.buses) {
        if (b.load_fraction < 0) c.add(b.id, "negative_load_fraction");
        if (b.in_service) frac_sum += b.load_fraction;
    }
    if (std::abs(frac_sum - 1.0) > 1e-9)
        c.add("system", "load_fraction_sum", "sum=" + format_full(frac_sum));

    for (const auto& l : sys.lines) {
        if (l.from_bus == l.to_bus) c.add(l.id, "line_self_loop");
        if (l.thermal_limit <= 0) c.add(l.id, "nonpositive_line_limit");
        if (sys.bus_index(l.from_bus) < 0) c.add(l.id, "unknown_bus", l.from_bus);
        if (sys.bus_index(l.to_bus) < 0) c.add(l.id, "unknown_bus", l.to_bus);
    }

    {
        std::set<std::pair<int, std::string>> seen;
        for (const auto& f : sys.fuels) {
            if (f.price < 0) c.add(f.id.str(), "negative_fuel_price");
            if (f.supply_per_day && *f.supply_per_day < 0) c.add(f.id.str(), "negative_fuel_supply");
            if (!seen.insert({static_cast<int>(f.id.kind), f.id.location}).second)
                c.add(f.id.str(), "duplicate_fuel");
        }
    }

    for (const auto& g : sys.thermal_generators) check_thermal(sys, g, c);
    for (const auto& g : sys.renewable_generators) {
        if (sys.bus_index(g.bus) < 0) c.add(g.id, "unknown_bus", g.bus);
        if (g.capacity <= 0) c.add(g.id, "nonpositive_capacity");
    }
    for (const auto& s : sys.storage_units) {
        if (sys.bus_index(s.bus) < 0) c.add(s.id, "unknown_bus", s.bus);
        if (s.power_rating <= 0) c.add(s.id, "nonpositive_capacity");
        if (s.duration <= 0) c.add(s.id, "nonpositive_duration");
        if (s.eff_charge <= 0 || s.eff_charge > 1 || s.eff_discharge <= 0 || s.eff_discharge > 1)
            c.add(s.id, "efficiency_range");
    }

    for (const auto& lim : sys.site_limits) {
        if (sys.bus_index(lim.bus) < 0) c.add(lim.bus, "unknown_bus", "site_limit");
        if (lim.max_capacity) {
            double existing = existing_capacity_at(sys, lim.applies_to, lim.tech_class, lim.bus);
            if (*lim.max_capacity < existing - 1e-9)
                c.add(lim.bus, "site_limit_below_existing",
                      lim.tech_class + " existing=" + format_full(existing));
        }
    }

    const auto& cfg = sys.config;
    if (cfg.voll < 0 || cfg.reserve_penalty < 0 || cfg.util_penalty < 0)
        c.add("config", "negative_penalty");
    if (cfg.period_hours <= 0 || cfg.periods_per_year <= 0) c.add("config", "nonpositive_period");
    if (cfg.period_hours > 0 &&
        std::abs(24.0 / cfg.period_hours - std::lround(24.0 / cfg.period_hours)) > 1e-9)
        c.add("config", "period_not_divisor_of_day");
    if (cfg.reserve_margin < 0) c.add("config", "negative_reserve_margin");
    if (cfg.candidate_derate < 0 || cfg.candidate_derate > 1)
        c.add("config", "candidate_derate_range");

    std::sort(c.out.begin(), c.out.end(), [](const Violation& a, const Violation& b) {
        if (a.element != b.element) return a.element < b.element;
        return a.rule < b.rule;
    });
    return c.out;
}

namespace {

// Buses a candidate class may be placed at: explicit catalog list if given,
// else technology-specific defaults (donor buses for renewables, in-service
// buses for thermal/storage). Buses with a zero site limit are skipped.
std::vector<std::string> default_buses(const PowerSystem& sys, SiteLimitDomain domain,
                                       const std::string& tech_class,
                                       const std::optional<RenewableTech>& renew_tech) {
    std::vector<std::string> out;
    if (renew_tech) {
        for (const auto& g : sys.renewable_generators)
            if (g.existing && g.tech == *renew_tech &&
                std::find(out.begin(), out.end(), g.bus) == out.end())
                out.push_back(g.bus);
        return out;
    }
    (void)domain;
    (void)tech_class;
    for (const auto& b : sys.buses)
        if (b.in_service) out.push_back(b.id);
    return out;
}

bool site_excluded(const PowerSystem& sys, SiteLimitDomain domain, const std::string& tech_class,
                   const std::string& bus) {
    for (const auto& lim : sys.site_limits) {
        if (lim.bus != bus || lim.applies_to != domain) continue;
        if (lim.tech_class != "ALL" && lim.tech_class != tech_class) continue;
        if (lim.max_capacity && *lim.max_capacity <= 0) return true;
    }
    return false;
}

}  // namespace

PowerSystem expand_candidate_catalog(const PowerSystem& system, const CandidateCounts& counts) {
    PowerSystem out = system;
    const auto& cat = system.candidate_catalog;

    auto class_exists = [&cat](const std::string& name) {
        for (const auto& t : cat.thermal)
            if (t.tech_class == name) return true;
        for (const auto& r : cat.renewable)
            if (PowerSystem::renewable_class(r) == name) return true;
        for (const auto& s : cat.storage)
            if (s.tech_class == name) return true;
        return false;
    };
    for (const auto& [name, n] : counts.per_class) {
        if (n < 0) throw EngineError("negative_count", name);
        if (!class_exists(name)) throw EngineError("unknown_tech_class", name);
    }
    for (const auto& [name, per_bus] : counts.per_bus) {
        if (!class_exists(name)) throw EngineError("unknown_tech_class", name);
        for (const auto& [bus, n] : per_bus) {
            if (n < 0) throw EngineError("negative_count", name + "@" + bus);
            if (system.bus_index(bus) < 0) throw EngineError("unknown_bus", bus);
        }
    }

    auto eligible = [&](SiteLimitDomain domain, const std::string& cls,
                        const std::optional<RenewableTech>& tech) {
        auto it = cat.eligible_buses.find(cls);
        if (it != cat.eligible_buses.end()) return it->second;
        return default_buses(system, domain, cls, tech);
    };

    for (const auto& tmpl : cat.thermal) {
        const std::string& cls = tmpl.tech_class;
        std::map<std::string, int> plan;  // bus -> copies
        if (auto it = counts.per_class.find(cls); it != counts.per_class.end()) {
            for (const auto& bus : eligible(SiteLimitDomain::generation, cls, std::nullopt)) {
                if (site_excluded(system, SiteLimitDomain::generation, cls, bus)) continue;
                plan[bus] += it->second;
            }
        }
        if (auto it = counts.per_bus.find(cls); it != counts.per_bus.end()) {
            for (const auto& [bus, n] : it->second) {
                if (site_excluded(system, SiteLimitDomain::generation, cls, bus))
                    throw EngineError("bus_not_eligible", cls + "@" + bus);
                plan[bus] += n;
            }
        }
        for (const auto& [bus, n] : plan) {
            for (int copy = 0; copy < n; ++copy) {
                ThermalGenerator unit = tmpl;
                unit.existing = false;
                unit.retirable = false;
                unit.bus = bus;
                unit.id = cls + "@" + bus + "#" + std::to_string(copy);
                out.thermal_generators.push_back(std::move(unit));
            }
        }
    }

    for (const auto& tmpl : cat.renewable) {
        std::string cls = PowerSystem::renewable_class(tmpl);
        for (const auto& bus : eligible(SiteLimitDomain::generation, cls, tmpl.tech)) {
            if (site_excluded(system, SiteLimitDomain::generation, cls, bus)) continue;
            RenewableGenerator unit = tmpl;
            unit.existing = false;
            unit.bus = bus;
            unit.id = cls + "@" + bus;
            out.renewable_generators.push_back(std::move(unit));
        }
    }
    for (const auto& tmpl : cat.storage) {
        for (const auto& bus : eligible(SiteLimitDomain::storage, tmpl.tech_class, std::nullopt)) {
            if (site_excluded(system, SiteLimitDomain::storage, tmpl.tech_class, bus)) continue;
            StorageUnit unit = tmpl;
            unit.existing = false;
            unit.bus = bus;
            unit.id = tmpl.tech_class + "@" + bus;
            out.storage_units.push_back(std::move(unit));
        }
    }
    return out;
}

void filter_candidate_catalog(PowerSystem& system, std::optional<int> year, bool renewables_only) {
    auto& cat = system.candidate_catalog;
    auto available = [&](const std::string& cls) {
        if (!year) return true;
        auto it = cat.earliest_year.find(cls);
        return it == cat.earliest_year.end() || it->second <= *year;
    };
    std::erase_if(cat.thermal, [&](const ThermalGenerator& t) {
        return renewables_only || !available(t.tech_class);
    });
    std::erase_if(cat.renewable, [&](const RenewableGenerator& r) {
        return !available(PowerSystem::renewable_class(r));
    });
    std::erase_if(cat.storage,
                  [&](const StorageUnit& s) { return !available(s.tech_class); });
}

}  // namespace gridcep
