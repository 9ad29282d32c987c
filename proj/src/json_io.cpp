#include "gridcep/json_io.hpp"

#include <fstream>
#include <nlohmann/json.hpp>

namespace gridcep::io {

namespace {

json fuel_id_to_json(const FuelId& id) {
    return json{{"kind", to_string(id.kind)}, {"location", id.location}};
}

FuelId fuel_id_from_json(const json& j) {
    FuelId id;
    auto kind = fuel_kind_from_string(j.at("kind").get<std::string>());
    if (!kind) throw EngineError("bad_fuel_kind", j.at("kind").get<std::string>());
    id.kind = *kind;
    id.location = j.value("location", std::string{});
    return id;
}

json opt_to_json(const std::optional<double>& v) {
    if (v) return *v;
    return nullptr;
}

std::optional<double> opt_from_json(const json& j) {
    if (j.is_null()) return std::nullopt;
    return j.get<double>();
}

json heat_rate_to_json(const HeatRateCurve& c) {
    json arr = json::array();
    for (const auto& bp : c.breakpoints)
        arr.push_back(json{{"power", bp.power}, {"fuel_rate", bp.fuel_rate}});
    return arr;
}

HeatRateCurve heat_rate_from_json(const json& j, double pmin, double cap) {
    HeatRateCurve c;
    if (j.is_number()) {
        // A scalar average heat rate expands to a two-breakpoint linear curve.
        return HeatRateCurve::linear(j.get<double>(), pmin, cap);
    }
    for (const auto& bp : j)
        c.breakpoints.push_back({bp.at("power").get<double>(), bp.at("fuel_rate").get<double>()});
    return c;
}

json thermal_to_json(const ThermalGenerator& g) {
    json j{{"id", g.id},
           {"bus", g.bus},
           {"existing", g.existing},
           {"min_power", g.min_power},
           {"min_up", g.min_up},
           {"min_down", g.min_down},
           {"ramp_up", g.ramp_up},
           {"ramp_down", g.ramp_down},
           {"startup_limit", g.startup_limit},
           {"shutdown_limit", g.shutdown_limit},
           {"heat_rate", heat_rate_to_json(g.heat_rate)},
           {"primary_fuel", fuel_id_to_json(g.primary_fuel)},
           {"vom", g.vom},
           {"fom", g.fom},
           {"min_utilization", g.min_utilization},
           {"initial_status_hours", g.initial_status_hours},
           {"tech_class", g.tech_class}};
    if (g.existing)
        j["nameplate"] = g.capacity;
    else {
        j["unit_capacity"] = g.capacity;
        j["capex_annualized"] = g.capex_annualized;
    }
    if (g.retirable) {
        j["retirable"] = true;
        j["retirement_cost"] = g.retirement_cost;
    }
    json cats = json::array();
    for (const auto& c : g.startup_categories)
        cats.push_back(json{{"min_hours_offline", c.min_hours_offline}, {"cost", c.cost}});
    j["startup_categories"] = cats;
    if (g.secondary_fuel) j["secondary_fuel"] = fuel_id_to_json(*g.secondary_fuel);
    return j;
}

ThermalGenerator thermal_from_json(const json& j, bool default_existing) {
    ThermalGenerator g;
    g.id = j.value("id", std::string{});
    g.bus = j.value("bus", std::string{});
    g.existing = j.value("existing", default_existing);
    if (j.contains("nameplate"))
        g.capacity = j.at("nameplate").get<double>();
    else
        g.capacity = j.at("unit_capacity").get<double>();
    g.min_power = j.value("min_power", 0.0);
    g.min_up = j.value("min_up", 1);
    g.min_down = j.value("min_down", 1);
    g.ramp_up = j.value("ramp_up", g.capacity);
    g.ramp_down = j.value("ramp_down", g.capacity);
    g.startup_limit = j.value("startup_limit", std::max(g.min_power, g.capacity));
    g.shutdown_limit = j.value("shutdown_limit", std::max(g.min_power, g.capacity));
    if (j.contains("startup_categories"))
        for (const auto& c : j.at("startup_categories"))
            g.startup_categories.push_back(
                {c.at("min_hours_offline").get<double>(), c.at("cost").get<double>()});
    g.heat_rate = j.contains("heat_rate")
                      ? heat_rate_from_json(j.at("heat_rate"), g.min_power, g.capacity)
                      : HeatRateCurve::linear(0.0, g.min_power, g.capacity);
    g.primary_fuel = fuel_id_from_json(j.at("primary_fuel"));
    if (j.contains("secondary_fuel") && !j.at("secondary_fuel").is_null())
        g.secondary_fuel = fuel_id_from_json(j.at("secondary_fuel"));
    g.vom = j.value("vom", 0.0);
    g.fom = j.value("fom", 0.0);
    g.capex_annualized = j.value("capex_annualized", 0.0);
    g.retirable = j.value("retirable", false);
    // Default retirement cost: 10% of the amortized FOM.
    g.retirement_cost = j.value("retirement_cost", 0.1 * g.fom * g.capacity);
    // Default utilization floor: 0.5 for large units, 0.05 for peakers.
    g.min_utilization = j.value("min_utilization", g.capacity >= 150.0 ? 0.5 : 0.05);
    g.initial_status_hours = j.value("initial_status_hours", g.existing ? 24 : -8760);
    g.tech_class = j.value("tech_class", std::string{"thermal"});
    return g;
}

json renewable_to_json(const RenewableGenerator& g) {
    json j{{"id", g.id},
           {"bus", g.bus},
           {"existing", g.existing},
           {"vom", g.vom},
           {"fom", g.fom},
           {"tech", to_string(g.tech)}};
    if (g.existing)
        j["nameplate"] = g.capacity;
    else {
        j["unit_capacity"] = g.capacity;
        j["capex_annualized"] = g.capex_annualized;
    }
    return j;
}

RenewableGenerator renewable_from_json(const json& j, bool default_existing) {
    RenewableGenerator g;
    g.id = j.value("id", std::string{});
    g.bus = j.value("bus", std::string{});
    g.existing = j.value("existing", default_existing);
    g.capacity = j.contains("nameplate") ? j.at("nameplate").get<double>()
                                         : j.at("unit_capacity").get<double>();
    g.vom = j.value("vom", 0.0);
    g.fom = j.value("fom", 0.0);
    g.capex_annualized = j.value("capex_annualized", 0.0);
    auto tech = renewable_tech_from_string(j.value("tech", std::string{"solar"}));
    if (!tech) throw EngineError("bad_tech", j.value("tech", std::string{}));
    g.tech = *tech;
    return g;
}

json storage_to_json(const StorageUnit& s) {
    json j{{"id", s.id},
           {"bus", s.bus},
           {"existing", s.existing},
           {"duration", s.duration},
           {"eff_charge", s.eff_charge},
           {"eff_discharge", s.eff_discharge},
           {"vom", s.vom},
           {"discharge_cost", s.discharge_cost},
           {"fom", s.fom},
           {"tech_class", s.tech_class}};
    if (s.existing)
        j["power_rating"] = s.power_rating;
    else {
        j["unit_capacity"] = s.power_rating;
        j["capex_annualized"] = s.capex_annualized;
    }
    return j;
}

StorageUnit storage_from_json(const json& j, bool default_existing) {
    StorageUnit s;
    s.id = j.value("id", std::string{});
    s.bus = j.value("bus", std::string{});
    s.existing = j.value("existing", default_existing);
    s.power_rating = j.contains("power_rating") ? j.at("power_rating").get<double>()
                                                : j.at("unit_capacity").get<double>();
    s.duration = j.value("duration", 4.0);
    s.eff_charge = j.value("eff_charge", 1.0);
    s.eff_discharge = j.value("eff_discharge", 1.0);
    s.vom = j.value("vom", 0.0);
    s.discharge_cost = j.value("discharge_cost", 0.0);
    s.fom = j.value("fom", 0.0);
    s.capex_annualized = j.value("capex_annualized", 0.0);
    s.tech_class = j.value("tech_class", std::string{"BESS"});
    return s;
}

SiteLimit site_limit_from_json(const json& j) {
    SiteLimit lim;
    lim.bus = j.at("bus").get<std::string>();
    std::string domain = j.value("applies_to", std::string{"generation"});
    lim.applies_to =
        domain == "storage" ? SiteLimitDomain::storage : SiteLimitDomain::generation;
    lim.tech_class = j.value("tech_class", std::string{"ALL"});
    lim.max_capacity = opt_from_json(j.value("max_capacity", json{}));
    return lim;
}

json site_limit_to_json(const SiteLimit& lim) {
    return json{{"bus", lim.bus},
                {"applies_to",
                 lim.applies_to == SiteLimitDomain::storage ? "storage" : "generation"},
                {"tech_class", lim.tech_class},
                {"max_capacity", opt_to_json(lim.max_capacity)}};
}

PlannerConfig config_from_json(const json& j) {
    PlannerConfig c;
    c.voll = j.value("voll", c.voll);
    c.reserve_penalty = j.value("reserve_penalty", c.reserve_penalty);
    c.util_penalty = j.value("util_penalty", c.util_penalty);
    c.reserve_margin = j.value("reserve_margin", c.reserve_margin);
    if (j.contains("reserve_margin_series") && !j.at("reserve_margin_series").is_null())
        c.reserve_margin_series = j.at("reserve_margin_series").get<std::vector<double>>();
    c.period_hours = j.value("period_hours", c.period_hours);
    c.periods_per_year = j.value("periods_per_year", c.periods_per_year);
    if (j.contains("network_mode")) {
        auto m = network_mode_from_string(j.at("network_mode").get<std::string>());
        if (!m) throw EngineError("bad_network_mode", j.at("network_mode").get<std::string>());
        c.network_mode = *m;
    }
    c.candidate_derate = j.value("candidate_derate", c.candidate_derate);
    c.enforce_utilization = j.value("enforce_utilization", c.enforce_utilization);
    c.mip_gap = j.value("mip_gap", c.mip_gap);
    if (j.contains("time_limit") && !j.at("time_limit").is_null())
        c.time_limit = j.at("time_limit").get<double>();
    c.threads = j.value("threads", c.threads);
    c.seed = j.value("seed", c.seed);
    c.workers = j.value("workers", c.workers);
    c.ef_variable_cap = j.value("ef_variable_cap", c.ef_variable_cap);
    c.max_units_default = j.value("max_units_default", c.max_units_default);
    if (j.contains("ph")) {
        const json& p = j.at("ph");
        c.ph.rho_scale = p.value("rho_scale", c.ph.rho_scale);
        c.ph.max_iterations = p.value("max_iterations", c.ph.max_iterations);
        c.ph.convergence_tol = p.value("convergence_tol", c.ph.convergence_tol);
        c.ph.subproblem_mip_gap = p.value("subproblem_mip_gap", c.ph.subproblem_mip_gap);
        if (p.contains("time_limit") && !p.at("time_limit").is_null())
            c.ph.time_limit = p.at("time_limit").get<double>();
        c.ph.bound_interval = p.value("bound_interval", c.ph.bound_interval);
        c.ph.checkpoint_interval = p.value("checkpoint_interval", c.ph.checkpoint_interval);
    }
    return c;
}

json config_to_json(const PlannerConfig& c) {
    json j{{"voll", c.voll},
           {"reserve_penalty", c.reserve_penalty},
           {"util_penalty", c.util_penalty},
           {"reserve_margin", c.reserve_margin},
           {"period_hours", c.period_hours},
           {"periods_per_year", c.periods_per_year},
           {"network_mode", to_string(c.network_mode)},
           {"candidate_derate", c.candidate_derate},
           {"enforce_utilization", c.enforce_utilization},
           {"mip_gap", c.mip_gap},
           {"threads", c.threads},
           {"seed", c.seed},
           {"workers", c.workers},
           {"ef_variable_cap", c.ef_variable_cap},
           {"max_units_default", c.max_units_default}};
    if (c.reserve_margin_series) j["reserve_margin_series"] = *c.reserve_margin_series;
    if (c.time_limit) j["time_limit"] = *c.time_limit;
    j["ph"] = json{{"rho_scale", c.ph.rho_scale},
                   {"max_iterations", c.ph.max_iterations},
                   {"convergence_tol", c.ph.convergence_tol},
                   {"subproblem_mip_gap", c.ph.subproblem_mip_gap},
                   {"bound_interval", c.ph.bound_interval},
                   {"checkpoint_interval", c.ph.checkpoint_interval}};
    if (c.ph.time_limit) j["ph"]["time_limit"] = *c.ph.time_limit;
    return j;
}

}  // namespace

json system_to_json(const PowerSystem& sys) {
    json j;
    j["config"] = config_to_json(sys.config);
    j["buses"] = json::array();
    for (const auto& b : sys.buses)
        j["buses"].push_back(json{{"id", b.id},
                                  {"load_fraction", b.load_fraction},
                                  {"in_service", b.in_service}});
    j["lines"] = json::array();
    for (const auto& l : sys.lines)
        j["lines"].push_back(json{{"id", l.id},
                                  {"from_bus", l.from_bus},
                                  {"to_bus", l.to_bus},
                                  {"thermal_limit", l.thermal_limit},
                                  {"in_service", l.in_service}});
    j["fuels"] = json::array();
    for (const auto& f : sys.fuels) {
        json fj = fuel_id_to_json(f.id);
        fj["price"] = f.price;
        fj["supply_per_day"] = opt_to_json(f.supply_per_day);
        j["fuels"].push_back(fj);
    }
    j["thermal_generators"] = json::array();
    for (const auto& g : sys.thermal_generators) j["thermal_generators"].push_back(thermal_to_json(g));
    j["renewable_generators"] = json::array();
    for (const auto& g : sys.renewable_generators)
        j["renewable_generators"].push_back(renewable_to_json(g));
    j["storage_units"] = json::array();
    for (const auto& s : sys.storage_units) j["storage_units"].push_back(storage_to_json(s));
    j["site_limits"] = json::array();
    for (const auto& lim : sys.site_limits) j["site_limits"].push_back(site_limit_to_json(lim));

    const auto& cat = sys.candidate_catalog;
    if (!cat.thermal.empty() || !cat.renewable.empty() || !cat.storage.empty()) {
        json cj;
        cj["thermal"] = json::array();
        for (const auto& t : cat.thermal) cj["thermal"].push_back(thermal_to_json(t));
        cj["renewable"] = json::array();
        for (const auto& r : cat.renewable) cj["renewable"].push_back(renewable_to_json(r));
        cj["storage"] = json::array();
        for (const auto& s : cat.storage) cj["storage"].push_back(storage_to_json(s));
        if (!cat.eligible_buses.empty()) cj["eligible_buses"] = cat.eligible_buses;
        if (!cat.earliest_year.empty()) cj["earliest_year"] = cat.earliest_year;
        j["candidate_classes"] = cj;
    }
    return j;
}

PowerSystem system_from_json(const json& j) {
    PowerSystem sys;
    if (j.contains("config")) sys.config = config_from_json(j.at("config"));
    for (const auto& b : j.value("buses", json::array()))
        sys.buses.push_back(Bus{b.at("id").get<std::string>(), b.value("load_fraction", 0.0),
                                b.value("in_service", true)});
    for (const auto& l : j.value("lines", json::array()))
        sys.lines.push_back(Line{l.at("id").get<std::string>(), l.at("from_bus").get<std::string>(),
                                 l.at("to_bus").get<std::string>(),
                                 l.value("thermal_limit", 0.0), l.value("in_service", true)});
    for (const auto& f : j.value("fuels", json::array())) {
        FuelSpec spec;
        spec.id = fuel_id_from_json(f);
        spec.price = f.value("price", 0.0);
        spec.supply_per_day = opt_from_json(f.value("supply_per_day", json{}));
        sys.fuels.push_back(spec);
    }
    for (const auto& g : j.value("thermal_generators", json::array()))
        sys.thermal_generators.push_back(thermal_from_json(g, true));
    for (const auto& g : j.value("renewable_generators", json::array()))
        sys.renewable_generators.push_back(renewable_from_json(g, true));
    for (const auto& s : j.value("storage_units", json::array()))
        sys.storage_units.push_back(storage_from_json(s, true));
    for (const auto& lim : j.value("site_limits", json::array()))
        sys.site_limits.push_back(site_limit_from_json(lim));
    if (j.contains("candidate_classes")) {
        const json& cj = j.at("candidate_classes");
        for (const auto& t : cj.value("thermal", json::array()))
            sys.candidate_catalog.thermal.push_back(thermal_from_json(t, false));
        for (const auto& r : cj.value("renewable", json::array()))
            sys.candidate_catalog.renewable.push_back(renewable_from_json(r, false));
        for (const auto& s : cj.value("storage", json::array()))
            sys.candidate_catalog.storage.push_back(storage_from_json(s, false));
        if (cj.contains("eligible_buses"))
            sys.candidate_catalog.eligible_buses =
                cj.at("eligible_buses").get<std::map<std::string, std::vector<std::string>>>();
        if (cj.contains("earliest_year"))
            sys.candidate_catalog.earliest_year =
                cj.at("earliest_year").get<std::map<std::string, int>>();
    }
    return sys;
}

std::vector<SiteLimit> site_limits_from_json(const json& j) {
    std::vector<SiteLimit> out;
    for (const auto& lim : j) out.push_back(site_limit_from_json(lim));
    return out;
}

json scenarios_to_json(const PowerSystem& sys, const std::vector<ScenarioDay>& days) {
    json arr = json::array();
    for (const auto& d : days) {
        json dj;
        dj["id"] = d.id;
        dj["probability"] = d.probability;
        json demand;
        for (std::size_t b = 0; b < sys.buses.size(); ++b) demand[sys.buses[b].id] = d.demand[b];
        dj["demand"] = demand;
        json avail;
        for (const auto& [id, series] : d.availability) avail[id] = series;
        dj["availability"] = avail;
        json fuel = json::array();
        for (std::size_t f = 0; f < sys.fuels.size(); ++f) {
            json fj = fuel_id_to_json(sys.fuels[f].id);
            fj["mmbtu_per_day"] = opt_to_json(d.fuel_supply[f]);
            fuel.push_back(fj);
        }
        dj["fuel_supply"] = fuel;
        dj["reserve_req"] = d.reserve_req;
        arr.push_back(dj);
    }
    return json{{"scenarios", arr}};
}

std::vector<ScenarioDay> scenarios_from_json(const PowerSystem& sys, const json& j) {
    std::vector<ScenarioDay> out;
    for (const auto& dj : j.at("scenarios")) {
        ScenarioDay d;
        d.id = dj.at("id").get<std::string>();
        d.probability = dj.at("probability").get<double>();
        d.demand.assign(sys.buses.size(), std::vector<double>(24, 0.0));
        for (const auto& [bus, series] : dj.at("demand").items()) {
            int b = sys.bus_index(bus);
            if (b < 0) throw EngineError("unknown_bus", bus);
            d.demand[static_cast<std::size_t>(b)] = series.get<std::vector<double>>();
        }
        for (const auto& [id, series] : dj.at("availability").items())
            d.availability[id] = series.get<std::vector<double>>();
        d.fuel_supply.assign(sys.fuels.size(), std::nullopt);
        for (const auto& fj : dj.value("fuel_supply", json::array())) {
            FuelId id = fuel_id_from_json(fj);
            for (std::size_t f = 0; f < sys.fuels.size(); ++f)
                if (sys.fuels[f].id == id)
                    d.fuel_supply[f] = opt_from_json(fj.value("mmbtu_per_day", json{}));
        }
        d.reserve_req = dj.contains("reserve_req")
                            ? dj.at("reserve_req").get<std::vector<double>>()
                            : std::vector<double>(24, sys.config.reserve_margin);
        out.push_back(std::move(d));
    }
    return out;
}

json plan_to_json(const InvestmentPlan& plan) {
    json j;
    j["thermal_builds"] = plan.thermal_builds;
    j["renewable_builds"] = plan.renewable_builds;
    j["storage_builds"] = plan.storage_builds;
    j["retirements"] = plan.retirements;
    return j;
}

InvestmentPlan plan_from_json(const json& j) {
    InvestmentPlan plan;
    if (j.contains("thermal_builds"))
        plan.thermal_builds = j.at("thermal_builds").get<std::map<std::string, int>>();
    if (j.contains("renewable_builds"))
        plan.renewable_builds = j.at("renewable_builds").get<std::map<std::string, double>>();
    if (j.contains("storage_builds"))
        plan.storage_builds = j.at("storage_builds").get<std::map<std::string, double>>();
    if (j.contains("retirements"))
        plan.retirements = j.at("retirements").get<std::map<std::string, int>>();
    return plan;
}

std::map<std::string, FuelScenario> fuel_scenarios_from_json(const json& j) {
    std::map<std::string, FuelScenario> out;
    for (const auto& [name, sj] : j.items()) {
        FuelScenario sc;
        sc.name = name;
        if (sj.contains("index_prices"))
            sc.index_prices = sj.at("index_prices").get<std::map<std::string, double>>();
        for (const auto& fj : sj.value("fuels", json::array())) {
            FuelScenarioEntry e;
            e.fuel = fuel_id_from_json(fj);
            if (fj.contains("rule")) {
                const json& rj = fj.at("rule");
                FuelPriceRule rule;
                rule.fuel = e.fuel;
                std::string form = rj.value("form", std::string{"constant"});
                if (form == "constant") {
                    rule.form = FuelPriceRule::Form::constant;
                    rule.constant = rj.value("constant", 0.0);
                } else if (form == "affine_on_index") {
                    rule.form = FuelPriceRule::Form::affine_on_index;
                    rule.intercept = rj.value("intercept", 0.0);
                    rule.slope = rj.value("slope", 0.0);
                    rule.index = rj.value("index", std::string{"HH"});
                } else {
                    throw EngineError("bad_price_rule", form);
                }
                rule.adder = rj.value("adder", 0.0);
                e.rule = rule;
            }
            if (fj.contains("supply_per_day")) {
                e.has_supply = true;
                e.supply_per_day = opt_from_json(fj.at("supply_per_day"));
            }
            if (fj.contains("supply_horizon_total")) {
                e.has_supply = true;
                e.supply_horizon_total = fj.at("supply_horizon_total").get<double>();
            }
            sc.entries.push_back(std::move(e));
        }
        out.emplace(name, std::move(sc));
    }
    return out;
}

void apply_fuel_scenario(PowerSystem& sys, const FuelScenario& sc, int day_count) {
    for (const auto& e : sc.entries) {
        FuelSpec* spec = nullptr;
        for (auto& f : sys.fuels)
            if (f.id == e.fuel) spec = &f;
        if (!spec) throw EngineError("unknown_fuel", e.fuel.str());
        if (e.rule) {
            double index_price = 0.0;
            if (e.rule->form == FuelPriceRule::Form::affine_on_index) {
                auto it = sc.index_prices.find(e.rule->index);
                if (it == sc.index_prices.end())
                    throw EngineError("missing_index_price", e.rule->index);
                index_price = it->second;
            }
            spec->price = fuel_price(*e.rule, index_price);
        }
        if (e.has_supply) {
            if (e.supply_horizon_total)
                spec->supply_per_day = *e.supply_horizon_total / std::max(1, day_count);
            else
                spec->supply_per_day = e.supply_per_day;
        }
    }
}

std::string dump_canonical(const json& j) { return j.dump(2); }

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw EngineError("missing_file", path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw EngineError("bad_json", path + ": " + e.what());
    }
    return j;
}

void write_json_file(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw EngineError("unwritable_path", path);
    out << dump_canonical(j) << "\n";
}

}  // namespace gridcep::io
