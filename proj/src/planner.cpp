#include "gridcep/planner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

namespace gridcep::planner {

using milp::LinExpr;
using milp::Sense;
using milp::VarDomain;
using milp::VarRef;

std::vector<FirstStageVar> first_stage_layout(const PowerSystem& system) {
    std::vector<FirstStageVar> out;
    for (const auto& g : system.thermal_generators) {
        if (!g.existing) {
            FirstStageVar v;
            v.kind = FirstStageVar::Kind::thermal_build;
            v.element = g.id;
            v.binary = true;
            v.upper = 1.0;
            v.unit_mw = g.capacity;
            v.cost_coef = g.capacity * (g.capex_annualized + g.fom);
            out.push_back(std::move(v));
        } else if (g.retirable) {
            FirstStageVar v;
            v.kind = FirstStageVar::Kind::retirement;
            v.element = g.id;
            v.binary = true;
            v.upper = 1.0;
            v.unit_mw = g.capacity;
            v.cost_coef = g.retirement_cost - g.fom * g.capacity;
            out.push_back(std::move(v));
        }
    }
    for (const auto& g : system.renewable_generators) {
        if (g.existing) continue;
        FirstStageVar v;
        v.kind = FirstStageVar::Kind::renewable_build;
        v.element = g.id;
        v.binary = false;
        v.upper = uc::candidate_unit_upper_bound(system, SiteLimitDomain::generation,
                                                 PowerSystem::renewable_class(g), g.bus,
                                                 g.capacity);
        v.unit_mw = g.capacity;
        v.cost_coef = g.capacity * (g.capex_annualized + g.fom);
        out.push_back(std::move(v));
    }
    for (const auto& s : system.storage_units) {
        if (s.existing) continue;
        FirstStageVar v;
        v.kind = FirstStageVar::Kind::storage_build;
        v.element = s.id;
        v.binary = false;
        v.upper = uc::candidate_unit_upper_bound(system, SiteLimitDomain::storage, s.tech_class,
                                                 s.bus, s.power_rating);
        v.unit_mw = s.power_rating;
        v.cost_coef = s.power_rating * (s.capex_annualized + s.fom);
        out.push_back(std::move(v));
    }
    std::sort(out.begin(), out.end(), [](const FirstStageVar& a, const FirstStageVar& b) {
        if (a.kind != b.kind) return static_cast<int>(a.kind) < static_cast<int>(b.kind);
        return a.element < b.element;
    });
    return out;
}

namespace {

const char* family_of(FirstStageVar::Kind kind) {
    switch (kind) {
        case FirstStageVar::Kind::thermal_build: return "xg";
        case FirstStageVar::Kind::renewable_build: return "xg";
        case FirstStageVar::Kind::storage_build: return "xs";
        case FirstStageVar::Kind::retirement: return "xr";
    }
    return "?";
}

struct SiteGroup {
    SiteLimitDomain domain;
    std::string tech_class;  // or ALL
    std::string bus;
    double limit;
};

// Candidate MW expression and existing MW total for a site-limit group.
void collect_group(const PowerSystem& sys, const InvestmentStage& stage, const SiteGroup& grp,
                   LinExpr& expr, double& existing_mw) {
    bool all = grp.tech_class == "ALL";
    existing_mw = existing_capacity_at(sys, grp.domain, grp.tech_class, grp.bus);
    if (grp.domain == SiteLimitDomain::generation) {
        for (const auto& g : sys.thermal_generators)
            if (!g.existing && g.bus == grp.bus && (all || g.tech_class == grp.tech_class))
                expr.add(stage.refs.thermal_build.at(g.id), g.capacity);
        for (const auto& g : sys.renewable_generators)
            if (!g.existing && g.bus == grp.bus &&
                (all || PowerSystem::renewable_class(g) == grp.tech_class))
                expr.add(stage.refs.renewable_build.at(g.id), g.capacity);
    } else {
        for (const auto& s : sys.storage_units)
            if (!s.existing && s.bus == grp.bus && (all || s.tech_class == grp.tech_class))
                expr.add(stage.refs.storage_build.at(s.id), s.power_rating);
    }
}

}  // namespace

InvestmentStage build_investment_stage(milp::ModelInstance& model, const PowerSystem& system) {
    InvestmentStage stage;
    stage.layout = first_stage_layout(system);
    for (const auto& v : stage.layout) {
        VarRef ref = model.add_variable(family_of(v.kind), v.element, -1, -1,
                                        v.binary ? VarDomain::binary : VarDomain::continuous, 0.0,
                                        v.binary ? 1.0 : v.upper);
        stage.layout_refs.push_back(ref);
        switch (v.kind) {
            case FirstStageVar::Kind::thermal_build: stage.refs.thermal_build[v.element] = ref; break;
            case FirstStageVar::Kind::renewable_build: stage.refs.renewable_build[v.element] = ref; break;
            case FirstStageVar::Kind::storage_build: stage.refs.storage_build[v.element] = ref; break;
            case FirstStageVar::Kind::retirement: stage.refs.retire[v.element] = ref; break;
        }
        stage.cost.add(ref, v.cost_coef);
    }

    // Constant FOM of the existing fleet (retirement credits sit on the
    // retirement variables' coefficients).
    double fom = 0.0;
    for (const auto& g : system.thermal_generators)
        if (g.existing) fom += g.fom * g.capacity;
    for (const auto& g : system.renewable_generators)
        if (g.existing) fom += g.fom * g.capacity;
    for (const auto& s : system.storage_units)
        if (s.existing) fom += s.fom * s.power_rating;
    stage.fixed_fom = fom;
    stage.cost.constant += fom;

    // Site limits Eqs. (4)-(7): per (class, bus) and per bus, generation and
    // storage separately. Existing capacity occupies part of each limit.
    int idx = 0;
    for (const auto& lim : system.site_limits) {
        if (!lim.max_capacity) continue;
        SiteGroup grp{lim.applies_to, lim.tech_class, lim.bus, *lim.max_capacity};
        LinExpr expr;
        double existing = 0.0;
        collect_group(system, stage, grp, expr, existing);
        if (existing > *lim.max_capacity + 1e-9)
            throw EngineError("site_limit_infeasible",
                              lim.bus + "/" + lim.tech_class + ": existing fleet exceeds limit");
        if (expr.terms.empty()) {
            ++idx;
            continue;
        }
        const char* rule = grp.domain == SiteLimitDomain::generation
                               ? (grp.tech_class == "ALL" ? "site_gen_bus" : "site_gen_class")
                               : (grp.tech_class == "ALL" ? "site_sto_bus" : "site_sto_class");
        model.add_constraint(rule, lim.bus + "/" + lim.tech_class, idx, -1, expr, Sense::le,
                             *lim.max_capacity - existing);
        ++idx;
    }
    return stage;
}

ExtensiveForm assemble_extensive_form(const PowerSystem& system,
                                      const std::vector<ScenarioDay>& scenarios) {
    if (scenarios.empty()) throw EngineError("no_scenarios", "extensive form needs >= 1 scenario");

    // Size guardrail before any allocation.
    std::size_t est_vars = 0;
    int ppd = system.periods_per_day();
    std::size_t thermal = system.thermal_generators.size();
    std::size_t renew = system.renewable_generators.size();
    std::size_t storage = system.storage_units.size();
    std::size_t buses = system.buses.size();
    std::size_t lines = system.lines.size();
    est_vars = scenarios.size() * static_cast<std::size_t>(ppd) *
               (thermal * 11 + renew + storage * 5 + buses + lines + 1);
    if (est_vars > system.config.ef_variable_cap)
        throw EngineError("ef_too_large",
                          "estimated " + std::to_string(est_vars) +
                              " variables exceeds ef_variable_cap; use PH mode (solve-ph)");

    ExtensiveForm ef;
    ef.stage = build_investment_stage(ef.model, system);

    LinExpr objective;
    objective.add(ef.stage.cost);
    double annualize = system.config.periods_per_year * system.config.period_hours;
    for (std::size_t i = 0; i < scenarios.size(); ++i) {
        auto sub = std::make_unique<uc::ScenarioSubproblem>(ef.model, system,
                                                            std::vector<const ScenarioDay*>{&scenarios[i]},
                                                            static_cast<int>(i));
        sub->build_all(ef.stage.refs);
        ef.scale.push_back(annualize * scenarios[i].probability);
        objective.add(sub->operational_cost(), ef.scale.back());
        ef.subproblems.push_back(std::move(sub));
    }
    ef.model.set_objective(objective);
    return ef;
}

InvestmentPlan extract_plan(const PowerSystem& system, const InvestmentStage& stage,
                            const milp::SolveResult& result) {
    (void)system;
    InvestmentPlan plan;
    for (std::size_t i = 0; i < stage.layout.size(); ++i) {
        const auto& v = stage.layout[i];
        double x = result.value(stage.layout_refs[i]);
        switch (v.kind) {
            case FirstStageVar::Kind::thermal_build:
                plan.thermal_builds[v.element] = x > 0.5 ? 1 : 0;
                break;
            case FirstStageVar::Kind::renewable_build:
                plan.renewable_builds[v.element] = std::max(0.0, x);
                break;
            case FirstStageVar::Kind::storage_build:
                plan.storage_builds[v.element] = std::max(0.0, x);
                break;
            case FirstStageVar::Kind::retirement:
                plan.retirements[v.element] = x > 0.5 ? 1 : 0;
                break;
        }
    }
    return plan;
}

std::vector<Violation> check_plan(const PowerSystem& system, const InvestmentPlan& plan) {
    std::vector<Violation> out;
    auto known_thermal = [&](const std::string& id) {
        for (const auto& g : system.thermal_generators)
            if (g.id == id && !g.existing) return true;
        return false;
    };
    for (const auto& [id, v] : plan.thermal_builds) {
        if (!known_thermal(id)) out.push_back({id, "unknown_candidate", ""});
        if (v != 0 && v != 1) out.push_back({id, "thermal_build_not_binary", ""});
    }
    for (const auto& [id, v] : plan.retirements) {
        bool ok = false;
        for (const auto& g : system.thermal_generators)
            if (g.id == id && g.retirable) ok = true;
        if (!ok) out.push_back({id, "not_retirable", ""});
        if (v != 0 && v != 1) out.push_back({id, "retirement_not_binary", ""});
    }
    for (const auto& [id, v] : plan.renewable_builds)
        if (v < 0) out.push_back({id, "negative_build", ""});
    for (const auto& [id, v] : plan.storage_builds)
        if (v < 0) out.push_back({id, "negative_build", ""});

    auto built_mw = [&](SiteLimitDomain domain, const std::string& tech_class,
                        const std::string& bus) {
        bool all = tech_class == "ALL";
        double mw = 0.0;
        if (domain == SiteLimitDomain::generation) {
            for (const auto& g : system.thermal_generators) {
                if (g.existing || g.bus != bus) continue;
                if (!all && g.tech_class != tech_class) continue;
                if (auto it = plan.thermal_builds.find(g.id); it != plan.thermal_builds.end())
                    mw += g.capacity * it->second;
            }
            for (const auto& g : system.renewable_generators) {
                if (g.existing || g.bus != bus) continue;
                if (!all && PowerSystem::renewable_class(g) != tech_class) continue;
                if (auto it = plan.renewable_builds.find(g.id); it != plan.renewable_builds.end())
                    mw += g.capacity * it->second;
            }
        } else {
            for (const auto& s : system.storage_units) {
                if (s.existing || s.bus != bus) continue;
                if (!all && s.tech_class != tech_class) continue;
                if (auto it = plan.storage_builds.find(s.id); it != plan.storage_builds.end())
                    mw += s.power_rating * it->second;
            }
        }
        return mw;
    };
    for (const auto& lim : system.site_limits) {
        if (!lim.max_capacity) continue;
        double total = existing_capacity_at(system, lim.applies_to, lim.tech_class, lim.bus) +
                       built_mw(lim.applies_to, lim.tech_class, lim.bus);
        if (total > *lim.max_capacity + 1e-9)
            out.push_back({lim.bus, "site_limit_exceeded",
                           lim.tech_class + " total=" + format_full(total)});
    }
    std::sort(out.begin(), out.end(), [](const Violation& a, const Violation& b) {
        if (a.element != b.element) return a.element < b.element;
        return a.rule < b.rule;
    });
    return out;
}

FirstStageCost first_stage_cost(const PowerSystem& system, const InvestmentPlan& plan) {
    FirstStageCost cost;
    for (const auto& g : system.thermal_generators) {
        if (!g.existing) {
            auto it = plan.thermal_builds.find(g.id);
            if (it != plan.thermal_builds.end() && it->second > 0)
                cost.investment += g.capacity * (g.capex_annualized + g.fom);
        } else {
            bool retired = false;
            if (g.retirable) {
                auto it = plan.retirements.find(g.id);
                retired = it != plan.retirements.end() && it->second > 0;
            }
            if (retired)
                cost.retirement += g.retirement_cost;
            else
                cost.fom_existing += g.fom * g.capacity;
        }
    }
    for (const auto& g : system.renewable_generators) {
        if (g.existing) {
            cost.fom_existing += g.fom * g.capacity;
        } else if (auto it = plan.renewable_builds.find(g.id); it != plan.renewable_builds.end()) {
            cost.investment += g.capacity * it->second * (g.capex_annualized + g.fom);
        }
    }
    for (const auto& s : system.storage_units) {
        if (s.existing) {
            cost.fom_existing += s.fom * s.power_rating;
        } else if (auto it = plan.storage_builds.find(s.id); it != plan.storage_builds.end()) {
            cost.investment += s.power_rating * it->second * (s.capex_annualized + s.fom);
        }
    }
    cost.total = cost.investment + cost.retirement + cost.fom_existing;
    return cost;
}

EvaluationResult evaluate_plan(const PowerSystem& system, const InvestmentPlan& plan,
                               const std::vector<ScenarioDay>& scenarios,
                               const milp::SolveOptions& options) {
    if (scenarios.empty()) throw EngineError("no_scenarios", "evaluate_plan without scenarios");
    auto violations = check_plan(system, plan);
    if (!violations.empty())
        throw EngineError("invalid_plan",
                          violations.front().element + ": " + violations.front().rule);

    EvaluationResult out;
    out.per_scenario.resize(scenarios.size());

    int workers = std::max(1, system.config.workers);
    std::atomic<std::size_t> next{0};
    std::vector<std::string> errors(scenarios.size());
    auto work = [&]() {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= scenarios.size()) return;
            try {
                out.per_scenario[i] = uc::solve_operational(system, scenarios[i], plan, options);
            } catch (const std::exception& e) {
                errors[i] = e.what();
                out.per_scenario[i].status = milp::SolveStatus::error;
                out.per_scenario[i].scenario_id = scenarios[i].id;
            }
        }
    };
    if (workers == 1 || scenarios.size() == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < workers; ++i) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }

    PlanReport& rep = out.report;
    FirstStageCost c1 = first_stage_cost(system, plan);
    rep.investment_cost = c1.investment;
    rep.retirement_cost = c1.retirement;
    rep.fom_existing = c1.fom_existing;

    double min_res = milp::kInf;
    double production = 0.0, shed_pen = 0.0, res_pen = 0.0, util_pen = 0.0;
    // tau is already applied inside the dispatch metrics; the annualization
    // factor here is periods_per_year alone.
    double daily_to_year = system.config.periods_per_year;
    for (std::size_t i = 0; i < scenarios.size(); ++i) {
        const auto& sol = out.per_scenario[i];
        if (sol.status == milp::SolveStatus::error) {
            ++rep.failed_scenarios;
            continue;
        }
        double w = scenarios[i].probability;
        production += w * sol.production_cost;
        shed_pen += w * sol.shed_penalty;
        res_pen += w * sol.reserve_penalty;
        util_pen += w * sol.util_penalty;
        rep.expected_daily_shed_mwh += w * sol.load_shed_mwh;
        rep.expected_lolh += w * sol.lolh;
        min_res = std::min(min_res, sol.min_reserve_mw);
    }
    rep.production_cost = daily_to_year * production;
    rep.shed_penalty = daily_to_year * shed_pen;
    rep.reserve_penalty = daily_to_year * res_pen;
    rep.util_penalty = daily_to_year * util_pen;
    rep.min_reserves_mw = min_res == milp::kInf ? 0.0 : min_res;
    rep.overall_cost = c1.total + rep.production_cost + rep.shed_penalty + rep.reserve_penalty +
                       rep.util_penalty;

    for (const auto& g : system.thermal_generators) {
        if (!g.existing) {
            if (auto it = plan.thermal_builds.find(g.id);
                it != plan.thermal_builds.end() && it->second > 0)
                rep.new_gen_mw += g.capacity;
        } else if (g.retirable) {
            if (auto it = plan.retirements.find(g.id);
                it != plan.retirements.end() && it->second > 0)
                rep.retired_mw += g.capacity;
        }
    }
    for (const auto& g : system.renewable_generators)
        if (!g.existing)
            if (auto it = plan.renewable_builds.find(g.id); it != plan.renewable_builds.end())
                rep.new_gen_mw += g.capacity * it->second;
    for (const auto& s : system.storage_units)
        if (!s.existing)
            if (auto it = plan.storage_builds.find(s.id); it != plan.storage_builds.end())
                rep.new_storage_mw += s.power_rating * it->second;
    return out;
}

}  // namespace gridcep::planner
