#include "gridcep/ph.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <memory>
#include <nlohmann/json.hpp>
#include <thread>

#include "gridcep/json_io.hpp"

namespace gridcep::ph {

using milp::LinExpr;
using milp::Sense;
using milp::VarDomain;
using milp::VarRef;

PHOptions PHOptions::from_config(const PlannerConfig& cfg) {
    PHOptions o;
    o.rho_scale = cfg.ph.rho_scale;
    o.max_iterations = cfg.ph.max_iterations;
    o.convergence_tol = cfg.ph.convergence_tol;
    o.subproblem_mip_gap = cfg.ph.subproblem_mip_gap;
    o.time_limit = cfg.ph.time_limit;
    o.bound_interval = cfg.ph.bound_interval;
    o.checkpoint_interval = cfg.ph.checkpoint_interval;
    o.seed = cfg.seed;
    o.threads = cfg.threads;
    o.workers = cfg.workers;
    return o;
}

namespace {

constexpr int kProxSegments = 8;

struct ScenarioModel {
    milp::ModelInstance model;
    planner::InvestmentStage stage;
    std::unique_ptr<uc::ScenarioSubproblem> sub;
    LinExpr base_objective;  // C1(x_local) + T_rep*tau*C2_w
    std::vector<VarRef> xrefs;
    // lambda variables of the piecewise-linear proximal term, one row per
    // continuous first-stage variable (empty for binaries).
    std::vector<std::vector<VarRef>> prox_lambda;
    std::vector<double> knots_lo, knots_hi;
    std::vector<double> x{};
    double objective = 0.0;
    double best_bound = -milp::kInf;
};

struct Engine {
    const PowerSystem& sys;
    const std::vector<ScenarioDay>& scenarios;
    const PHOptions& opt;
    std::vector<planner::FirstStageVar> layout;
    std::vector<double> rho;
    std::vector<std::unique_ptr<ScenarioModel>> subs;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

    double elapsed() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
    bool out_of_time() const { return opt.time_limit && elapsed() >= *opt.time_limit; }

    Engine(const PowerSystem& s, const std::vector<ScenarioDay>& sc, const PHOptions& o)
        : sys(s), scenarios(sc), opt(o) {
        layout = planner::first_stage_layout(sys);
        rho.reserve(layout.size());
        for (const auto& v : layout)
            rho.push_back(opt.rho_scale * std::max(std::abs(v.cost_coef), 1.0));
        double annualize = sys.config.periods_per_year * sys.config.period_hours;
        for (std::size_t i = 0; i < scenarios.size(); ++i) {
            auto sm = std::make_unique<ScenarioModel>();
            sm->stage = planner::build_investment_stage(sm->model, sys);
            sm->sub = std::make_unique<uc::ScenarioSubproblem>(
                sm->model, sys, std::vector<const ScenarioDay*>{&scenarios[i]},
                static_cast<int>(i));
            sm->sub->build_all(sm->stage.refs);
            sm->base_objective.add(sm->stage.cost);
            sm->base_objective.add(sm->sub->operational_cost(), annualize);
            sm->xrefs = sm->stage.layout_refs;
            sm->prox_lambda.resize(layout.size());
            sm->knots_lo.assign(layout.size(), 0.0);
            sm->knots_hi.assign(layout.size(), 1.0);
            for (std::size_t k = 0; k < layout.size(); ++k) {
                if (layout[k].binary) continue;
                double lo = 0.0, hi = std::max(layout[k].upper, 1e-6);
                sm->knots_lo[k] = lo;
                sm->knots_hi[k] = hi;
                LinExpr xdef;
                LinExpr lsum;
                for (int seg = 0; seg <= kProxSegments; ++seg) {
                    VarRef lam = sm->model.add_variable(
                        "prox_lam", layout[k].element, seg, static_cast<int>(i),
                        VarDomain::continuous, 0.0, 1.0);
                    sm->prox_lambda[k].push_back(lam);
                    double knot = lo + (hi - lo) * seg / kProxSegments;
                    xdef.add(lam, knot);
                    lsum.add(lam, 1.0);
                }
                xdef.add(sm->xrefs[k], -1.0);
                sm->model.add_constraint("prox_x", layout[k].element, -1, static_cast<int>(i),
                                         xdef, Sense::eq, 0.0);
                sm->model.add_constraint("prox_sum", layout[k].element, -1, static_cast<int>(i),
                                         lsum, Sense::eq, 1.0);
            }
            subs.push_back(std::move(sm));
        }
    }

    milp::SolveOptions solve_options() const {
        milp::SolveOptions so;
        so.mip_gap = opt.subproblem_mip_gap;
        so.threads = opt.threads;
        so.seed = opt.seed;
        if (opt.time_limit) {
            double remain = *opt.time_limit - elapsed();
            so.time_limit = std::max(1.0, remain);
        }
        return so;
    }

    // Subproblem objective: base + w*x + (optionally) the proximal term
    // around xbar.
    LinExpr iteration_objective(const ScenarioModel& sm, const std::vector<double>& w,
                                const std::vector<double>* xbar) const {
        LinExpr obj;
        obj.add(sm.base_objective);
        for (std::size_t k = 0; k < layout.size(); ++k) {
            if (w[k] != 0.0) obj.add(sm.xrefs[k], w[k]);
            if (!xbar) continue;
            double xb = (*xbar)[k];
            double r = rho[k] / 2.0;
            if (layout[k].binary) {
                // (x - xb)^2 == (1 - 2 xb) x + xb^2 for binary x
                obj.add(sm.xrefs[k], r * (1.0 - 2.0 * xb));
                obj.constant += r * xb * xb;
            } else {
                double lo = sm.knots_lo[k], hi = sm.knots_hi[k];
                for (int seg = 0; seg <= kProxSegments; ++seg) {
                    double knot = lo + (hi - lo) * seg / kProxSegments;
                    double dev = knot - xb;
                    obj.add(sm.prox_lambda[k][seg], r * dev * dev);
                }
            }
        }
        return obj;
    }

    // Solves every scenario with the given objectives; returns false on any
    // solver failure.
    bool solve_all(const std::vector<std::vector<double>>& weights,
                   const std::vector<double>* xbar, std::string* error) {
        std::atomic<std::size_t> next{0};
        std::vector<std::string> errs(subs.size());
        auto work = [&]() {
            for (;;) {
                std::size_t i = next.fetch_add(1);
                if (i >= subs.size()) return;
                ScenarioModel& sm = *subs[i];
                sm.model.set_objective(iteration_objective(sm, weights[i], xbar));
                milp::SolveResult res = milp::solve(sm.model, solve_options());
                if (!res.feasible()) {
                    errs[i] = "scenario " + scenarios[i].id + ": " +
                              std::string(milp::to_string(res.status)) +
                              (res.message.empty() ? "" : " (" + res.message + ")");
                    continue;
                }
                sm.objective = res.objective;
                sm.best_bound = res.best_bound;
                sm.x.resize(layout.size());
                for (std::size_t k = 0; k < layout.size(); ++k)
                    sm.x[k] = res.value(sm.xrefs[k]);
            }
        };
        int workers = std::max(1, std::min<int>(opt.workers, static_cast<int>(subs.size())));
        if (workers == 1) {
            work();
        } else {
            std::vector<std::thread> pool;
            for (int i = 0; i < workers; ++i) pool.emplace_back(work);
            for (auto& t : pool) t.join();
        }
        for (auto& e : errs)
            if (!e.empty()) {
                if (error) *error = e;
                return false;
            }
        return true;
    }
};

}  // namespace

std::optional<std::pair<InvestmentPlan, PlanReport>> find_incumbent(
    const PowerSystem& system, const std::vector<ScenarioDay>& scenarios,
    const std::vector<double>& xbar, const PHOptions& options) {
    auto layout = planner::first_stage_layout(system);
    if (xbar.size() != layout.size())
        throw EngineError("bad_state", "consensus vector does not match layout");

    InvestmentPlan plan;
    std::vector<double> fraction(layout.size(), 0.0);
    for (std::size_t k = 0; k < layout.size(); ++k) {
        const auto& v = layout[k];
        double x = xbar[k];
        switch (v.kind) {
            case planner::FirstStageVar::Kind::thermal_build:
                plan.thermal_builds[v.element] = x >= 0.5 ? 1 : 0;  // ties round up
                fraction[k] = x;
                break;
            case planner::FirstStageVar::Kind::retirement:
                plan.retirements[v.element] = x >= 0.5 ? 1 : 0;
                break;
            case planner::FirstStageVar::Kind::renewable_build:
                plan.renewable_builds[v.element] = std::clamp(x, 0.0, v.upper);
                break;
            case planner::FirstStageVar::Kind::storage_build:
                plan.storage_builds[v.element] = std::clamp(x, 0.0, v.upper);
                break;
        }
    }

    // Project onto site caps: first scale continuous builds down, then (if
    // binary builds alone overflow a cap) drop the lowest-fraction binaries.
    for (int pass = 0; pass < 2; ++pass) {
        auto violations = planner::check_plan(system, plan);
        bool site_violation = false;
        for (const auto& v : violations)
            if (v.rule == "site_limit_exceeded") site_violation = true;
        if (!site_violation) break;

        for (const auto& lim : system.site_limits) {
            if (!lim.max_capacity) continue;
            double existing =
                existing_capacity_at(system, lim.applies_to, lim.tech_class, lim.bus);
            bool all = lim.tech_class == "ALL";
            auto member = [&](const std::string& cls, const std::string& bus) {
                return bus == lim.bus && (all || cls == lim.tech_class);
            };
            double binary_mw = 0.0, cont_mw = 0.0;
            if (lim.applies_to == SiteLimitDomain::generation) {
                for (const auto& g : system.thermal_generators)
                    if (!g.existing && member(g.tech_class, g.bus))
                        binary_mw += g.capacity * plan.thermal_builds[g.id];
                for (const auto& g : system.renewable_generators)
                    if (!g.existing && member(PowerSystem::renewable_class(g), g.bus))
                        cont_mw += g.capacity * plan.renewable_builds[g.id];
            } else {
                for (const auto& s : system.storage_units)
                    if (!s.existing && member(s.tech_class, s.bus))
                        cont_mw += s.power_rating * plan.storage_builds[s.id];
            }
            double cap = *lim.max_capacity - existing;
            if (binary_mw + cont_mw <= cap + 1e-9) continue;
            double room_for_cont = cap - binary_mw;
            if (room_for_cont >= -1e-9 && cont_mw > 0) {
                double scale = std::max(0.0, room_for_cont) / cont_mw;
                if (lim.applies_to == SiteLimitDomain::generation) {
                    for (const auto& g : system.renewable_generators)
                        if (!g.existing && member(PowerSystem::renewable_class(g), g.bus))
                            plan.renewable_builds[g.id] *= scale;
                } else {
                    for (const auto& s : system.storage_units)
                        if (!s.existing && member(s.tech_class, s.bus))
                            plan.storage_builds[s.id] *= scale;
                }
            } else if (lim.applies_to == SiteLimitDomain::generation) {
                // Binary overflow: drop lowest-fraction builds until feasible.
                std::vector<std::pair<double, std::string>> members;
                for (std::size_t k = 0; k < layout.size(); ++k) {
                    if (layout[k].kind != planner::FirstStageVar::Kind::thermal_build) continue;
                    for (const auto& g : system.thermal_generators)
                        if (g.id == layout[k].element && member(g.tech_class, g.bus) &&
                            plan.thermal_builds[g.id] == 1)
                            members.emplace_back(fraction[k], g.id);
                }
                std::sort(members.begin(), members.end());
                for (const auto& [frac, id] : members) {
                    if (binary_mw + std::max(0.0, cont_mw) <= cap + 1e-9) break;
                    for (const auto& g : system.thermal_generators)
                        if (g.id == id) binary_mw -= g.capacity;
                    plan.thermal_builds[id] = 0;
                }
                // continuous handled next pass
            }
        }
    }
    if (!planner::check_plan(system, plan).empty()) return std::nullopt;

    milp::SolveOptions so;
    so.mip_gap = options.subproblem_mip_gap;
    so.threads = options.threads;
    so.seed = options.seed;
    auto eval = planner::evaluate_plan(system, plan, scenarios, so);
    if (eval.report.failed_scenarios > 0) return std::nullopt;
    return std::make_pair(plan, eval.report);
}

double compute_lower_bound(const PowerSystem& system, const std::vector<ScenarioDay>& scenarios,
                           const std::vector<std::vector<double>>& weights,
                           const PHOptions& options) {
    auto layout = planner::first_stage_layout(system);
    for (std::size_t k = 0; k < layout.size(); ++k) {
        double s = 0.0;
        for (std::size_t i = 0; i < scenarios.size(); ++i)
            s += scenarios[i].probability * weights[i][k];
        if (std::abs(s) > 1e-6)
            throw EngineError("weight_invariant",
                              "sum_w rho_w w_w != 0 for " + layout[k].element);
    }
    Engine eng(system, scenarios, options);
    std::string error;
    if (!eng.solve_all(weights, nullptr, &error))
        throw EngineError("subproblem_failed", error);
    double bound = 0.0;
    for (std::size_t i = 0; i < scenarios.size(); ++i)
        bound += scenarios[i].probability * eng.subs[i]->best_bound;
    return bound;
}

namespace {

PHState run_ph_impl(const PowerSystem& system, const std::vector<ScenarioDay>& scenarios,
                    const PHOptions& opt, const PHState* resume) {
    if (scenarios.empty()) throw EngineError("no_scenarios", "run_ph without scenarios");
    if (opt.max_iterations <= 0) throw EngineError("no_iterations", "max_iterations must be >= 1");

    auto layout = planner::first_stage_layout(system);
    PHState st;
    st.names.reserve(layout.size());
    for (const auto& v : layout) st.names.push_back(v.element);

    // Single scenario: the problem is the extensive form; delegate.
    if (scenarios.size() == 1) {
        auto ef = planner::assemble_extensive_form(system, scenarios);
        milp::SolveOptions so;
        so.mip_gap = opt.subproblem_mip_gap;
        so.threads = opt.threads;
        so.seed = opt.seed;
        so.time_limit = opt.time_limit;
        auto res = milp::solve(ef.model, so);
        if (!res.feasible()) throw EngineError("subproblem_failed", res.message);
        st.iteration = 0;
        st.converged = true;
        st.xbar.resize(layout.size());
        for (std::size_t k = 0; k < layout.size(); ++k)
            st.xbar[k] = res.value(ef.stage.layout_refs[k]);
        st.weights.assign(1, std::vector<double>(layout.size(), 0.0));
        st.incumbent_plan = planner::extract_plan(system, ef.stage, res);
        st.incumbent_objective = res.objective;
        st.lower_bound = res.best_bound;
        auto eval = planner::evaluate_plan(system, *st.incumbent_plan, scenarios, so);
        st.incumbent_report = eval.report;
        st.trace.push_back(TraceRow{0, 0.0, st.lower_bound, st.incumbent_objective, 0.0});
        return st;
    }

    Engine eng(system, scenarios, opt);
    std::vector<std::vector<double>> w(scenarios.size(),
                                       std::vector<double>(layout.size(), 0.0));
    st.xbar.assign(layout.size(), 0.0);
    int start_iteration = 0;
    if (resume) {
        if (resume->names != st.names)
            throw EngineError("bad_state", "checkpoint layout does not match system");
        w = resume->weights;
        st = *resume;
        start_iteration = resume->iteration;
    }

    for (int it = start_iteration; it < opt.max_iterations; ++it) {
        bool first = it == 0;
        std::string error;
        const std::vector<double>* prox_center = first ? nullptr : &st.xbar;
        if (!eng.solve_all(w, prox_center, &error)) {
            // Abort with a partial-state dump: whatever converged so far
            // stays in the returned state.
            st.trace.push_back(TraceRow{it, milp::kInf, st.lower_bound, st.incumbent_objective,
                                        eng.elapsed()});
            throw EngineError("subproblem_failed", error);
        }

        // Consensus and deviation.
        std::vector<double> xbar(layout.size(), 0.0);
        for (std::size_t i = 0; i < scenarios.size(); ++i)
            for (std::size_t k = 0; k < layout.size(); ++k)
                xbar[k] += scenarios[i].probability * eng.subs[i]->x[k];
        double deviation = 0.0;
        for (std::size_t i = 0; i < scenarios.size(); ++i)
            for (std::size_t k = 0; k < layout.size(); ++k)
                deviation = std::max(deviation, std::abs(eng.subs[i]->x[k] - xbar[k]));
        st.xbar = xbar;
        st.iteration = it + 1;

        // Lagrangian bound. Iteration 0 doubles as the w=0 bound; later
        // bounds need prox-free resolves at the current weights.
        if (first) {
            double b = 0.0;
            for (std::size_t i = 0; i < scenarios.size(); ++i)
                b += scenarios[i].probability * eng.subs[i]->best_bound;
            st.lower_bound = std::max(st.lower_bound, b);
        } else if (opt.bound_interval > 0 && it % opt.bound_interval == 0) {
            // Prox-free resolves at the current weights; the iteration
            // solutions are stashed and restored for the weight update.
            std::vector<std::vector<double>> keep_x(scenarios.size());
            for (std::size_t i = 0; i < scenarios.size(); ++i) keep_x[i] = eng.subs[i]->x;
            std::string berr;
            if (eng.solve_all(w, nullptr, &berr)) {
                double b = 0.0;
                for (std::size_t i = 0; i < scenarios.size(); ++i)
                    b += scenarios[i].probability * eng.subs[i]->best_bound;
                st.lower_bound = std::max(st.lower_bound, b);
            }
            for (std::size_t i = 0; i < scenarios.size(); ++i) eng.subs[i]->x = keep_x[i];
        }

        // Incumbent from the rounded consensus.
        if (auto inc = find_incumbent(system, scenarios, st.xbar, opt)) {
            double obj = inc->second.overall_cost;
            if (obj < st.incumbent_objective) {
                st.incumbent_objective = obj;
                st.incumbent_plan = inc->first;
                st.incumbent_report = inc->second;
            }
        }

        st.trace.push_back(
            TraceRow{it + 1, deviation, st.lower_bound, st.incumbent_objective, eng.elapsed()});

        if (opt.checkpoint_interval > 0 && (it + 1) % opt.checkpoint_interval == 0 &&
            !opt.checkpoint_path.empty()) {
            st.weights = w;
            save_checkpoint(st, opt.checkpoint_path);
        }

        if (deviation <= opt.convergence_tol) {
            st.converged = true;
            break;
        }
        if (eng.out_of_time()) break;

        // Weight update preserves sum_w rho_w w_w = 0.
        for (std::size_t i = 0; i < scenarios.size(); ++i)
            for (std::size_t k = 0; k < layout.size(); ++k)
                w[i][k] += eng.rho[k] * (eng.subs[i]->x[k] - xbar[k]);
    }
    st.weights = w;
    return st;
}

}  // namespace

PHState run_ph(const PowerSystem& system, const std::vector<ScenarioDay>& scenarios,
               const PHOptions& options) {
    return run_ph_impl(system, scenarios, options, nullptr);
}

PHState run_ph(const PowerSystem& system, const std::vector<ScenarioDay>& scenarios,
               const PHOptions& options, const PHState& resume_from) {
    return run_ph_impl(system, scenarios, options, &resume_from);
}

void save_checkpoint(const PHState& state, const std::string& path) {
    nlohmann::json j;
    j["iteration"] = state.iteration;
    j["names"] = state.names;
    j["xbar"] = state.xbar;
    j["weights"] = state.weights;
    j["lower_bound"] = state.lower_bound;
    j["incumbent_objective"] = state.incumbent_objective;
    if (state.incumbent_plan) j["incumbent_plan"] = io::plan_to_json(*state.incumbent_plan);
    io::write_json_file(path, j);
}

PHState load_checkpoint(const std::string& path) {
    nlohmann::json j = io::read_json_file(path);
    PHState st;
    st.iteration = j.at("iteration").get<int>();
    st.names = j.at("names").get<std::vector<std::string>>();
    st.xbar = j.at("xbar").get<std::vector<double>>();
    st.weights = j.at("weights").get<std::vector<std::vector<double>>>();
    st.lower_bound = j.at("lower_bound").get<double>();
    st.incumbent_objective = j.at("incumbent_objective").get<double>();
    if (j.contains("incumbent_plan")) st.incumbent_plan = io::plan_from_json(j.at("incumbent_plan"));
    return st;
}

void write_trace_csv(const PHState& state, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw EngineError("unwritable_path", path);
    out << "iteration,consensus_deviation,lower_bound,incumbent,wall_time\n";
    for (const auto& row : state.trace) {
        out << row.iteration << ',' << format_full(row.deviation) << ','
            << (row.lower_bound == -milp::kInf ? "" : format_full(row.lower_bound)) << ','
            << (row.incumbent == milp::kInf ? "" : format_full(row.incumbent)) << ','
            << format_full(row.wall_time) << "\n";
    }
}

}  // namespace gridcep::ph
