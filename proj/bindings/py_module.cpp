#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <nlohmann/json.hpp>
#include <sstream>

#include "gridcep/case_io.hpp"
#include "gridcep/json_io.hpp"
#include "gridcep/ph.hpp"
#include "gridcep/planner.hpp"
#include "gridcep/scenario.hpp"
#include "gridcep/system.hpp"
#include "gridcep/uc.hpp"

namespace py = pybind11;
using namespace gridcep;

namespace {

py::dict report_to_dict(const PlanReport& r) {
    py::dict d;
    d["investment_cost"] = r.investment_cost;
    d["retirement_cost"] = r.retirement_cost;
    d["fom_existing"] = r.fom_existing;
    d["production_cost"] = r.production_cost;
    d["shed_penalty"] = r.shed_penalty;
    d["reserve_penalty"] = r.reserve_penalty;
    d["util_penalty"] = r.util_penalty;
    d["overall_cost"] = r.overall_cost;
    d["new_gen_mw"] = r.new_gen_mw;
    d["new_storage_mw"] = r.new_storage_mw;
    d["retired_mw"] = r.retired_mw;
    d["expected_daily_shed_mwh"] = r.expected_daily_shed_mwh;
    d["expected_lolh"] = r.expected_lolh;
    d["min_reserves_mw"] = r.min_reserves_mw;
    return d;
}

milp::SolveOptions options_from_kwargs(const PowerSystem& sys, double mip_gap, double time_limit,
                                       int threads, int seed) {
    milp::SolveOptions o;
    o.mip_gap = mip_gap > 0 ? mip_gap : sys.config.mip_gap;
    if (time_limit > 0) o.time_limit = time_limit;
    o.threads = threads > 0 ? threads : sys.config.threads;
    o.seed = seed >= 0 ? seed : sys.config.seed;
    return o;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "capacity-expansion planning engine (C++ core)";
    m.attr("__version__") = kEngineVersion;

    py::register_exception<EngineError>(m, "EngineError");

    py::class_<PowerSystem>(m, "PowerSystem")
        .def_property_readonly("num_buses",
                               [](const PowerSystem& s) { return s.buses.size(); })
        .def_property_readonly("num_thermal",
                               [](const PowerSystem& s) { return s.thermal_generators.size(); })
        .def_property_readonly("num_renewable",
                               [](const PowerSystem& s) { return s.renewable_generators.size(); })
        .def_property_readonly("num_storage",
                               [](const PowerSystem& s) { return s.storage_units.size(); })
        .def("bus_ids",
             [](const PowerSystem& s) {
                 std::vector<std::string> out;
                 for (const auto& b : s.buses) out.push_back(b.id);
                 return out;
             })
        .def("to_json", [](const PowerSystem& s) { return io::system_to_json(s).dump(2); })
        .def_static("from_json", [](const std::string& text) {
            return io::system_from_json(nlohmann::json::parse(text));
        });

    py::class_<ScenarioDay>(m, "ScenarioDay")
        .def_readonly("id", &ScenarioDay::id)
        .def_readonly("probability", &ScenarioDay::probability)
        .def("demand", [](const ScenarioDay& d, std::size_t bus) { return d.demand.at(bus); })
        .def("availability",
             [](const ScenarioDay& d, const std::string& gen) { return d.availability_for(gen); });

    py::class_<InvestmentPlan>(m, "InvestmentPlan")
        .def(py::init<>())
        .def_readwrite("thermal_builds", &InvestmentPlan::thermal_builds)
        .def_readwrite("renewable_builds", &InvestmentPlan::renewable_builds)
        .def_readwrite("storage_builds", &InvestmentPlan::storage_builds)
        .def_readwrite("retirements", &InvestmentPlan::retirements)
        .def("to_json", [](const InvestmentPlan& p) { return io::plan_to_json(p).dump(2); })
        .def_static("from_json", [](const std::string& text) {
            return io::plan_from_json(nlohmann::json::parse(text));
        });

    py::class_<io::CaseBundle>(m, "CaseBundle")
        .def_readonly("system", &io::CaseBundle::system)
        .def_readonly("scenarios", &io::CaseBundle::scenarios)
        .def_readonly("fuel_scenario_name", &io::CaseBundle::fuel_scenario_name);

    m.def(
        "load_case",
        [](const std::string& path, bool expand_candidates, const std::string& fuel_scenario,
           double load_scale, bool renewables_only) {
            io::CaseOptions opts;
            opts.expand_candidates = expand_candidates;
            opts.fuel_scenario = fuel_scenario;
            if (load_scale > 0) opts.load_scale = load_scale;
            opts.renewables_only = renewables_only;
            auto result = io::load_case(path, opts);
            if (!result.ok()) {
                std::ostringstream os;
                for (const auto& e : result.errors)
                    os << e.file << (e.locator.empty() ? "" : "[" + e.locator + "]") << ": "
                       << e.rule << "; ";
                throw EngineError("invalid_case", os.str());
            }
            return *result.bundle;
        },
        py::arg("path"), py::arg("expand_candidates") = true, py::arg("fuel_scenario") = "",
        py::arg("load_scale") = -1.0, py::arg("renewables_only") = false);

    m.def("validate_system", [](const PowerSystem& sys) {
        py::list out;
        for (const auto& v : validate_system(sys)) {
            py::dict d;
            d["element"] = v.element;
            d["rule"] = v.rule;
            d["detail"] = v.detail;
            out.append(d);
        }
        return out;
    });

    m.def(
        "scale_load",
        [](const std::vector<double>& values, double factor) {
            TimeSeries s;
            s.base = values;
            return scale_load(s, factor).values();
        },
        py::arg("values"), py::arg("factor"));

    m.def(
        "fuel_price",
        [](const std::string& form, double constant, double intercept, double slope, double adder,
           double index_price) {
            FuelPriceRule rule;
            rule.form = form == "constant" ? FuelPriceRule::Form::constant
                                           : FuelPriceRule::Form::affine_on_index;
            rule.constant = constant;
            rule.intercept = intercept;
            rule.slope = slope;
            rule.adder = adder;
            return fuel_price(rule, index_price);
        },
        py::arg("form"), py::arg("constant") = 0.0, py::arg("intercept") = 0.0,
        py::arg("slope") = 0.0, py::arg("adder") = 0.0, py::arg("index_price") = 0.0);

    m.def(
        "generate_outage_series",
        [](double rate, int duration, int horizon, std::uint64_t seed,
           const std::vector<std::pair<int, int>>& planned) {
            OutageModel model;
            model.generator = "py";
            model.forced_outage_rate = rate;
            model.outage_duration = duration;
            model.planned_outages = planned;
            model.seed = seed;
            auto series = generate_outage_series(model, horizon);
            return std::vector<int>(series.begin(), series.end());
        },
        py::arg("rate"), py::arg("duration"), py::arg("horizon"), py::arg("seed") = 0,
        py::arg("planned") = std::vector<std::pair<int, int>>{});

    m.def(
        "solve_operational",
        [](const PowerSystem& sys, const ScenarioDay& day, const InvestmentPlan& plan,
           double mip_gap, double time_limit, int threads, int seed) {
            auto sol = uc::solve_operational(
                sys, day, plan, options_from_kwargs(sys, mip_gap, time_limit, threads, seed));
            py::dict d;
            d["scenario"] = sol.scenario_id;
            d["status"] = std::string(milp::to_string(sol.status));
            d["operational_cost"] = sol.operational_cost;
            d["production_cost"] = sol.production_cost;
            d["load_shed_mwh"] = sol.load_shed_mwh;
            d["lolh"] = sol.lolh;
            d["min_reserve_mw"] = sol.min_reserve_mw;
            d["fuel_use"] = sol.fuel_use;
            return d;
        },
        py::arg("system"), py::arg("scenario"), py::arg("plan") = InvestmentPlan{},
        py::arg("mip_gap") = -1.0, py::arg("time_limit") = -1.0, py::arg("threads") = -1,
        py::arg("seed") = -1);

    m.def(
        "solve_ef",
        [](const PowerSystem& sys, const std::vector<ScenarioDay>& scenarios, double mip_gap,
           double time_limit, int threads, int seed) {
            auto ef = planner::assemble_extensive_form(sys, scenarios);
            auto res =
                milp::solve(ef.model, options_from_kwargs(sys, mip_gap, time_limit, threads, seed));
            if (!res.feasible())
                throw EngineError("solver_failed", milp::to_string(res.status));
            InvestmentPlan plan = planner::extract_plan(sys, ef.stage, res);
            py::dict d;
            d["objective"] = res.objective;
            d["best_bound"] = res.best_bound;
            d["gap"] = res.gap();
            d["plan"] = plan;
            return d;
        },
        py::arg("system"), py::arg("scenarios"), py::arg("mip_gap") = -1.0,
        py::arg("time_limit") = -1.0, py::arg("threads") = -1, py::arg("seed") = -1);

    m.def(
        "evaluate_plan",
        [](const PowerSystem& sys, const InvestmentPlan& plan,
           const std::vector<ScenarioDay>& scenarios, double mip_gap, double time_limit,
           int threads, int seed) {
            auto eval = planner::evaluate_plan(
                sys, plan, scenarios, options_from_kwargs(sys, mip_gap, time_limit, threads, seed));
            return report_to_dict(eval.report);
        },
        py::arg("system"), py::arg("plan"), py::arg("scenarios"), py::arg("mip_gap") = -1.0,
        py::arg("time_limit") = -1.0, py::arg("threads") = -1, py::arg("seed") = -1);

    m.def(
        "run_ph",
        [](const PowerSystem& sys, const std::vector<ScenarioDay>& scenarios, int max_iterations,
           double rho_scale, double convergence_tol, double subproblem_mip_gap, int workers,
           int seed) {
            ph::PHOptions opts = ph::PHOptions::from_config(sys.config);
            if (max_iterations > 0) opts.max_iterations = max_iterations;
            if (rho_scale > 0) opts.rho_scale = rho_scale;
            if (convergence_tol > 0) opts.convergence_tol = convergence_tol;
            if (subproblem_mip_gap > 0) opts.subproblem_mip_gap = subproblem_mip_gap;
            if (workers > 0) opts.workers = workers;
            if (seed >= 0) opts.seed = seed;
            auto state = ph::run_ph(sys, scenarios, opts);
            py::dict d;
            d["iterations"] = state.iteration;
            d["converged"] = state.converged;
            d["lower_bound"] = state.lower_bound;
            d["incumbent_objective"] = state.incumbent_objective;
            d["gap"] = state.gap();
            if (state.incumbent_plan) d["plan"] = *state.incumbent_plan;
            d["report"] = report_to_dict(state.incumbent_report);
            return d;
        },
        py::arg("system"), py::arg("scenarios"), py::arg("max_iterations") = -1,
        py::arg("rho_scale") = -1.0, py::arg("convergence_tol") = -1.0,
        py::arg("subproblem_mip_gap") = -1.0, py::arg("workers") = -1, py::arg("seed") = -1);
}
