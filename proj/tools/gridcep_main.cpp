#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>

#include "gridcep/case_io.hpp"
#include "gridcep/json_io.hpp"
#include "gridcep/ph.hpp"
#include "gridcep/planner.hpp"
#include "gridcep/report.hpp"
#include "gridcep/system.hpp"
#include "gridcep/uc.hpp"

namespace fs = std::filesystem;
using namespace gridcep;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitSolver = 3;

struct CommonFlags {
    std::string case_path;
    std::string out_dir = "out";
    std::string network;
    double mip_gap = -1;
    double time_limit = -1;
    int threads = -1;
    int seed = -1;
    std::string fuel_scenario;
    double load_scale = -1;
    bool renewables_only = false;
    int no_new_thermal_before = -1;
    std::vector<int> days;
    int max_iterations = -1;
    std::string plan_path;
    std::string resume_path;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool takes_case = true) {
    if (takes_case) cmd->add_option("case", f.case_path, "case directory")->required();
    cmd->add_option("--out", f.out_dir, "output directory");
    cmd->add_option("--network", f.network, "network model")
        ->check(CLI::IsMember({"copperplate", "pipe", "pipe_and_bubble"}));
    cmd->add_option("--mip-gap", f.mip_gap, "relative MIP gap");
    cmd->add_option("--time-limit", f.time_limit, "solver time limit, seconds");
    cmd->add_option("--threads", f.threads, "solver threads");
    cmd->add_option("--seed", f.seed, "random seed");
    cmd->add_option("--fuel-scenario", f.fuel_scenario,
                    "named fuel scenario (existing|future|future+) or a file");
    cmd->add_option("--load-scale", f.load_scale, "multiply all loads by this factor");
    cmd->add_flag("--renewables-only", f.renewables_only,
                  "restrict new investments to renewables and storage");
    cmd->add_option("--no-new-thermal-before", f.no_new_thermal_before,
                    "drop candidate classes not available by this year");
    cmd->add_option("--days", f.days, "day indices to include")->delimiter(',');
}

io::CaseOptions case_options(const CommonFlags& f, bool expand) {
    io::CaseOptions o;
    if (f.load_scale > 0) o.load_scale = f.load_scale;
    o.fuel_scenario = f.fuel_scenario;
    if (!f.days.empty()) o.days = f.days;
    if (f.seed >= 0) o.seed = f.seed;
    if (!f.network.empty()) o.network = network_mode_from_string(f.network);
    o.renewables_only = f.renewables_only;
    if (f.no_new_thermal_before > 0) o.year = f.no_new_thermal_before;
    o.expand_candidates = expand;
    return o;
}

milp::SolveOptions solve_options(const PowerSystem& sys, const CommonFlags& f) {
    milp::SolveOptions o;
    o.mip_gap = f.mip_gap > 0 ? f.mip_gap : sys.config.mip_gap;
    if (f.time_limit > 0)
        o.time_limit = f.time_limit;
    else if (sys.config.time_limit)
        o.time_limit = sys.config.time_limit;
    o.threads = f.threads > 0 ? f.threads : sys.config.threads;
    o.seed = f.seed >= 0 ? f.seed : sys.config.seed;
    return milp::SolveOptions::with_env_overrides(o);
}

int report_case_errors(const io::LoadResult& loaded) {
    for (const auto& e : loaded.errors)
        std::cerr << "error: " << e.file << (e.locator.empty() ? "" : " [" + e.locator + "]")
                  << ": " << e.rule << "\n";
    return kExitValidation;
}

io::RunManifest start_manifest(const CommonFlags& f, const std::string& mode, int seed) {
    fs::create_directories(f.out_dir);
    return io::make_manifest(f.case_path, mode, seed);
}

void finish_run(const CommonFlags& f, io::RunManifest manifest,
                const std::vector<report::CaseResult>& rows) {
    io::write_manifest(std::move(manifest), (fs::path(f.out_dir) / "run_manifest.json").string());
    std::string table = report::summary_table(rows);
    std::ofstream((fs::path(f.out_dir) / "summary.txt").string()) << table;
    std::cout << table;
}

std::string case_id(const std::string& path) {
    fs::path p(path);
    std::string name = p.filename().string();
    if (name.empty()) name = p.parent_path().filename().string();
    return name.empty() ? path : name;
}

int cmd_validate(const CommonFlags& f) {
    auto loaded = io::load_case(f.case_path, case_options(f, true));
    if (!loaded.ok()) return report_case_errors(loaded);
    std::cout << "case ok: " << loaded.bundle->system.buses.size() << " buses, "
              << loaded.bundle->system.thermal_generators.size() << " thermal, "
              << loaded.bundle->scenarios.size() << " scenario days\n";
    return kExitOk;
}

int cmd_simulate(const CommonFlags& f, bool stitched) {
    auto loaded = io::load_case(f.case_path, case_options(f, false));
    if (!loaded.ok()) return report_case_errors(loaded);
    const auto& bundle = *loaded.bundle;
    auto manifest = start_manifest(f, stitched ? "simulate-stitched" : "simulate",
                                   bundle.system.config.seed);
    milp::SolveOptions so = solve_options(bundle.system, f);

    InvestmentPlan no_plan;
    PlanReport aggregate;
    std::vector<uc::DispatchSolution> per_scenario;
    try {
        if (stitched) {
            auto sol = uc::solve_operational_stitched(bundle.system, bundle.scenarios, no_plan, so);
            per_scenario.push_back(sol);
            int n_days = static_cast<int>(bundle.scenarios.size());
            auto c1 = planner::first_stage_cost(bundle.system, no_plan);
            aggregate.fom_existing = c1.fom_existing;
            // per-day averages over the stitched window, annualized
            double to_year = bundle.system.config.periods_per_year / n_days;
            aggregate.production_cost = to_year * sol.production_cost;
            aggregate.shed_penalty = to_year * sol.shed_penalty;
            aggregate.reserve_penalty = to_year * sol.reserve_penalty;
            aggregate.util_penalty = to_year * sol.util_penalty;
            aggregate.expected_daily_shed_mwh = sol.load_shed_mwh / n_days;
            aggregate.expected_lolh = sol.lolh / n_days;
            aggregate.min_reserves_mw = sol.min_reserve_mw;
            aggregate.overall_cost = c1.total + aggregate.production_cost +
                                     aggregate.shed_penalty + aggregate.reserve_penalty +
                                     aggregate.util_penalty;
        } else {
            auto eval = planner::evaluate_plan(bundle.system, no_plan, bundle.scenarios, so);
            aggregate = eval.report;
            per_scenario = std::move(eval.per_scenario);
        }
    } catch (const EngineError& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        return kExitSolver;
    }

    io::write_json_file((fs::path(f.out_dir) / "scenarios.json").string(),
                        io::scenarios_to_json(bundle.system, bundle.scenarios));
    report::write_metrics((fs::path(f.out_dir) / "metrics.json").string(), case_id(f.case_path),
                          manifest.mode, per_scenario, aggregate, -1.0);
    for (const auto& sol : per_scenario)
        report::write_dispatch_csv(
            (fs::path(f.out_dir) / ("dispatch_" + sol.scenario_id + ".csv")).string(), sol.rows);

    std::vector<report::CaseResult> rows{{case_id(f.case_path), manifest.mode, -1.0, aggregate}};
    report::write_report(rows, (fs::path(f.out_dir) / "report.csv").string(),
                         (fs::path(f.out_dir) / "report.json").string());
    finish_run(f, std::move(manifest), rows);
    if (aggregate.failed_scenarios > 0) return kExitSolver;
    return kExitOk;
}

int cmd_solve_ef(const CommonFlags& f) {
    auto loaded = io::load_case(f.case_path, case_options(f, true));
    if (!loaded.ok()) return report_case_errors(loaded);
    const auto& bundle = *loaded.bundle;
    auto manifest = start_manifest(f, "solve-ef", bundle.system.config.seed);
    milp::SolveOptions so = solve_options(bundle.system, f);

    InvestmentPlan plan;
    double gap = -1.0;
    try {
        auto ef = planner::assemble_extensive_form(bundle.system, bundle.scenarios);
        auto res = milp::solve(ef.model, so);
        if (!res.feasible()) {
            std::cerr << "solver failure: " << milp::to_string(res.status) << " " << res.message
                      << "\n";
            return kExitSolver;
        }
        plan = planner::extract_plan(bundle.system, ef.stage, res);
        gap = std::max(0.0, res.gap());
    } catch (const EngineError& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        return kExitSolver;
    }

    auto eval = planner::evaluate_plan(bundle.system, plan, bundle.scenarios, so);
    io::write_json_file((fs::path(f.out_dir) / "plan.json").string(), io::plan_to_json(plan));
    io::write_json_file((fs::path(f.out_dir) / "scenarios.json").string(),
                        io::scenarios_to_json(bundle.system, bundle.scenarios));
    report::write_metrics((fs::path(f.out_dir) / "metrics.json").string(), case_id(f.case_path),
                          "solve-ef", eval.per_scenario, eval.report, gap);
    std::vector<report::CaseResult> rows{{case_id(f.case_path), "solve-ef", gap, eval.report}};
    report::write_report(rows, (fs::path(f.out_dir) / "report.csv").string(),
                         (fs::path(f.out_dir) / "report.json").string());
    finish_run(f, std::move(manifest), rows);
    return kExitOk;
}

int cmd_solve_ph(const CommonFlags& f) {
    auto loaded = io::load_case(f.case_path, case_options(f, true));
    if (!loaded.ok()) return report_case_errors(loaded);
    const auto& bundle = *loaded.bundle;
    auto manifest = start_manifest(f, "solve-ph", bundle.system.config.seed);

    ph::PHOptions opts = ph::PHOptions::from_config(bundle.system.config);
    if (f.max_iterations == 0) {
        std::cerr << "error: no_iterations (--max-iterations must be >= 1)\n";
        return kExitValidation;
    }
    if (f.max_iterations > 0) opts.max_iterations = f.max_iterations;
    if (f.mip_gap > 0) opts.subproblem_mip_gap = f.mip_gap;
    if (f.time_limit > 0) opts.time_limit = f.time_limit;
    if (f.threads > 0) opts.threads = f.threads;
    if (f.seed >= 0) opts.seed = f.seed;
    opts.checkpoint_path = (fs::path(f.out_dir) / "ph_checkpoint.json").string();
    if (opts.checkpoint_interval <= 0) opts.checkpoint_interval = 10;

    ph::PHState state;
    try {
        if (!f.resume_path.empty()) {
            ph::PHState resume = ph::load_checkpoint(f.resume_path);
            state = ph::run_ph(bundle.system, bundle.scenarios, opts, resume);
        } else {
            state = ph::run_ph(bundle.system, bundle.scenarios, opts);
        }
    } catch (const EngineError& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        return kExitSolver;
    }
    if (!state.incumbent_plan) {
        std::cerr << "solver failure: PH finished without an incumbent\n";
        return kExitSolver;
    }

    ph::write_trace_csv(state, (fs::path(f.out_dir) / "ph_trace.csv").string());
    ph::save_checkpoint(state, opts.checkpoint_path);
    io::write_json_file((fs::path(f.out_dir) / "plan.json").string(),
                        io::plan_to_json(*state.incumbent_plan));
    io::write_json_file((fs::path(f.out_dir) / "scenarios.json").string(),
                        io::scenarios_to_json(bundle.system, bundle.scenarios));
    double gap = state.gap() == milp::kInf ? -1.0 : std::max(0.0, state.gap());
    report::write_metrics((fs::path(f.out_dir) / "metrics.json").string(), case_id(f.case_path),
                          "solve-ph", {}, state.incumbent_report, gap);
    std::vector<report::CaseResult> rows{
        {case_id(f.case_path), "solve-ph", gap, state.incumbent_report}};
    report::write_report(rows, (fs::path(f.out_dir) / "report.csv").string(),
                         (fs::path(f.out_dir) / "report.json").string());
    finish_run(f, std::move(manifest), rows);
    std::cout << "PH: " << state.iteration << " iterations, "
              << (state.converged ? "converged" : "stopped") << ", gap "
              << (gap >= 0 ? std::to_string(100 * gap) + "%" : "n/a") << "\n";
    return kExitOk;
}

int cmd_evaluate(const CommonFlags& f) {
    if (f.plan_path.empty()) {
        std::cerr << "error: --plan required\n";
        return kExitValidation;
    }
    auto loaded = io::load_case(f.case_path, case_options(f, true));
    if (!loaded.ok()) return report_case_errors(loaded);
    const auto& bundle = *loaded.bundle;
    auto manifest = start_manifest(f, "evaluate", bundle.system.config.seed);
    milp::SolveOptions so = solve_options(bundle.system, f);

    InvestmentPlan plan;
    try {
        plan = io::plan_from_json(io::read_json_file(f.plan_path));
    } catch (const EngineError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    auto violations = planner::check_plan(bundle.system, plan);
    if (!violations.empty()) {
        for (const auto& v : violations)
            std::cerr << "error: plan: " << v.element << ": " << v.rule << "\n";
        return kExitValidation;
    }

    planner::EvaluationResult eval;
    try {
        eval = planner::evaluate_plan(bundle.system, plan, bundle.scenarios, so);
    } catch (const EngineError& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        return kExitSolver;
    }
    io::write_json_file((fs::path(f.out_dir) / "plan_report.json").string(), [&] {
        nlohmann::json j;
        j["plan"] = io::plan_to_json(plan);
        j["report"] = nlohmann::json{{"investment_cost", eval.report.investment_cost},
                                     {"retirement_cost", eval.report.retirement_cost},
                                     {"fom_existing", eval.report.fom_existing},
                                     {"production_cost", eval.report.production_cost},
                                     {"shed_penalty", eval.report.shed_penalty},
                                     {"reserve_penalty", eval.report.reserve_penalty},
                                     {"util_penalty", eval.report.util_penalty},
                                     {"overall_cost", eval.report.overall_cost},
                                     {"new_gen_mw", eval.report.new_gen_mw},
                                     {"new_storage_mw", eval.report.new_storage_mw},
                                     {"retired_mw", eval.report.retired_mw},
                                     {"expected_daily_shed_mwh", eval.report.expected_daily_shed_mwh},
                                     {"expected_lolh", eval.report.expected_lolh},
                                     {"min_reserves_mw", eval.report.min_reserves_mw}};
        return j;
    }());
    report::write_metrics((fs::path(f.out_dir) / "metrics.json").string(), case_id(f.case_path),
                          "evaluate", eval.per_scenario, eval.report, -1.0);
    std::vector<report::CaseResult> rows{{case_id(f.case_path), "evaluate", -1.0, eval.report}};
    report::write_report(rows, (fs::path(f.out_dir) / "report.csv").string(),
                         (fs::path(f.out_dir) / "report.json").string());
    finish_run(f, std::move(manifest), rows);
    if (eval.report.failed_scenarios > 0) return kExitSolver;
    return kExitOk;
}

int cmd_report(const std::vector<std::string>& run_dirs, const std::string& out_dir) {
    std::vector<report::CaseResult> rows;
    for (const auto& dir : run_dirs) {
        fs::path mp = fs::path(dir) / "metrics.json";
        if (!fs::exists(mp)) {
            std::cerr << "error: " << mp.string() << ": missing_file\n";
            return kExitValidation;
        }
        nlohmann::json j = io::read_json_file(mp.string());
        report::CaseResult r;
        r.case_id = j.value("case", dir);
        r.mode = j.value("mode", std::string{});
        r.optimality_gap = j.value("optimality_gap", -1.0);
        const auto& a = j.at("aggregate");
        r.report.investment_cost = a.value("investment_cost", 0.0);
        r.report.retirement_cost = a.value("retirement_cost", 0.0);
        r.report.fom_existing = a.value("fom_existing", 0.0);
        r.report.production_cost = a.value("production_cost", 0.0);
        r.report.shed_penalty = a.value("shed_penalty", 0.0);
        r.report.reserve_penalty = a.value("reserve_penalty", 0.0);
        r.report.util_penalty = a.value("util_penalty", 0.0);
        r.report.overall_cost = a.value("overall_cost", 0.0);
        r.report.new_gen_mw = a.value("new_gen_mw", 0.0);
        r.report.new_storage_mw = a.value("new_storage_mw", 0.0);
        r.report.retired_mw = a.value("retired_mw", 0.0);
        r.report.expected_daily_shed_mwh = a.value("expected_daily_shed_mwh", 0.0);
        r.report.expected_lolh = a.value("expected_lolh", 0.0);
        r.report.min_reserves_mw = a.value("min_reserves_mw", 0.0);
        rows.push_back(std::move(r));
    }
    fs::create_directories(out_dir);
    report::write_report(rows, (fs::path(out_dir) / "report.csv").string(),
                         (fs::path(out_dir) / "report.json").string());
    std::cout << report::summary_table(rows);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"gridcep: stochastic capacity-expansion planning for island power systems"};
    app.require_subcommand(1);

    CommonFlags fv, fsim, fstitch, fef, fph, fev, frun;
    std::vector<std::string> report_dirs;
    std::string report_out = "out";
    std::string run_mode;

    add_common(app.add_subcommand("validate", "load and validate a case"), fv);
    add_common(app.add_subcommand("simulate", "no-expansion UC/ED, per representative day"), fsim);
    add_common(app.add_subcommand("simulate-stitched",
                                  "no-expansion UC/ED over all days as one problem"),
               fstitch);
    add_common(app.add_subcommand("solve-ef", "capacity expansion, extensive form"), fef);
    auto* ph_cmd = app.add_subcommand("solve-ph", "capacity expansion, progressive hedging");
    add_common(ph_cmd, fph);
    ph_cmd->add_option("--max-iterations", fph.max_iterations, "PH iteration cap");
    ph_cmd->add_option("--resume", fph.resume_path, "resume from a PH checkpoint");
    auto* ev_cmd = app.add_subcommand("evaluate", "evaluate an investment plan");
    add_common(ev_cmd, fev);
    ev_cmd->add_option("--plan", fev.plan_path, "plan.json to evaluate")->required();
    auto* rep_cmd = app.add_subcommand("report", "merge run directories into one report");
    rep_cmd->add_option("runs", report_dirs, "run output directories")->required();
    rep_cmd->add_option("--out", report_out, "output directory");
    auto* run_cmd = app.add_subcommand("run", "run a mode given by --mode");
    add_common(run_cmd, frun);
    run_cmd->add_option("--mode", run_mode, "validate|simulate|simulate-stitched|solve-ef|solve-ph|evaluate")
        ->required();
    run_cmd->add_option("--plan", frun.plan_path, "plan.json (evaluate mode)");
    run_cmd->add_option("--max-iterations", frun.max_iterations, "PH iteration cap");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand("validate")) return cmd_validate(fv);
        if (app.got_subcommand("simulate")) return cmd_simulate(fsim, false);
        if (app.got_subcommand("simulate-stitched")) return cmd_simulate(fstitch, true);
        if (app.got_subcommand("solve-ef")) return cmd_solve_ef(fef);
        if (app.got_subcommand("solve-ph")) return cmd_solve_ph(fph);
        if (app.got_subcommand("evaluate")) return cmd_evaluate(fev);
        if (app.got_subcommand("report")) return cmd_report(report_dirs, report_out);
        if (app.got_subcommand("run")) {
            if (run_mode == "validate") return cmd_validate(frun);
            if (run_mode == "simulate") return cmd_simulate(frun, false);
            if (run_mode == "simulate-stitched") return cmd_simulate(frun, true);
            if (run_mode == "solve-ef") return cmd_solve_ef(frun);
            if (run_mode == "solve-ph") return cmd_solve_ph(frun);
            if (run_mode == "evaluate") return cmd_evaluate(frun);
            std::cerr << "error: unknown mode " << run_mode << "\n";
            return kExitValidation;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitSolver;
    }
    return kExitOk;
}
