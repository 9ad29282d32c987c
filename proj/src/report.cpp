#include "gridcep/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "gridcep/json_io.hpp"

namespace gridcep::report {

namespace {

std::string fixed2(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

nlohmann::json report_json(const PlanReport& r) {
    return nlohmann::json{{"investment_cost", r.investment_cost},
                          {"retirement_cost", r.retirement_cost},
                          {"fom_existing", r.fom_existing},
                          {"production_cost", r.production_cost},
                          {"shed_penalty", r.shed_penalty},
                          {"reserve_penalty", r.reserve_penalty},
                          {"util_penalty", r.util_penalty},
                          {"overall_cost", r.overall_cost},
                          {"new_gen_mw", r.new_gen_mw},
                          {"new_storage_mw", r.new_storage_mw},
                          {"retired_mw", r.retired_mw},
                          {"expected_daily_shed_mwh", r.expected_daily_shed_mwh},
                          {"expected_lolh", r.expected_lolh},
                          {"min_reserves_mw", r.min_reserves_mw},
                          {"failed_scenarios", r.failed_scenarios}};
}

}  // namespace

void write_report(const std::vector<CaseResult>& results, const std::string& csv_path,
                  const std::string& json_path) {
    std::vector<CaseResult> sorted(results);
    std::sort(sorted.begin(), sorted.end(),
              [](const CaseResult& a, const CaseResult& b) { return a.case_id < b.case_id; });

    std::ofstream csv(csv_path);
    if (!csv) throw EngineError("unwritable_path", csv_path);
    csv << "case,mode,optimality_gap,investment_cost,production_cost,overall_cost,"
           "min_reserves_mw,new_gen_mw,new_storage_mw,retired_mw\n";
    for (const auto& r : sorted) {
        csv << r.case_id << ',' << r.mode << ',';
        if (r.optimality_gap >= 0) csv << fixed2(100.0 * r.optimality_gap) << '%';
        csv << ',' << fixed2(r.report.investment_cost) << ',' << fixed2(r.report.production_cost)
            << ',' << fixed2(r.report.overall_cost) << ',' << fixed2(r.report.min_reserves_mw)
            << ',' << fixed2(r.report.new_gen_mw) << ',' << fixed2(r.report.new_storage_mw) << ','
            << fixed2(r.report.retired_mw) << "\n";
    }
    csv.close();

    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : sorted) {
        nlohmann::json j = report_json(r.report);
        j["case"] = r.case_id;
        j["mode"] = r.mode;
        if (r.optimality_gap >= 0) j["optimality_gap"] = r.optimality_gap;
        arr.push_back(j);
    }
    io::write_json_file(json_path, nlohmann::json{{"results", arr}});
}

std::string summary_table(const std::vector<CaseResult>& results) {
    std::ostringstream os;
    char line[256];
    std::snprintf(line, sizeof(line), "%-12s %-18s %9s %12s %12s %10s %9s %9s %9s %9s\n", "case",
                  "mode", "gap", "invest M$/y", "prod B$/y", "total B$/y", "shed MWh", "LOLH h",
                  "min res", "new MW");
    os << line;
    for (const auto& r : results) {
        std::string gap = r.optimality_gap >= 0 ? fixed2(100.0 * r.optimality_gap) + "%" : "-";
        std::snprintf(line, sizeof(line),
                      "%-12s %-18s %9s %12.1f %12.3f %10.3f %9.1f %9.2f %9.1f %9.1f\n",
                      r.case_id.c_str(), r.mode.c_str(), gap.c_str(),
                      r.report.investment_cost / 1e6, r.report.production_cost / 1e9,
                      r.report.overall_cost / 1e9, r.report.expected_daily_shed_mwh,
                      r.report.expected_lolh, r.report.min_reserves_mw,
                      r.report.new_gen_mw + r.report.new_storage_mw);
        os << line;
    }
    return os.str();
}

void write_metrics(const std::string& path, const std::string& case_id, const std::string& mode,
                   const std::vector<uc::DispatchSolution>& per_scenario,
                   const PlanReport& aggregate, double optimality_gap) {
    nlohmann::json scen = nlohmann::json::array();
    for (const auto& s : per_scenario) {
        nlohmann::json j{{"scenario", s.scenario_id},
                         {"status", milp::to_string(s.status)},
                         {"operational_cost", s.operational_cost},
                         {"production_cost", s.production_cost},
                         {"shed_penalty", s.shed_penalty},
                         {"reserve_penalty", s.reserve_penalty},
                         {"util_penalty", s.util_penalty},
                         {"load_shed_mwh", s.load_shed_mwh},
                         {"lolh", s.lolh},
                         {"min_reserve_mw", s.min_reserve_mw},
                         {"fuel_use", s.fuel_use}};
        scen.push_back(j);
    }
    nlohmann::json j{{"case", case_id},
                     {"mode", mode},
                     {"per_scenario", scen},
                     {"aggregate", report_json(aggregate)}};
    if (optimality_gap >= 0) j["optimality_gap"] = optimality_gap;
    io::write_json_file(path, j);
}

void write_dispatch_csv(const std::string& path,
                        const std::vector<std::tuple<int, std::string, std::string, double>>& rows) {
    std::ofstream out(path);
    if (!out) throw EngineError("unwritable_path", path);
    out << "period,family,element,value\n";
    for (const auto& [t, family, element, value] : rows)
        out << t << ',' << family << ',' << element << ',' << format_full(value) << "\n";
}

}  // namespace gridcep::report
