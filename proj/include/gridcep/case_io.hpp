#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gridcep/scenario.hpp"
#include "gridcep/system.hpp"

namespace gridcep::io {

struct CaseError {
    std::string file;
    std::string locator;  // element id, column, or field
    std::string rule;
};

struct CaseOptions {
    std::optional<double> load_scale;
    std::string fuel_scenario;  // named scenario or path; empty = case default
    std::optional<std::vector<int>> days;
    std::optional<int> seed;
    std::optional<NetworkMode> network;
    bool renewables_only = false;
    std::optional<int> year;  // lead-time gating: drop classes not yet available
    bool expand_candidates = true;
};

struct CaseBundle {
    PowerSystem system;
    std::vector<ScenarioDay> scenarios;
    std::vector<int> day_selection;
    std::string fuel_scenario_name;
    std::string case_path;
};

struct LoadResult {
    std::optional<CaseBundle> bundle;
    std::vector<CaseError> errors;
    bool ok() const { return bundle.has_value() && errors.empty(); }
};

// Loads and validates a case directory:
//   system.json            required
//   limits.json            optional site limits, merged in
//   case.json              optional defaults (days, weights, expansion,
//                          fuel_scenario)
//   loads.csv              hour x bus MW (or a single `system` column)
//   availability.csv       hour x generator availability factor
//   outages.json           forced/planned outage models
//   fuel_scenario.json     named fuel scenarios
//   scenarios.json         prebuilt scenario set (used when loads.csv absent)
LoadResult load_case(const std::string& path, const CaseOptions& options = {});

struct RunManifest {
    std::string case_path;
    std::string mode;
    std::string input_hash;  // sha256 over the case input files
    int seed = 0;
    std::string started_at;
    std::string finished_at;
    std::string engine_version = kEngineVersion;
};

RunManifest make_manifest(const std::string& case_path, const std::string& mode, int seed);
void write_manifest(RunManifest manifest, const std::string& out_path);

// hour-indexed CSV (header `hour,<id>,...`) -> one series per column.
std::vector<TimeSeries> read_series_csv(const std::string& path, SeriesUnit unit);

}  // namespace gridcep::io
