#include "gridcep/case_io.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "gridcep/json_io.hpp"

namespace gridcep::io {

namespace fs = std::filesystem;

std::vector<TimeSeries> read_series_csv(const std::string& path, SeriesUnit unit) {
    std::ifstream in(path);
    if (!in) throw EngineError("missing_file", path);
    std::string line;
    if (!std::getline(in, line)) throw EngineError("empty_csv", path);
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();

    std::vector<std::string> headers;
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) headers.push_back(cell);
    }
    if (headers.empty() || headers[0] != "hour")
        throw EngineError("bad_csv_header", path + ": first column must be `hour`");

    std::vector<TimeSeries> series(headers.size() - 1);
    for (std::size_t i = 1; i < headers.size(); ++i) {
        series[i - 1].id = headers[i];
        series[i - 1].unit = unit;
    }
    std::size_t row = 0;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::size_t col = 0;
        while (std::getline(ss, cell, ',')) {
            if (col == 0) {
                // hour index must be the row number; gaps are data errors
                if (std::stol(cell) != static_cast<long>(row))
                    throw EngineError("bad_csv_hour",
                                      path + ": expected hour " + std::to_string(row));
            } else {
                if (col - 1 >= series.size())
                    throw EngineError("bad_csv_row", path + ": too many columns");
                series[col - 1].base.push_back(std::stod(cell));
            }
            ++col;
        }
        if (col != headers.size())
            throw EngineError("bad_csv_row", path + ": wrong column count at row " +
                                                 std::to_string(row));
        ++row;
    }
    return series;
}

namespace {

std::vector<OutageModel> outages_from_json(const json& j) {
    std::vector<OutageModel> out;
    for (const auto& mj : j.value("models", json::array())) {
        OutageModel m;
        m.generator = mj.at("generator").get<std::string>();
        m.forced_outage_rate = mj.value("forced_outage_rate", 0.0);
        m.outage_duration = mj.value("outage_duration", 40);
        for (const auto& p : mj.value("planned_outages", json::array()))
            m.planned_outages.emplace_back(p.at(0).get<int>(), p.at(1).get<int>());
        if (mj.contains("seed")) m.seed = mj.at("seed").get<std::uint64_t>();
        out.push_back(std::move(m));
    }
    return out;
}

}  // namespace

LoadResult load_case(const std::string& path, const CaseOptions& options) {
    LoadResult result;
    auto fail = [&](const std::string& file, const std::string& locator, const std::string& rule) {
        result.errors.push_back(CaseError{file, locator, rule});
    };
    fs::path dir(path);
    if (!fs::exists(dir / "system.json")) {
        fail("system.json", "", "missing_file");
        return result;
    }

    PowerSystem system;
    try {
        system = system_from_json(read_json_file((dir / "system.json").string()));
    } catch (const EngineError& e) {
        fail("system.json", "", e.what());
        return result;
    }
    if (fs::exists(dir / "limits.json")) {
        try {
            auto extra = site_limits_from_json(read_json_file((dir / "limits.json").string()));
            system.site_limits.insert(system.site_limits.end(), extra.begin(), extra.end());
        } catch (const EngineError& e) {
            fail("limits.json", "", e.what());
        }
    }

    json case_cfg;
    if (fs::exists(dir / "case.json")) {
        try {
            case_cfg = read_json_file((dir / "case.json").string());
        } catch (const EngineError& e) {
            fail("case.json", "", e.what());
        }
    }

    if (options.seed) system.config.seed = *options.seed;
    if (options.network) system.config.network_mode = *options.network;

    if (options.expand_candidates) {
        filter_candidate_catalog(system, options.year, options.renewables_only);
        CandidateCounts counts;
        if (case_cfg.contains("expansion")) {
            const json& ej = case_cfg.at("expansion");
            if (ej.contains("per_class"))
                counts.per_class = ej.at("per_class").get<std::map<std::string, int>>();
            if (ej.contains("per_bus"))
                counts.per_bus =
                    ej.at("per_bus").get<std::map<std::string, std::map<std::string, int>>>();
        } else {
            for (const auto& t : system.candidate_catalog.thermal) counts.per_class[t.tech_class] = 1;
        }
        if (options.renewables_only) {
            // catalog already filtered; drop thermal counts of removed classes
            std::erase_if(counts.per_class, [&](const auto& kv) {
                for (const auto& t : system.candidate_catalog.thermal)
                    if (t.tech_class == kv.first) return false;
                return true;
            });
            std::erase_if(counts.per_bus, [&](const auto& kv) {
                for (const auto& t : system.candidate_catalog.thermal)
                    if (t.tech_class == kv.first) return false;
                return true;
            });
        }
        try {
            system = expand_candidate_catalog(system, counts);
        } catch (const EngineError& e) {
            fail("case.json", "expansion", e.what());
            return result;
        }
    } else {
        // no first-stage decisions: strip candidates entirely
        system.candidate_catalog = {};
    }

    auto violations = validate_system(system);
    for (const auto& v : violations) fail("system.json", v.element, v.rule);
    if (!result.errors.empty()) return result;

    // --- scenario selection ------------------------------------------------
    std::vector<int> day_selection;
    if (options.days) {
        day_selection = *options.days;
    } else if (case_cfg.contains("days")) {
        day_selection = case_cfg.at("days").get<std::vector<int>>();
    }

    std::optional<std::vector<double>> weights;
    if (case_cfg.contains("weights"))
        weights = case_cfg.at("weights").get<std::vector<double>>();

    std::string fuel_name = options.fuel_scenario;
    if (fuel_name.empty() && case_cfg.contains("fuel_scenario"))
        fuel_name = case_cfg.at("fuel_scenario").get<std::string>();

    CaseBundle bundle;
    bundle.case_path = path;
    bundle.fuel_scenario_name = fuel_name;

    bool build_from_csv = fs::exists(dir / "loads.csv");
    if (!build_from_csv && !fs::exists(dir / "scenarios.json")) {
        fail("loads.csv", "", "missing_file");
        return result;
    }

    try {
        if (build_from_csv) {
            ScenarioBuildInputs inputs;
            inputs.loads = read_series_csv((dir / "loads.csv").string(), SeriesUnit::mw);
            for (const auto& s : inputs.loads) {
                if (s.id == "system") continue;
                if (system.bus_index(s.id) < 0) {
                    fail("loads.csv", s.id, "unknown_bus");
                    return result;
                }
            }
            if (options.load_scale)
                for (auto& s : inputs.loads) s = scale_load(s, *options.load_scale);
            if (fs::exists(dir / "availability.csv"))
                inputs.availabilities =
                    read_series_csv((dir / "availability.csv").string(), SeriesUnit::factor);
            if (fs::exists(dir / "outages.json")) {
                json oj = read_json_file((dir / "outages.json").string());
                inputs.outage_models = outages_from_json(oj);
                inputs.master_seed = oj.value("master_seed", 0ULL);
            }
            if (system.config.seed != 0) inputs.master_seed ^= static_cast<std::uint64_t>(system.config.seed);

            if (day_selection.empty()) {
                std::size_t hours = inputs.loads.empty() ? 0 : inputs.loads.front().size();
                for (int d = 0; d < static_cast<int>(hours / 24); ++d) day_selection.push_back(d);
            }
            if (day_selection.empty()) {
                fail("loads.csv", "", "no_scenarios");
                return result;
            }

            if (!fuel_name.empty()) {
                if (!fs::exists(dir / "fuel_scenario.json")) {
                    fail("fuel_scenario.json", fuel_name, "missing_file");
                    return result;
                }
                fs::path fsp = fs::exists(fuel_name) ? fs::path(fuel_name)
                                                     : dir / "fuel_scenario.json";
                auto scenarios_map = fuel_scenarios_from_json(read_json_file(fsp.string()));
                auto it = scenarios_map.find(fuel_name);
                if (fs::exists(fuel_name) && scenarios_map.size() == 1)
                    it = scenarios_map.begin();
                if (it == scenarios_map.end()) {
                    fail("fuel_scenario.json", fuel_name, "unknown_fuel_scenario");
                    return result;
                }
                apply_fuel_scenario(system, it->second,
                                    static_cast<int>(day_selection.size()));
            }

            bundle.scenarios = build_scenario_set(system, inputs, day_selection, weights);
        } else {
            bundle.scenarios = scenarios_from_json(
                system, read_json_file((dir / "scenarios.json").string()));
            for (std::size_t i = 0; i < bundle.scenarios.size(); ++i)
                day_selection.push_back(static_cast<int>(i));
        }
    } catch (const EngineError& e) {
        fail(build_from_csv ? "loads.csv" : "scenarios.json", "", e.what());
        return result;
    }

    if (bundle.scenarios.empty()) {
        fail("scenarios.json", "", "no_scenarios");
        return result;
    }
    double prob = 0.0;
    for (const auto& s : bundle.scenarios) prob += s.probability;
    if (std::abs(prob - 1.0) > 1e-9) {
        fail("scenarios.json", "probability", "probability_sum");
        return result;
    }

    bundle.system = std::move(system);
    bundle.day_selection = std::move(day_selection);
    result.bundle = std::move(bundle);
    return result;
}

namespace {

std::string iso8601_utc(std::chrono::system_clock::time_point tp) {
    std::time_t t = std::chrono::system_clock::to_time_t(tp);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace

RunManifest make_manifest(const std::string& case_path, const std::string& mode, int seed) {
    RunManifest m;
    m.case_path = case_path;
    m.mode = mode;
    m.seed = seed;
    m.started_at = iso8601_utc(std::chrono::system_clock::now());

    // Content hash over the sorted input files.
    std::vector<fs::path> files;
    const char* names[] = {"system.json",  "limits.json",        "case.json",
                           "loads.csv",    "availability.csv",   "outages.json",
                           "fuel_scenario.json", "scenarios.json"};
    for (const char* n : names) {
        fs::path p = fs::path(case_path) / n;
        if (fs::exists(p)) files.push_back(p);
    }
    std::sort(files.begin(), files.end());
    std::string blob;
    for (const auto& p : files) {
        std::ifstream in(p, std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        blob += p.filename().string();
        blob += '\0';
        blob += ss.str();
        blob += '\0';
    }
    blob += "seed=" + std::to_string(seed);
    m.input_hash = sha256_hex(blob);
    return m;
}

void write_manifest(RunManifest manifest, const std::string& out_path) {
    manifest.finished_at = iso8601_utc(std::chrono::system_clock::now());
    json j{{"case_path", manifest.case_path},
           {"mode", manifest.mode},
           {"input_hash", manifest.input_hash},
           {"seed", manifest.seed},
           {"started_at", manifest.started_at},
           {"finished_at", manifest.finished_at},
           {"engine_version", manifest.engine_version}};
    write_json_file(out_path, j);
}

}  // namespace gridcep::io
