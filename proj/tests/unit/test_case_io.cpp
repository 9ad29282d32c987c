#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "gridcep/case_io.hpp"
#include <nlohmann/json.hpp>

#include "gridcep/json_io.hpp"

using namespace gridcep;
namespace fs = std::filesystem;

TEST_SUITE_BEGIN("case_io");

namespace {

const std::string kCaseDir = GRIDCEP_CASE_DIR;

// temp copy of island3 for destructive edits
struct TempCase {
    fs::path dir;
    explicit TempCase(const std::string& name) {
        dir = fs::temp_directory_path() / ("gridcep_case_" + name + std::to_string(::getpid()));
        fs::remove_all(dir);
        fs::copy(fs::path(kCaseDir) / "island3", dir, fs::copy_options::recursive);
    }
    ~TempCase() { fs::remove_all(dir); }
};

}  // namespace

TEST_CASE("island3 loads, validates, and has the advertised shape") {
    auto loaded = io::load_case(kCaseDir + "/island3");
    REQUIRE(loaded.ok());
    const auto& bundle = *loaded.bundle;
    CHECK(bundle.system.buses.size() == 3);
    CHECK(bundle.scenarios.size() == 2);
    double prob = 0.0;
    for (const auto& s : bundle.scenarios) prob += s.probability;
    CHECK(prob == doctest::Approx(1.0));
    // candidate expansion happened per case.json
    int candidates = 0;
    for (const auto& g : bundle.system.thermal_generators)
        if (!g.existing) ++candidates;
    CHECK(candidates == 4);  // two copies at each of two eligible buses
}

TEST_CASE("island8 loads with a dual-fuel unit and finite fuel") {
    auto loaded = io::load_case(kCaseDir + "/island8");
    REQUIRE(loaded.ok());
    const auto& bundle = *loaded.bundle;
    CHECK(bundle.system.buses.size() == 8);
    CHECK(bundle.scenarios.size() == 3);
    bool dual = false;
    for (const auto& g : bundle.system.thermal_generators)
        if (g.secondary_fuel) dual = true;
    CHECK(dual);
    bool finite_fuel = false;
    for (const auto& s : bundle.scenarios)
        for (const auto& f : s.fuel_supply)
            if (f) finite_fuel = true;
    CHECK(finite_fuel);
}

TEST_CASE("demand column for an unknown bus names the bus") {
    TempCase tmp("unknownbus");
    // rewrite loads.csv with a bogus bus column
    std::ifstream in(tmp.dir / "loads.csv");
    std::string header;
    std::getline(in, header);
    std::string rest((std::istreambuf_iterator<char>(in)), {});
    in.close();
    std::ofstream out(tmp.dir / "loads.csv");
    out << "hour,ghost_bus\n";
    std::istringstream lines(rest);
    std::string line;
    int hour = 0;
    while (std::getline(lines, line)) {
        if (line.empty()) continue;
        out << hour++ << ",100.0\n";
    }
    out.close();

    auto loaded = io::load_case(tmp.dir.string());
    REQUIRE_FALSE(loaded.ok());
    bool found = false;
    for (const auto& e : loaded.errors)
        if (e.rule == "unknown_bus" && e.locator == "ghost_bus") found = true;
    CHECK(found);
}

TEST_CASE("empty day selection reports no_scenarios") {
    TempCase tmp("noscen");
    io::json cfg = io::read_json_file((tmp.dir / "case.json").string());
    cfg["days"] = io::json::array();
    // truncate the load series to zero full days as well
    std::ofstream out(tmp.dir / "loads.csv");
    out << "hour,system\n";
    out.close();
    io::write_json_file((tmp.dir / "case.json").string(), cfg);
    auto loaded = io::load_case(tmp.dir.string());
    REQUIRE_FALSE(loaded.ok());
    bool found = false;
    for (const auto& e : loaded.errors)
        if (e.rule == "no_scenarios") found = true;
    CHECK(found);
}

TEST_CASE("missing system.json is an actionable error") {
    auto loaded = io::load_case(kCaseDir + "/definitely_not_here");
    REQUIRE_FALSE(loaded.ok());
    CHECK(loaded.errors[0].file == "system.json");
    CHECK(loaded.errors[0].rule == "missing_file");
}

TEST_CASE("validation violations surface with element and rule") {
    TempCase tmp("badsystem");
    io::json sys = io::read_json_file((tmp.dir / "system.json").string());
    sys["buses"][0]["load_fraction"] = 0.9;  // breaks the sum
    io::write_json_file((tmp.dir / "system.json").string(), sys);
    auto loaded = io::load_case(tmp.dir.string());
    REQUIRE_FALSE(loaded.ok());
    bool found = false;
    for (const auto& e : loaded.errors)
        if (e.rule == "load_fraction_sum") found = true;
    CHECK(found);
}

TEST_CASE("flags reshape the load: scale, days, network") {
    io::CaseOptions opts;
    opts.load_scale = 1.07;
    opts.days = std::vector<int>{1};
    opts.network = NetworkMode::copperplate;
    auto scaled = io::load_case(kCaseDir + "/island3", opts);
    REQUIRE(scaled.ok());
    auto plain = io::load_case(kCaseDir + "/island3");
    REQUIRE(plain.ok());
    CHECK(scaled.bundle->scenarios.size() == 1);
    CHECK(scaled.bundle->system.config.network_mode == NetworkMode::copperplate);
    double a = scaled.bundle->scenarios[0].demand[0][12];
    double b = plain.bundle->scenarios[1].demand[0][12];
    CHECK(a == doctest::Approx(1.07 * b).epsilon(1e-9));
}

TEST_CASE("renewables-only strips thermal candidates") {
    io::CaseOptions opts;
    opts.renewables_only = true;
    auto loaded = io::load_case(kCaseDir + "/island3", opts);
    REQUIRE(loaded.ok());
    for (const auto& g : loaded.bundle->system.thermal_generators) CHECK(g.existing);
    bool has_candidate_renewable = false;
    for (const auto& g : loaded.bundle->system.renewable_generators)
        if (!g.existing) has_candidate_renewable = true;
    CHECK(has_candidate_renewable);
}

TEST_CASE("lead-time gating drops late classes") {
    io::CaseOptions opts;
    opts.year = 2027;  // island3 gas_cc is a 2031 class
    auto loaded = io::load_case(kCaseDir + "/island3", opts);
    REQUIRE(loaded.ok());
    for (const auto& g : loaded.bundle->system.thermal_generators) CHECK(g.existing);
}

TEST_CASE("fuel scenario changes prices and supplies") {
    io::CaseOptions existing;
    existing.fuel_scenario = "existing";
    auto a = io::load_case(kCaseDir + "/island3", existing);
    REQUIRE(a.ok());
    io::CaseOptions future;
    future.fuel_scenario = "future";
    auto b = io::load_case(kCaseDir + "/island3", future);
    REQUIRE(b.ok());
    double pa = 0, pb = 0;
    for (const auto& f : a.bundle->system.fuels)
        if (f.id.kind == FuelKind::NG) pa = f.price;
    for (const auto& f : b.bundle->system.fuels)
        if (f.id.kind == FuelKind::NG) pb = f.price;
    CHECK(pa == doctest::Approx(6.5 + 1.15 * 2.24));
    CHECK(pb == doctest::Approx(6.5 + 1.15 * 3.15));
}

TEST_CASE("manifest hash is deterministic and seed-sensitive") {
    auto m1 = io::make_manifest(kCaseDir + "/island3", "simulate", 42);
    auto m2 = io::make_manifest(kCaseDir + "/island3", "simulate", 42);
    CHECK(m1.input_hash == m2.input_hash);
    auto m3 = io::make_manifest(kCaseDir + "/island3", "simulate", 43);
    CHECK(m1.input_hash != m3.input_hash);
    CHECK(m1.input_hash.size() == 64);
}

TEST_CASE("scenario set json round trip") {
    auto loaded = io::load_case(kCaseDir + "/island3");
    REQUIRE(loaded.ok());
    const auto& bundle = *loaded.bundle;
    auto j = io::scenarios_to_json(bundle.system, bundle.scenarios);
    auto back = io::scenarios_from_json(bundle.system, j);
    REQUIRE(back.size() == bundle.scenarios.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
        CHECK(back[i].probability == bundle.scenarios[i].probability);
        CHECK(back[i].demand == bundle.scenarios[i].demand);
        CHECK(back[i].availability == bundle.scenarios[i].availability);
    }
}

TEST_SUITE_END();
