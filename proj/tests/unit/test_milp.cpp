#include <doctest.h>

#include <cmath>
#include <sstream>

#include "gridcep/milp.hpp"

using namespace gridcep;
using namespace gridcep::milp;

TEST_SUITE_BEGIN("milp");

TEST_CASE("continuous minimum against a simple bound") {
    ModelInstance m;
    VarRef x = m.add_variable("x", "", -1, -1, VarDomain::continuous, 0, kInf);
    LinExpr con;
    con.add(x, 1.0);
    m.add_constraint("c", "", -1, -1, con, Sense::ge, 3.0);
    LinExpr obj;
    obj.add(x, 1.0);
    m.set_objective(obj);

    SolveResult r = solve(m);
    CHECK(r.status == SolveStatus::optimal);
    CHECK(r.objective == doctest::Approx(3.0));
    CHECK(r.value(x) == doctest::Approx(3.0));
}

TEST_CASE("knapsack matches exhaustive enumeration") {
    // max 4a + 5b + 3c st 3a + 4b + 2c <= 6 == min of the negation
    const double value[3] = {4, 5, 3};
    const double weight[3] = {3, 4, 2};
    ModelInstance m;
    std::vector<VarRef> items;
    LinExpr cap, obj;
    for (int i = 0; i < 3; ++i) {
        VarRef v = m.add_variable("item", std::to_string(i), -1, -1, VarDomain::binary, 0, 1);
        items.push_back(v);
        cap.add(v, weight[i]);
        obj.add(v, -value[i]);
    }
    m.add_constraint("cap", "", -1, -1, cap, Sense::le, 6.0);
    m.set_objective(obj);
    SolveResult r = solve(m);
    REQUIRE(r.feasible());

    double best = 0.0;  // brute force over all 8 subsets
    for (int mask = 0; mask < 8; ++mask) {
        double w = 0, v = 0;
        for (int i = 0; i < 3; ++i)
            if (mask & (1 << i)) {
                w += weight[i];
                v += value[i];
            }
        if (w <= 6.0) best = std::max(best, v);
    }
    CHECK(-r.objective == doctest::Approx(best));
}

TEST_CASE("infeasible bounds pair reports infeasible") {
    ModelInstance m;
    VarRef x = m.add_variable("x", "", -1, -1, VarDomain::continuous, 0, kInf);
    LinExpr le, ge;
    le.add(x, 1.0);
    ge.add(x, 1.0);
    m.add_constraint("le", "", -1, -1, le, Sense::le, 0.0);
    m.add_constraint("ge", "", -1, -1, ge, Sense::ge, 1.0);
    LinExpr obj;
    obj.add(x, 1.0);
    m.set_objective(obj);
    CHECK(solve(m).status == SolveStatus::infeasible);
}

TEST_CASE("duplicate terms merge") {
    ModelInstance m;
    VarRef x = m.add_variable("x", "", -1, -1, VarDomain::continuous, 0, 10);
    LinExpr e;
    e.add(x, 2.0).add(x, 3.0);
    m.add_constraint("c", "", -1, -1, e, Sense::le, 7.0);
    REQUIRE(m.constraints().size() == 1);
    REQUIRE(m.constraints()[0].terms.size() == 1);
    CHECK(m.constraints()[0].terms[0].second == doctest::Approx(5.0));
}

TEST_CASE("tiny coefficients are dropped and counted") {
    ModelInstance m;
    VarRef x = m.add_variable("x", "", -1, -1, VarDomain::continuous, 0, 10);
    VarRef y = m.add_variable("y", "", -1, -1, VarDomain::continuous, 0, 10);
    LinExpr e;
    e.add(x, 1.0).add(y, 1e-13);
    m.add_constraint("c", "", -1, -1, e, Sense::le, 7.0);
    CHECK(m.constraints()[0].terms.size() == 1);
    CHECK(m.dropped_coefficients() == 1);
}

TEST_CASE("set_objective twice flags the replacement") {
    ModelInstance m;
    VarRef x = m.add_variable("x", "", -1, -1, VarDomain::continuous, 0, 1);
    LinExpr a, b;
    a.add(x, 1.0);
    b.add(x, 2.0);
    m.set_objective(a);
    CHECK_FALSE(m.objective_replaced());
    m.set_objective(b);
    CHECK(m.objective_replaced());
    CHECK(m.objective_terms()[0].second == doctest::Approx(2.0));
}

TEST_CASE("duplicate variable names are rejected") {
    ModelInstance m;
    m.add_variable("x", "a", 0, 0, VarDomain::binary, 0, 1);
    CHECK_THROWS_AS(m.add_variable("x", "a", 0, 0, VarDomain::binary, 0, 1), EngineError);
}

TEST_CASE("relaxation converts binaries and keeps the original") {
    ModelInstance m;
    for (int i = 0; i < 5; ++i)
        m.add_variable("b", std::to_string(i), -1, -1, VarDomain::binary, 0, 1);
    ModelInstance relaxed = m.relax_integrality();
    CHECK(m.num_binaries() == 5);
    CHECK(relaxed.num_binaries() == 0);
    CHECK(relaxed.num_variables() == 5);
    for (const auto& v : relaxed.variables()) {
        CHECK(v.lo == 0.0);
        CHECK(v.hi == 1.0);
    }

    ModelInstance empty;
    CHECK(empty.relax_integrality().num_variables() == 0);
}

TEST_CASE("LP relaxation bounds the MILP from below") {
    // small random-ish covering instance
    SplitMix64 rng(20240809);
    for (int round = 0; round < 5; ++round) {
        ModelInstance m;
        std::vector<VarRef> xs;
        LinExpr obj;
        for (int i = 0; i < 6; ++i) {
            VarRef v = m.add_variable("x", std::to_string(i), -1, -1, VarDomain::binary, 0, 1);
            xs.push_back(v);
            obj.add(v, 1.0 + 9.0 * rng.next_double());
        }
        for (int c = 0; c < 4; ++c) {
            LinExpr e;
            for (int i = 0; i < 6; ++i)
                if (rng.next_below(2)) e.add(xs[static_cast<std::size_t>(i)], 1.0);
            e.add(xs[static_cast<std::size_t>(rng.next_below(6))], 1.0);
            m.add_constraint("cover", std::to_string(c), -1, -1, e, Sense::ge, 1.0);
        }
        m.set_objective(obj);
        SolveResult mip = solve(m);
        SolveResult lp = solve(m.relax_integrality());
        REQUIRE(mip.feasible());
        REQUIRE(lp.feasible());
        CHECK(lp.objective <= mip.objective + 1e-9);
    }
}

TEST_CASE("LP export/import round trip preserves the optimum") {
    ModelInstance m;
    VarRef x = m.add_variable("x", "g1", 2, 0, VarDomain::continuous, 0.5, 9.0);
    VarRef y = m.add_variable("y", "g2", 3, 0, VarDomain::binary, 0, 1);
    VarRef z = m.add_variable("z", "", -1, -1, VarDomain::continuous, -kInf, kInf);
    LinExpr c1;
    c1.add(x, 2.0).add(y, -3.0).add(z, 1.0);
    m.add_constraint("mix", "a", 0, 0, c1, Sense::ge, 1.0);
    LinExpr c2;
    c2.add(z, 1.0);
    m.add_constraint("zlb", "", -1, -1, c2, Sense::ge, -2.0);
    LinExpr obj;
    obj.add(x, 1.0).add(y, 5.0).add(z, 0.25);
    obj.constant = 7.5;
    m.set_objective(obj);

    SolveResult direct = solve(m);
    REQUIRE(direct.feasible());

    std::ostringstream text;
    write_lp(m, text);
    std::istringstream in(text.str());
    ModelInstance back = read_lp(in);
    SolveResult reread = solve(back);
    REQUIRE(reread.feasible());
    CHECK(reread.status == direct.status);
    CHECK(reread.objective == doctest::Approx(direct.objective).epsilon(1e-9));
}

TEST_CASE("gap_limit status honors the requested gap") {
    // MILP with a known integrality gap solved loosely
    ModelInstance m;
    std::vector<VarRef> xs;
    LinExpr obj, cover;
    for (int i = 0; i < 12; ++i) {
        VarRef v = m.add_variable("x", std::to_string(i), -1, -1, VarDomain::binary, 0, 1);
        xs.push_back(v);
        obj.add(v, 1.0 + (i % 4));
        cover.add(v, 1.0 + (i % 3));
    }
    m.add_constraint("c", "", -1, -1, cover, Sense::ge, 7.0);
    m.set_objective(obj);
    SolveOptions opts;
    opts.mip_gap = 0.5;
    SolveResult r = solve(m, opts);
    REQUIRE(r.feasible());
    if (r.status == SolveStatus::gap_limit) CHECK(r.gap() <= 0.5 + 1e-9);
    CHECK(r.best_bound <= r.objective + 1e-9);
}

TEST_CASE("environment variables override solver options") {
    setenv("CEP_MIP_GAP", "0.25", 1);
    setenv("CEP_TIME_LIMIT", "12.5", 1);
    SolveOptions o = SolveOptions::with_env_overrides({});
    CHECK(o.mip_gap == doctest::Approx(0.25));
    REQUIRE(o.time_limit.has_value());
    CHECK(*o.time_limit == doctest::Approx(12.5));
    unsetenv("CEP_MIP_GAP");
    unsetenv("CEP_TIME_LIMIT");
}

TEST_CASE("deterministic registry ordering") {
    auto build = [] {
        ModelInstance m;
        for (int t = 0; t < 4; ++t) m.add_variable("u", "g", t, 0, VarDomain::binary, 0, 1);
        for (int t = 0; t < 4; ++t) {
            LinExpr e;
            e.add(m.require_variable(*m.lookup_key("u", "g", t, 0)), 1.0);
            m.add_constraint("c", "g", t, 0, e, Sense::le, 1.0);
        }
        return m;
    };
    ModelInstance a = build();
    ModelInstance b = build();
    REQUIRE(a.num_variables() == b.num_variables());
    for (std::size_t i = 0; i < a.num_variables(); ++i)
        CHECK(a.render(a.variables()[i].key) == b.render(b.variables()[i].key));
}

TEST_SUITE_END();
