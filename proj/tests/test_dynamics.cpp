#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "ruelle/branch_map.hpp"

using namespace ruelle;

TEST_CASE("doubling map branches and inverses") {
    BranchMap m = make_doubling();
    REQUIRE(m.branch_count() == 2);
    CHECK(m.tau(0, 0.6) == Catch::Approx(0.3).margin(1e-15));
    CHECK(m.sigma(0.3) == Catch::Approx(0.6).margin(1e-15));
    CHECK(m.sigma(m.tau(1, 0.6)) == Catch::Approx(0.6).margin(1e-15));
    CHECK(m.branch(0).J.lo == 0.0);
    CHECK(m.branch(0).J.hi == 0.5);
}

TEST_CASE("gauss map branches and inverses") {
    BranchMap m = make_gauss(50);
    CHECK(m.tau(2, 0.5) == Catch::Approx(0.4).margin(1e-15));
    CHECK(m.sigma(0.4) == Catch::Approx(0.5).margin(1e-12));
    // J_1 = (1/2, 1]
    CHECK(m.branch(1).J.lo == Catch::Approx(0.5));
    CHECK(m.branch(1).J.hi == Catch::Approx(1.0));
    CHECK(m.branch_of(0.75) == 1);
    CHECK(m.tail_mass_bound() == Catch::Approx(1.0 / 51));
    CHECK_THROWS_AS(make_gauss(0), std::invalid_argument);
    CHECK_THROWS_AS(m.branch_of(1e-6), tail_escape_error);
}

TEST_CASE("inverse-branch identity on quasi-random samples") {
    for (const char* label : {"doubling", "gauss"}) {
        BranchMap m = make_map_by_label(label, 30);
        for (const auto& b : m.branches()) {
            double worst = 0.0;
            for (double x : golden_samples(1000))
                worst = std::max(worst, std::abs(b.forward(b.inverse(x)) - x));
            INFO(label << " branch " << b.label);
            CHECK(worst <= 1e-12);
        }
    }
}

TEST_CASE("tau_k lands inside its branch interval") {
    BranchMap m = make_gauss(20);
    for (const auto& b : m.branches())
        for (double x : golden_samples(200)) {
            double y = b.inverse(x);
            CHECK(b.J.lo <= y);
            CHECK(y <= b.J.hi + 1e-15);
        }
}

TEST_CASE("encode recovers binary digits / continued fractions") {
    BranchMap d = make_doubling();
    SymbolWord w = encode(d, 0.3, 3);
    CHECK(w.symbols == std::vector<int>{0, 1, 0});

    BranchMap g = make_gauss(10);
    SymbolWord cf = encode(g, std::sqrt(2.0) - 1.0, 3);
    CHECK(cf.symbols == std::vector<int>{2, 2, 2});

    // first symbol is the branch containing x
    CHECK(encode(d, 0.7, 1).symbols == std::vector<int>{1});
    CHECK(encode(g, 0.7, 1).symbols == std::vector<int>{1});
}

TEST_CASE("encode reports the escaping step for truncated maps") {
    BranchMap g = make_gauss(2);
    // sigma(x) falls below 1/3 after one step for x = 1/(1 + 0.2)
    double x = 1.0 / (1.0 + 0.2); // sigma(x) = 0.2 < 1/3
    try {
        encode(g, x, 3);
        FAIL("expected tail escape");
    } catch (const tail_escape_error& e) {
        CHECK(e.step() == 1);
    }
}

TEST_CASE("decode composes inverse branches, nested in prefixes") {
    BranchMap d = make_doubling();
    Interval i01 = decode(d, {{0, 1}});
    CHECK(i01.lo == Catch::Approx(0.25));
    CHECK(i01.hi == Catch::Approx(0.5));

    Interval full = decode(d, {});
    CHECK(full.lo == 0.0);
    CHECK(full.hi == 1.0);

    BranchMap g = make_gauss(5);
    Interval i11 = decode(g, {{1, 1}});
    // endpoints {tau_1 tau_1 (0), tau_1 tau_1 (1)} = {1/2, 2/3}
    CHECK(i11.lo == Catch::Approx(0.5));
    CHECK(i11.hi == Catch::Approx(2.0 / 3.0));

    // nesting in the prefix interval
    Interval pre = decode(g, {{1}});
    CHECK(pre.lo <= i11.lo);
    CHECK(i11.hi <= pre.hi + 1e-15);
}

TEST_CASE("decode length is exactly 2^-m for the doubling map") {
    BranchMap d = make_doubling();
    SymbolWord w;
    for (int m = 1; m <= 20; ++m) {
        w.symbols.push_back(m % 2);
        CHECK(decode(d, w).length() == Catch::Approx(std::pow(2.0, -m)).epsilon(1e-12));
    }
}

TEST_CASE("encode/decode consistency: x lies in its own cylinder") {
    for (const char* label : {"doubling", "gauss"}) {
        BranchMap m = make_map_by_label(label, 5000);
        for (double x : golden_samples(100)) {
            for (int depth : {1, 5, 12, 20}) {
                SymbolWord w;
                try {
                    w = encode(m, x, depth);
                } catch (const tail_escape_error&) {
                    continue;
                }
                Interval c = decode(m, w);
                CHECK(c.lo - 1e-12 <= x);
                CHECK(x <= c.hi + 1e-12);
            }
        }
    }
}

TEST_CASE("solenoid lift and drop") {
    BranchMap d = make_doubling();
    SolenoidPoint p = make_solenoid_point(d, 0.3, {{1}});
    SolenoidPoint q = solenoid_lift(d, p);
    CHECK(q.base() == Catch::Approx(0.6).margin(1e-15));
    CHECK(q.labels == std::vector<int>{0, 1});

    SolenoidPoint back = solenoid_drop(q);
    REQUIRE(back.coords.size() == p.coords.size());
    for (std::size_t i = 0; i < p.coords.size(); ++i)
        CHECK(back.coords[i] == p.coords[i]); // exact: drop removes the new coordinate

    SolenoidPoint root = make_solenoid_point(d, 0.3, {});
    CHECK_THROWS_AS(solenoid_drop(root), history_exhausted_error);
}

TEST_CASE("solenoid relation holds at every level after repeated lifts") {
    // forward orbits must stay inside the covered branches: any point works
    // for the doubling map, sqrt(2)-1 = [2,2,2,...] for the truncated Gauss map
    for (auto [label, base] : {std::pair<const char*, double>{"doubling", 0.37},
                               {"gauss", std::sqrt(2.0) - 1.0}}) {
        BranchMap m = make_map_by_label(label, 500);
        SolenoidPoint p = make_solenoid_point(m, base, {});
        for (int i = 0; i < 8; ++i) p = solenoid_lift(m, p);
        CHECK(solenoid_residual(m, p) <= 1e-12);
        CHECK(p.depth() == 8);
    }
}

TEST_CASE("two-component map is a pair of doubling copies") {
    BranchMap m = make_two_component();
    for (double x : golden_samples(200)) {
        double y = m.sigma(x);
        CHECK((x < 0.5) == (y < 0.5)); // components invariant
    }
    for (const auto& b : m.branches())
        for (double x : golden_samples(100)) {
            if (!b.range.contains(x)) continue;
            CHECK(std::abs(b.forward(b.inverse(x)) - x) <= 1e-12);
        }
}
