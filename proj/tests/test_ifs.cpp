#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "ruelle/ifs.hpp"

using namespace ruelle;

static const CylinderNode* find_word(const IFSMeasure& m, const std::vector<int>& w) {
    for (const auto& node : m.levels[w.size() - 1])
        if (node.word == w) return &node;
    return nullptr;
}

TEST_CASE("cylinder tables") {
    BranchMap d = make_doubling();

    SECTION("uniform coding reproduces Lebesgue") {
        IFSMeasure m = ifs_measure_cylinders(d, ProbabilityVector::uniform(2), 10);
        for (int depth : {1, 5, 10})
            for (const auto& node : m.levels[depth - 1])
                CHECK(node.mass == Catch::Approx(std::pow(2.0, -depth)).epsilon(1e-12));
    }
    SECTION("masses are entry products") {
        IFSMeasure m = ifs_measure_cylinders(d, {{0.25, 0.75}, 0.0}, 4);
        const CylinderNode* n11 = find_word(m, {1, 1});
        REQUIRE(n11 != nullptr);
        CHECK(n11->mass == Catch::Approx(9.0 / 16.0).margin(1e-15));
    }
    SECTION("gauss cylinders with p_k = mu0(J_k)") {
        BranchMap g = make_gauss(30);
        ProbabilityVector pv = branch_masses(g, Measure::closed_form("gauss_mu0"));
        // validate with a loose sum tolerance because of the truncation tail
        IFSMeasure m = ifs_measure_cylinders(g, pv, 2);
        const CylinderNode* n11 = find_word(m, {1, 1});
        REQUIRE(n11 != nullptr);
        double p1 = std::log(4.0 / 3.0) / std::numbers::ln2;
        CHECK(n11->mass == Catch::Approx(p1 * p1).margin(1e-12));
        // the product differs from mu0 of the same cylinder (non-IFS witness)
        double mu_val = Measure::closed_form("gauss_mu0").interval_mass(n11->cell);
        CHECK(std::abs(mu_val - n11->mass) > 0.01);
    }
    SECTION("Kolmogorov consistency: children sum to the parent") {
        IFSMeasure m = ifs_measure_cylinders(d, {{0.3, 0.7}, 0.0}, 8);
        for (std::size_t lvl = 1; lvl < m.levels.size(); ++lvl) {
            const auto& parents = m.levels[lvl - 1];
            const auto& children = m.levels[lvl];
            for (std::size_t p = 0; p < parents.size(); ++p) {
                double s = 0.0;
                for (std::size_t c = 2 * p; c < 2 * p + 2; ++c) s += children[c].mass;
                CHECK(s == Catch::Approx(parents[p].mass).margin(1e-12));
            }
        }
    }
    SECTION("induced histogram is sigma-invariant at resolution") {
        // pushing a depth-m table forward gives the depth-(m-1) table, so the
        // two binned histograms agree within the cylinder diameter
        IFSMeasure m = ifs_measure_cylinders(d, {{0.25, 0.75}, 0.0}, 12);
        int n = 1024;
        Measure h_m = induced_histogram(m, 12, n);
        Measure h_prev = induced_histogram(m, 11, n);
        double tol = 2.0 * m.max_cylinder_diameter() + 1e-10;
        CHECK(linf_distance(h_m, h_prev) <= tol);
    }
    SECTION("size limit") {
        BranchMap g = make_gauss(100);
        CHECK_THROWS_AS(ifs_measure_cylinders(g, branch_masses(g, Measure::closed_form("gauss_mu0")), 5),
                        size_limit_error);
    }
}

TEST_CASE("chaos game") {
    BranchMap d = make_doubling();

    SECTION("CLT band for the uniform coding") {
        IFSMeasure m = chaos_game(d, ProbabilityVector::uniform(2), 1000000, 100, 42);
        double freq = empirical_interval_mass(m, {0.0, 0.5});
        CHECK(std::abs(freq - 0.5) <= 0.002);
    }
    SECTION("cylinder frequencies within 4 sigma") {
        ProbabilityVector pv{{0.3, 0.7}, 0.0};
        IFSMeasure m = chaos_game(d, pv, 200000, 100, 7);
        for (const std::vector<int>& w : {std::vector<int>{0, 1}, {1, 1}, {0, 0, 1}}) {
            double target = 1.0;
            for (int k : w) target *= pv.p[k];
            Interval cell = decode(d, SymbolWord{w});
            double band = 4.0 * std::sqrt(target * (1.0 - target) / m.samples.size());
            CHECK(std::abs(empirical_interval_mass(m, cell) - target) <= band);
        }
    }
    SECTION("degenerate vector contracts to the tau_0 fixed point") {
        IFSMeasure m = chaos_game(d, {{1.0, 0.0}, 0.0}, 10, 200, 1);
        for (double x : m.samples) CHECK(x <= 1e-30);
    }
    SECTION("fixed seed gives a bitwise-identical stream") {
        IFSMeasure a = chaos_game(d, {{0.4, 0.6}, 0.0}, 5000, 10, 99);
        IFSMeasure b = chaos_game(d, {{0.4, 0.6}, 0.0}, 5000, 10, 99);
        CHECK(a.samples == b.samples);
    }
}

TEST_CASE("extract_pk") {
    SECTION("doubling with Lebesgue: both formulas give 1/2") {
        BranchMap d = make_doubling();
        PkExtraction e = extract_pk(d, Measure::closed_form("lebesgue"), 0);
        CHECK(e.ratio == Catch::Approx(0.5).margin(1e-10));
        CHECK(e.mu_Jk == Catch::Approx(0.5).margin(1e-14));
        PkExtraction e1 = extract_pk(d, Measure::closed_form("lebesgue"), 1);
        CHECK(e.ratio + e1.ratio == Catch::Approx(1.0).margin(1e-10));
    }
    SECTION("gauss mu0 branch masses match the closed form") {
        BranchMap g = make_gauss(500);
        Measure mu0 = Measure::closed_form("gauss_mu0");
        PkExtraction e = extract_pk(g, mu0, 1);
        CHECK(e.mu_Jk == Catch::Approx(std::log(4.0 / 3.0) / std::numbers::ln2).margin(1e-12));
        // mu0 is invariant but not IFS: the moment ratio differs from mu0(J_1)
        CHECK(std::abs(e.ratio - e.mu_Jk) > 0.02);
    }
    SECTION("ratios over all branches sum to 1 by invariance") {
        BranchMap g = make_gauss(4000);
        Measure mu0 = Measure::closed_form("gauss_mu0");
        double s = 0.0;
        for (int k = 1; k <= 4000; ++k) {
            const Branch& b = g.branch(k);
            s += integrate_on_branch(g, mu0, k, [&](double x) { return b.forward(x); });
        }
        double denom = integrate_against(mu0, [](double x) { return x; });
        CHECK(s / denom == Catch::Approx(1.0).margin(1e-3)); // truncation tail remains
    }
    SECTION("degenerate measure is rejected") {
        BranchMap d = make_doubling();
        CHECK_THROWS_AS(extract_pk(d, Measure::dirac(0.0), 0), std::invalid_argument);
    }
}

TEST_CASE("moment invariance test") {
    SECTION("doubling with Lebesgue passes at machine precision") {
        MomentReport rep = moment_invariance_test(make_doubling(), Measure::closed_form("lebesgue"), 6);
        CHECK(rep.max_relative <= 1e-10);
    }
    SECTION("m = 1 rows are tautologically zero") {
        MomentReport rep =
            moment_invariance_test(make_gauss(100), Measure::closed_form("gauss_mu0"), 3);
        for (const auto& row : rep.rows)
            if (row.m == 1) CHECK(row.relative <= 1e-12);
    }
    SECTION("gauss mu0 violates the condition (not an IFS measure)") {
        MomentReport rep =
            moment_invariance_test(make_gauss(100), Measure::closed_form("gauss_mu0"), 4);
        CHECK(rep.max_relative > 1e-3);
    }
}

TEST_CASE("ifs_test") {
    SECTION("gauss mu0 is not an IFS measure; witness (1,1)") {
        BranchMap g = make_gauss(400);
        IFSTestResult res = ifs_test(g, Measure::closed_form("gauss_mu0"), 2);
        REQUIRE_FALSE(res.is_ifs);
        CHECK(res.witness == std::vector<int>{1, 1});
        CHECK(res.witness_mu_value ==
              Catch::Approx(std::log(10.0 / 9.0) / std::numbers::ln2).margin(1e-12));
        double p1 = std::log(4.0 / 3.0) / std::numbers::ln2;
        CHECK(res.witness_product_value == Catch::Approx(p1 * p1).margin(1e-9));
        CHECK(res.gap > 0.01);
    }
    SECTION("doubling with Lebesgue is IFS with p = (1/2, 1/2)") {
        IFSTestResult res = ifs_test(make_doubling(), Measure::closed_form("lebesgue"), 8);
        CHECK(res.is_ifs);
        CHECK(res.p.p[0] == Catch::Approx(0.5).margin(1e-12));
        CHECK(res.p.p[1] == Catch::Approx(0.5).margin(1e-12));
    }
    SECTION("binned cylinder measure passes its own test") {
        BranchMap d = make_doubling();
        IFSMeasure m = ifs_measure_cylinders(d, {{0.25, 0.75}, 0.0}, 12);
        Measure hist = induced_histogram(m, 12, 4096);
        IFSTestResult res = ifs_test(d, hist, 3);
        CHECK(res.is_ifs);
        CHECK(res.p.p[0] == Catch::Approx(0.25).margin(1e-9));
    }
}
