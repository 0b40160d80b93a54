#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "ruelle/hilbert.hpp"
#include "ruelle/ifs.hpp"
#include "ruelle/markov.hpp"
#include "ruelle/measure.hpp"
#include "ruelle/transfer_operator.hpp"
#include "ruelle/ulam.hpp"

namespace ruelle {

struct Check {
    std::string name;
    bool pass = false;
    double residual = 0.0;
};

// Desk-scale run of every module's invariants; the CLI verify-all command
// aggregates this list.
inline std::vector<Check> run_verify_all() {
    std::vector<Check> checks;
    auto add = [&](const std::string& name, double residual, double tol) {
        checks.push_back({name, residual <= tol, residual});
    };
    using std::numbers::pi;

    // dynamics
    {
        double worst = 0.0;
        for (const char* label : {"doubling", "gauss"}) {
            BranchMap m = make_map_by_label(label, 50);
            for (const auto& b : m.branches())
                for (double x : golden_samples(200))
                    worst = std::max(worst, std::abs(b.forward(b.inverse(x)) - x));
        }
        add("dynamics.inverse_branch_identity", worst, 1e-12);

        BranchMap d = make_doubling();
        double enc = 0.0;
        for (double x : golden_samples(50))
            for (int depth : {5, 15}) {
                Interval c = decode(d, encode(d, x, depth));
                enc = std::max(enc, std::max(c.lo - x, x - c.hi));
            }
        add("dynamics.encode_decode_consistency", enc, 1e-12);

        SolenoidPoint p = make_solenoid_point(d, 0.37, {});
        for (int i = 0; i < 6; ++i) p = solenoid_lift(d, p);
        add("dynamics.solenoid_relation", solenoid_residual(d, p), 1e-12);
    }

    // transferop
    {
        auto f = [](double y) { return std::sin(2 * pi * y); };
        auto g = [](double y) { return y * y; };
        add("transferop.pullout_half", check_pullout(make_operator("doubling", "half"), f, g, 400),
            1e-10);
        add("transferop.pullout_cos2", check_pullout(make_operator("doubling", "cos2"), f, g, 400),
            1e-10);
        add("transferop.pullout_gauss",
            check_pullout(make_operator("gauss", "gauss-norm", 60), f, g, 400), 1e-10);

        TransferOperator R = make_operator("doubling", "half");
        auto probe = [](double y) { return y + 0.3 * std::sin(2 * pi * y); };
        auto [f0, fbar] = kernel_decompose(R, probe);
        double kd = 0.0;
        for (double x : golden_samples(200)) kd = std::max(kd, std::abs(R.apply(f0, x)));
        add("transferop.kernel_decomposition", kd, 1e-10);

        auto E1 = expectation_E(R, probe);
        auto E2 = expectation_E(R, E1);
        double idem = 0.0;
        for (double x : golden_samples(200)) idem = std::max(idem, std::abs(E2(x) - E1(x)));
        add("transferop.E_idempotent", idem, 1e-10);

        auto k = [](double y) { return 1.0 + y; };
        auto h = [](double y) { return 2.0 + std::sin(2 * pi * y); };
        TransferOperator a = doob(doob(R, k), h);
        TransferOperator b = doob(R, [&](double y) { return k(y) * h(y); });
        double dres = 0.0;
        for (double y : golden_samples(200)) dres = std::max(dres, std::abs(a.weight(y) - b.weight(y)));
        add("transferop.doob_composition", dres, 1e-12);

        add("transferop.cocycle_identity",
            cocycle_check(R, [](double) { return 1.0; }, 3, 100), 1e-12);
    }

    // measures
    {
        Table1Report rep = verify_table1(512);
        double worst = 0.0;
        bool pass = true;
        for (const auto& c : rep.cells) {
            worst = std::max(worst, c.residual);
            pass = pass && c.pass;
        }
        checks.push_back({"measures.table1", pass, worst});

        UlamMatrix M = ulam_matrix(make_operator("doubling", "cos2"), 256);
        double cs = 0.0;
        for (double s : M.column_sums()) cs = std::max(cs, std::abs(s - 1.0));
        add("measures.ulam_column_sums", cs, 1e-10);

        auto inv = invariant_density(M, 1e-12, 4000);
        add("measures.invariant_density_residual", inv.residual, 1e-12);

        TransferOperator G = make_operator("gauss", "gauss-norm", 2000);
        auto ginv = invariant_density(ulam_matrix(G, 256), 1e-12, 2000);
        double gsup = 0.0;
        for (int i = 0; i < 256; ++i) {
            double x = FunctionOnGrid::midpoint(256, i);
            gsup = std::max(gsup,
                            std::abs(ginv.density.cells[i] * 256 - 1.0 / ((1.0 + x) * std::numbers::ln2)));
        }
        add("measures.gauss_density_desk", gsup, 0.02);

        const int N = 300000;
        double s = 0.0;
        for (int i = 0; i < N; ++i) s += riesz_partial_density(6, (i + 0.5) * 2.0 * pi / N);
        add("measures.riesz_partial_mass", std::abs(s * 2.0 * pi / N - 1.0), 1e-8);
    }

    // ifs
    {
        BranchMap d = make_doubling();
        IFSMeasure table = ifs_measure_cylinders(d, {{0.3, 0.7}, 0.0}, 8);
        double cons = 0.0;
        for (std::size_t lvl = 1; lvl < table.levels.size(); ++lvl)
            for (std::size_t p = 0; p < table.levels[lvl - 1].size(); ++p) {
                double sum = table.levels[lvl][2 * p].mass + table.levels[lvl][2 * p + 1].mass;
                cons = std::max(cons, std::abs(sum - table.levels[lvl - 1][p].mass));
            }
        add("ifs.cylinder_consistency", cons, 1e-12);

        IFSMeasure cg = chaos_game(d, ProbabilityVector::uniform(2), 100000, 100, 17);
        add("ifs.chaos_game_clt", std::abs(empirical_interval_mass(cg, {0.0, 0.5}) - 0.5), 0.0063);

        PkExtraction e = extract_pk(d, Measure::closed_form("lebesgue"), 0);
        add("ifs.extract_pk_doubling",
            std::max(std::abs(e.ratio - 0.5), std::abs(e.mu_Jk - 0.5)), 1e-10);

        IFSTestResult res = ifs_test(make_gauss(400), Measure::closed_form("gauss_mu0"), 2);
        checks.push_back({"ifs.gauss_not_ifs_witness",
                          !res.is_ifs && res.witness == std::vector<int>{1, 1} && res.gap > 0.01,
                          res.gap});

        MomentReport mr = moment_invariance_test(d, Measure::closed_form("lebesgue"), 5);
        add("ifs.moment_condition_lebesgue", mr.max_relative, 1e-10);
    }

    // hilbert
    {
        KoopmanSystem K(make_doubling(), Measure::lebesgue_histogram(64));
        std::vector<double> f = golden_samples(64), g = golden_samples(64, 0.2);
        double iso = std::abs(K.inner(K.apply_S(f, 64), 128, K.apply_S(g, 64), 128) -
                              K.inner(f, 64, g, 64));
        add("hilbert.koopman_isometry", iso, 1e-10);

        WoldResult w = wold(K, 6);
        checks.push_back({"hilbert.wold_unitary_part_trivial", w.h_inf_dim == 1,
                          static_cast<double>(w.h_inf_dim)});
        add("hilbert.wold_layer_orthogonality", w.layer_orthogonality_residual, 1e-8);

        TransferOperator R = make_operator("doubling", "cos2");
        Measure mu = Measure::atomic({{0.15, 0.5}, {0.45, 0.5}});
        HilbertPair a = make_pair({1.0, 2.0}, mu);
        HilbertPair sa = uhs_S(R, a);
        add("hilbert.uhs_isometry", std::abs(uhs_norm2(sa) - uhs_norm2(a)), 1e-12);
        HilbertPair back = uhs_R(R, sa, true);
        double rs = linf_distance(back.mu, mu);
        for (std::size_t i = 0; i < back.f.size(); ++i)
            rs = std::max(rs, std::abs(back.f[i] - a.f[i]));
        add("hilbert.uhs_RS_identity", rs, 1e-12);

        std::vector<double> mu1{0.3, 0.2, 0.5};
        std::vector<double> P{0.2, 0.5, 0.3, 0.1, 0.6, 0.3, 0.7, 0.2, 0.1};
        std::vector<double> P2 = coupling_to_operator(operator_to_coupling(P, mu1));
        double cres = 0.0;
        for (std::size_t i = 0; i < P.size(); ++i) cres = std::max(cres, std::abs(P2[i] - P[i]));
        add("hilbert.coupling_roundtrip", cres, 1e-12);
    }

    // markov
    {
        TransferOperator R = make_operator("doubling", "cos2");
        RieszFamily F = riesz_family(R);
        double krec = 0.0;
        auto probe = [](double y) { return 1.0 + y * y; };
        for (double x : golden_samples(100)) {
            double s = 0.0;
            for (const auto& at : F.kernel(x).atoms) s += at.mass * probe(at.x);
            krec = std::max(krec, std::abs(s - R.apply(probe, x)));
        }
        add("markov.kernel_reconstruction", krec, 1e-14);

        PathSample p = sample_path(riesz_family(make_operator("doubling", "half")), 0.37, 500, 5);
        add("markov.path_solenoid_relation", solenoid_step_residual(make_doubling(), p), 1e-12);

        MarkovPropertyReport mrep = markov_property_test(
            riesz_family(make_operator("doubling", "half")), [](double y) { return y; }, 20000, 10);
        add("markov.conditional_mean_4sigma", mrep.max_abs_z, 4.0);

        int n = 64;
        std::vector<int> fibers(n);
        for (int i = 0; i < n; ++i) fibers[i] = i % 8;
        FiberedOperator FO = FiberedOperator::uniform_base(fibers, std::vector<double>(n, 1.0));
        std::vector<double> h(n);
        for (int i = 0; i < n; ++i) h[i] = 1.0 + fibers[i];
        std::vector<double> out = FO.apply(h);
        double fres = 0.0;
        for (int i = 0; i < n; ++i) fres = std::max(fres, std::abs(out[i] - h[i]));
        add("markov.fibered_harmonic", fres, 1e-12);

        ParryResult pr = parry_jacobian(make_doubling(), Measure::lebesgue_histogram(256));
        add("markov.parry_identity", pr.identity_residual, 5.0 / 256);
    }

    return checks;
}

} // namespace ruelle
