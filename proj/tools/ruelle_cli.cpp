// ruelle-lab command line: reproducible transfer-operator computations with
// machine-readable artifacts. Every run writes a manifest.json holding the
// resolved configuration, the produced files and the executed checks.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ruelle/hilbert.hpp"
#include "ruelle/ifs.hpp"
#include "ruelle/io.hpp"
#include "ruelle/markov.hpp"
#include "ruelle/measure.hpp"
#include "ruelle/transfer_operator.hpp"
#include "ruelle/ulam.hpp"
#include "ruelle/verify.hpp"

namespace fs = std::filesystem;
using namespace ruelle;
using std::numbers::pi;

namespace {

struct RunConfig {
    std::string command;
    std::string map = "doubling";
    std::string weight; // empty: resolved from the map
    std::string measure = "lebesgue";
    std::string p = "uniform";
    std::string format = "csv";
    std::string out = "out";
    std::string x0_mode = "point";
    int n = 256;
    int kmax = 100;
    int depth = 6;
    int mmax = 4;
    int branch_k = 0;
    int samples = 100000;
    int burn_in = 100;
    int paths = 20000;
    int steps = 20;
    int trials = 100;
    int size = 5;
    int max_iter = 20000;
    int threads = 1;
    double x0 = 0.37;
    double tol = 1e-12;
    std::uint64_t seed = 2024;

    std::string resolved_weight() const {
        if (!weight.empty()) return weight;
        if (map == "gauss") return "gauss-norm";
        return "half";
    }

    json to_json() const {
        json j;
        j["command"] = command;
        j["map"] = map;
        j["weight"] = resolved_weight();
        j["measure"] = measure;
        j["p"] = p;
        j["format"] = format;
        j["out"] = out;
        j["n"] = n;
        j["kmax"] = kmax;
        j["depth"] = depth;
        j["mmax"] = mmax;
        j["k"] = branch_k;
        j["samples"] = samples;
        j["burn_in"] = burn_in;
        j["paths"] = paths;
        j["steps"] = steps;
        j["trials"] = trials;
        j["size"] = size;
        j["max_iter"] = max_iter;
        j["threads"] = threads;
        j["x0"] = x0;
        j["x0_mode"] = x0_mode;
        j["tol"] = tol;
        j["seed"] = seed;
        j["rng"] = CounterRng::name();
        return j;
    }
};

struct Artifacts {
    std::vector<std::string> outputs;
    std::vector<Check> checks;

    void check(const std::string& name, bool pass, double residual) {
        checks.push_back({name, pass, residual});
    }
    bool all_pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
};

Measure resolve_measure(const RunConfig& cfg) {
    if (cfg.measure == "lebesgue") return Measure::closed_form("lebesgue");
    if (cfg.measure == "mu0") return Measure::closed_form("gauss_mu0");
    throw std::invalid_argument("unknown measure label: " + cfg.measure +
                                " (expected lebesgue or mu0)");
}

ProbabilityVector resolve_p(const RunConfig& cfg, const BranchMap& map) {
    if (cfg.p == "uniform") return ProbabilityVector::uniform(map.branch_count());
    if (cfg.p == "mu0") return branch_masses(map, Measure::closed_form("gauss_mu0"));
    ProbabilityVector pv;
    std::stringstream ss(cfg.p);
    std::string item;
    while (std::getline(ss, item, ',')) pv.p.push_back(std::stod(item));
    if (static_cast<int>(pv.p.size()) != map.branch_count())
        throw std::invalid_argument("probability vector has " + std::to_string(pv.p.size()) +
                                    " entries for " + std::to_string(map.branch_count()) +
                                    " branches");
    return pv;
}

void write_manifest(const RunConfig& cfg, const Artifacts& art) {
    json j;
    j["config"] = cfg.to_json();
    j["outputs"] = art.outputs;
    json checks = json::array();
    for (const auto& c : art.checks) {
        json e;
        e["name"] = c.name;
        e["pass"] = c.pass;
        e["residual"] = c.residual;
        checks.push_back(std::move(e));
    }
    j["checks"] = std::move(checks);
    fs::path path = fs::path(cfg.out) / "manifest.json";
    write_json(path, j);
}

// ---------------------------------------------------------------------------

Artifacts cmd_table1(const RunConfig& cfg) {
    Artifacts art;
    Table1Report rep = verify_table1(cfg.n);
    json j = json::array();
    for (const auto& c : rep.cells) {
        json e;
        e["cell"] = c.name;
        e["pass"] = c.pass;
        e["residual"] = c.residual;
        e["note"] = c.note;
        j.push_back(std::move(e));
        art.check("table1." + c.name, c.pass, c.residual);
    }
    fs::path path = fs::path(cfg.out) / "table1.json";
    write_json(path, j);
    art.outputs.push_back(path.string());
    return art;
}

Artifacts cmd_invariant_density(const RunConfig& cfg) {
    Artifacts art;
    TransferOperator R = make_operator(cfg.map, cfg.resolved_weight(), cfg.kmax);
    UlamMatrix M = ulam_matrix(R, cfg.n);
    auto res = invariant_density(M, cfg.tol, cfg.max_iter);

    bool gauss = cfg.map == "gauss";
    fs::path path = fs::path(cfg.out) / "density.csv";
    std::vector<std::string> header{"x_midpoint", "density"};
    if (gauss) {
        header.push_back("closed_form");
        header.push_back("deviation");
    }
    CsvWriter csv(path, header);
    double sup_dev = 0.0;
    for (int i = 0; i < cfg.n; ++i) {
        double x = FunctionOnGrid::midpoint(cfg.n, i);
        double d = res.density.cells[i] * cfg.n;
        if (gauss) {
            double ref = 1.0 / ((1.0 + x) * std::numbers::ln2);
            sup_dev = std::max(sup_dev, std::abs(d - ref));
            csv.row({x, d, ref, d - ref});
        } else {
            csv.row({x, d});
        }
    }
    art.outputs.push_back(path.string());
    art.check("power_iteration_converged", true, res.residual);
    art.check("spectral_gap_unique", res.unique, res.lambda2);
    if (gauss) art.check("matches_gauss_measure", sup_dev <= 0.01, sup_dev);
    return art;
}

Artifacts cmd_radon_nikodym(const RunConfig& cfg) {
    Artifacts art;
    TransferOperator R = make_operator(cfg.map, cfg.resolved_weight(), cfg.kmax);
    FunctionOnGrid W = radon_nikodym(R, Measure::lebesgue_histogram(cfg.n));
    fs::path path = fs::path(cfg.out) / "radon_nikodym.csv";
    CsvWriter csv(path, {"x_midpoint", "density"});
    for (int i = 0; i < cfg.n; ++i) csv.row({W.midpoint(i), W[i]});
    art.outputs.push_back(path.string());
    art.check("computed", true, 0.0);
    return art;
}

Artifacts cmd_ifs_measure(const RunConfig& cfg) {
    Artifacts art;
    BranchMap map = make_map_by_label(cfg.map, cfg.kmax);
    IFSMeasure m = ifs_measure_cylinders(map, resolve_p(cfg, map), cfg.depth);
    fs::path path = fs::path(cfg.out) / "cylinders.json";
    write_json(path, cylinder_table_to_json(m));
    art.outputs.push_back(path.string());

    double cons = 0.0;
    int b = map.branch_count();
    for (std::size_t lvl = 1; lvl < m.levels.size(); ++lvl)
        for (std::size_t p = 0; p < m.levels[lvl - 1].size(); ++p) {
            double s = 0.0;
            for (int c = 0; c < b; ++c) s += m.levels[lvl][p * b + c].mass;
            cons = std::max(cons, std::abs(s - m.levels[lvl - 1][p].mass));
        }
    art.check("kolmogorov_consistency", cons <= 1e-12 + map.tail_mass_bound(), cons);
    return art;
}

Artifacts cmd_chaos_game(const RunConfig& cfg) {
    Artifacts art;
    BranchMap map = make_map_by_label(cfg.map, cfg.kmax);
    IFSMeasure m = chaos_game(map, resolve_p(cfg, map), cfg.samples, cfg.burn_in, cfg.seed);
    fs::path bin = fs::path(cfg.out) / "samples.f64le";
    write_samples_binary(bin, m.samples);
    art.outputs.push_back(bin.string());
    json meta;
    meta["seed"] = m.seed;
    meta["burn_in"] = m.burn_in;
    meta["count"] = m.samples.size();
    meta["rng"] = CounterRng::name();
    fs::path mpath = fs::path(cfg.out) / "samples.json";
    write_json(mpath, meta);
    art.outputs.push_back(mpath.string());
    art.check("sampled", true, 0.0);
    return art;
}

Artifacts cmd_extract_pk(const RunConfig& cfg) {
    Artifacts art;
    BranchMap map = make_map_by_label(cfg.map, cfg.kmax);
    int label = cfg.branch_k;
    PkExtraction e = extract_pk(map, resolve_measure(cfg), label);
    json j;
    j["k"] = label;
    j["ratio"] = e.ratio;
    j["mu_Jk"] = e.mu_Jk;
    j["difference"] = e.ratio - e.mu_Jk;
    fs::path path = fs::path(cfg.out) / "extract_pk.json";
    write_json(path, j);
    art.outputs.push_back(path.string());
    art.check("computed", true, std::abs(e.ratio - e.mu_Jk));
    return art;
}

Artifacts cmd_ifs_test(const RunConfig& cfg) {
    Artifacts art;
    BranchMap map = make_map_by_label(cfg.map, cfg.kmax);
    IFSTestResult res = ifs_test(map, resolve_measure(cfg), cfg.depth);
    json j;
    j["verdict"] = res.is_ifs ? "IS_IFS" : "NOT_IFS";
    j["p"] = res.p.p;
    if (!res.is_ifs) {
        j["witness"] = res.witness;
        j["mu_value"] = res.witness_mu_value;
        j["product_value"] = res.witness_product_value;
        j["gap"] = res.gap;
    }
    fs::path path = fs::path(cfg.out) / "ifs_test.json";
    write_json(path, j);
    art.outputs.push_back(path.string());
    art.check("decided", true, res.gap);
    std::cout << (res.is_ifs ? "IS_IFS" : "NOT_IFS") << "\n";
    return art;
}

Artifacts cmd_moment_test(const RunConfig& cfg) {
    Artifacts art;
    BranchMap map = make_map_by_label(cfg.map, cfg.kmax);
    MomentReport rep = moment_invariance_test(map, resolve_measure(cfg), cfg.mmax);
    json j;
    j["max_relative"] = rep.max_relative;
    j["argmax_k"] = rep.argmax.k;
    j["argmax_m"] = rep.argmax.m;
    json rows = json::array();
    for (const auto& r : rep.rows) rows.push_back({r.k, r.m, r.relative});
    j["rows"] = std::move(rows);
    fs::path path = fs::path(cfg.out) / "moment_test.json";
    write_json(path, j);
    art.outputs.push_back(path.string());
    art.check("computed", true, rep.max_relative);
    return art;
}

Artifacts cmd_wold(const RunConfig& cfg) {
    Artifacts art;
    KoopmanSystem K(make_map_by_label(cfg.map, cfg.kmax), Measure::lebesgue_histogram(cfg.n));
    WoldResult w = wold(K, cfg.depth);
    // identity probe: its projection norms decay geometrically at every
    // depth for exact maps (dyadic indicators are annihilated after finitely
    // many steps and make a dull artifact)
    std::vector<double> f(cfg.n);
    for (int i = 0; i < cfg.n; ++i) f[i] = FunctionOnGrid::midpoint(cfg.n, i);
    std::vector<double> scores = exactness_score(K, f, cfg.depth);

    fs::path path = fs::path(cfg.out) / "wold.csv";
    CsvWriter csv(path, {"n", "En_f_minus_mean", "dim_shift_layer"});
    for (int d = 1; d <= cfg.depth; ++d)
        csv.row({static_cast<double>(d), scores[d - 1], static_cast<double>(w.layer_dims[d - 1])});
    art.outputs.push_back(path.string());

    art.check("idempotency", w.idempotency_residual <= 1e-8, w.idempotency_residual);
    art.check("monotone_projections", w.monotonicity_residual <= 1e-8, w.monotonicity_residual);
    art.check("layer_orthogonality", w.layer_orthogonality_residual <= 1e-8,
              w.layer_orthogonality_residual);
    json j;
    j["h_inf_dim"] = w.h_inf_dim;
    j["wandering_dim"] = w.wandering_basis.size();
    fs::path jpath = fs::path(cfg.out) / "wold.json";
    write_json(jpath, j);
    art.outputs.push_back(jpath.string());
    return art;
}

Artifacts cmd_exactness(const RunConfig& cfg) {
    Artifacts art;
    KoopmanSystem K(make_map_by_label(cfg.map, cfg.kmax), Measure::lebesgue_histogram(cfg.n));
    std::vector<double> f(cfg.n);
    for (int i = 0; i < cfg.n; ++i) f[i] = FunctionOnGrid::midpoint(cfg.n, i);
    std::vector<double> scores = exactness_score(K, f, cfg.depth);
    fs::path path = fs::path(cfg.out) / "exactness.csv";
    CsvWriter csv(path, {"n", "En_f_minus_mean"});
    for (int d = 1; d <= cfg.depth; ++d) csv.row({static_cast<double>(d), scores[d - 1]});
    art.outputs.push_back(path.string());
    double mono = 0.0;
    for (std::size_t d = 1; d < scores.size(); ++d)
        mono = std::max(mono, scores[d] - scores[d - 1]);
    art.check("monotone_nonincreasing", mono <= 1e-8, mono);
    return art;
}

Artifacts cmd_markov_sample(const RunConfig& cfg) {
    Artifacts art;
    RieszFamily F = riesz_family(make_operator(cfg.map, cfg.resolved_weight(), cfg.kmax));
    PathSample p = cfg.x0_mode == "stationary"
                       ? sample_path(F, Measure::lebesgue_histogram(cfg.n), cfg.steps, cfg.seed)
                       : sample_path(F, cfg.x0, cfg.steps, cfg.seed);
    fs::path path = fs::path(cfg.out) / "path.csv";
    CsvWriter csv(path, {"step", "x"});
    for (std::size_t i = 0; i < p.chain.size(); ++i)
        csv.row({static_cast<double>(i), p.chain[i]});
    art.outputs.push_back(path.string());
    json meta;
    meta["seed"] = p.seed;
    meta["steps"] = cfg.steps;
    meta["resamples"] = p.resamples;
    meta["rng"] = CounterRng::name();
    fs::path mpath = fs::path(cfg.out) / "path.json";
    write_json(mpath, meta);
    art.outputs.push_back(mpath.string());
    double res = solenoid_step_residual(F.op().map(), p);
    art.check("solenoid_relation", res <= 1e-12, res);
    return art;
}

Artifacts cmd_markov_test(const RunConfig& cfg) {
    Artifacts art;
    RieszFamily F = riesz_family(make_operator(cfg.map, cfg.resolved_weight(), cfg.kmax));
    MarkovPropertyReport rep = markov_property_test(F, [](double y) { return y; }, cfg.paths,
                                                    cfg.steps, 64, cfg.seed, cfg.threads);
    json j;
    j["max_abs_z"] = rep.max_abs_z;
    j["skipped_bins"] = rep.skipped_bins;
    json bins = json::array();
    for (const auto& b : rep.bins) {
        json e;
        e["count"] = b.count;
        e["mean_next"] = b.mean_next;
        e["mean_target"] = b.mean_target;
        e["target_mid"] = b.target_mid;
        e["z"] = b.z;
        bins.push_back(std::move(e));
    }
    j["bins"] = std::move(bins);
    fs::path path = fs::path(cfg.out) / "markov_test.json";
    write_json(path, j);
    art.outputs.push_back(path.string());
    art.check("conditional_mean_4sigma", rep.max_abs_z <= 4.0, rep.max_abs_z);
    return art;
}

Artifacts cmd_couple_roundtrip(const RunConfig& cfg) {
    Artifacts art;
    double worst = 0.0;
    for (int t = 0; t < cfg.trials; ++t) {
        int m = 2 + t % std::max(1, cfg.size - 1);
        auto prob = [&](double shift) {
            std::vector<double> v = golden_samples(m, shift);
            double s = 0.0;
            for (double& x : v) s += (x += 0.05);
            for (double& x : v) x /= s;
            return v;
        };
        std::vector<double> mu1 = prob(0.1 + 0.007 * t);
        std::vector<double> P(static_cast<std::size_t>(m) * m);
        for (int i = 0; i < m; ++i) {
            std::vector<double> row = prob(0.4 + 0.011 * (t + i));
            for (int j = 0; j < m; ++j) P[static_cast<std::size_t>(i) * m + j] = row[j];
        }
        Coupling nu = operator_to_coupling(P, mu1);
        std::vector<double> P2 = coupling_to_operator(nu);
        for (std::size_t k = 0; k < P.size(); ++k) worst = std::max(worst, std::abs(P2[k] - P[k]));
        Coupling nu2 = operator_to_coupling(P2, nu.mu1());
        for (std::size_t k = 0; k < nu.joint.size(); ++k)
            worst = std::max(worst, std::abs(nu2.joint[k] - nu.joint[k]));
    }
    json j;
    j["trials"] = cfg.trials;
    j["max_roundtrip_residual"] = worst;
    fs::path path = fs::path(cfg.out) / "couple_roundtrip.json";
    write_json(path, j);
    art.outputs.push_back(path.string());
    art.check("roundtrip_identity", worst <= 1e-12, worst);
    return art;
}

Artifacts cmd_uhs_demo(const RunConfig& cfg) {
    Artifacts art;
    json j;
    {
        TransferOperator R = make_operator("doubling", "half");
        HilbertPair a = make_pair({1.0}, Measure::dirac(0.6));
        HilbertPair sa = uhs_S(R, a);
        j["half_weight_delta_0.6"] = measure_to_json(sa.mu);
        art.check("uhs_isometry_half", std::abs(uhs_norm2(sa) - 1.0) <= 1e-12,
                  std::abs(uhs_norm2(sa) - 1.0));
    }
    {
        TransferOperator R = make_operator("doubling", "cos2");
        double a0 = 0.3;
        HilbertPair a = make_pair({1.0}, Measure::dirac(a0));
        HilbertPair sa = uhs_S(R, a);
        j["cos2_delta_0.3"] = measure_to_json(sa.mu);
        HilbertPair back = uhs_R(R, sa, true);
        double res = linf_distance(back.mu, a.mu);
        art.check("uhs_RS_identity", res <= 1e-12, res);

        Measure pushed = pushforward_atomic(R.map(), Measure::dirac(0.5));
        Measure out = act_on_atomic(R, pushed);
        j["delta_half_pushforward_then_R"] = measure_to_json(out);
        art.check("delta_half_worked_example",
                  linf_distance(out, Measure::dirac(0.0)) <= 1e-15, 0.0);
    }
    fs::path path = fs::path(cfg.out) / "uhs_demo.json";
    write_json(path, j);
    art.outputs.push_back(path.string());
    return art;
}

Artifacts cmd_verify_all(const RunConfig& cfg) {
    Artifacts art;
    art.checks = run_verify_all();
    json j = json::array();
    for (const auto& c : art.checks) {
        json e;
        e["name"] = c.name;
        e["pass"] = c.pass;
        e["residual"] = c.residual;
        j.push_back(std::move(e));
        std::cout << (c.pass ? "[PASS] " : "[FAIL] ") << c.name << " (residual " << c.residual
                  << ")\n";
    }
    fs::path path = fs::path(cfg.out) / "verify_all.json";
    write_json(path, j);
    art.outputs.push_back(path.string());
    return art;
}

// plain key=value file applied as defaults; command-line flags win
void merge_config_file(const std::string& path, RunConfig& cfg) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot read config file " + path);
    std::string line;
    while (std::getline(in, line)) {
        auto eq = line.find('=');
        if (eq == std::string::npos || line.empty() || line[0] == '#') continue;
        std::string key = line.substr(0, eq), val = line.substr(eq + 1);
        if (key == "map") cfg.map = val;
        else if (key == "weight") cfg.weight = val;
        else if (key == "measure") cfg.measure = val;
        else if (key == "p") cfg.p = val;
        else if (key == "format") cfg.format = val;
        else if (key == "out") cfg.out = val;
        else if (key == "n") cfg.n = std::stoi(val);
        else if (key == "kmax") cfg.kmax = std::stoi(val);
        else if (key == "depth") cfg.depth = std::stoi(val);
        else if (key == "mmax") cfg.mmax = std::stoi(val);
        else if (key == "k") cfg.branch_k = std::stoi(val);
        else if (key == "samples") cfg.samples = std::stoi(val);
        else if (key == "burn-in") cfg.burn_in = std::stoi(val);
        else if (key == "paths") cfg.paths = std::stoi(val);
        else if (key == "steps") cfg.steps = std::stoi(val);
        else if (key == "trials") cfg.trials = std::stoi(val);
        else if (key == "size") cfg.size = std::stoi(val);
        else if (key == "max-iter") cfg.max_iter = std::stoi(val);
        else if (key == "threads") cfg.threads = std::stoi(val);
        else if (key == "x0") cfg.x0 = std::stod(val);
        else if (key == "tol") cfg.tol = std::stod(val);
        else if (key == "seed") cfg.seed = std::stoull(val);
        else throw std::invalid_argument("unknown config key: " + key);
    }
}

} // namespace

int main(int argc, char** argv) {
    RunConfig cfg;

    // config file is applied before flag parsing so that flags win
    for (int i = 1; i + 1 < argc; ++i)
        if (std::string(argv[i]) == "--config") {
            try {
                merge_config_file(argv[i + 1], cfg);
            } catch (const std::exception& e) {
                std::cerr << "error: " << e.what() << "\n";
                return 2;
            }
        }
    if (const char* env_out = std::getenv("RUELLE_OUT")) cfg.out = env_out;

    CLI::App app{"ruelle-lab: transfer operators, invariant measures and path-space sampling "
                 "on interval maps"};
    app.require_subcommand(1);

    std::string config_path;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "plain key=value config file (flags win)");
        sub->add_option("--map", cfg.map, "map label: doubling | gauss | two-component");
        sub->add_option("--weight", cfg.weight,
                        "weight label: half | cos2 | haar | gkw | gauss-norm | const:<c>");
        sub->add_option("--n", cfg.n, "grid resolution");
        sub->add_option("--kmax", cfg.kmax, "Gauss truncation depth");
        sub->add_option("--seed", cfg.seed, "RNG seed");
        sub->add_option("--tol", cfg.tol, "solver tolerance");
        sub->add_option("--out", cfg.out, "output directory");
        sub->add_option("--format", cfg.format, "artifact format hint: csv | json");
        sub->add_option("--threads", cfg.threads,
                        "worker threads (>1 is documented as non-bitwise-reproducible)");
    };

    std::vector<std::pair<std::string, Artifacts (*)(const RunConfig&)>> commands = {
        {"invariant-density", cmd_invariant_density},
        {"table1", cmd_table1},
        {"radon-nikodym", cmd_radon_nikodym},
        {"ifs-measure", cmd_ifs_measure},
        {"chaos-game", cmd_chaos_game},
        {"extract-pk", cmd_extract_pk},
        {"ifs-test", cmd_ifs_test},
        {"moment-test", cmd_moment_test},
        {"wold", cmd_wold},
        {"exactness", cmd_exactness},
        {"markov-sample", cmd_markov_sample},
        {"markov-test", cmd_markov_test},
        {"couple-roundtrip", cmd_couple_roundtrip},
        {"uhs-demo", cmd_uhs_demo},
        {"verify-all", cmd_verify_all},
    };

    for (auto& [name, fn] : commands) {
        CLI::App* sub = app.add_subcommand(name);
        add_common(sub);
        if (name == "invariant-density") sub->add_option("--max-iter", cfg.max_iter, "iteration cap");
        if (name == "ifs-measure" || name == "chaos-game")
            sub->add_option("--p", cfg.p, "probability vector: uniform | mu0 | v1,v2,...");
        if (name == "chaos-game") {
            sub->add_option("--samples", cfg.samples, "sample count");
            sub->add_option("--burn-in", cfg.burn_in, "discarded prefix");
        }
        if (name == "extract-pk" || name == "ifs-test" || name == "moment-test")
            sub->add_option("--measure", cfg.measure, "measure label: lebesgue | mu0");
        if (name == "extract-pk") sub->add_option("--k", cfg.branch_k, "branch index");
        if (name == "ifs-test" || name == "ifs-measure" || name == "wold" || name == "exactness")
            sub->add_option("--depth", cfg.depth, "word / projection depth");
        if (name == "moment-test") sub->add_option("--mmax", cfg.mmax, "maximal moment order");
        if (name == "markov-sample" || name == "markov-test") {
            sub->add_option("--steps", cfg.steps, "chain length");
            sub->add_option("--x0", cfg.x0, "starting point");
            sub->add_option("--start", cfg.x0_mode, "point | stationary");
        }
        if (name == "markov-test") sub->add_option("--paths", cfg.paths, "number of chains");
        if (name == "couple-roundtrip") {
            sub->add_option("--trials", cfg.trials, "instance count");
            sub->add_option("--size", cfg.size, "max state count");
        }
        sub->callback([&cfg, name = name] { cfg.command = name; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) ? 2 : 0;
    }

    try {
        if (cfg.n < 1 || cfg.kmax < 1 || cfg.steps < 0 || cfg.paths < 1 || cfg.depth < 1)
            throw std::invalid_argument("numeric parameters must be positive");
        fs::create_directories(cfg.out);
        Artifacts art;
        for (auto& [name, fn] : commands)
            if (name == cfg.command) art = fn(cfg);
        write_manifest(cfg, art);
        if (!art.all_pass()) {
            std::cerr << "numeric contract failed; see " << cfg.out << "/manifest.json\n";
            return 3;
        }
        return 0;
    } catch (const std::invalid_argument& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const precondition_error& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
