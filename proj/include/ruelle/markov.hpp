#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <thread>
#include <vector>

#include "ruelle/branch_map.hpp"
#include "ruelle/errors.hpp"
#include "ruelle/grid.hpp"
#include "ruelle/measure.hpp"
#include "ruelle/rng.hpp"
#include "ruelle/transfer_operator.hpp"

namespace ruelle {

// Riesz family of a weighted transfer operator: kernel measures
// mu_x = sum_k W(tau_k x) delta_{tau_k x} supported on sigma^{-1}(x).
class RieszFamily {
public:
    explicit RieszFamily(TransferOperator R) : R_(std::move(R)) {}

    const TransferOperator& op() const { return R_; }

    // atoms sorted by branch index; exact-zero weights drop out
    Measure kernel(double x) const {
        std::vector<Atom> atoms;
        for (const auto& [y, w] : R_.kernel_atoms(x))
            if (w != 0.0) atoms.push_back({y, w});
        Measure m;
        m.kind = MeasureKind::Atomic;
        m.atoms = std::move(atoms);
        return m;
    }

    double kernel_mass(double x) const {
        double s = 0.0;
        for (const auto& [y, w] : R_.kernel_atoms(x)) s += w;
        return s;
    }

private:
    TransferOperator R_;
};

inline RieszFamily riesz_family(const TransferOperator& R) { return RieszFamily(R); }

struct PathSample {
    std::vector<double> chain;
    std::uint64_t seed = 0;
    int resamples = 0; // tail escapes that were redrawn (truncated maps)
};

namespace detail {
inline double draw_transition(const RieszFamily& F, double x, CounterRng& rng, int& resamples,
                              long long step_budget) {
    auto atoms = F.op().kernel_atoms(x);
    for (int attempt = 0;; ++attempt) {
        double u = rng.next_double();
        double acc = 0.0;
        for (const auto& [y, w] : atoms) {
            acc += w;
            if (u < acc) return y;
        }
        // u fell into the truncation tail
        ++resamples;
        if (attempt > 64 || resamples > std::max<long long>(1, step_budget / 1000))
            throw tail_escape_error("sample_path: tail-escape rate exceeded 0.1% of steps", 0);
    }
}
} // namespace detail

// Markov chain with transition kernel mu_x, sampled by inverse CDF over the
// atom list (branch order). Deterministic per seed.
inline PathSample sample_path(const RieszFamily& F, double x0, int T, std::uint64_t seed) {
    PathSample p;
    p.seed = seed;
    p.chain.reserve(T + 1);
    p.chain.push_back(x0);
    CounterRng rng(seed);
    double x = x0;
    for (int t = 0; t < T; ++t) {
        x = detail::draw_transition(F, x, rng, p.resamples, T);
        p.chain.push_back(x);
    }
    return p;
}

// start from a histogram: inverse CDF over cells, uniform within the cell
inline PathSample sample_path(const RieszFamily& F, const Measure& mu0, int T,
                              std::uint64_t seed) {
    if (mu0.kind != MeasureKind::Histogram)
        throw std::invalid_argument("sample_path: initial measure must be a histogram");
    CounterRng rng(seed);
    double total = mu0.total_mass();
    double u = rng.next_double() * total;
    int cell = 0;
    double acc = mu0.cells[0];
    while (u >= acc && cell + 1 < mu0.n) acc += mu0.cells[++cell];
    double x0 = (cell + rng.next_double()) / mu0.n;
    PathSample p;
    p.seed = seed;
    p.chain.push_back(x0);
    double x = x0;
    for (int t = 0; t < T; ++t) {
        x = detail::draw_transition(F, x, rng, p.resamples, T);
        p.chain.push_back(x);
    }
    return p;
}

inline double solenoid_step_residual(const BranchMap& map, const PathSample& p) {
    double r = 0.0;
    for (std::size_t i = 0; i + 1 < p.chain.size(); ++i)
        r = std::max(r, std::abs(map.sigma(p.chain[i + 1]) - p.chain[i]));
    return r;
}

struct MarkovBin {
    long long count = 0;
    double mean_next = 0.0;      // empirical mean of f(x_{i+1})
    double mean_target = 0.0;    // empirical mean of R(f)(x_i)
    double target_mid = 0.0;     // apply(R, f, cell midpoint), for reference
    double z = 0.0;              // standardized deviation of the differences
};

struct MarkovPropertyReport {
    std::vector<MarkovBin> bins;
    int skipped_bins = 0;
    double max_abs_z = 0.0;
};

// E(f o pi_{i+1} | pi_i = x) = R(f)(x): bins transitions by the cell of x_i
// and standardizes the per-bin mean of f(x_{i+1}) - R(f)(x_i), which is a
// martingale difference under the kernel. Chains carry per-chain derived
// seeds; with threads > 1 the per-thread partial sums are merged in thread
// order, so results are deterministic for a fixed thread count (bitwise
// reproducibility across thread counts is not promised).
inline MarkovPropertyReport markov_property_test(const RieszFamily& F, const RealFn& f,
                                                 int n_paths, int T, int n_bins = 64,
                                                 std::uint64_t seed = 2024, int threads = 1) {
    std::vector<long long> count(n_bins, 0);
    std::vector<double> s1(n_bins, 0.0), s2(n_bins, 0.0), snext(n_bins, 0.0), starget(n_bins, 0.0);

    std::vector<double> starts = golden_samples(n_paths);
    threads = std::max(1, threads);
    struct Partial {
        std::vector<long long> count;
        std::vector<double> s1, s2, snext, starget;
    };
    std::vector<Partial> parts(threads);
    auto run_chunk = [&](int t) {
        Partial& pt = parts[t];
        pt.count.assign(n_bins, 0);
        pt.s1.assign(n_bins, 0.0);
        pt.s2.assign(n_bins, 0.0);
        pt.snext.assign(n_bins, 0.0);
        pt.starget.assign(n_bins, 0.0);
        for (int c = t; c < n_paths; c += threads) {
            PathSample p = sample_path(F, starts[c], T, CounterRng::derive_seed(seed, c));
            for (int i = 0; i + 1 < static_cast<int>(p.chain.size()); ++i) {
                double x = p.chain[i], y = p.chain[i + 1];
                int b = FunctionOnGrid::cell_of(n_bins, x);
                double d = f(y) - F.op().apply(f, x);
                pt.count[b] += 1;
                pt.s1[b] += d;
                pt.s2[b] += d * d;
                pt.snext[b] += f(y);
                pt.starget[b] += F.op().apply(f, x);
            }
        }
    };
    if (threads == 1) {
        run_chunk(0);
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(run_chunk, t);
        for (auto& th : pool) th.join();
    }
    for (int t = 0; t < threads; ++t)
        for (int b = 0; b < n_bins; ++b) {
            count[b] += parts[t].count[b];
            s1[b] += parts[t].s1[b];
            s2[b] += parts[t].s2[b];
            snext[b] += parts[t].snext[b];
            starget[b] += parts[t].starget[b];
        }

    MarkovPropertyReport rep;
    rep.bins.resize(n_bins);
    for (int b = 0; b < n_bins; ++b) {
        MarkovBin& bin = rep.bins[b];
        bin.count = count[b];
        bin.target_mid = F.op().apply(f, FunctionOnGrid::midpoint(n_bins, b));
        if (count[b] < 2) {
            ++rep.skipped_bins;
            continue;
        }
        double m = s1[b] / count[b];
        double var = std::max(s2[b] / count[b] - m * m, 0.0);
        bin.mean_next = snext[b] / count[b];
        bin.mean_target = starget[b] / count[b];
        if (var > 0.0) bin.z = m / std::sqrt(var / count[b]);
        rep.max_abs_z = std::max(rep.max_abs_z, std::abs(bin.z));
    }
    return rep;
}

// ---------------------------------------------------------------------------
// conditional-measure transfer operators on finite grid partitions

// R_W(f)(x) = int_{C_x} f W d mu_{C_x} for a finite partition of grid cells;
// the output is constant on every fiber.
class FiberedOperator {
public:
    FiberedOperator(std::vector<int> fiber_of, std::vector<double> weight, Measure mu)
        : fiber_of_(std::move(fiber_of)), W_(std::move(weight)), mu_(std::move(mu)) {
        n_ = static_cast<int>(fiber_of_.size());
        if (mu_.kind != MeasureKind::Histogram || mu_.n != n_ ||
            static_cast<int>(W_.size()) != n_)
            throw std::invalid_argument("FiberedOperator: sizes must agree with the base grid");
        fiber_count_ = *std::max_element(fiber_of_.begin(), fiber_of_.end()) + 1;
        fiber_mass_.assign(fiber_count_, 0.0);
        for (int i = 0; i < n_; ++i) fiber_mass_[fiber_of_[i]] += mu_.cells[i];
        for (int c = 0; c < fiber_count_; ++c)
            if (fiber_mass_[c] <= 0.0)
                throw std::invalid_argument("FiberedOperator: empty fiber " + std::to_string(c));
    }

    static FiberedOperator uniform_base(std::vector<int> fiber_of, std::vector<double> weight) {
        int n = static_cast<int>(fiber_of.size());
        return FiberedOperator(std::move(fiber_of), std::move(weight),
                               Measure::lebesgue_histogram(n));
    }

    int n() const { return n_; }
    int fiber_count() const { return fiber_count_; }
    int fiber_of(int cell) const { return fiber_of_[cell]; }
    const std::vector<double>& weight() const { return W_; }
    const Measure& base() const { return mu_; }

    // conditional mass of cell i within its fiber
    double conditional(int i) const { return mu_.cells[i] / fiber_mass_[fiber_of_[i]]; }

    std::vector<double> apply(const std::vector<double>& f) const {
        std::vector<double> per_fiber(fiber_count_, 0.0);
        for (int i = 0; i < n_; ++i)
            per_fiber[fiber_of_[i]] += f[i] * W_[i] * conditional(i);
        std::vector<double> out(n_);
        for (int i = 0; i < n_; ++i) out[i] = per_fiber[fiber_of_[i]];
        return out;
    }

    // per-fiber integral of W against the conditional measure; 1 everywhere
    // for a normalized operator
    std::vector<double> normalization() const {
        std::vector<double> one(n_, 1.0);
        std::vector<double> r = apply(one);
        std::vector<double> per_fiber(fiber_count_);
        for (int i = 0; i < n_; ++i) per_fiber[fiber_of_[i]] = r[i];
        return per_fiber;
    }

    // quotient endomorphism collapsing each fiber to its first cell; h is
    // fiber-constant iff h o sigma_xi = h
    int quotient_cell(int i) const {
        for (int j = 0; j < n_; ++j)
            if (fiber_of_[j] == fiber_of_[i]) return j;
        return i;
    }

private:
    int n_ = 0;
    int fiber_count_ = 0;
    std::vector<int> fiber_of_;
    std::vector<double> W_;
    Measure mu_;
    std::vector<double> fiber_mass_;
};

// ---------------------------------------------------------------------------
// Parry Jacobian on a grid

struct ParryResult {
    FunctionOnGrid J;           // branchwise expansion of mu: mu(sigma_k(cell))/mu(cell)
    FunctionOnGrid theta;       // grid oracle d(mu o sigma^{-1}) / d mu
    FunctionOnGrid identity;    // per-cell |theta(x) - sum_{y in sigma^{-1} x} 1/J(y)|
    double identity_residual;   // sup of the above
};

// J(x) = d(mu o tau_k^{-1})/d mu on the branch containing x, realized
// cellwise as the mu-expansion of the forward branch map.
inline ParryResult parry_jacobian(const BranchMap& map, const Measure& mu) {
    if (mu.kind != MeasureKind::Histogram)
        throw std::invalid_argument("parry_jacobian: measure must be a histogram");
    int n = mu.n;
    std::vector<int> dead;
    for (int i = 0; i < n; ++i)
        if (mu.cells[i] <= 0.0) dead.push_back(i);
    if (!dead.empty())
        throw abs_continuity_error("parry_jacobian: zero-mass cells break quasi-invariance at "
                                   "grid scale",
                                   dead);

    ParryResult res;
    res.J = FunctionOnGrid(n);
    for (int i = 0; i < n; ++i) {
        double lo = static_cast<double>(i) / n, hi = (i + 1.0) / n;
        double mid = FunctionOnGrid::midpoint(n, i);
        int k;
        try {
            k = map.branch_of(mid);
        } catch (const tail_escape_error&) {
            res.J[i] = 0.0; // truncation tail: no branch, excluded from checks
            continue;
        }
        const Branch& b = map.branch(k);
        double a = std::max(lo, b.J.lo), c = std::min(hi, b.J.hi);
        double ia = b.forward(a), ic = b.forward(c);
        if (ia > ic) std::swap(ia, ic);
        double num = mu.closed_form_mass(ia, ic);
        double den = mu.closed_form_mass(a, c);
        res.J[i] = den > 0.0 ? num / den : 0.0;
    }

    // grid pushforward oracle for theta = d(mu o sigma^{-1})/d mu
    Measure push = pushforward_histogram(map, mu);
    res.theta = FunctionOnGrid(n);
    for (int i = 0; i < n; ++i) res.theta[i] = push.cells[i] / mu.cells[i];

    res.identity = FunctionOnGrid(n);
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
        double x = FunctionOnGrid::midpoint(n, i);
        double s = 0.0;
        for (const auto& b : map.branches()) {
            if (!b.range.contains(x)) continue;
            double y = b.inverse(x);
            double Jy = res.J[FunctionOnGrid::cell_of(n, y)];
            if (Jy > 0.0) s += 1.0 / Jy;
        }
        res.identity[i] = std::abs(res.theta[i] - s);
        worst = std::max(worst, res.identity[i]);
    }
    res.identity_residual = worst;
    return res;
}

// transfer operator with weight 1/J; satisfies mu R = mu o sigma^{-1}
inline TransferOperator parry_operator(const BranchMap& map, const Measure& mu) {
    ParryResult pr = parry_jacobian(map, mu);
    int n = mu.n;
    FunctionOnGrid J = pr.J;
    return TransferOperator(map,
                            [J, n](double y) {
                                double v = J[FunctionOnGrid::cell_of(n, y)];
                                return v > 0.0 ? 1.0 / v : 0.0;
                            },
                            "parry");
}

} // namespace ruelle
