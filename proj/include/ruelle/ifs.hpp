#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "ruelle/branch_map.hpp"
#include "ruelle/errors.hpp"
#include "ruelle/measure.hpp"
#include "ruelle/quadrature.hpp"
#include "ruelle/rng.hpp"

namespace ruelle {

// Probability vector over a map's branches, in branch order. A truncated
// countable map carries the dropped mass explicitly.
struct ProbabilityVector {
    std::vector<double> p;
    double tail_mass = 0.0;

    void validate(double tol = 1e-12) const {
        double s = tail_mass;
        for (double x : p) {
            if (!(x > 0.0))
                throw std::invalid_argument("ProbabilityVector: entries must be positive");
            s += x;
        }
        if (std::abs(s - 1.0) > tol)
            throw std::invalid_argument("ProbabilityVector: entries sum to " + std::to_string(s) +
                                        ", expected 1");
    }

    static ProbabilityVector uniform(int n) {
        return {std::vector<double>(n, 1.0 / n), 0.0};
    }
};

// p_k = mu(J_k) over the truncated branches of a countable map
inline ProbabilityVector branch_masses(const BranchMap& map, const Measure& mu) {
    ProbabilityVector pv;
    double s = 0.0;
    for (const auto& b : map.branches()) {
        double m = mu.interval_mass(b.J);
        pv.p.push_back(m);
        s += m;
    }
    pv.tail_mass = std::max(0.0, 1.0 - s);
    return pv;
}

struct CylinderNode {
    std::vector<int> word;
    Interval cell;
    double mass = 0.0;
};

// IFS measure mu_p = sum_k p_k mu_p o tau_k^{-1}, represented either by
// enumerated cylinder masses or by chaos-game samples.
struct IFSMeasure {
    enum class Rep { CylinderTable, Samples };
    Rep rep = Rep::CylinderTable;
    std::string map_label;
    ProbabilityVector pvec;

    // levels[d] holds all depth-(d+1) cylinders in lexicographic word order
    std::vector<std::vector<CylinderNode>> levels;

    std::vector<double> samples;
    std::uint64_t seed = 0;
    int burn_in = 0;

    double max_cylinder_diameter() const {
        double d = 0.0;
        if (!levels.empty())
            for (const auto& node : levels.back()) d = std::max(d, node.cell.length());
        return d;
    }
};

inline IFSMeasure ifs_measure_cylinders(const BranchMap& map, const ProbabilityVector& pv,
                                        int depth) {
    pv.validate(map.countable() ? 1e-9 : 1e-12);
    if (static_cast<int>(pv.p.size()) != map.branch_count())
        throw std::invalid_argument("ifs_measure_cylinders: probability vector size must match "
                                    "the branch count");
    double total = 0.0;
    double count = 1.0;
    for (int d = 0; d < depth; ++d) {
        count *= map.branch_count();
        total += count;
        if (total > 1e7)
            throw size_limit_error("ifs_measure_cylinders: more than 10^7 cylinders requested");
    }

    IFSMeasure m;
    m.rep = IFSMeasure::Rep::CylinderTable;
    m.map_label = map.label();
    m.pvec = pv;
    m.levels.resize(depth);

    std::vector<CylinderNode> frontier{{std::vector<int>{}, Interval{0.0, 1.0}, 1.0}};
    for (int d = 0; d < depth; ++d) {
        std::vector<CylinderNode> next;
        next.reserve(frontier.size() * map.branch_count());
        for (const auto& parent : frontier) {
            for (int s = 0; s < map.branch_count(); ++s) {
                const Branch& b = map.branches()[s];
                CylinderNode node;
                node.word = parent.word;
                node.word.push_back(b.label);
                node.mass = parent.mass * pv.p[s];
                node.cell = decode(map, SymbolWord{node.word});
                next.push_back(std::move(node));
            }
        }
        frontier = next;
        m.levels[d] = std::move(next);
    }
    return m;
}

// bin the cylinders of one level to an n-cell histogram by interval overlap
inline Measure induced_histogram(const IFSMeasure& m, int level, int n) {
    if (m.rep != IFSMeasure::Rep::CylinderTable || level < 1 ||
        level > static_cast<int>(m.levels.size()))
        throw std::invalid_argument("induced_histogram: need a cylinder table with that level");
    std::vector<double> cells(n, 0.0);
    for (const auto& node : m.levels[level - 1]) {
        double a = node.cell.lo, b = node.cell.hi;
        double len = b - a;
        if (len <= 0.0) continue;
        int i0 = FunctionOnGrid::cell_of(n, a);
        int i1 = FunctionOnGrid::cell_of(n, std::nextafter(b, a));
        for (int i = i0; i <= i1; ++i) {
            double clo = static_cast<double>(i) / n, chi = (i + 1.0) / n;
            double ov = std::min(b, chi) - std::max(a, clo);
            if (ov > 0) cells[i] += node.mass * ov / len;
        }
    }
    return Measure::histogram(std::move(cells));
}

// chaos game: iterate x <- tau_K(x) with K ~ p; bitwise deterministic per seed
inline IFSMeasure chaos_game(const BranchMap& map, const ProbabilityVector& pv, int n_samples,
                             int burn_in, std::uint64_t seed) {
    if (n_samples < 1) throw std::invalid_argument("chaos_game: n_samples must be >= 1");
    if (static_cast<int>(pv.p.size()) != map.branch_count())
        throw std::invalid_argument("chaos_game: probability vector size must match branches");
    double total = pv.tail_mass;
    for (double x : pv.p) total += x;

    IFSMeasure m;
    m.rep = IFSMeasure::Rep::Samples;
    m.map_label = map.label();
    m.pvec = pv;
    m.seed = seed;
    m.burn_in = burn_in;
    m.samples.reserve(n_samples);

    CounterRng rng(seed);
    double x = 0.5;
    double trunc = total - pv.tail_mass; // draw within the kept branches
    for (int i = 0; i < burn_in + n_samples; ++i) {
        double u = rng.next_double() * trunc;
        int slot = 0;
        double acc = pv.p[0];
        while (u >= acc && slot + 1 < static_cast<int>(pv.p.size())) acc += pv.p[++slot];
        x = map.branches()[slot].inverse(x);
        if (i >= burn_in) m.samples.push_back(x);
    }
    return m;
}

inline double empirical_interval_mass(const IFSMeasure& m, const Interval& I) {
    if (m.rep != IFSMeasure::Rep::Samples)
        throw std::invalid_argument("empirical_interval_mass: needs a sample representation");
    std::size_t c = 0;
    for (double x : m.samples)
        if (I.contains(x)) ++c;
    return static_cast<double>(c) / m.samples.size();
}

// integral of g against mu; exact closed forms / histograms via cell sums
inline double integrate_against(const Measure& mu, const RealFn& g, double tol = 1e-10) {
    switch (mu.kind) {
    case MeasureKind::ClosedForm:
        return integrate([&](double x) { return g(x) * mu.density(x); }, 0.0, 1.0, tol);
    case MeasureKind::Histogram: {
        double s = 0.0;
        for (int i = 0; i < mu.n; ++i) s += mu.cells[i] * g(FunctionOnGrid::midpoint(mu.n, i));
        return s;
    }
    case MeasureKind::Atomic: {
        double s = 0.0;
        for (const auto& a : mu.atoms) s += a.mass * g(a.x);
        return s;
    }
    }
    return 0.0;
}

inline double integrate_on_branch(const BranchMap& map, const Measure& mu, int branch_label,
                                  const RealFn& g, double tol = 1e-10) {
    const Branch& b = map.branch(branch_label);
    switch (mu.kind) {
    case MeasureKind::ClosedForm:
        return integrate([&](double x) { return g(x) * mu.density(x); }, b.J.lo, b.J.hi, tol);
    case MeasureKind::Histogram: {
        double s = 0.0;
        for (int i = 0; i < mu.n; ++i) {
            double clo = static_cast<double>(i) / mu.n, chi = (i + 1.0) / mu.n;
            double ov = std::min(b.J.hi, chi) - std::max(b.J.lo, clo);
            if (ov <= 0) continue;
            double mid = 0.5 * (std::max(b.J.lo, clo) + std::min(b.J.hi, chi));
            s += mu.cells[i] * (ov * mu.n) * g(mid);
        }
        return s;
    }
    case MeasureKind::Atomic: {
        double s = 0.0;
        for (const auto& a : mu.atoms)
            if (b.J.contains(a.x)) s += a.mass * g(a.x);
        return s;
    }
    }
    return 0.0;
}

// sup over dyadic test intervals of |mu(sigma^{-1} I) - mu(I)|
inline double sigma_invariance_residual(const BranchMap& map, const Measure& mu, int levels = 3) {
    double worst = 0.0;
    int n = 1 << levels;
    for (int i = 0; i < n; ++i) {
        Interval I{static_cast<double>(i) / n, (i + 1.0) / n};
        double pre = 0.0;
        for (const auto& b : map.branches()) {
            double a = std::max(I.lo, b.range.lo), c = std::min(I.hi, b.range.hi);
            if (c <= a) continue;
            double ia = b.inverse(a), ic = b.inverse(c);
            if (ia > ic) std::swap(ia, ic);
            pre += mu.closed_form_mass(ia, ic);
        }
        worst = std::max(worst, std::abs(pre - mu.closed_form_mass(I.lo, I.hi)));
    }
    return worst;
}

struct PkExtraction {
    double ratio = 0.0;  // integral formula
    double mu_Jk = 0.0;  // direct branch mass
};

// p_k by the moment formula and by mu(J_k); they agree for IFS measures
inline PkExtraction extract_pk(const BranchMap& map, const Measure& mu, int branch_label,
                               double invariance_tol = 1e-6) {
    double inv = sigma_invariance_residual(map, mu);
    double allowance = map.tail_mass_bound();
    if (inv > invariance_tol + allowance)
        throw precondition_error("extract_pk: measure is not sigma-invariant; residual " +
                                     std::to_string(inv),
                                 inv);
    double denom = integrate_against(mu, [](double x) { return x; });
    if (std::abs(denom) < 1e-14)
        throw std::invalid_argument("extract_pk: degenerate measure, integral of x vanishes");
    const BranchMap& m = map;
    double numer = integrate_on_branch(m, mu, branch_label,
                                       [&](double x) { return m.branch(branch_label).forward(x); });
    PkExtraction out;
    out.ratio = numer / denom;
    out.mu_Jk = mu.interval_mass(map.branch(branch_label).J);
    return out;
}

struct MomentViolation {
    int k = 0;
    int m = 0;
    double relative = 0.0;
};

struct MomentReport {
    double max_relative = 0.0;
    MomentViolation argmax;
    std::vector<MomentViolation> rows;
};

// (int x dmu) int_{J_k} sigma^m dmu = (int x^m dmu) int_{J_k} sigma dmu
// holds for all k, m exactly when mu is invariant for R_pi
inline MomentReport moment_invariance_test(const BranchMap& map, const Measure& mu, int m_max,
                                           int k_count = 0) {
    MomentReport rep;
    if (k_count <= 0) k_count = std::min(map.branch_count(), 8);
    double ex1 = integrate_against(mu, [](double x) { return x; });
    std::vector<double> exm(m_max + 1, 0.0);
    for (int m = 1; m <= m_max; ++m)
        exm[m] = integrate_against(mu, [m](double x) { return std::pow(x, m); });
    for (int s = 0; s < k_count; ++s) {
        int label = map.branches()[s].label;
        const Branch& b = map.branches()[s];
        double jk1 = integrate_on_branch(map, mu, label, [&](double x) { return b.forward(x); });
        for (int m = 1; m <= m_max; ++m) {
            double jkm = integrate_on_branch(
                map, mu, label, [&](double x) { return std::pow(b.forward(x), m); });
            double lhs = ex1 * jkm, rhs = exm[m] * jk1;
            double rel = std::abs(lhs - rhs) / std::max({std::abs(lhs), std::abs(rhs), 1e-300});
            rep.rows.push_back({label, m, rel});
            if (rel > rep.max_relative) {
                rep.max_relative = rel;
                rep.argmax = {label, m, rel};
            }
        }
    }
    return rep;
}

struct IFSTestResult {
    bool is_ifs = true;
    ProbabilityVector p;                 // p_k := mu(J_k)
    std::vector<int> witness;            // first violating word
    double witness_mu_value = 0.0;
    double witness_product_value = 0.0;
    double gap = 0.0;
};

// checks mu(decode(w)) = prod p_{k_i} for all words up to the given depth;
// words are visited in lexicographic order so the first violation is
// deterministic
inline IFSTestResult ifs_test(const BranchMap& map, const Measure& mu, int depth,
                              double tol = 1e-9) {
    IFSTestResult res;
    res.p = branch_masses(map, mu);
    double tail = map.tail_mass_bound();

    struct Item {
        std::vector<int> word;
        double product;
    };
    std::vector<Item> frontier{{{}, 1.0}};
    for (int d = 1; d <= depth; ++d) {
        std::vector<Item> next;
        next.reserve(frontier.size() * map.branch_count());
        for (const auto& it : frontier) {
            for (int s = 0; s < map.branch_count(); ++s) {
                Item child{it.word, it.product * res.p.p[s]};
                child.word.push_back(map.branches()[s].label);
                double mu_val = mu.interval_mass(decode(map, SymbolWord{child.word}));
                double gap = std::abs(mu_val - child.product);
                if (gap > tol + tail) {
                    res.is_ifs = false;
                    res.witness = child.word;
                    res.witness_mu_value = mu_val;
                    res.witness_product_value = child.product;
                    res.gap = gap;
                    return res;
                }
                next.push_back(std::move(child));
            }
        }
        frontier = std::move(next);
    }
    return res;
}

} // namespace ruelle
