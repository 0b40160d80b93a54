#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "ruelle/errors.hpp"
#include "ruelle/grid.hpp"

namespace ruelle {

struct Interval {
    double lo = 0.0;
    double hi = 1.0;
    double length() const { return hi - lo; }
    double midpoint() const { return 0.5 * (lo + hi); }
    bool contains(double x) const { return lo <= x && x < hi; }
};

// One injective branch of a piecewise map: forward maps J onto `range`,
// inverse is its right inverse (sigma o tau = id on range, tau(range) = J).
struct Branch {
    int label = 0;
    Interval J;
    Interval range{0.0, 1.0};
    RealFn forward;
    RealFn inverse;
};

struct SymbolWord {
    std::vector<int> symbols;
    std::size_t length() const { return symbols.size(); }
};

// Piecewise-injective interval endomorphism given by branch intervals,
// forward branch maps and inverse branches. Immutable after construction.
class BranchMap {
public:
    BranchMap(std::string label, std::vector<Branch> branches,
              std::function<int(double)> locate = nullptr, double tol = 1e-12)
        : label_(std::move(label)), branches_(std::move(branches)),
          locate_(std::move(locate)), tol_(tol) {}

    const std::string& label() const { return label_; }
    int branch_count() const { return static_cast<int>(branches_.size()); }
    bool countable() const { return countable_; }
    int k_max() const { return k_max_; }
    double tail_mass_bound() const { return tail_mass_bound_; }
    double tol() const { return tol_; }

    const std::vector<Branch>& branches() const { return branches_; }

    const Branch* find_branch(int label) const {
        for (const auto& b : branches_)
            if (b.label == label) return &b;
        return nullptr;
    }

    const Branch& branch(int label) const {
        const Branch* b = find_branch(label);
        if (!b) throw std::invalid_argument(label_ + ": no branch with index " + std::to_string(label));
        return *b;
    }

    // branch containing x, or tail_escape_error when x falls outside every
    // branch (Gauss truncation tail).
    int branch_of(double x) const {
        if (locate_) {
            int lbl = locate_(x);
            if (lbl < 0)
                throw tail_escape_error(label_ + ": point " + std::to_string(x) +
                                            " lies outside all branch intervals (truncation tail)",
                                        0);
            return lbl;
        }
        for (const auto& b : branches_)
            if (b.J.contains(x)) return b.label;
        throw tail_escape_error(label_ + ": point " + std::to_string(x) +
                                    " lies outside all branch intervals",
                                0);
    }

    double sigma(double x) const { return branch(branch_of(x)).forward(x); }

    double tau(int label, double x) const { return branch(label).inverse(x); }

    // all preimages of x under the truncated map: (branch label, tau_label(x))
    std::vector<std::pair<int, double>> preimages(double x) const {
        std::vector<std::pair<int, double>> ys;
        ys.reserve(branches_.size());
        for (const auto& b : branches_)
            if (b.range.contains(x)) ys.emplace_back(b.label, b.inverse(x));
        return ys;
    }

    void set_countable(int k_max, double tail_mass_bound) {
        countable_ = true;
        k_max_ = k_max;
        tail_mass_bound_ = tail_mass_bound;
    }

private:
    std::string label_;
    std::vector<Branch> branches_;
    std::function<int(double)> locate_;
    double tol_;
    bool countable_ = false;
    int k_max_ = 0;
    double tail_mass_bound_ = 0.0;
};

// sigma(x) = 2x mod 1 with J0 = [0,1/2), J1 = [1/2,1).
inline BranchMap make_doubling() {
    std::vector<Branch> bs;
    bs.push_back({0, {0.0, 0.5}, {0.0, 1.0},
                  [](double x) { return 2.0 * x; },
                  [](double x) { return x / 2.0; }});
    bs.push_back({1, {0.5, 1.0}, {0.0, 1.0},
                  [](double x) { return 2.0 * x - 1.0; },
                  [](double x) { return (x + 1.0) / 2.0; }});
    return BranchMap("doubling", std::move(bs),
                     [](double x) { return x < 0.5 ? 0 : 1; });
}

// Gauss map sigma(x) = 1/x - floor(1/x), truncated at k_max branches.
// J_k = (1/(k+1), 1/k], tau_k(x) = 1/(k+x); branch indices are 1-based.
inline BranchMap make_gauss(int k_max) {
    if (k_max < 1) throw std::invalid_argument("make_gauss: k_max must be >= 1");
    std::vector<Branch> bs;
    bs.reserve(k_max);
    for (int k = 1; k <= k_max; ++k) {
        double lo = 1.0 / (k + 1.0);
        double hi = 1.0 / k;
        bs.push_back({k, {lo, hi}, {0.0, 1.0},
                      [k](double x) { return 1.0 / x - k; },
                      [k](double x) { return 1.0 / (k + x); }});
    }
    auto locate = [k_max](double x) -> int {
        if (x <= 0.0 || x > 1.0) return -1;
        int k = static_cast<int>(std::floor(1.0 / x));
        if (k < 1) k = 1;
        return k <= k_max ? k : -1;
    };
    BranchMap m("gauss", std::move(bs), locate);
    m.set_countable(k_max, 1.0 / (k_max + 1.0));
    return m;
}

// Two disjoint doubling copies on [0,1/2) and [1/2,1); a reducible control
// case for restriction / ergodic-decomposition tests.
inline BranchMap make_two_component() {
    std::vector<Branch> bs;
    bs.push_back({0, {0.0, 0.25}, {0.0, 0.5},
                  [](double x) { return 2.0 * x; },
                  [](double x) { return x / 2.0; }});
    bs.push_back({1, {0.25, 0.5}, {0.0, 0.5},
                  [](double x) { return 2.0 * x - 0.5; },
                  [](double x) { return x / 2.0 + 0.25; }});
    bs.push_back({2, {0.5, 0.75}, {0.5, 1.0},
                  [](double x) { return 2.0 * x - 0.5; },
                  [](double x) { return x / 2.0 + 0.25; }});
    bs.push_back({3, {0.75, 1.0}, {0.5, 1.0},
                  [](double x) { return 2.0 * x - 1.0; },
                  [](double x) { return (x + 1.0) / 2.0; }});
    return BranchMap("two-component", std::move(bs));
}

inline BranchMap make_map_by_label(const std::string& label, int k_max = 100) {
    if (label == "doubling") return make_doubling();
    if (label == "gauss") return make_gauss(k_max);
    if (label == "two-component") return make_two_component();
    throw std::invalid_argument("unknown map label: " + label);
}

// Symbolic coding: word (k_1,...,k_m) with sigma^{i-1}(x) in J_{k_i}.
inline SymbolWord encode(const BranchMap& map, double x, int depth) {
    SymbolWord w;
    w.symbols.reserve(depth);
    double y = x;
    for (int i = 0; i < depth; ++i) {
        int k;
        try {
            k = map.branch_of(y);
        } catch (const tail_escape_error&) {
            throw tail_escape_error(map.label() + ": encode: iterate " + std::to_string(i) +
                                        " escaped into the truncation tail",
                                    i);
        }
        w.symbols.push_back(k);
        y = map.branch(k).forward(y);
    }
    return w;
}

// Interval with ordered endpoints {tau_{k1} o ... o tau_{km}(0), ...(1)};
// the empty word decodes to the full interval.
inline Interval decode(const BranchMap& map, const SymbolWord& w) {
    double a = 0.0, b = 1.0;
    for (auto it = w.symbols.rbegin(); it != w.symbols.rend(); ++it) {
        const Branch& br = map.branch(*it);
        a = br.inverse(a);
        b = br.inverse(b);
    }
    if (a > b) std::swap(a, b);
    return {a, b};
}

// Truncated solenoid point: backward orbit (x_0, x_1, ..., x_m) with
// sigma(x_{i+1}) = x_i; labels[i] is the branch containing x_{i+1}.
struct SolenoidPoint {
    std::vector<double> coords;
    std::vector<int> labels;

    double base() const { return coords.front(); }
    SymbolWord history() const { return SymbolWord{labels}; }
    std::size_t depth() const { return labels.size(); }
};

inline SolenoidPoint make_solenoid_point(const BranchMap& map, double base,
                                         const SymbolWord& history) {
    SolenoidPoint p;
    p.coords.push_back(base);
    double x = base;
    for (int k : history.symbols) {
        x = map.branch(k).inverse(x);
        p.coords.push_back(x);
        p.labels.push_back(k);
    }
    return p;
}

// sigma~(x_0, x_1, ...) = (sigma(x_0), x_0, x_1, ...)
inline SolenoidPoint solenoid_lift(const BranchMap& map, const SolenoidPoint& p) {
    SolenoidPoint q;
    int k = map.branch_of(p.base());
    q.coords.reserve(p.coords.size() + 1);
    q.coords.push_back(map.branch(k).forward(p.base()));
    q.coords.insert(q.coords.end(), p.coords.begin(), p.coords.end());
    q.labels.reserve(p.labels.size() + 1);
    q.labels.push_back(k);
    q.labels.insert(q.labels.end(), p.labels.begin(), p.labels.end());
    return q;
}

// truncated inverse: drops the newest coordinate
inline SolenoidPoint solenoid_drop(const SolenoidPoint& p) {
    if (p.labels.empty())
        throw history_exhausted_error("solenoid_drop: history exhausted, cannot drop below depth 0");
    SolenoidPoint q;
    q.coords.assign(p.coords.begin() + 1, p.coords.end());
    q.labels.assign(p.labels.begin() + 1, p.labels.end());
    return q;
}

// max over recorded steps of |sigma(x_{i+1}) - x_i|
inline double solenoid_residual(const BranchMap& map, const SolenoidPoint& p) {
    double r = 0.0;
    for (std::size_t i = 0; i + 1 < p.coords.size(); ++i)
        r = std::max(r, std::abs(map.sigma(p.coords[i + 1]) - p.coords[i]));
    return r;
}

} // namespace ruelle
