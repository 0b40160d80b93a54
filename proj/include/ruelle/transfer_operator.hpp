#pragma once

#include <cmath>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "ruelle/branch_map.hpp"
#include "ruelle/errors.hpp"
#include "ruelle/grid.hpp"

namespace ruelle {

// Pointwise weighted transfer operator R f(x) = sum_k W(tau_k x) f(tau_k x).
// The weight is a function of the preimage point y, as in the defining sum.
// Immutable; apply is pure and reentrant.
class TransferOperator {
public:
    TransferOperator(BranchMap map, RealFn weight, std::string weight_label = "custom")
        : map_(std::make_shared<BranchMap>(std::move(map))),
          weight_(std::move(weight)), weight_label_(std::move(weight_label)) {}

    TransferOperator(std::shared_ptr<const BranchMap> map, RealFn weight,
                     std::string weight_label = "custom")
        : map_(std::move(map)), weight_(std::move(weight)),
          weight_label_(std::move(weight_label)) {}

    const BranchMap& map() const { return *map_; }
    std::shared_ptr<const BranchMap> map_ptr() const { return map_; }
    const std::string& weight_label() const { return weight_label_; }
    double weight(double y) const { return weight_(y); }
    const RealFn& weight_fn() const { return weight_; }

    // closed form for sum_{k > k_max} W(tau_k x) of a truncated countable map
    void set_tail_weight(RealFn tw) { tail_weight_ = std::move(tw); }
    bool has_tail_weight() const { return static_cast<bool>(tail_weight_); }
    double tail_weight(double x) const { return tail_weight_ ? tail_weight_(x) : 0.0; }

    double apply(const RealFn& f, double x) const {
        double s = 0.0;
        for (const auto& b : map_->branches()) {
            if (!b.range.contains(x)) continue;
            double y = b.inverse(x);
            s += weight_(y) * f(y);
        }
        return s;
    }

    // R(1); includes the analytic tail of a truncated countable map when known
    double apply_one(double x) const {
        double s = apply([](double) { return 1.0; }, x);
        if (tail_weight_) s += tail_weight_(x);
        return s;
    }

    // atoms (tau_k x, W(tau_k x)) of the Riesz kernel at x, ordered by branch
    std::vector<std::pair<double, double>> kernel_atoms(double x) const {
        std::vector<std::pair<double, double>> atoms;
        for (const auto& b : map_->branches()) {
            if (!b.range.contains(x)) continue;
            double y = b.inverse(x);
            atoms.emplace_back(y, weight_(y));
        }
        return atoms;
    }

    double normalization_residual(int samples = 256) const {
        double r = 0.0;
        for (double x : golden_samples(samples))
            r = std::max(r, std::abs(apply_one(x) - 1.0));
        return r;
    }

    bool is_normalized(double tol = 1e-10, int samples = 256) const {
        if (!normalized_)
            normalized_ = normalization_residual(samples) <= tol + map_->tail_mass_bound();
        return *normalized_;
    }

private:
    std::shared_ptr<const BranchMap> map_;
    RealFn weight_;
    std::string weight_label_;
    RealFn tail_weight_;
    mutable std::optional<bool> normalized_;
};

inline RealFn weight_half() {
    return [](double) { return 0.5; };
}

inline RealFn weight_cos2() {
    // cos^2(pi y) computed as sin^2(pi(1/2 - y)) so the zero at y = 1/2 is exact
    return [](double y) {
        double s = std::sin(std::numbers::pi * (0.5 - y));
        return s * s;
    };
}

// Haar filter weight on the angle-parametrized circle, |m(e^{2 pi i y})|^2 / 2
inline RealFn weight_haar() {
    return [](double y) { return 0.5 * (1.0 + std::cos(2.0 * std::numbers::pi * y)); };
}

// 1/|sigma'| for the Gauss map: the density-transfer (Gauss-Kuzmin-Wirsing) weight
inline RealFn weight_gkw() {
    return [](double y) { return y * y; };
}

// Doob transform of the GKW weight by h(y) = 1/(1+y); gives the transfer
// operator normalized for the Gauss measure: W(y) = y^2 (1 + sigma(y))/(1 + y).
inline RealFn weight_gauss_norm() {
    return [](double y) {
        double s = 1.0 / y - std::floor(1.0 / y);
        return y * y * (1.0 + s) / (1.0 + y);
    };
}

inline RealFn weight_const(double c) {
    return [c](double) { return c; };
}

inline TransferOperator make_operator(const std::string& map_label, const std::string& weight_label,
                                      int k_max = 100) {
    BranchMap m = make_map_by_label(map_label, k_max);
    if (weight_label == "half") return TransferOperator(std::move(m), weight_half(), "half");
    if (weight_label == "cos2") return TransferOperator(std::move(m), weight_cos2(), "cos2");
    if (weight_label == "haar") return TransferOperator(std::move(m), weight_haar(), "haar");
    if (weight_label == "gkw") {
        TransferOperator R(std::move(m), weight_gkw(), "gkw");
        if (map_label == "gauss") {
            // trigamma tail sum_{k>K} (k+x)^{-2} = psi'(K+1+x), Euler-Maclaurin
            R.set_tail_weight([k_max](double x) {
                double z = k_max + 1.0 + x;
                return 1.0 / z + 0.5 / (z * z) + 1.0 / (6.0 * z * z * z) -
                       1.0 / (30.0 * z * z * z * z * z);
            });
        }
        return R;
    }
    if (weight_label == "gauss-norm") {
        TransferOperator R(std::move(m), weight_gauss_norm(), "gauss-norm");
        if (map_label == "gauss") {
            // telescoping tail sum_{k>K} (1+x)/((k+x)(k+x+1)) = (1+x)/(K+1+x)
            R.set_tail_weight([k_max](double x) { return (1.0 + x) / (k_max + 1.0 + x); });
        }
        return R;
    }
    if (weight_label.rfind("const:", 0) == 0) {
        double c = std::stod(weight_label.substr(6));
        return TransferOperator(std::move(m), weight_const(c), weight_label);
    }
    throw std::invalid_argument("unknown weight label: " + weight_label);
}

// max over samples of |R((f o sigma) g)(x) - f(x) R(g)(x)|
inline double check_pullout(const TransferOperator& R, const RealFn& f, const RealFn& g,
                            int samples = 1000) {
    const BranchMap& m = R.map();
    auto fg = [&](double y) { return f(m.sigma(y)) * g(y); };
    double res = 0.0;
    for (double x : golden_samples(samples)) {
        double lhs = R.apply(fg, x);
        double rhs = f(x) * R.apply(g, x);
        res = std::max(res, std::abs(lhs - rhs));
    }
    return res;
}

// f = f0 + fbar with R(f0) = 0 and fbar = R(f) o sigma constant on fibers.
// Requires a normalized operator.
inline std::pair<RealFn, RealFn> kernel_decompose(const TransferOperator& R, const RealFn& f) {
    if (!R.is_normalized())
        throw normalization_required_error(
            "kernel_decompose: operator is not normalized (R(1) != 1); apply doob first");
    RealFn fbar = [R, f](double x) { return R.apply(f, R.map().sigma(x)); };
    RealFn f0 = [f, fbar](double x) { return f(x) - fbar(x); };
    return {f0, fbar};
}

// E(f) = R(f) o sigma; the conditional expectation onto sigma^{-1}(B) when a
// sigma-invariant measure is in play.
inline RealFn expectation_E(const TransferOperator& R, const RealFn& f) {
    if (!R.is_normalized())
        throw normalization_required_error("expectation_E: operator is not normalized");
    return [R, f](double x) { return R.apply(f, R.map().sigma(x)); };
}

// Doob transform R_k(f) = R(fk)/k, realized by the weight
// W_k(y) = W(y) k(y) / k(sigma(y)). Normalized iff k is harmonic.
inline TransferOperator doob(const TransferOperator& R, const RealFn& k, int samples = 256) {
    for (double x : golden_samples(samples)) {
        if (!(k(x) > 0.0))
            throw std::invalid_argument("doob: k must be positive; k(" + std::to_string(x) +
                                        ") = " + std::to_string(k(x)));
    }
    auto map = R.map_ptr();
    RealFn w = R.weight_fn();
    RealFn wk = [map, w, k](double y) { return w(y) * k(y) / k(map->sigma(y)); };
    return TransferOperator(map, wk, R.weight_label() + "+doob");
}

inline double harmonicity_residual(const TransferOperator& R, const RealFn& h, int samples = 256) {
    double r = 0.0;
    for (double x : golden_samples(samples))
        r = std::max(r, std::abs(R.apply(h, x) - h(x)));
    return r;
}

// Cocycle identity for a harmonic h: with u_1 = R((h o sigma) h) and
// u_{j+1} = R((u_j o sigma) h), the value u_k equals h^{k+1}. Each level is
// one pull-out application; k = 1 is the exact identity R((h o sigma)h) = h^2.
inline double cocycle_check(const TransferOperator& R, const RealFn& h, int k_steps,
                            int samples = 200, double harmonic_tol = 1e-8) {
    double hr = harmonicity_residual(R, h, samples);
    if (hr > harmonic_tol)
        throw precondition_error("cocycle_check: h is not harmonic; residual " + std::to_string(hr),
                                 hr);
    TransferOperator Rc = R;
    auto map = R.map_ptr();
    RealFn u = [Rc, map, h](double x) {
        return Rc.apply([&](double y) { return h(map->sigma(y)) * h(y); }, x);
    };
    for (int j = 2; j <= k_steps; ++j) {
        RealFn prev = u;
        u = [Rc, map, h, prev](double x) {
            return Rc.apply([&](double y) { return prev(map->sigma(y)) * h(y); }, x);
        };
    }
    double res = 0.0;
    for (double x : golden_samples(samples)) {
        double target = std::pow(h(x), k_steps + 1);
        res = std::max(res, std::abs(u(x) - target));
    }
    return res;
}

// Conjugation by an invertible point map: sigma' = T o sigma o T^{-1},
// tau'_k = T o tau_k o T^{-1}, W' = W o T^{-1}.
inline TransferOperator conjugate(const TransferOperator& R, const RealFn& T, const RealFn& Tinv,
                                  int samples = 256) {
    for (double x : golden_samples(samples)) {
        double d = std::max(std::abs(T(Tinv(x)) - x), std::abs(Tinv(T(x)) - x));
        if (d > 1e-12)
            throw precondition_error("conjugate: T and T^{-1} are not mutually inverse", d);
    }
    std::vector<Branch> bs;
    for (const auto& b : R.map().branches()) {
        auto ordered = [&](const Interval& I) {
            double a = T(I.lo), c = T(I.hi);
            if (a > c) std::swap(a, c);
            return Interval{a, c};
        };
        RealFn fwd = b.forward;
        RealFn inv = b.inverse;
        bs.push_back({b.label, ordered(b.J), ordered(b.range),
                      [T, Tinv, fwd](double x) { return T(fwd(Tinv(x))); },
                      [T, Tinv, inv](double x) { return T(inv(Tinv(x))); }});
    }
    BranchMap conj_map(R.map().label() + "~conj", std::move(bs));
    // intertwining check T o sigma = sigma' o T on the original coordinates
    double dev = 0.0;
    for (double x : golden_samples(samples)) {
        try {
            dev = std::max(dev, std::abs(T(R.map().sigma(x)) - conj_map.sigma(T(x))));
        } catch (const tail_escape_error&) {
            continue;
        }
    }
    if (dev > 1e-10)
        throw not_conjugate_error("conjugate: intertwining T o sigma = sigma' o T fails", dev);
    RealFn w = R.weight_fn();
    return TransferOperator(std::make_shared<BranchMap>(std::move(conj_map)),
                            [w, Tinv](double y) { return w(Tinv(y)); },
                            R.weight_label() + "~conj");
}

// Union-find components of the cell-level functional graph i -> cell(sigma(mid_i)).
// sigma-invariant cell sets are exactly the unions of components.
struct CellComponents {
    std::vector<int> component; // per cell
    int count = 0;
};

inline CellComponents invariant_cell_components(const BranchMap& map, int n) {
    std::vector<int> parent(n);
    for (int i = 0; i < n; ++i) parent[i] = i;
    std::function<int(int)> find = [&](int i) {
        while (parent[i] != i) i = parent[i] = parent[parent[i]];
        return i;
    };
    for (int i = 0; i < n; ++i) {
        double img = map.sigma(FunctionOnGrid::midpoint(n, i));
        int j = FunctionOnGrid::cell_of(n, img);
        int a = find(i), b = find(j);
        if (a != b) parent[a] = b;
    }
    CellComponents cc;
    cc.component.resize(n);
    std::vector<int> remap(n, -1);
    for (int i = 0; i < n; ++i) {
        int r = find(i);
        if (remap[r] < 0) remap[r] = cc.count++;
        cc.component[i] = remap[r];
    }
    return cc;
}

// R_A(f) = R(chi_A f) for a sigma-invariant cell set A at resolution n.
inline TransferOperator restrict_to(const TransferOperator& R, const std::vector<bool>& A, int n) {
    std::vector<int> offenders;
    for (int i = 0; i < n; ++i) {
        double img = R.map().sigma(FunctionOnGrid::midpoint(n, i));
        int j = FunctionOnGrid::cell_of(n, img);
        if (A[i] != A[j]) offenders.push_back(i);
    }
    if (!offenders.empty())
        throw invariant_set_violation_error(
            "restrict_to: cell set is not sigma-invariant at this resolution (" +
                std::to_string(offenders.size()) + " offending cells)",
            offenders);
    RealFn w = R.weight_fn();
    auto indicator = [A, n](double y) { return A[FunctionOnGrid::cell_of(n, y)] ? 1.0 : 0.0; };
    return TransferOperator(R.map_ptr(),
                            [w, indicator](double y) { return w(y) * indicator(y); },
                            R.weight_label() + "|A");
}

} // namespace ruelle
