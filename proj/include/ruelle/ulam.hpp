#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "ruelle/errors.hpp"
#include "ruelle/grid.hpp"
#include "ruelle/measure.hpp"
#include "ruelle/transfer_operator.hpp"

namespace ruelle {

// Nonnegative matrix discretizing the measure action mu -> mu R on an n-cell
// grid. Column-action convention: measures are column vectors acted on from
// the left (out = P m); the function-side action is the transpose.
class UlamMatrix {
public:
    int n = 0;
    std::string map_label;
    std::string weight_label;
    // sparse columns: cols[j] = {(row i, P[i][j])}
    std::vector<std::vector<std::pair<int, double>>> cols;

    std::vector<double> apply_to_measure(const std::vector<double>& m) const {
        std::vector<double> out(n, 0.0);
        for (int j = 0; j < n; ++j) {
            double mj = m[j];
            if (mj == 0.0) continue;
            for (const auto& [i, p] : cols[j]) out[i] += p * mj;
        }
        return out;
    }

    // transpose action on grid functions: out[j] = sum_i P[i][j] f[i]
    std::vector<double> apply_to_function(const std::vector<double>& f) const {
        std::vector<double> out(n, 0.0);
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (const auto& [i, p] : cols[j]) s += p * f[i];
            out[j] = s;
        }
        return out;
    }

    std::vector<double> column_sums() const {
        std::vector<double> s(n, 0.0);
        for (int j = 0; j < n; ++j)
            for (const auto& [i, p] : cols[j]) s[j] += p;
        return s;
    }

    double entry(int i, int j) const {
        for (const auto& [r, p] : cols[j])
            if (r == i) return p;
        return 0.0;
    }
};

// P[i][j] = sum_k W(tau_k(x_j)) * (fraction of cell j that tau_k maps into
// cell i), with x_j the cell midpoint and mass split by exact interval
// overlap of tau_k(cell_j).
inline UlamMatrix ulam_matrix(const TransferOperator& R, int n) {
    if (n < 2) throw std::invalid_argument("ulam_matrix: n must be >= 2");
    UlamMatrix M;
    M.n = n;
    M.map_label = R.map().label();
    M.weight_label = R.weight_label();
    M.cols.resize(n);
    std::vector<double> acc(n, 0.0);
    for (int j = 0; j < n; ++j) {
        std::fill(acc.begin(), acc.end(), 0.0);
        double lo = static_cast<double>(j) / n, hi = (j + 1.0) / n;
        double xj = FunctionOnGrid::midpoint(n, j);
        for (const auto& b : R.map().branches()) {
            // the branch transports the part of cell j inside its range
            double a = std::max(lo, b.range.lo), c = std::min(hi, b.range.hi);
            if (c <= a) continue;
            double w = R.weight(b.inverse(std::clamp(xj, a, c)));
            if (w == 0.0) continue;
            double ia = b.inverse(a), ic = b.inverse(c);
            if (ia > ic) std::swap(ia, ic);
            double len = ic - ia;
            double frac_in_range = (c - a) / (hi - lo);
            if (len <= 0.0) continue;
            int i0 = FunctionOnGrid::cell_of(n, ia);
            int i1 = FunctionOnGrid::cell_of(n, std::nextafter(ic, ia));
            for (int i = i0; i <= i1; ++i) {
                double clo = static_cast<double>(i) / n, chi = (i + 1.0) / n;
                double ov = std::min(ic, chi) - std::max(ia, clo);
                if (ov > 0) acc[i] += w * frac_in_range * ov / len;
            }
        }
        // truncated countable maps: the branches beyond k_max all land inside
        // (0, 1/(k_max+1)); reinstate that column mass when the tail sum has a
        // closed form, spreading it over the tail interval by length
        if (R.has_tail_weight() && R.map().countable()) {
            double tw = R.tail_weight(xj);
            if (tw > 0.0) {
                double t_hi = 1.0 / (R.map().k_max() + 1.0);
                int i1 = FunctionOnGrid::cell_of(n, std::nextafter(t_hi, 0.0));
                for (int i = 0; i <= i1; ++i) {
                    double clo = static_cast<double>(i) / n, chi = (i + 1.0) / n;
                    double ov = std::min(t_hi, chi) - std::max(0.0, clo);
                    if (ov > 0) acc[i] += tw * ov / t_hi;
                }
            }
        }
        for (int i = 0; i < n; ++i)
            if (acc[i] != 0.0) M.cols[j].emplace_back(i, acc[i]);
    }
    return M;
}

// mu R: atomic measures exactly, histograms through the Ulam matrix.
inline Measure act_on_measure(const TransferOperator& R, const Measure& mu) {
    if (mu.kind == MeasureKind::Atomic) return act_on_atomic(R, mu);
    if (mu.kind == MeasureKind::Histogram) {
        UlamMatrix M = ulam_matrix(R, mu.n);
        return Measure::histogram(M.apply_to_measure(mu.cells));
    }
    throw must_discretize_error(
        "act_on_measure: closed-form measure has no pushforward rule; discretize first");
}

inline Measure act_on_measure(const UlamMatrix& M, const Measure& mu) {
    if (mu.kind != MeasureKind::Histogram || mu.n != M.n)
        throw std::invalid_argument("act_on_measure: histogram resolution mismatch");
    return Measure::histogram(M.apply_to_measure(mu.cells));
}

// cellwise Radon-Nikodym derivative d(mu R)/d mu as a grid function
inline FunctionOnGrid radon_nikodym(const TransferOperator& R, const Measure& mu) {
    if (mu.kind != MeasureKind::Histogram)
        throw std::invalid_argument("radon_nikodym: measure must be a histogram");
    Measure muR = act_on_measure(R, mu);
    std::vector<int> offenders;
    if (!absolutely_continuous(muR, mu, &offenders))
        throw abs_continuity_error("radon_nikodym: mu R is not absolutely continuous w.r.t. mu "
                                   "at grid resolution (" +
                                       std::to_string(offenders.size()) + " offending cells)",
                                   offenders);
    FunctionOnGrid W(mu.n);
    for (int i = 0; i < mu.n; ++i)
        W[i] = mu.cells[i] > 0.0 ? muR.cells[i] / mu.cells[i] : 0.0;
    return W;
}

struct InvariantDensityResult {
    Measure density;          // probability histogram fixed by the matrix
    double residual = 0.0;    // final ||mu M - mu||_1
    int iterations = 0;
    double lambda2 = 0.0;     // second-eigenvalue modulus estimate
    bool unique = true;       // false when lambda2 is within 1e-6 of 1
};

// power iteration with a deterministic uniform start; residual-based stopping
inline InvariantDensityResult invariant_density(const UlamMatrix& M, double tol = 1e-12,
                                                int max_iter = 20000) {
    int n = M.n;
    std::vector<double> v(n, 1.0 / n);
    double res = 0.0;
    int it = 0;
    for (; it < max_iter; ++it) {
        std::vector<double> w = M.apply_to_measure(v);
        double t = 0.0;
        for (double x : w) t += x;
        if (t <= 0.0) throw no_convergence_error("invariant_density: total mass collapsed", 1.0, it);
        for (double& x : w) x /= t;
        res = l1_distance(w, v);
        v = std::move(w);
        if (res <= tol) break;
    }
    if (res > tol)
        throw no_convergence_error("invariant_density: power iteration did not converge", res,
                                   max_iter);

    InvariantDensityResult out;
    out.iterations = it + 1;
    out.residual = res;

    // deflated iteration in the zero-sum subspace estimates |lambda_2|;
    // low-discrepancy start so every eigendirection is hit
    std::vector<double> gs = golden_samples(n);
    std::vector<double> w(n);
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += gs[i];
    for (int i = 0; i < n; ++i) w[i] = gs[i] - s / n;
    double lambda2 = 0.0;
    for (int k = 0; k < 300; ++k) {
        std::vector<double> u = M.apply_to_measure(w);
        double su = 0.0;
        for (double x : u) su += x;
        for (double& x : u) x -= su / n;
        double nu = 0.0, nw = 0.0;
        for (int i = 0; i < n; ++i) {
            nu += u[i] * u[i];
            nw += w[i] * w[i];
        }
        if (nw == 0.0 || nu == 0.0) {
            lambda2 = 0.0;
            break;
        }
        lambda2 = std::sqrt(nu / nw);
        double scale = 1.0 / std::sqrt(nu);
        for (double& x : u) x *= scale;
        w = std::move(u);
    }
    out.lambda2 = lambda2;
    out.unique = lambda2 < 1.0 - 1e-6;
    out.density = Measure::histogram(std::move(v));
    return out;
}

struct HarmonicResult {
    FunctionOnGrid h;
    double residual = 0.0;
    int iterations = 0;
};

// nonnegative fixed vector of the function-side (transpose) action
inline HarmonicResult harmonic_function(const UlamMatrix& M, double tol = 1e-12,
                                        int max_iter = 20000) {
    int n = M.n;
    std::vector<double> h(n, 1.0);
    double res = 0.0;
    int it = 0;
    for (; it < max_iter; ++it) {
        std::vector<double> g = M.apply_to_function(h);
        double m = sup_norm(g);
        if (m <= 0.0) throw no_convergence_error("harmonic_function: vector collapsed", 1.0, it);
        for (double& x : g) x /= m;
        double d = 0.0;
        for (int i = 0; i < n; ++i) d = std::max(d, std::abs(g[i] - h[i]));
        h = std::move(g);
        std::vector<double> check = M.apply_to_function(h);
        res = 0.0;
        for (int i = 0; i < n; ++i) res = std::max(res, std::abs(check[i] - h[i]));
        if (res <= tol) break;
        (void)d;
    }
    if (res > tol)
        throw no_convergence_error("harmonic_function: no convergence", res, max_iter);
    HarmonicResult out;
    out.iterations = it + 1;
    out.residual = res;
    out.h.n = n;
    out.h.values = std::move(h);
    return out;
}

struct Table1Cell {
    std::string name;
    bool pass = false;
    double residual = 0.0;
    std::string note;
};

struct Table1Report {
    std::vector<Table1Cell> cells;
    bool all_pass() const {
        for (const auto& c : cells)
            if (!c.pass) return false;
        return true;
    }
};

// Programmatic check of the four invariant-measure statements for the
// doubling-map operators with weights 1/2 and cos^2(pi y).
inline Table1Report verify_table1(int n = 2048) {
    Table1Report rep;
    TransferOperator Rhalf = make_operator("doubling", "half");
    TransferOperator Rcos = make_operator("doubling", "cos2");

    { // mu R_sigma = mu (Lebesgue histogram is exactly fixed)
        Measure mu = Measure::lebesgue_histogram(n);
        Measure out = act_on_measure(Rhalf, mu);
        double r = linf_distance(out, mu) * n; // density scale
        rep.cells.push_back({"lebesgue_fixed_by_Rhalf", r <= 1e-9, r, "mu R = mu"});
    }
    { // delta_0 R_sigma = (delta_0 + delta_{1/2})/2, not << delta_0
        Measure d0 = Measure::dirac(0.0);
        Measure out = act_on_atomic(Rhalf, d0);
        Measure expect = Measure::atomic({{0.0, 0.5}, {0.5, 0.5}});
        double r = linf_distance(out, expect);
        bool not_ac = !absolutely_continuous(out, d0);
        rep.cells.push_back({"dirac0_under_Rhalf", r <= 1e-12 && not_ac, r,
                             "delta_0 R = (delta_0 + delta_{1/2})/2, not << delta_0"});
    }
    { // d(mu R'_sigma)/d mu = 2 cos^2(pi x)
        Measure mu = Measure::lebesgue_histogram(n);
        FunctionOnGrid W = radon_nikodym(Rcos, mu);
        double r = 0.0;
        for (int i = 0; i < n; ++i) {
            double x = W.midpoint(i);
            double c = std::cos(std::numbers::pi * x);
            r = std::max(r, std::abs(W[i] - 2.0 * c * c));
        }
        rep.cells.push_back({"density_2cos2_under_Rcos", r <= 5.0 / n, r, "d(mu R') = 2cos^2(pi x) dx"});
    }
    { // delta_0 R'_sigma = delta_0
        Measure d0 = Measure::dirac(0.0);
        Measure out = act_on_atomic(Rcos, d0);
        double r = linf_distance(out, Measure::dirac(0.0));
        rep.cells.push_back({"dirac0_fixed_by_Rcos", r <= 1e-12, r, "delta_0 R' = delta_0"});
    }
    return rep;
}

} // namespace ruelle
