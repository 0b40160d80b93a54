#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "ruelle/branch_map.hpp"
#include "ruelle/errors.hpp"
#include "ruelle/grid.hpp"
#include "ruelle/transfer_operator.hpp"

namespace ruelle {

struct Atom {
    double x = 0.0;
    double mass = 0.0;
};

enum class MeasureKind { Histogram, Atomic, ClosedForm };

// Tagged measure representation: grid histogram (cell masses), atomic
// (finite Dirac combination), or closed-form density evaluable pointwise.
// Mixed atomic+histogram values are not supported; decompose first.
class Measure {
public:
    MeasureKind kind = MeasureKind::Histogram;
    int n = 0;                   // histogram cell count
    std::vector<double> cells;   // histogram cell masses
    std::vector<Atom> atoms;     // atomic part, locations in [0,1), distinct
    std::string label;           // closed-form label
    RealFn density;              // closed-form density w.r.t. Lebesgue

    static Measure histogram(std::vector<double> cell_masses) {
        Measure m;
        m.kind = MeasureKind::Histogram;
        m.n = static_cast<int>(cell_masses.size());
        m.cells = std::move(cell_masses);
        return m;
    }

    static Measure lebesgue_histogram(int n) {
        return histogram(std::vector<double>(n, 1.0 / n));
    }

    static Measure atomic(std::vector<Atom> as) {
        Measure m;
        m.kind = MeasureKind::Atomic;
        m.atoms = std::move(as);
        m.merge_atoms();
        return m;
    }

    static Measure dirac(double x, double mass = 1.0) { return atomic({{x, mass}}); }

    static Measure closed_form(const std::string& label_, int riesz_n = 0);

    double total_mass() const {
        double s = 0.0;
        if (kind == MeasureKind::Histogram)
            for (double c : cells) s += c;
        else if (kind == MeasureKind::Atomic)
            for (const auto& a : atoms) s += a.mass;
        else
            s = closed_form_mass(0.0, 1.0);
        return s;
    }

    // exact interval mass for the known closed forms; histogram by overlap
    double closed_form_mass(double a, double b) const {
        if (kind == MeasureKind::ClosedForm) {
            if (label == "lebesgue") return b - a;
            if (label == "gauss_mu0") return (std::log1p(b) - std::log1p(a)) / std::numbers::ln2;
            // generic closed form: composite midpoint fallback
            const int steps = 512;
            double h = (b - a) / steps, s = 0.0;
            for (int i = 0; i < steps; ++i) s += density(a + (i + 0.5) * h);
            return s * h;
        }
        if (kind == MeasureKind::Histogram) {
            if (!(b > a)) return 0.0;
            double s = 0.0;
            int i0 = std::max(0, static_cast<int>(std::floor(a * n)));
            int i1 = std::min(n - 1, static_cast<int>(std::floor(std::nextafter(b, a) * n)));
            for (int i = i0; i <= i1; ++i) {
                double lo = static_cast<double>(i) / n, hi = (i + 1.0) / n;
                double ov = std::min(b, hi) - std::max(a, lo);
                if (ov > 0) s += cells[i] * ov * n;
            }
            return s;
        }
        double s = 0.0;
        for (const auto& at : atoms)
            if (a <= at.x && at.x < b) s += at.mass;
        return s;
    }

    double interval_mass(const Interval& I) const { return closed_form_mass(I.lo, I.hi); }

    void merge_atoms(double loc_tol = 1e-12) {
        std::sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) { return a.x < b.x; });
        std::vector<Atom> merged;
        for (const auto& a : atoms) {
            if (a.mass == 0.0) continue;
            if (!merged.empty() && std::abs(merged.back().x - a.x) <= loc_tol)
                merged.back().mass += a.mass;
            else
                merged.push_back(a);
        }
        atoms = std::move(merged);
    }

    Measure normalized() const {
        Measure m = *this;
        double t = total_mass();
        if (t <= 0.0) throw std::invalid_argument("Measure::normalized: total mass is zero");
        if (m.kind == MeasureKind::Histogram)
            for (double& c : m.cells) c /= t;
        else if (m.kind == MeasureKind::Atomic)
            for (auto& a : m.atoms) a.mass /= t;
        return m;
    }
};

// (2 pi)^{-1} prod_{k=1}^{n} (1 + cos(2 * 3^k t)), t in [0, 2 pi)
inline double riesz_partial_density(int n, double t) {
    double p = 1.0 / (2.0 * std::numbers::pi);
    double freq = 1.0;
    for (int k = 1; k <= n; ++k) {
        freq *= 3.0;
        p *= 1.0 + std::cos(2.0 * freq * t);
    }
    return p;
}

inline Measure Measure::closed_form(const std::string& label_, int riesz_n) {
    Measure m;
    m.kind = MeasureKind::ClosedForm;
    m.label = label_;
    if (label_ == "lebesgue") {
        m.density = [](double) { return 1.0; };
    } else if (label_ == "gauss_mu0") {
        m.density = [](double x) { return 1.0 / ((1.0 + x) * std::numbers::ln2); };
    } else if (label_ == "riesz_partial") {
        // angle substitution t = 2 pi u; the 2 pi factors cancel so the
        // density w.r.t. du on [0,1) is the plain product
        m.label = "riesz_partial(" + std::to_string(riesz_n) + ")";
        m.density = [riesz_n](double u) {
            return 2.0 * std::numbers::pi * riesz_partial_density(riesz_n, 2.0 * std::numbers::pi * u);
        };
    } else {
        throw std::invalid_argument("Measure::closed_form: unknown label " + label_);
    }
    return m;
}

inline Measure histogram_from_closed_form(const Measure& cf, int n) {
    if (cf.kind != MeasureKind::ClosedForm)
        throw std::invalid_argument("histogram_from_closed_form: not a closed form");
    std::vector<double> cells(n);
    for (int i = 0; i < n; ++i)
        cells[i] = cf.closed_form_mass(static_cast<double>(i) / n, (i + 1.0) / n);
    return Measure::histogram(std::move(cells));
}

// exact atomic pushforward under sigma (atoms map through the branch maps)
inline Measure pushforward_atomic(const BranchMap& map, const Measure& mu) {
    if (mu.kind != MeasureKind::Atomic)
        throw std::invalid_argument("pushforward_atomic: measure is not atomic");
    std::vector<Atom> out;
    out.reserve(mu.atoms.size());
    for (const auto& a : mu.atoms) out.push_back({map.sigma(a.x), a.mass});
    return Measure::atomic(std::move(out));
}

// histogram pushforward (mu o sigma^{-1}) by exact interval transport of the
// per-cell uniform mass
inline Measure pushforward_histogram(const BranchMap& map, const Measure& mu) {
    if (mu.kind != MeasureKind::Histogram)
        throw std::invalid_argument("pushforward_histogram: measure is not a histogram");
    int n = mu.n;
    std::vector<double> out(n, 0.0);
    for (int j = 0; j < n; ++j) {
        if (mu.cells[j] == 0.0) continue;
        double lo = static_cast<double>(j) / n, hi = (j + 1.0) / n;
        for (const auto& b : map.branches()) {
            double a = std::max(lo, b.J.lo), c = std::min(hi, b.J.hi);
            if (c <= a) continue;
            double ia = b.forward(a), ic = b.forward(c);
            if (ia > ic) std::swap(ia, ic);
            double part = mu.cells[j] * (c - a) / (hi - lo);
            double len = ic - ia;
            if (len <= 0.0) continue;
            int i0 = FunctionOnGrid::cell_of(n, ia);
            int i1 = FunctionOnGrid::cell_of(n, std::nextafter(ic, ia));
            for (int i = i0; i <= i1; ++i) {
                double clo = static_cast<double>(i) / n, chi = (i + 1.0) / n;
                double ov = std::min(ic, chi) - std::max(ia, clo);
                if (ov > 0) out[i] += part * ov / len;
            }
        }
    }
    return Measure::histogram(std::move(out));
}

inline Measure pushforward_measure(const BranchMap& map, const Measure& mu) {
    if (mu.kind == MeasureKind::Atomic) return pushforward_atomic(map, mu);
    if (mu.kind == MeasureKind::Histogram) return pushforward_histogram(map, mu);
    throw must_discretize_error("pushforward: closed-form measure has no pushforward rule; "
                                "discretize to a histogram first");
}

// delta_x R = sum_k W(tau_k x) delta_{tau_k x}, applied atomwise (exact)
inline Measure act_on_atomic(const TransferOperator& R, const Measure& mu) {
    if (mu.kind != MeasureKind::Atomic)
        throw std::invalid_argument("act_on_atomic: measure is not atomic");
    std::vector<Atom> out;
    for (const auto& a : mu.atoms)
        for (const auto& [y, w] : R.kernel_atoms(a.x)) out.push_back({y, a.mass * w});
    return Measure::atomic(std::move(out));
}

inline double linf_distance(const Measure& a, const Measure& b) {
    if (a.kind == MeasureKind::Histogram && b.kind == MeasureKind::Histogram && a.n == b.n) {
        double d = 0.0;
        for (int i = 0; i < a.n; ++i) d = std::max(d, std::abs(a.cells[i] - b.cells[i]));
        return d;
    }
    if (a.kind == MeasureKind::Atomic && b.kind == MeasureKind::Atomic) {
        // union of atom locations
        double d = 0.0;
        auto mass_at = [](const Measure& m, double x) {
            for (const auto& at : m.atoms)
                if (std::abs(at.x - x) <= 1e-12) return at.mass;
            return 0.0;
        };
        for (const auto& at : a.atoms) d = std::max(d, std::abs(at.mass - mass_at(b, at.x)));
        for (const auto& bt : b.atoms) d = std::max(d, std::abs(bt.mass - mass_at(a, bt.x)));
        return d;
    }
    throw std::invalid_argument("linf_distance: incomparable measure representations");
}

inline double l1_distance(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
    return s;
}

// grid-scale absolute continuity: fails on cells where mu has mass but ref
// does not; atomic case is a support-inclusion test
inline bool absolutely_continuous(const Measure& mu, const Measure& ref,
                                  std::vector<int>* offending = nullptr, double atol = 1e-14) {
    bool ok = true;
    if (mu.kind == MeasureKind::Histogram && ref.kind == MeasureKind::Histogram && mu.n == ref.n) {
        for (int i = 0; i < mu.n; ++i)
            if (mu.cells[i] > atol && ref.cells[i] <= atol) {
                ok = false;
                if (offending) offending->push_back(i);
            }
        return ok;
    }
    if (mu.kind == MeasureKind::Atomic && ref.kind == MeasureKind::Atomic) {
        for (std::size_t i = 0; i < mu.atoms.size(); ++i) {
            if (mu.atoms[i].mass <= atol) continue;
            bool found = false;
            for (const auto& r : ref.atoms)
                if (std::abs(r.x - mu.atoms[i].x) <= 1e-12 && r.mass > atol) found = true;
            if (!found) {
                ok = false;
                if (offending) offending->push_back(static_cast<int>(i));
            }
        }
        return ok;
    }
    throw std::invalid_argument("absolutely_continuous: incomparable representations");
}

} // namespace ruelle
