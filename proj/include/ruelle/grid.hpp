#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace ruelle {

using RealFn = std::function<double(double)>;

// Values at the n uniform cell midpoints of [0,1). Cell boundaries are never
// evaluated.
struct FunctionOnGrid {
    int n = 0;
    std::vector<double> values;

    FunctionOnGrid() = default;
    explicit FunctionOnGrid(int n_, double fill = 0.0) : n(n_), values(n_, fill) {
        if (n_ < 1) throw std::invalid_argument("FunctionOnGrid: n must be >= 1");
    }

    static FunctionOnGrid sample(const RealFn& f, int n) {
        FunctionOnGrid g(n);
        for (int i = 0; i < n; ++i) g.values[i] = f(midpoint(n, i));
        return g;
    }

    static double midpoint(int n, int i) { return (i + 0.5) / n; }
    double midpoint(int i) const { return midpoint(n, i); }

    double& operator[](int i) { return values[i]; }
    double operator[](int i) const { return values[i]; }

    // treats the grid function as a step function on [0,1)
    double eval(double x) const { return values[cell_of(n, x)]; }

    static int cell_of(int n, double x) {
        int i = static_cast<int>(std::floor(x * n));
        return std::clamp(i, 0, n - 1);
    }
};

// Low-discrepancy sample points x_i = frac(x0 + i*phi) used wherever the
// contracts say "quasi-random".
inline std::vector<double> golden_samples(int count, double x0 = 0.5) {
    static const double phi = 0.6180339887498948482;
    std::vector<double> xs(count);
    double x = x0;
    for (int i = 0; i < count; ++i) {
        x += phi;
        x -= std::floor(x);
        xs[i] = x;
    }
    return xs;
}

inline double sup_norm(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

} // namespace ruelle
