#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>

#include "ruelle/grid.hpp"

namespace ruelle {

namespace detail {
// 16-point Gauss-Legendre nodes/weights on [-1, 1]
inline const double gl_x[8] = {0.0950125098376374, 0.2816035507792589, 0.4580167776572274,
                               0.6178762444026438, 0.7554044083550030, 0.8656312023878318,
                               0.9445750230732326, 0.9894009349916499};
inline const double gl_w[8] = {0.1894506104550685, 0.1826034150449236, 0.1691565193950025,
                               0.1495959888165767, 0.1246289712555339, 0.0951585116824928,
                               0.0622535239386479, 0.0271524594117541};

inline double gl16(const RealFn& f, double a, double b) {
    double c = 0.5 * (a + b), h = 0.5 * (b - a), s = 0.0;
    for (int i = 0; i < 8; ++i)
        s += gl_w[i] * (f(c - h * gl_x[i]) + f(c + h * gl_x[i]));
    return s * h;
}

inline double adaptive(const RealFn& f, double a, double b, double whole, double tol, int depth) {
    double c = 0.5 * (a + b);
    double left = gl16(f, a, c), right = gl16(f, c, b);
    if (std::abs(left + right - whole) <= tol || depth >= 24)
        return left + right;
    return adaptive(f, a, c, left, tol * 0.5, depth + 1) +
           adaptive(f, c, b, right, tol * 0.5, depth + 1);
}
} // namespace detail

// adaptive Gauss-Legendre with absolute-error target
inline double integrate(const RealFn& f, double a, double b, double tol = 1e-10) {
    if (!(b > a)) return 0.0;
    return detail::adaptive(f, a, b, detail::gl16(f, a, b), tol, 0);
}

} // namespace ruelle
