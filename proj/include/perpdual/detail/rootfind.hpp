#pragma once
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

namespace perpdual::detail {

/// Bracketed secant with bisection fallback. Requires f(a) and f(b) of
/// opposite sign; converges to |interval| <= tol_rel*|x| + tol_abs.
inline double find_root(const std::function<double(double)>& f, double a, double b,
                        double tol_rel = 1e-14, double tol_abs = 0.0, int max_iter = 200) {
    double fa = f(a), fb = f(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if ((fa > 0.0) == (fb > 0.0))
        throw std::runtime_error("find_root: root not bracketed");
    for (int it = 0; it < max_iter; ++it) {
        double tol = tol_rel * std::max(std::abs(a), std::abs(b)) + tol_abs +
                     2.0 * std::numeric_limits<double>::epsilon() * std::abs(b);
        if (std::abs(b - a) <= tol) break;
        // secant proposal, clipped to the bracket interior
        double x = b - fb * (b - a) / (fb - fa);
        double lo = std::min(a, b), hi = std::max(a, b);
        double margin = 0.01 * (hi - lo);
        if (!(x > lo + margin) || !(x < hi - margin)) x = 0.5 * (a + b);
        double fx = f(x);
        if (fx == 0.0) return x;
        if ((fx > 0.0) == (fa > 0.0)) { a = x; fa = fx; }
        else                          { b = x; fb = fx; }
    }
    return 0.5 * (a + b);
}

} // namespace perpdual::detail
