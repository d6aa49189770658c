#pragma once
#include <cmath>
#include <functional>
#include <stdexcept>

namespace perpdual::detail {

/// Adaptive Simpson quadrature with absolute+relative tolerance.
inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double rtol = 1e-12, double atol = 1e-15, int max_depth = 60) {
    struct Impl {
        const std::function<double(double)>& f;
        double rtol, atol;
        double recurse(double a, double m, double b, double fa, double fm, double fb,
                       double whole, int depth) const {
            double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
            double flm = f(lm), frm = f(rm);
            double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            double delta = left + right - whole;
            if (depth <= 0)
                throw std::runtime_error("adaptive_simpson: max depth reached");
            if (std::abs(delta) <= 15.0 * (atol + rtol * std::abs(left + right)))
                return left + right + delta / 15.0;
            return recurse(a, lm, m, fa, flm, fm, left, depth - 1) +
                   recurse(m, rm, b, fm, frm, fb, right, depth - 1);
        }
    };
    if (a == b) return 0.0;
    double m = 0.5 * (a + b);
    double fa = f(a), fm = f(m), fb = f(b);
    double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return Impl{f, rtol, atol}.recurse(a, m, b, fa, fm, fb, whole, max_depth);
}

} // namespace perpdual::detail
