#pragma once
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace perpdual::detail {

/// First and second derivatives of sampled data y(x) at node i.
struct NodeDerivs {
    double d1 = 0.0;
    double d2 = 0.0;
};

/// True when the grid is uniform in log(x) to a tight relative tolerance.
inline bool is_log_uniform(const std::vector<double>& x, double tol = 1e-8) {
    if (x.size() < 3) return false;
    double h0 = std::log(x[1] / x[0]);
    for (std::size_t i = 2; i < x.size(); ++i)
        if (std::abs(std::log(x[i] / x[i - 1]) - h0) > tol * std::abs(h0)) return false;
    return true;
}

/// Derivatives in the original variable from a log-uniform grid using
/// centered 5-point stencils in s = ln x (4th order). Nodes closer than two
/// steps to either end fall back to the 3-point stencil.
/// With u(s) = y(e^s):  y' = u_s / x,  y'' = (u_ss - u_s) / x^2.
inline NodeDerivs log_grid_derivs(const std::vector<double>& x, const std::vector<double>& y,
                                  std::size_t i, double h) {
    const std::size_t n = x.size();
    if (n < 3 || i == 0 || i + 1 >= n)
        throw std::invalid_argument("log_grid_derivs: interior node required");
    double us, uss;
    if (i >= 2 && i + 2 < n) {
        us = (-y[i + 2] + 8.0 * y[i + 1] - 8.0 * y[i - 1] + y[i - 2]) / (12.0 * h);
        uss = (-y[i + 2] + 16.0 * y[i + 1] - 30.0 * y[i] + 16.0 * y[i - 1] - y[i - 2]) /
              (12.0 * h * h);
    } else {
        us = (y[i + 1] - y[i - 1]) / (2.0 * h);
        uss = (y[i + 1] - 2.0 * y[i] + y[i - 1]) / (h * h);
    }
    return {us / x[i], (uss - us) / (x[i] * x[i])};
}

/// Second-order 3-point derivatives on an arbitrary (non-uniform) grid.
inline NodeDerivs nonuniform_derivs(const std::vector<double>& x, const std::vector<double>& y,
                                    std::size_t i) {
    const std::size_t n = x.size();
    if (n < 3 || i == 0 || i + 1 >= n)
        throw std::invalid_argument("nonuniform_derivs: interior node required");
    double hm = x[i] - x[i - 1], hp = x[i + 1] - x[i];
    double d1 = (hm * hm * y[i + 1] + (hp * hp - hm * hm) * y[i] - hp * hp * y[i - 1]) /
                (hm * hp * (hm + hp));
    double d2 = 2.0 * (hm * y[i + 1] - (hm + hp) * y[i] + hp * y[i - 1]) /
                (hm * hp * (hm + hp));
    return {d1, d2};
}

} // namespace perpdual::detail
