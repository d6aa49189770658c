#pragma once
#include <algorithm>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <vector>

#include "perpdual/boundary.hpp"
#include "perpdual/calibration.hpp"
#include "perpdual/detail/parallel.hpp"
#include "perpdual/params.hpp"
#include "perpdual/volatility.hpp"

namespace perpdual {

/// Finite-difference grid in log-spot and calendar time.
struct FDGridSpec {
    double s_min = -4.0;   // ln spot span
    double s_max = 4.0;
    std::size_t n_space = 1201;
    std::size_t n_time = 2000;
    double maturity = 1.0;

    void validate() const {
        if (!(s_min < s_max)) throw std::invalid_argument("FDGridSpec: need s_min < s_max");
        if (n_space < 3) throw std::invalid_argument("FDGridSpec: need n_space >= 3");
        if (n_time < 1) throw std::invalid_argument("FDGridSpec: need n_time >= 1");
        if (!(maturity > 0.0)) throw std::invalid_argument("FDGridSpec: need maturity > 0");
    }
};

/// Grid sized for a target price: the exercise side gets a short pad (the
/// intrinsic Dirichlet value is exact there), the decay side a long one, and
/// the nodes are shifted so ln(spot) falls exactly on a node.
inline FDGridSpec default_fd_grid(const ModelParams& p, const VolatilityCurve& curve,
                                  OptionKind kind, double x, double y, double T) {
    if (!(x > 0.0) || !(y > 0.0) || !(T > 0.0))
        throw std::invalid_argument("default_fd_grid: x, y, T must be > 0");
    double lx = std::log(x), ly = std::log(y);
    double s_min, s_max;
    if (kind == OptionKind::put) {
        double cone = (p.r > 0.0) ? boundary_cone(p, Side::put, curve.sigma_lo, curve.sigma_hi).lo
                                  : 0.25;
        s_min = std::min(lx, ly + std::log(cone)) - 2.0;
        s_max = std::max(lx, ly) + 8.0;
    } else {
        double cone = (p.delta > 0.0)
                          ? boundary_cone(dual_params(p), Side::call, curve.sigma_lo, curve.sigma_hi).hi
                          : 4.0;
        s_max = std::max(lx, ly + std::log(cone)) + 2.0;
        s_min = std::min(lx, ly) - 8.0;
    }
    FDGridSpec g;
    g.maturity = T;
    g.n_space = std::clamp<std::size_t>(std::size_t((s_max - s_min) / 0.009) + 1, 801, 4001);
    double ds = (s_max - s_min) / double(g.n_space - 1);
    double shift = lx - (s_min + std::round((lx - s_min) / ds) * ds);
    g.s_min = s_min + shift;
    g.s_max = g.s_min + ds * double(g.n_space - 1);
    g.n_time = std::clamp<std::size_t>(std::size_t(1460.0 * T), 200, 80000);
    return g;
}

struct FDResult {
    double price = 0.0;
    bool kink_warning = false;
};

namespace detail {

/// One projected theta-step of the American LCP on a tridiagonal system,
/// solved by projected successive over-relaxation warm-started from the
/// previous layer.
inline void psor_step(const std::vector<double>& lower, const std::vector<double>& diag,
                      const std::vector<double>& upper, const std::vector<double>& rhs,
                      const std::vector<double>& payoff, std::vector<double>& u) {
    const std::size_t n = u.size();
    const double omega = 1.35;
    double scale = 1.0;
    for (double v : payoff) scale = std::max(scale, std::abs(v));
    const double tol = 1e-11 * scale;
    for (int it = 0; it < 4000; ++it) {
        double worst = 0.0;
        for (std::size_t i = 1; i + 1 < n; ++i) {
            double gs = (rhs[i] - lower[i] * u[i - 1] - upper[i] * u[i + 1]) / diag[i];
            double cand = std::max(payoff[i], u[i] + omega * (gs - u[i]));
            worst = std::max(worst, std::abs(cand - u[i]));
            u[i] = cand;
        }
        if (worst <= tol) return;
    }
    throw std::runtime_error("fd: PSOR failed to converge");
}

} // namespace detail

/// Finite-maturity American option price under local volatility:
/// Crank-Nicolson in log-spot with a Rannacher start-up, early exercise
/// enforced by per-step projection, intrinsic Dirichlet values at the far
/// boundaries, price read at the spot node.
inline FDResult fd_american_price(const ModelParams& p, const VolatilityCurve& curve,
                                  OptionKind kind, double x, double y, const FDGridSpec& g) {
    p.validate();
    g.validate();
    if (!(x > 0.0) || !(y > 0.0))
        throw std::invalid_argument("fd_american_price: spot and strike must be > 0");
    double lx = std::log(x);
    if (!(lx > g.s_min) || !(lx < g.s_max))
        throw std::invalid_argument("fd_american_price: spot outside grid interior");

    const std::size_t n = g.n_space;
    const double ds = (g.s_max - g.s_min) / double(n - 1);
    std::vector<double> payoff(n), sig2(n);
    for (std::size_t i = 0; i < n; ++i) {
        double xi = std::exp(g.s_min + ds * double(i));
        payoff[i] = (kind == OptionKind::put) ? std::max(y - xi, 0.0) : std::max(xi - y, 0.0);
        double sg = curve(xi);
        sig2[i] = sg * sg;
    }
    FDResult out;
    double ly = std::log(y);
    out.kink_warning = !(ly > g.s_min + ds && ly < g.s_max - ds) || ds > 0.1;

    // spatial operator L u = A (u_ss) + B u_s - r u  per node
    std::vector<double> lo_op(n), di_op(n), up_op(n);
    for (std::size_t i = 0; i < n; ++i) {
        double A = 0.5 * sig2[i] / (ds * ds);
        double B = (p.r - p.delta - 0.5 * sig2[i]) / (2.0 * ds);
        lo_op[i] = A - B;
        di_op[i] = -2.0 * A - p.r;
        up_op[i] = A + B;
    }

    std::vector<double> u(payoff), rhs(n), lower(n), diag(n), upper(n);
    const double k = g.maturity / double(g.n_time);
    auto do_step = [&](double theta, double dt) {
        for (std::size_t i = 1; i + 1 < n; ++i) {
            double expl = (theta < 1.0)
                              ? (1.0 - theta) * dt *
                                    (lo_op[i] * u[i - 1] + di_op[i] * u[i] + up_op[i] * u[i + 1])
                              : 0.0;
            rhs[i] = u[i] + expl;
            lower[i] = -theta * dt * lo_op[i];
            diag[i] = 1.0 - theta * dt * di_op[i];
            upper[i] = -theta * dt * up_op[i];
        }
        rhs[1] -= lower[1] * payoff[0];
        rhs[n - 2] -= upper[n - 2] * payoff[n - 1];
        lower[1] = 0.0;
        upper[n - 2] = 0.0;
        u[0] = payoff[0];
        u[n - 1] = payoff[n - 1];
        detail::psor_step(lower, diag, upper, rhs, payoff, u);
    };
    // Rannacher start-up: the first two steps as implicit-Euler half-steps
    std::size_t rann = std::min<std::size_t>(2, g.n_time);
    for (std::size_t m = 0; m < rann; ++m) {
        do_step(1.0, 0.5 * k);
        do_step(1.0, 0.5 * k);
    }
    for (std::size_t m = rann; m < g.n_time; ++m) do_step(0.5, k);

    double pos = (lx - g.s_min) / ds;
    auto i0 = std::min(static_cast<std::size_t>(pos), n - 2);
    double t = pos - double(i0);
    out.price = (1.0 - t) * u[i0] + t * u[i0 + 1];
    return out;
}

struct SweepPoint {
    double maturity;
    double price;
};

/// Price the same contract across maturities; each solve is independent and
/// runs under the process thread cap.
inline std::vector<SweepPoint> convergence_sweep(const ModelParams& p, const VolatilityCurve& curve,
                                                 OptionKind kind, double x, double y,
                                                 const std::vector<double>& maturities) {
    for (std::size_t i = 1; i < maturities.size(); ++i)
        if (!(maturities[i] > maturities[i - 1]))
            throw std::invalid_argument("convergence_sweep: maturities must be increasing");
    std::vector<SweepPoint> out(maturities.size());
    detail::parallel_for(maturities.size(), [&](std::size_t i) {
        auto g = default_fd_grid(p, curve, kind, x, y, maturities[i]);
        out[i] = {maturities[i], fd_american_price(p, curve, kind, x, y, g).price};
    });
    return out;
}

} // namespace perpdual
