#pragma once
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "perpdual/boundary.hpp"
#include "perpdual/detail/parallel.hpp"
#include "perpdual/pricing.hpp"
#include "perpdual/volatility.hpp"

namespace perpdual {

/// Grid check of the put / dual-call price equality together with the
/// boundary-inverse identity.
struct DualityReport {
    std::vector<double> xs, ys;          // the mesh axes
    std::vector<double> primal_values;   // row-major over (x, y)
    std::vector<double> dual_values;
    double max_rel_gap = 0.0;
    double boundary_inverse_gap = 0.0;
    double price_tol = 1e-4;
    double boundary_tol = 1e-5;
    bool pass = false;
};

namespace detail {

inline void check_boundary_matches_curve(const ModelParams& p, const VolatilityCurve& curve,
                                         const Boundary& b) {
    double worst = 0.0;
    for (std::size_t i = 1; i + 1 < b.grid.size(); ++i) {
        double t = std::log(b.grid[i]), z = std::log(b.values[i]);
        double want = boundary_ode_rhs(p, curve, b.side, t, z) * b.values[i] / b.grid[i];
        worst = std::max(worst, std::abs(b.derivs[i] - want) / std::abs(want));
    }
    if (worst > 0.05)
        throw std::invalid_argument("duality: boundary does not solve the ODE of this curve "
                                    "(relative slope residual " + std::to_string(worst) + ")");
}

} // namespace detail

/// Dual volatility of a put world: with x* the put boundary under
/// (r, delta, sigma),
///   sigma~(y) = 2 (y - x*(y)) (r y - delta x*(y)) / (y x*(y) sigma(x*(y))).
/// Tabulated on the boundary's strike grid.
inline VolatilityCurve dual_put_volatility(const ModelParams& p, const VolatilityCurve& curve,
                                           Boundary& boundary) {
    p.require_put_side();
    if (boundary.side != Side::put)
        throw std::invalid_argument("dual_put_volatility: needs a put-side boundary");
    if (boundary.derivs.size() != boundary.grid.size()) boundary.derivs_from_spline();
    detail::check_boundary_matches_curve(p, curve, boundary);
    std::vector<double> ys(boundary.grid.size()), sg(boundary.grid.size());
    for (std::size_t i = 0; i < boundary.grid.size(); ++i) {
        double y = boundary.grid[i], xs = boundary.values[i];
        ys[i] = y;
        sg[i] = 2.0 * (y - xs) * (p.r * y - p.delta * xs) / (y * xs * curve(xs));
    }
    return make_tabulated_curve(ys, sg, "dual_put(" + curve.id + ")");
}

/// Inverse transform: with y* the call-side boundary of eta under the same
/// rate pair,
///   sigma(x) = 2 (y*(x) - x) (r y*(x) - delta x) / (y*(x) x eta(y*(x))).
/// Applying it to dual_put_volatility's output recovers the original curve.
inline VolatilityCurve primal_from_dual_volatility(const ModelParams& p,
                                                   const VolatilityCurve& eta,
                                                   Boundary& boundary) {
    p.require_call_side();
    if (boundary.side != Side::call)
        throw std::invalid_argument("primal_from_dual_volatility: needs a call-side boundary");
    if (boundary.derivs.size() != boundary.grid.size()) boundary.derivs_from_spline();
    detail::check_boundary_matches_curve(p, eta, boundary);
    std::vector<double> xs(boundary.grid.size()), sg(boundary.grid.size());
    for (std::size_t i = 0; i < boundary.grid.size(); ++i) {
        double x = boundary.grid[i], ys = boundary.values[i];
        xs[i] = x;
        sg[i] = 2.0 * (ys - x) * (p.r * ys - p.delta * x) / (ys * x * eta(ys));
    }
    return make_tabulated_curve(xs, sg, "primal_from_dual(" + eta.id + ")");
}

/// Dual volatility of the call world: with Ups* the boundary of the call
/// priced under (r, delta, sigma) as a function of its strike,
///   sigma^(K) = 2 (Ups*(K) - K) (delta Ups*(K) - r K) / (K Ups*(K) sigma(Ups*(K))).
/// The rate roles swap relative to the put transform.
inline VolatilityCurve dual_call_volatility(const ModelParams& p, const VolatilityCurve& curve,
                                            Boundary& boundary) {
    p.require_call_side();
    if (boundary.side != Side::call)
        throw std::invalid_argument("dual_call_volatility: needs a call-side boundary");
    if (boundary.derivs.size() != boundary.grid.size()) boundary.derivs_from_spline();
    detail::check_boundary_matches_curve(dual_params(p), curve, boundary);
    std::vector<double> ks(boundary.grid.size()), sg(boundary.grid.size());
    for (std::size_t i = 0; i < boundary.grid.size(); ++i) {
        double k = boundary.grid[i], us = boundary.values[i];
        ks[i] = k;
        sg[i] = 2.0 * (us - k) * (p.delta * us - p.r * k) / (k * us * curve(us));
    }
    return make_tabulated_curve(ks, sg, "dual_call(" + curve.id + ")");
}

/// Convenience: tabulate the put boundary by smooth fit over a strike span.
inline Boundary put_boundary_table(const ModelParams& p, const VolatilityCurve& curve,
                                   double y_lo, double y_hi, std::size_t n = 401,
                                   GridSpec g = {1e-3, 1e3, 2001}) {
    p.require_put_side();
    auto fs = solve_fundamental(p, curve, SolutionKind::decreasing, g);
    Boundary b;
    b.side = Side::put;
    b.params = p;
    b.curve_id = curve.id;
    b.grid.resize(n);
    b.values.resize(n);
    double l0 = std::log(y_lo), l1 = std::log(y_hi);
    for (std::size_t i = 0; i < n; ++i) {
        b.grid[i] = std::exp(l0 + (l1 - l0) * double(i) / double(n - 1));
        b.values[i] = put_boundary_smoothfit(fs, b.grid[i]);
    }
    b.anchor = {b.grid.front(), b.values.front()};
    b.derivs_from_spline();
    return b;
}

/// Convenience: tabulate the call-side boundary (the call priced under
/// swapped rates) by smooth fit over a strike span.
inline Boundary call_boundary_table(const ModelParams& p, const VolatilityCurve& curve,
                                    double x_lo, double x_hi, std::size_t n = 401,
                                    GridSpec g = {1e-3, 1e3, 2001}) {
    p.require_call_side();
    auto fs = solve_fundamental(dual_params(p), curve, SolutionKind::increasing, g);
    Boundary b;
    b.side = Side::call;
    b.params = p;
    b.curve_id = curve.id;
    b.grid.resize(n);
    b.values.resize(n);
    double l0 = std::log(x_lo), l1 = std::log(x_hi);
    for (std::size_t i = 0; i < n; ++i) {
        b.grid[i] = std::exp(l0 + (l1 - l0) * double(i) / double(n - 1));
        b.values[i] = call_boundary_smoothfit(fs, b.grid[i]);
    }
    b.anchor = {b.grid.front(), b.values.front()};
    b.derivs_from_spline();
    return b;
}

/// Check P(x, y) under (params, primal curve) against the dual-world call
/// c(y, x) under (swapped rates, dual curve), each priced from its own
/// fundamental solution, plus the boundary-inverse identity
/// x*(y*(x)) = x. Failures are reported, not thrown.
inline DualityReport verify_duality(const ModelParams& p, const VolatilityCurve& primal,
                                    const VolatilityCurve& dual, const std::vector<double>& xs,
                                    const std::vector<double>& ys, double price_tol = 1e-4,
                                    double boundary_tol = 1e-5) {
    p.require_put_side();
    p.require_call_side();
    DualityReport rep;
    rep.xs = xs;
    rep.ys = ys;
    rep.price_tol = price_tol;
    rep.boundary_tol = boundary_tol;

    double span_lo = std::min(xs.front(), ys.front());
    double span_hi = std::max(xs.back(), ys.back());
    GridSpec g{0.05 * span_lo, 20.0 * span_hi, 2001};
    PutPricer primal_put(p, primal, g);
    CallPricer dual_call(dual_params(p), dual, g);

    rep.primal_values.resize(xs.size() * ys.size());
    rep.dual_values.resize(xs.size() * ys.size());
    detail::parallel_for(xs.size(), [&](std::size_t i) {
        for (std::size_t j = 0; j < ys.size(); ++j) {
            double pv = primal_put.price(xs[i], ys[j]).value;
            double cv = dual_call.price(ys[j], xs[i]).value;
            rep.primal_values[i * ys.size() + j] = pv;
            rep.dual_values[i * ys.size() + j] = cv;
        }
    });
    for (std::size_t i = 0; i < rep.primal_values.size(); ++i) {
        double pv = rep.primal_values[i], cv = rep.dual_values[i];
        double gap = std::abs(pv - cv) / std::max({std::abs(pv), std::abs(cv), 1e-12});
        rep.max_rel_gap = std::max(rep.max_rel_gap, gap);
    }
    for (double x : xs) {
        double ystar = dual_call.boundary(x);
        double back = primal_put.boundary(ystar);
        rep.boundary_inverse_gap = std::max(rep.boundary_inverse_gap, std::abs(back - x) / x);
    }
    rep.pass = rep.max_rel_gap <= price_tol && rep.boundary_inverse_gap <= boundary_tol;
    return rep;
}

struct SelfDualityResidual {
    double value = 0.0;       // sup over the span of |sigma~(y) - sigma(y)|
    bool paper_regime = true; // r > delta >= 0
};

/// How far a curve is from being its own dual over a strike span; zero only
/// for constant curves.
inline SelfDualityResidual self_duality_residual(const ModelParams& p, const VolatilityCurve& curve,
                                                 double y_lo, double y_hi, std::size_t n = 201,
                                                 GridSpec g = {1e-3, 1e3, 2001}) {
    p.require_put_side();
    SelfDualityResidual out;
    out.paper_regime = p.r > p.delta;
    auto fs = solve_fundamental(p, curve, SolutionKind::decreasing, g);
    double l0 = std::log(y_lo), l1 = std::log(y_hi);
    for (std::size_t i = 0; i < n; ++i) {
        double y = std::exp(l0 + (l1 - l0) * double(i) / double(n - 1));
        double xs = put_boundary_smoothfit(fs, y);
        double st = 2.0 * (y - xs) * (p.r * y - p.delta * xs) / (y * xs * curve(xs));
        out.value = std::max(out.value, std::abs(st - curve(y)));
    }
    return out;
}

} // namespace perpdual
