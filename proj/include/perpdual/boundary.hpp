#pragma once
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "perpdual/detail/pchip.hpp"
#include "perpdual/detail/rk45.hpp"
#include "perpdual/detail/rootfind.hpp"
#include "perpdual/fundamental.hpp"
#include "perpdual/volatility.hpp"

namespace perpdual {

enum class Side { put, call };

inline const char* to_string(Side s) { return s == Side::put ? "put" : "call"; }

/// Linear cone bracketing the boundary, from the constant-volatility
/// boundaries at the curve's certified bounds.
///   put:  ratio(vol) = a(vol)/(a(vol)-1), decreasing in vol, below min(1, r/delta)
///   call: ratio(vol) = b(vol)/(b(vol)-1), increasing in vol, above max(1, delta/r)
struct ConeRatios {
    double lo;
    double hi;
};

inline ConeRatios boundary_cone(const ModelParams& p, Side side, double sigma_lo, double sigma_hi) {
    if (side == Side::put) {
        p.require_put_side();
        double alo = bs_exponents(p, sigma_hi).a, ahi = bs_exponents(p, sigma_lo).a;
        return {alo / (alo - 1.0), ahi / (ahi - 1.0)};
    }
    p.require_call_side();
    double blo = bs_exponents(p, sigma_lo).b, bhi = bs_exponents(p, sigma_hi).b;
    return {blo / (blo - 1.0), bhi / (bhi - 1.0)};
}

/// Exercise boundary tabulated against the option's strike. The put side is
/// the boundary of the put priced under (r, delta); the call side is the
/// boundary of the call priced under the swapped rates (interest delta,
/// dividend r), which is the side that pairs with the put in the price
/// equality checks.
struct Boundary {
    Side side = Side::put;
    ModelParams params;
    std::string curve_id;
    std::vector<double> grid;    // strike levels, strictly increasing
    std::vector<double> values;  // boundary levels
    std::vector<double> derivs;  // d value / d level
    std::pair<double, double> anchor{1.0, 1.0};

    const detail::Pchip& interp() const {
        if (!interp_) {
            std::vector<double> ls(grid.size()), lv(grid.size());
            for (std::size_t i = 0; i < grid.size(); ++i) {
                ls[i] = std::log(grid[i]);
                lv[i] = std::log(values[i]);
            }
            interp_ = detail::Pchip(std::move(ls), std::move(lv));
        }
        return *interp_;
    }

    double value(double level) const {
        if (level < grid.front() * (1 - 1e-12) || level > grid.back() * (1 + 1e-12))
            throw std::out_of_range("Boundary: evaluation outside tabulated span");
        return std::exp(interp()(std::log(level)));
    }
    double deriv(double level) const {
        double v = value(level);
        return v / level * interp().deriv(std::log(level));
    }

    /// Fill `derivs` from monotone-cubic slopes when the values did not come
    /// out of an ODE integration.
    void derivs_from_spline() {
        derivs.resize(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) {
            double s = std::log(grid[i]);
            double slope = (i == 0) ? interp().slope_front()
                         : (i + 1 == grid.size()) ? interp().slope_back()
                                                  : interp().deriv(s);
            derivs[i] = values[i] / grid[i] * slope;
        }
    }

private:
    mutable std::optional<detail::Pchip> interp_;
};

/// Exercise level of the put with strike y: the unique root of
/// F(x) = y - x + f(x)/f'(x), which is strictly decreasing in x.
inline double put_boundary_smoothfit(const FundamentalSolution& fs, double y) {
    if (fs.kind != SolutionKind::decreasing)
        throw std::invalid_argument("put_boundary_smoothfit: needs the decreasing solution");
    fs.params.require_put_side();
    if (!(y > 0.0)) throw std::invalid_argument("put_boundary_smoothfit: strike must be > 0");
    auto F = [&](double x) { return y - x + x / fs.log_slope(x); };
    double lo = fs.span_lo() * (1.0 + 1e-9);
    double hi = std::min(y, fs.span_hi() * (1.0 - 1e-9));
    if (!(hi > lo) || !(F(lo) > 0.0) || !(F(hi) < 0.0))
        throw std::out_of_range("put_boundary_smoothfit: strike outside bracketable range");
    return detail::find_root(F, lo, hi, 1e-14);
}

/// Exercise level of the call with strike x priced in the world of `fs`
/// (which must be the increasing solution of that world): unique root of
/// G(Y) = Y - x - g(Y)/g'(Y).
inline double call_boundary_smoothfit(const FundamentalSolution& fs, double x) {
    if (fs.kind != SolutionKind::increasing)
        throw std::invalid_argument("call_boundary_smoothfit: needs the increasing solution");
    if (!(fs.params.delta > 0.0))
        throw std::domain_error("call_boundary_smoothfit: world dividend rate must be > 0");
    if (!(x > 0.0)) throw std::invalid_argument("call_boundary_smoothfit: strike must be > 0");
    auto G = [&](double Y) { return Y - x - Y / fs.log_slope(Y); };
    double lo = std::max(x, fs.span_lo()) * (1.0 + 1e-9);
    double hi = fs.span_hi() * (1.0 - 1e-9);
    if (!(hi > lo) || !(G(lo) < 0.0) || !(G(hi) > 0.0))
        throw std::out_of_range("call_boundary_smoothfit: strike outside bracketable range");
    return detail::find_root(G, lo, hi, 1e-14);
}

/// Thrown when a boundary integration runs into a collapsing denominator;
/// carries the last strike level that was still inside the admissible cone.
struct BoundaryOdeError : std::runtime_error {
    double last_level;
    BoundaryOdeError(const std::string& what, double level)
        : std::runtime_error(what), last_level(level) {}
};

enum class OdeDirection { forward, backward };

namespace detail {

/// Right-hand side of the boundary ODEs in log-log coordinates
/// (z = ln value, t = ln level). Scale-free; denominators carry the cone
/// safeguard.
inline double boundary_ode_rhs(const ModelParams& p, const VolatilityCurve& curve, Side side,
                               double t, double z) {
    double ratio = std::exp(z - t);
    double sig = curve(std::exp(z));
    if (side == Side::put) {
        double d1 = 1.0 - ratio, d2 = p.r - p.delta * ratio;
        if (!(d1 > 1e-12) || !(d2 > 1e-12 * p.r))
            throw BoundaryOdeError("boundary ODE: denominator collapse", std::exp(t));
        return sig * sig * ratio / (2.0 * d1 * d2);
    }
    double d1 = ratio - 1.0, d2 = p.r * ratio - p.delta;
    if (!(d1 > 1e-12) || !(d2 > 1e-12 * std::max(p.r, p.delta)))
        throw BoundaryOdeError("boundary ODE: denominator collapse", std::exp(t));
    return sig * sig * ratio / (2.0 * d1 * d2);
}

} // namespace detail

/// Integrate the boundary ODE from an anchor point across `span` in the
/// given direction, on `n` log-spaced strike nodes.
///   put:  x*'(y) = x*^2 sigma(x*)^2 / (2 (y - x*)(r y - delta x*))
///   call: y*'(x) = y*^2 sigma(y*)^2 / (2 (y* - x)(r y* - delta x))
inline Boundary integrate_boundary_ode(const ModelParams& p, const VolatilityCurve& curve,
                                       Side side, std::pair<double, double> anchor,
                                       std::pair<double, double> span,
                                       OdeDirection dir = OdeDirection::forward,
                                       std::size_t n = 801) {
    if (side == Side::put) p.require_put_side(); else p.require_call_side();
    auto [level0, value0] = anchor;
    if (!(level0 > 0.0) || !(value0 > 0.0))
        throw std::invalid_argument("integrate_boundary_ode: anchor must be positive");
    auto cone = boundary_cone(p, side, curve.sigma_lo, curve.sigma_hi);
    double ratio = value0 / level0;
    if (!(ratio > cone.lo * (1.0 - 1e-9)) || !(ratio < cone.hi * (1.0 + 1e-9)))
        throw std::invalid_argument("integrate_boundary_ode: anchor outside the admissible cone");
    double t0 = std::log(level0);
    double t1 = (dir == OdeDirection::forward) ? std::log(span.second) : std::log(span.first);
    if ((dir == OdeDirection::forward && !(t1 >= t0)) ||
        (dir == OdeDirection::backward && !(t1 <= t0)))
        throw std::invalid_argument("integrate_boundary_ode: span does not contain travel from anchor");
    if (n < 2) throw std::invalid_argument("integrate_boundary_ode: need n >= 2");

    std::vector<double> ts(n);
    for (std::size_t i = 0; i < n; ++i)
        ts[i] = t0 + (t1 - t0) * double(i) / double(n - 1);

    detail::Rk45<1> rk;
    rk.rtol = 1e-11;
    rk.atol = 1e-14;
    detail::Rk45<1>::Rhs rhs = [&](double t, const detail::Rk45<1>::State& y,
                                   detail::Rk45<1>::State& dy) {
        dy[0] = detail::boundary_ode_rhs(p, curve, side, t, y[0]);
    };

    Boundary b;
    b.side = side;
    b.params = p;
    b.curve_id = curve.id;
    b.anchor = anchor;
    b.grid.resize(n);
    b.values.resize(n);
    b.derivs.resize(n);
    std::size_t done = 0;
    try {
        detail::rk45_at_points<1>(rk, rhs, t0, ts, {std::log(value0)},
                                  [&](std::size_t i, const detail::Rk45<1>::State& y) {
                                      double lvl = std::exp(ts[i]), val = std::exp(y[0]);
                                      b.grid[i] = lvl;
                                      b.values[i] = val;
                                      b.derivs[i] = detail::boundary_ode_rhs(p, curve, side, ts[i], y[0]) *
                                                    val / lvl;
                                      done = i + 1;
                                  });
    } catch (const BoundaryOdeError&) {
        double last = done ? b.grid[done - 1] : level0;
        throw BoundaryOdeError("integrate_boundary_ode: aborted, denominator collapse after level " +
                                   std::to_string(last), last);
    }
    if (dir == OdeDirection::backward) {
        std::reverse(b.grid.begin(), b.grid.end());
        std::reverse(b.values.begin(), b.values.end());
        std::reverse(b.derivs.begin(), b.derivs.end());
    }
    b.interp();  // build the interpolant before the object gets shared
    return b;
}

/// Invert the strike -> boundary map back to the volatility it came from:
///   put:  sigma(x*(y)) = sqrt(2 (y - x*)(r y - delta x*) x*'(y)) / x*(y)
///   call: sigma(y*(x)) = sqrt(2 (y* - x)(r y* - delta x) y*'(x)) / y*(x)
/// Returns a tabulated curve on the boundary's value range.
inline VolatilityCurve volatility_from_boundary(const ModelParams& p, Boundary& b) {
    if (b.side == Side::put) p.require_put_side(); else p.require_call_side();
    if (b.grid.size() < 2) throw std::invalid_argument("volatility_from_boundary: need >= 2 nodes");
    if (b.derivs.size() != b.grid.size()) b.derivs_from_spline();
    std::vector<double> xs(b.grid.size()), sig(b.grid.size());
    for (std::size_t i = 0; i < b.grid.size(); ++i) {
        double lvl = b.grid[i], val = b.values[i], dv = b.derivs[i];
        if (!(dv > 0.0))
            throw std::invalid_argument("volatility_from_boundary: nonpositive derivative at level " +
                                        std::to_string(lvl));
        double rad = (b.side == Side::put)
                         ? 2.0 * (lvl - val) * (p.r * lvl - p.delta * val) * dv
                         : 2.0 * (val - lvl) * (p.r * val - p.delta * lvl) * dv;
        if (!(rad > 0.0))
            throw std::invalid_argument("volatility_from_boundary: cone violation at level " +
                                        std::to_string(lvl));
        xs[i] = val;
        sig[i] = std::sqrt(rad) / val;
    }
    return make_tabulated_curve(xs, sig, "from_boundary(" + b.curve_id + ")");
}

} // namespace perpdual
