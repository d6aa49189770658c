#pragma once
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>

#include "perpdual/boundary.hpp"
#include "perpdual/fundamental.hpp"
#include "perpdual/params.hpp"
#include "perpdual/volatility.hpp"

namespace perpdual {

enum class PriceRegion { exercise, continuation };

inline const char* to_string(PriceRegion r) {
    return r == PriceRegion::exercise ? "exercise" : "continuation";
}

struct PerpetualPrice {
    double value = 0.0;
    PriceRegion region = PriceRegion::continuation;
    double boundary_level = std::numeric_limits<double>::quiet_NaN();
};

/// Perpetual put pricer for one (params, curve) pair. Boundary root-finds
/// are memoized per strike; the cache is write-once-per-key behind a mutex,
/// everything else is immutable, so sharing across threads is safe.
class PutPricer {
public:
    PutPricer(ModelParams p, VolatilityCurve curve, GridSpec g = {1e-3, 1e3, 2001})
        : p_(p), curve_(std::move(curve)) {
        p_.validate();
        if (p_.r > 0.0)
            fs_ = solve_fundamental(p_, curve_, SolutionKind::decreasing, g);
    }

    const ModelParams& params() const { return p_; }
    const VolatilityCurve& curve() const { return curve_; }
    const FundamentalSolution& fundamental() const {
        if (p_.r == 0.0) throw std::domain_error("PutPricer: no fundamental solution when r = 0");
        return fs_;
    }

    /// Exercise level for a strike; memoized.
    double boundary(double y) const {
        p_.require_put_side();
        {
            std::lock_guard lk(mu_);
            if (auto it = cache_.find(y); it != cache_.end()) return it->second;
        }
        double xs = put_boundary_smoothfit(fs_, y);
        std::lock_guard lk(mu_);
        return cache_.emplace(y, xs).first->second;
    }

    PerpetualPrice price(double x, double y) const {
        if (!(x > 0.0) || !(y > 0.0))
            throw std::invalid_argument("put price: spot and strike must be > 0");
        if (p_.r == 0.0) {
            // never optimal to stop: the discounted strike is the supremum
            return {y, PriceRegion::exercise, std::numeric_limits<double>::quiet_NaN()};
        }
        double xs = boundary(y);
        if (x <= xs) return {y - x, PriceRegion::exercise, xs};
        double v = (y - xs) / fs_.value(xs) * fs_.value(x);
        return {v, PriceRegion::continuation, xs};
    }

private:
    ModelParams p_;
    VolatilityCurve curve_;
    FundamentalSolution fs_;
    mutable std::mutex mu_;
    mutable std::map<double, double> cache_;
};

/// Perpetual call pricer in the world of `params` (interest r, dividend
/// delta). Uses the increasing solution of the same world's pricing ODE.
class CallPricer {
public:
    CallPricer(ModelParams p, VolatilityCurve curve, GridSpec g = {1e-3, 1e3, 2001})
        : p_(p), curve_(std::move(curve)) {
        p_.validate();
        if (p_.delta > 0.0)
            fs_ = solve_fundamental(p_, curve_, SolutionKind::increasing, g);
    }

    const ModelParams& params() const { return p_; }
    const VolatilityCurve& curve() const { return curve_; }
    const FundamentalSolution& fundamental() const {
        if (p_.delta == 0.0)
            throw std::domain_error("CallPricer: no fundamental solution when delta = 0");
        return fs_;
    }

    double boundary(double y) const {
        p_.require_call_side();
        {
            std::lock_guard lk(mu_);
            if (auto it = cache_.find(y); it != cache_.end()) return it->second;
        }
        double ys = call_boundary_smoothfit(fs_, y);
        std::lock_guard lk(mu_);
        return cache_.emplace(y, ys).first->second;
    }

    PerpetualPrice price(double x, double y) const {
        if (!(x > 0.0) || !(y > 0.0))
            throw std::invalid_argument("call price: spot and strike must be > 0");
        if (p_.delta == 0.0) {
            // exercise is never optimal; the value is the spot itself
            return {x, PriceRegion::continuation, std::numeric_limits<double>::quiet_NaN()};
        }
        double ys = boundary(y);
        if (x >= ys) return {x - y, PriceRegion::exercise, ys};
        double v = (ys - y) / fs_.value(ys) * fs_.value(x);
        return {v, PriceRegion::continuation, ys};
    }

private:
    ModelParams p_;
    VolatilityCurve curve_;
    FundamentalSolution fs_;
    mutable std::mutex mu_;
    mutable std::map<double, double> cache_;
};

inline PerpetualPrice put_price(const ModelParams& p, const VolatilityCurve& curve,
                                const FundamentalSolution& fs, double x, double y) {
    if (!(x > 0.0) || !(y > 0.0))
        throw std::invalid_argument("put price: spot and strike must be > 0");
    if (p.r > 0.0 && fs.curve_id != curve.id)
        throw std::invalid_argument("put price: fundamental solution belongs to another curve");
    if (p.r == 0.0) return {y, PriceRegion::exercise, std::numeric_limits<double>::quiet_NaN()};
    double xs = put_boundary_smoothfit(fs, y);
    if (x <= xs) return {y - x, PriceRegion::exercise, xs};
    return {(y - xs) / fs.value(xs) * fs.value(x), PriceRegion::continuation, xs};
}

inline PerpetualPrice call_price(const ModelParams& p, const VolatilityCurve& curve,
                                 const FundamentalSolution& fs, double x, double y) {
    if (!(x > 0.0) || !(y > 0.0))
        throw std::invalid_argument("call price: spot and strike must be > 0");
    if (p.delta > 0.0 && fs.curve_id != curve.id)
        throw std::invalid_argument("call price: fundamental solution belongs to another curve");
    if (p.delta == 0.0)
        return {x, PriceRegion::continuation, std::numeric_limits<double>::quiet_NaN()};
    double ys = call_boundary_smoothfit(fs, y);
    if (x >= ys) return {x - y, PriceRegion::exercise, ys};
    return {(ys - y) / fs.value(ys) * fs.value(x), PriceRegion::continuation, ys};
}

/// One-sided finite-difference slope of the price at the exercise boundary
/// minus its theoretical value (-1 for puts, +1 for calls). First order in
/// the bump size h.
inline double smooth_fit_gap(const ModelParams& p, const VolatilityCurve& curve, Side side,
                             double y, double h_rel = 1e-4, GridSpec g = {1e-3, 1e3, 2001}) {
    if (!(h_rel > 0.0)) throw std::invalid_argument("smooth_fit_gap: bump must be > 0");
    if (side == Side::put) {
        p.require_put_side();
        PutPricer pr(p, curve, g);
        double xs = pr.boundary(y);
        double h = h_rel * xs;
        double slope = (pr.price(xs + h, y).value - (y - xs)) / h;
        return slope - (-1.0);
    }
    p.require_call_side();
    CallPricer pr(p, curve, g);
    double ys = pr.boundary(y);
    double h = h_rel * ys;
    double slope = ((ys - y) - pr.price(ys - h, y).value) / h;
    return slope - 1.0;
}

} // namespace perpdual
