#pragma once
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "perpdual/detail/pchip.hpp"
#include "perpdual/params.hpp"

namespace perpdual {

enum class FamilyTag { constant, rational_boundary, piecewise_from_boundary, tabulated };

inline const char* to_string(FamilyTag t) {
    switch (t) {
        case FamilyTag::constant: return "constant";
        case FamilyTag::rational_boundary: return "rational_boundary";
        case FamilyTag::piecewise_from_boundary: return "piecewise_from_boundary";
        case FamilyTag::tabulated: return "tabulated";
    }
    return "?";
}

/// A local volatility curve x -> sigma(x) on (0, inf), with certified bounds
/// 0 < sigma_lo <= sigma(x) <= sigma_hi. Immutable after construction;
/// evaluation is pure and safe to call concurrently.
struct VolatilityCurve {
    FamilyTag family = FamilyTag::constant;
    std::function<double(double)> eval;
    double sigma_lo = 0.0;
    double sigma_hi = 0.0;
    std::string id;
    std::shared_ptr<const detail::Pchip> table;  // set for the tabulated family

    double operator()(double x) const { return eval(x); }
};

/// Result of a hypothesis check on a curve: empirical bounds over a sampled
/// domain, or the location of the first violation.
struct HvolReport {
    bool ok = false;
    double observed_lo = 0.0;
    double observed_hi = 0.0;
    double violation_x = std::numeric_limits<double>::quiet_NaN();
    std::string message;
};

inline VolatilityCurve make_constant_curve(double sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("constant curve: sigma must be > 0");
    VolatilityCurve c;
    c.family = FamilyTag::constant;
    c.eval = [sigma](double) { return sigma; };
    c.sigma_lo = c.sigma_hi = sigma;
    c.id = "constant(" + std::to_string(sigma) + ")";
    return c;
}

/// Monotone-cubic interpolation of sigma against ln(x); constant-flat
/// extrapolation outside the tabulated range so the certified bounds hold
/// on all of (0, inf).
inline VolatilityCurve make_tabulated_curve(const std::vector<double>& x,
                                            const std::vector<double>& sigma,
                                            std::string label = "tabulated") {
    if (x.size() != sigma.size() || x.size() < 2)
        throw std::invalid_argument("tabulated curve: need >= 2 matching (x, sigma) rows");
    std::vector<double> s(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0)) throw std::invalid_argument("tabulated curve: x must be > 0");
        if (!(sigma[i] > 0.0)) throw std::invalid_argument("tabulated curve: sigma must be > 0");
        s[i] = std::log(x[i]);
    }
    auto interp = std::make_shared<const detail::Pchip>(std::move(s), sigma);
    VolatilityCurve c;
    c.family = FamilyTag::tabulated;
    c.table = interp;
    c.eval = [interp](double x) { return (*interp)(std::log(x)); };
    c.sigma_lo = *std::min_element(sigma.begin(), sigma.end());
    c.sigma_hi = *std::max_element(sigma.begin(), sigma.end());
    c.id = label + "(n=" + std::to_string(x.size()) + ")";
    return c;
}

/// Constant level plus a Gaussian bump in log-spot; tabulated densely so it
/// carries the standard tabulated-family machinery.
inline VolatilityCurve make_bump_curve(double sigma0, double eps, double center = 1.0,
                                       double log_width = 0.25, std::size_t n = 1601) {
    if (!(sigma0 > 0.0) || !(sigma0 + eps > 0.0) || !(center > 0.0) || !(log_width > 0.0))
        throw std::invalid_argument("bump curve: invalid parameters");
    std::vector<double> xs(n), ss(n);
    double s_lo = std::log(center) - 12.0 * log_width, s_hi = std::log(center) + 12.0 * log_width;
    for (std::size_t i = 0; i < n; ++i) {
        double s = s_lo + (s_hi - s_lo) * double(i) / double(n - 1);
        double u = (s - std::log(center)) / log_width;
        xs[i] = std::exp(s);
        ss[i] = sigma0 + eps * std::exp(-0.5 * u * u);
    }
    auto c = make_tabulated_curve(xs, ss, "bump(sigma0=" + std::to_string(sigma0) +
                                              ",eps=" + std::to_string(eps) + ")");
    return c;
}

/// Certify the bounds hypothesis over a log-spaced sample of [lo, hi]:
/// positivity, agreement with the declared bounds, and a jump heuristic that
/// flags discontinuities in tabulated data.
inline HvolReport validate_hvol(const VolatilityCurve& curve, double lo, double hi,
                                std::size_t n_samples = 1000) {
    if (!(lo > 0.0) || !(hi > lo)) throw std::invalid_argument("validate_hvol: need 0 < lo < hi");
    if (n_samples < 2) throw std::invalid_argument("validate_hvol: need n_samples >= 2");
    HvolReport rep;
    rep.observed_lo = std::numeric_limits<double>::infinity();
    rep.observed_hi = -std::numeric_limits<double>::infinity();
    const double slack = 1e-9 + 1e-6 * std::max(1.0, curve.sigma_hi);
    std::vector<double> vals(n_samples);
    double ls = std::log(lo), dh = (std::log(hi) - ls) / double(n_samples - 1);
    for (std::size_t i = 0; i < n_samples; ++i) {
        double x = std::exp(ls + dh * double(i));
        double v = curve(x);
        vals[i] = v;
        if (!(v > 0.0) || !std::isfinite(v)) {
            rep.message = "nonpositive or nonfinite volatility";
            rep.violation_x = x;
            return rep;
        }
        if (v < curve.sigma_lo - slack || v > curve.sigma_hi + slack) {
            rep.message = "sample outside declared bounds [" + std::to_string(curve.sigma_lo) +
                          ", " + std::to_string(curve.sigma_hi) + "]";
            rep.violation_x = x;
            return rep;
        }
        rep.observed_lo = std::min(rep.observed_lo, v);
        rep.observed_hi = std::max(rep.observed_hi, v);
    }
    // jump heuristic: a step shows as one adjacent difference towering over
    // its neighbours; smooth steep features keep comparable neighbours. For
    // tabulated curves the check runs on the table nodes (interpolation
    // would smear a data jump across one interval), otherwise on the sample.
    const std::vector<double>* seq = &vals;
    std::vector<double> node_x;
    if (curve.table && curve.table->ys().size() >= 5) {
        seq = &curve.table->ys();
        node_x = curve.table->xs();  // ln x
    }
    const std::size_t m = seq->size();
    for (std::size_t i = 2; i + 2 < m; ++i) {
        double d = std::abs((*seq)[i + 1] - (*seq)[i]);
        double nb = 0.5 * (std::abs((*seq)[i] - (*seq)[i - 1]) +
                           std::abs((*seq)[i + 2] - (*seq)[i + 1]));
        double floor = 1e-4 * std::max(1e-12, rep.observed_hi - rep.observed_lo);
        if (d > 12.0 * nb + floor) {
            rep.message = "continuity check failed (jump between adjacent nodes)";
            rep.violation_x = node_x.empty() ? std::exp(ls + dh * double(i))
                                             : std::exp(node_x[i]);
            return rep;
        }
    }
    rep.ok = true;
    return rep;
}

namespace detail {
/// Scan a closed-form evaluator for global bounds (log grid plus endpoints).
inline std::pair<double, double> scan_bounds(const std::function<double(double)>& f,
                                             double lo = 1e-8, double hi = 1e8,
                                             std::size_t n = 200001) {
    double mn = std::numeric_limits<double>::infinity(), mx = -mn;
    double ls = std::log(lo), dh = (std::log(hi) - ls) / double(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        double v = f(std::exp(ls + dh * double(i)));
        if (!std::isfinite(v) || !(v > 0.0))
            throw std::invalid_argument("volatility evaluator not positive over scan domain");
        mn = std::min(mn, v);
        mx = std::max(mx, v);
    }
    return {mn, mx};
}
} // namespace detail

} // namespace perpdual
