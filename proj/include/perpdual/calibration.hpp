#pragma once
#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "perpdual/boundary.hpp"
#include "perpdual/detail/stencil.hpp"
#include "perpdual/pricing.hpp"
#include "perpdual/volatility.hpp"

namespace perpdual {

enum class OptionKind { put, call };

inline const char* to_string(OptionKind k) { return k == OptionKind::put ? "put" : "call"; }

/// Perpetual option quotes at a fixed spot across a strike grid.
struct PriceCurveSample {
    OptionKind kind = OptionKind::put;
    double spot_x0 = 1.0;
    std::vector<double> strikes;   // strictly increasing
    std::vector<double> prices;
    std::vector<double> dprice;    // optional, per strike
    std::vector<double> d2price;   // optional, per strike

    void validate() const {
        if (!(spot_x0 > 0.0)) throw std::invalid_argument("sample: spot must be > 0");
        if (strikes.size() < 5 || strikes.size() != prices.size())
            throw std::invalid_argument("sample: need >= 5 matching (strike, price) rows");
        if (!dprice.empty() && dprice.size() != strikes.size())
            throw std::invalid_argument("sample: dprice column size mismatch");
        if (!d2price.empty() && d2price.size() != strikes.size())
            throw std::invalid_argument("sample: d2price column size mismatch");
        const double slack = 1e-9;
        for (std::size_t i = 0; i < strikes.size(); ++i) {
            double K = strikes[i], v = prices[i];
            if (!(K > 0.0)) throw std::invalid_argument("sample: strikes must be > 0");
            if (i > 0 && !(K > strikes[i - 1]))
                throw std::invalid_argument("sample: strikes must be strictly increasing");
            double lo = (kind == OptionKind::put) ? std::max(0.0, K - spot_x0)
                                                  : std::max(0.0, spot_x0 - K);
            double hi = (kind == OptionKind::put) ? K : spot_x0;
            if (v < lo - slack * (1.0 + K) || v > hi + slack * (1.0 + K))
                throw std::invalid_argument("sample: price at strike " + std::to_string(K) +
                                            " violates the arbitrage sandwich");
        }
    }
};

/// Exercise threshold of a sample: the smallest strike where the put meets
/// intrinsic value (Y), or the largest strike where the call does (X).
/// The grid hit is refined by square-root tangency extrapolation, using that
/// the price meets the intrinsic line with matching first derivative.
inline double detect_threshold(const PriceCurveSample& s, double tol_rel = 1e-6) {
    s.validate();
    const std::size_t n = s.strikes.size();
    auto gap = [&](std::size_t i) {
        return (s.kind == OptionKind::put) ? s.prices[i] - (s.strikes[i] - s.spot_x0)
                                           : s.prices[i] - (s.spot_x0 - s.strikes[i]);
    };
    auto at_intrinsic = [&](std::size_t i) { return std::abs(gap(i)) <= tol_rel * s.strikes[i]; };

    std::size_t hit = n;  // first intrinsic strike (put) / last (call)
    if (s.kind == OptionKind::put) {
        for (std::size_t i = 0; i < n; ++i)
            if (at_intrinsic(i)) { hit = i; break; }
        if (hit == n) throw std::out_of_range("detect_threshold: sample entirely in continuation");
        if (hit == 0) throw std::out_of_range("detect_threshold: threshold not bracketed from below");
    } else {
        for (std::size_t i = n; i-- > 0;)
            if (at_intrinsic(i)) { hit = i; break; }
        if (hit == n) throw std::out_of_range("detect_threshold: sample entirely in continuation");
        if (hit + 1 == n) throw std::out_of_range("detect_threshold: threshold not bracketed from above");
    }

    // refine: just inside the continuation region, sqrt(price - intrinsic)
    // decays linearly to zero at the threshold
    std::size_t j1, j2;  // two continuation nodes nearest the threshold
    if (s.kind == OptionKind::put) {
        if (hit < 2) return s.strikes[hit];
        j1 = hit - 2; j2 = hit - 1;
    } else {
        if (hit + 2 >= n) return s.strikes[hit];
        j1 = hit + 2; j2 = hit + 1;
    }
    double d1 = gap(j1), d2 = gap(j2);
    if (d1 > 0.0 && d2 > 0.0) {
        double r1 = std::sqrt(d1), r2 = std::sqrt(d2);
        if (std::abs(r1 - r2) > 1e-14 * (r1 + r2)) {
            double K1 = s.strikes[j1], K2 = s.strikes[j2];
            double Kref = (r1 * K2 - r2 * K1) / (r1 - r2);
            double lo = std::min(s.strikes[j2], s.strikes[hit]);
            double hi = std::max(s.strikes[j2], s.strikes[hit]);
            if (std::isfinite(Kref) && Kref >= lo && Kref <= hi) return Kref;
        }
    }
    return s.strikes[hit];
}

namespace detail {

struct DualVolTable {
    std::vector<double> strikes;  // continuation-side strikes with derivatives
    std::vector<double> eta;
    std::size_t excluded = 0;     // continuation nodes lost to stencil reach
};

/// Strike-space diffusion coefficient from sampled prices:
///   eta(K) = (1/K) sqrt( 2 (delta p + K (r - delta) p') / p'' ).
/// Derivatives come from the sample when provided, else from 4th-order
/// stencils in ln K on log-uniform grids (3-point otherwise), using only
/// nodes whose stencil stays strictly on the continuation side.
inline DualVolTable extract_dual_vol_table(const ModelParams& p, const PriceCurveSample& s,
                                           double threshold) {
    const std::size_t n = s.strikes.size();
    std::vector<std::size_t> cont;  // continuation-side indices, ascending
    for (std::size_t i = 0; i < n; ++i) {
        bool c = (s.kind == OptionKind::put) ? s.strikes[i] < threshold * (1.0 - 1e-12)
                                             : s.strikes[i] > threshold * (1.0 + 1e-12);
        if (c) cont.push_back(i);
    }
    if (cont.size() < 5)
        throw std::out_of_range("extract_dual_vol: too few continuation-side strikes");

    std::vector<double> K(cont.size()), P(cont.size());
    for (std::size_t j = 0; j < cont.size(); ++j) {
        K[j] = s.strikes[cont[j]];
        P[j] = s.prices[cont[j]];
    }
    const bool have_d = !s.dprice.empty() && !s.d2price.empty();
    const bool logu = is_log_uniform(K);
    const double h = std::log(K[1] / K[0]);
    const std::size_t radius = have_d ? 0 : (logu ? 2 : 1);

    DualVolTable out;
    for (std::size_t j = radius; j + radius < cont.size(); ++j) {
        double d1, d2;
        if (have_d) {
            d1 = s.dprice[cont[j]];
            d2 = s.d2price[cont[j]];
        } else if (logu) {
            auto nd = log_grid_derivs(K, P, j, h);
            d1 = nd.d1; d2 = nd.d2;
        } else {
            auto nd = nonuniform_derivs(K, P, j);
            d1 = nd.d1; d2 = nd.d2;
        }
        double k = K[j];
        if (!(d2 > 0.0))
            throw std::invalid_argument("extract_dual_vol: nonpositive second derivative at strike " +
                                        std::to_string(k) + " (arbitrage violation)");
        double rad = 2.0 * (p.delta * P[j] + k * (p.r - p.delta) * d1) / d2;
        if (!(rad > 0.0))
            throw std::invalid_argument("extract_dual_vol: negative radicand at strike " +
                                        std::to_string(k) + " (arbitrage violation)");
        out.strikes.push_back(k);
        out.eta.push_back(std::sqrt(rad) / k);
    }
    out.excluded = cont.size() - out.strikes.size();
    return out;
}

/// Solve-time evaluator around a dual-vol table: monotone cubic inside, and
/// beyond each end a damped continuation of the edge log-slope (approaching
/// the one-e-fold extrapolated level). Keeps the attractor sweep accurate
/// just past the data edges without feeding it a hard constant kink.
class ExtendedEta {
public:
    ExtendedEta(const std::vector<double>& strikes, const std::vector<double>& eta) {
        std::vector<double> ls(strikes.size());
        for (std::size_t i = 0; i < strikes.size(); ++i) ls[i] = std::log(strikes[i]);
        interp_ = Pchip(std::move(ls), eta);
        lo_ = interp_.xs().front();
        hi_ = interp_.xs().back();
        double vmin = *std::min_element(eta.begin(), eta.end());
        double vmax = *std::max_element(eta.begin(), eta.end());
        clamp_lo_ = 0.25 * vmin;
        clamp_hi_ = 4.0 * vmax;
    }

    double operator()(double x) const {
        double s = std::log(x);
        if (s >= lo_ && s <= hi_) return interp_(s);
        double edge, slope, u;
        if (s < lo_) { edge = interp_(lo_); slope = -interp_.slope_front(); u = lo_ - s; }
        else         { edge = interp_(hi_); slope =  interp_.slope_back();  u = s - hi_; }
        double v = edge + slope * (1.0 - std::exp(-u));
        return std::clamp(v, clamp_lo_, clamp_hi_);
    }

    double lo_strike() const { return std::exp(lo_); }
    double hi_strike() const { return std::exp(hi_); }

private:
    Pchip interp_;
    double lo_ = 0.0, hi_ = 0.0, clamp_lo_ = 0.0, clamp_hi_ = 0.0;
};

} // namespace detail

struct CalibrationDiagnostics {
    double threshold_grid = 0.0;          // strike-grid hit before refinement
    double boundary_gap_rel = 0.0;        // |boundary(x0) - threshold| / threshold
    double repricing_max_rel_err = 0.0;   // continuation-side repricing residual
    std::size_t excluded_nodes = 0;       // continuation strikes lost to stencil reach
    bool tail_warning = false;            // call quotes do not decay at the top strike
    std::string extension_note;
};

struct CalibrationResult {
    OptionKind kind = OptionKind::put;
    double spot_x0 = 1.0;
    double threshold = 0.0;                        // Y (puts) or X (calls)
    VolatilityCurve recovered_sigma;               // data-supported span only
    VolatilityCurve repricing_sigma;               // recovered + extension, spans both sides
    VolatilityCurve dual_vol;                      // eta_p / eta_c table
    std::pair<double, double> recovered_span{0, 0};
    std::vector<double> boundary_levels;           // strike axis of the dual boundary
    std::vector<double> boundary_values;
    CalibrationDiagnostics diagnostics;
};

/// Tabulated strike-space volatility implied by the sample on its
/// continuation side; constant-flat beyond the table per the tabulated
/// family's extrapolation rule.
inline VolatilityCurve extract_dual_vol(const ModelParams& p, const PriceCurveSample& s,
                                        double threshold) {
    auto t = detail::extract_dual_vol_table(p, s, threshold);
    return make_tabulated_curve(t.strikes, t.eta,
                                s.kind == OptionKind::put ? "eta_p" : "eta_c");
}

namespace detail {

struct AttractorOptions {
    std::size_t n_out = 801;
    double run_in = 12.0;       // e-folds of attractor run-in before the span
    double stop_factor = 1e-3;  // hard floor/cap at stop_factor * x0 (puts)
};

/// Sweep the boundary ODE through its contracting direction across
/// [t_lo, t_hi] (log-strike), starting `run_in` units before the entry end
/// on the local algebraic quasi-equilibrium, so the anchor value has been
/// forgotten by the time the span begins. `down` selects travel direction:
/// call-form boundaries contract upward, put-form ones downward.
inline void attractor_sweep(const ModelParams& p, const std::function<double(double)>& eta,
                            Side side, bool down, double t_lo, double t_hi, double run_in,
                            std::vector<double>& ts, std::vector<double>& zs) {
    auto rhs_ratio = [&](double ratio, double x) {
        double sig = eta(ratio * x);
        return (side == Side::put)
                   ? 2.0 * (1.0 - ratio) * (p.r - p.delta * ratio) - sig * sig * ratio
                   : 2.0 * (ratio - 1.0) * (p.r * ratio - p.delta) - sig * sig * ratio;
    };
    double t_entry = down ? t_hi + run_in : t_lo - run_in;
    double x_entry = std::exp(t_entry);
    // quasi-equilibrium start ratio: root of the stationary relation
    double blo, bhi;
    if (side == Side::put) {
        double cap = (p.delta > 0.0) ? std::min(1.0, p.r / p.delta) : 1.0;
        blo = 1e-9 * cap; bhi = cap * (1.0 - 1e-9);
    } else {
        blo = (p.r > 0.0) ? std::max(1.0, p.delta / p.r) * (1.0 + 1e-9) : 1.0 + 1e-9;
        bhi = 1e9;
    }
    double q0 = find_root([&](double q) { return rhs_ratio(q, x_entry); }, blo, bhi, 1e-12);

    Rk45<1> rk;
    rk.rtol = 1e-11;
    rk.atol = 1e-14;
    Rk45<1>::Rhs rhs = [&](double t, const Rk45<1>::State& y, Rk45<1>::State& dy) {
        double ratio = std::exp(y[0] - t);
        double sig = eta(std::exp(y[0]));
        double d1 = (side == Side::put) ? 1.0 - ratio : ratio - 1.0;
        double d2 = (side == Side::put) ? p.r - p.delta * ratio : p.r * ratio - p.delta;
        if (!(d1 > 1e-12) || !(d2 > 1e-14))
            throw BoundaryOdeError("calibration sweep: cone exit", std::exp(t));
        dy[0] = sig * sig * ratio / (2.0 * d1 * d2);
    };
    const std::size_t n = ts.size();
    std::vector<double> path(ts);
    if (down) std::reverse(path.begin(), path.end());
    zs.assign(n, 0.0);
    rk45_at_points<1>(rk, rhs, t_entry, path, {std::log(q0) + t_entry},
                      [&](std::size_t i, const Rk45<1>::State& y) {
                          zs[down ? n - 1 - i : i] = y[0];
                      });
}

} // namespace detail

/// Recover the volatility below the spot from perpetual put quotes.
/// Pipeline: threshold Y, strike-space dual vol, a contracting-direction
/// sweep of the dual boundary ODE, and the pointwise inversion
///   sigma(x) = 2 (Yb - x)(r Yb - delta x) / (x Yb eta(Yb)),  Yb = boundary(x).
/// The returned curve covers the data-supported span; the repricing curve
/// extends it across the spot with the constant continuation of eta.
inline CalibrationResult recover_sigma_from_puts(const ModelParams& p, const PriceCurveSample& s,
                                                 detail::AttractorOptions opt = {}) {
    p.require_put_side();
    if (s.kind != OptionKind::put)
        throw std::invalid_argument("recover_sigma_from_puts: sample kind must be put");
    const double x0 = s.spot_x0;

    CalibrationResult res;
    res.kind = OptionKind::put;
    res.spot_x0 = x0;
    res.threshold = detect_threshold(s);

    auto table = detail::extract_dual_vol_table(p, s, res.threshold);
    res.dual_vol = make_tabulated_curve(table.strikes, table.eta, "eta_p");
    res.diagnostics.excluded_nodes = table.excluded;
    detail::ExtendedEta eta(table.strikes, table.eta);

    // find the put-side grid threshold for diagnostics
    {
        PriceCurveSample tmp = s;
        for (std::size_t i = 0; i < tmp.strikes.size(); ++i)
            if (std::abs(tmp.prices[i] - (tmp.strikes[i] - x0)) <= 1e-6 * tmp.strikes[i]) {
                res.diagnostics.threshold_grid = tmp.strikes[i];
                break;
            }
    }

    // dual call boundary swept upward to the spot, plus an extension above
    // the spot used only for repricing
    double t_lo = std::log(opt.stop_factor * x0);
    double t_hi_ext = std::log(std::max(4.0 * s.strikes.back(), 4.0 * x0));
    std::size_t n_ext = opt.n_out / 2;
    std::vector<double> ts(opt.n_out + n_ext);
    double t0 = std::log(x0);
    for (std::size_t i = 0; i < opt.n_out; ++i)
        ts[i] = t_lo + (t0 - t_lo) * double(i) / double(opt.n_out - 1);
    for (std::size_t i = 0; i < n_ext; ++i)
        ts[opt.n_out + i] = t0 + (t_hi_ext - t0) * double(i + 1) / double(n_ext);

    std::vector<double> zs;
    detail::attractor_sweep(p, [&](double y) { return eta(y); }, Side::call, /*down=*/false,
                            t_lo, t_hi_ext, opt.run_in, ts, zs);

    double y_at_x0 = std::exp(zs[opt.n_out - 1]);
    res.diagnostics.boundary_gap_rel = std::abs(y_at_x0 - res.threshold) / res.threshold;

    // pointwise inversion to the primal volatility
    std::vector<double> xs_all, sig_all;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        double x = std::exp(ts[i]), yb = std::exp(zs[i]);
        double sig = 2.0 * (yb - x) * (p.r * yb - p.delta * x) / (x * yb * eta(yb));
        xs_all.push_back(x);
        sig_all.push_back(sig);
        res.boundary_levels.push_back(x);
        res.boundary_values.push_back(yb);
    }
    // data-supported part: boundary inside the reliable strike table, x <= x0
    std::vector<double> xs, sig;
    for (std::size_t i = 0; i < opt.n_out; ++i)
        if (std::exp(zs[i]) >= eta.lo_strike()) {
            xs.push_back(xs_all[i]);
            sig.push_back(sig_all[i]);
        }
    if (xs.size() < 8)
        throw std::out_of_range("recover_sigma_from_puts: sample does not support recovery below spot");
    res.recovered_sigma = make_tabulated_curve(xs, sig, "calibrated_put");
    res.recovered_span = {xs.front(), xs.back()};
    res.repricing_sigma = make_tabulated_curve(xs_all, sig_all, "calibrated_put_full");
    res.diagnostics.extension_note =
        "eta_p continued as a constant beyond its table for the repricing extension";

    // repricing residual over the continuation side
    {
        PutPricer pricer(p, res.repricing_sigma,
                         GridSpec{0.5 * xs_all.front(), 2.0 * xs_all.back(), 2001});
        double worst = 0.0;
        for (std::size_t i = 0; i < s.strikes.size(); ++i) {
            if (s.strikes[i] >= res.threshold * 0.98) continue;
            double model = pricer.price(x0, s.strikes[i]).value;
            worst = std::max(worst, std::abs(model - s.prices[i]) /
                                        std::max(s.prices[i], 1e-12));
        }
        res.diagnostics.repricing_max_rel_err = worst;
    }
    return res;
}

/// Call-side mirror of the put recovery: threshold X, dual vol eta_c above
/// X, a downward sweep of the rate-swapped put-form boundary ODE, and
///   sigma(y) = 2 (y - xb)(delta y - r xb) / (y xb eta(xb)),  xb = boundary(y).
inline CalibrationResult recover_sigma_from_calls(const ModelParams& p, const PriceCurveSample& s,
                                                  detail::AttractorOptions opt = {}) {
    p.require_call_side();
    if (s.kind != OptionKind::call)
        throw std::invalid_argument("recover_sigma_from_calls: sample kind must be call");
    const double x0 = s.spot_x0;
    const ModelParams pd = dual_params(p);

    CalibrationResult res;
    res.kind = OptionKind::call;
    res.spot_x0 = x0;
    res.threshold = detect_threshold(s);

    auto table = detail::extract_dual_vol_table(p, s, res.threshold);
    res.dual_vol = make_tabulated_curve(table.strikes, table.eta, "eta_c");
    res.diagnostics.excluded_nodes = table.excluded;
    // recovery leans on c(K) -> 0 far above the threshold; a sample whose
    // strikes stop shortly past X cannot evidence that decay
    res.diagnostics.tail_warning = s.strikes.back() < 25.0 * res.threshold;
    detail::ExtendedEta eta(table.strikes, table.eta);

    {
        PriceCurveSample tmp = s;
        for (std::size_t i = tmp.strikes.size(); i-- > 0;)
            if (std::abs(tmp.prices[i] - (x0 - tmp.strikes[i])) <= 1e-6 * tmp.strikes[i]) {
                res.diagnostics.threshold_grid = tmp.strikes[i];
                break;
            }
    }

    // dual put boundary swept downward to the spot, with an extension below
    // for repricing; the cap keeps the boundary inside the strike table
    double cone_lo = boundary_cone(pd, Side::put, res.dual_vol.sigma_lo,
                                   res.dual_vol.sigma_hi).lo;
    double t_hi = std::log(0.98 * eta.hi_strike() / cone_lo);
    double t_lo_ext = std::log(std::max(opt.stop_factor * x0,
                                        0.25 * std::min(s.strikes.front(), x0)));
    std::size_t n_ext = opt.n_out / 2;
    std::vector<double> ts(opt.n_out + n_ext);
    double t0 = std::log(x0);
    for (std::size_t i = 0; i < n_ext; ++i)
        ts[i] = t_lo_ext + (t0 - t_lo_ext) * double(i) / double(n_ext);
    for (std::size_t i = 0; i < opt.n_out; ++i)
        ts[n_ext + i] = t0 + (t_hi - t0) * double(i) / double(opt.n_out - 1);

    std::vector<double> zs;
    detail::attractor_sweep(pd, [&](double y) { return eta(y); }, Side::put, /*down=*/true,
                            t_lo_ext, t_hi, opt.run_in, ts, zs);

    double x_at_x0 = std::exp(zs[n_ext]);
    res.diagnostics.boundary_gap_rel = std::abs(x_at_x0 - res.threshold) / res.threshold;

    std::vector<double> ys_all, sig_all;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        double y = std::exp(ts[i]), xb = std::exp(zs[i]);
        double sig = 2.0 * (y - xb) * (p.delta * y - p.r * xb) / (y * xb * eta(xb));
        ys_all.push_back(y);
        sig_all.push_back(sig);
        res.boundary_levels.push_back(y);
        res.boundary_values.push_back(xb);
    }
    std::vector<double> ys, sig;
    for (std::size_t i = n_ext; i < ts.size(); ++i)
        if (std::exp(zs[i]) <= eta.hi_strike()) {
            ys.push_back(ys_all[i]);
            sig.push_back(sig_all[i]);
        }
    if (ys.size() < 8)
        throw std::out_of_range("recover_sigma_from_calls: sample does not support recovery above spot");
    res.recovered_sigma = make_tabulated_curve(ys, sig, "calibrated_call");
    res.recovered_span = {ys.front(), ys.back()};
    res.repricing_sigma = make_tabulated_curve(ys_all, sig_all, "calibrated_call_full");
    res.diagnostics.extension_note =
        "eta_c continued as a constant beyond its table for the repricing extension";

    {
        CallPricer pricer(p, res.repricing_sigma,
                          GridSpec{0.5 * ys_all.front(), 2.0 * ys_all.back(), 2001});
        double worst = 0.0;
        for (std::size_t i = 0; i < s.strikes.size(); ++i) {
            if (s.strikes[i] <= res.threshold * 1.02) continue;
            double model = pricer.price(x0, s.strikes[i]).value;
            worst = std::max(worst, std::abs(model - s.prices[i]) /
                                        std::max(s.prices[i], 1e-12));
        }
        res.diagnostics.repricing_max_rel_err = worst;
    }
    return res;
}

struct JointConsistencyReport {
    bool pass = false;
    double continuity_gap_rel = 0.0;       // |sigma_put(x0) - sigma_call(x0)| / mean
    double put_boundary_gap_rel = 0.0;     // |x*_glued(Y) - x0| / x0
    double call_boundary_gap_rel = 0.0;    // |Ups*_glued(X) - x0| / x0
    VolatilityCurve glued;
};

/// Glue the put-side and call-side recoveries at the spot and check that the
/// glued curve reproduces both thresholds as its own exercise levels there.
inline JointConsistencyReport joint_consistency(const ModelParams& p,
                                                const CalibrationResult& put_res,
                                                const CalibrationResult& call_res,
                                                double boundary_tol_rel = 1e-2,
                                                double continuity_tol_rel = 1e-2) {
    if (put_res.kind != OptionKind::put || call_res.kind != OptionKind::call)
        throw std::invalid_argument("joint_consistency: need one put and one call result");
    if (std::abs(put_res.spot_x0 - call_res.spot_x0) > 1e-12 * put_res.spot_x0)
        throw std::invalid_argument("joint_consistency: results quote different spots");
    const double x0 = put_res.spot_x0;

    JointConsistencyReport rep;
    double sp = put_res.recovered_sigma(x0);
    double sc = call_res.recovered_sigma(x0);
    rep.continuity_gap_rel = std::abs(sp - sc) / (0.5 * (sp + sc));

    std::vector<double> xs, sg;
    const auto& pt = *put_res.recovered_sigma.table;
    const auto& ct = *call_res.recovered_sigma.table;
    for (std::size_t i = 0; i < pt.xs().size(); ++i)
        if (pt.xs()[i] < std::log(x0)) { xs.push_back(std::exp(pt.xs()[i])); sg.push_back(pt.ys()[i]); }
    xs.push_back(x0);
    sg.push_back(0.5 * (sp + sc));
    for (std::size_t i = 0; i < ct.xs().size(); ++i)
        if (ct.xs()[i] > std::log(x0)) { xs.push_back(std::exp(ct.xs()[i])); sg.push_back(ct.ys()[i]); }
    rep.glued = make_tabulated_curve(xs, sg, "glued");

    GridSpec g{0.25 * xs.front(), 4.0 * xs.back(), 2001};
    PutPricer put_pricer(p, rep.glued, g);
    CallPricer call_pricer(p, rep.glued, g);
    rep.put_boundary_gap_rel = std::abs(put_pricer.boundary(put_res.threshold) - x0) / x0;
    rep.call_boundary_gap_rel = std::abs(call_pricer.boundary(call_res.threshold) - x0) / x0;
    rep.pass = rep.continuity_gap_rel <= continuity_tol_rel &&
               rep.put_boundary_gap_rel <= boundary_tol_rel &&
               rep.call_boundary_gap_rel <= boundary_tol_rel;
    return rep;
}

/// Build a synthetic quote sample from a model curve (test and CLI fixture).
inline PriceCurveSample synthesize_sample(const ModelParams& p, const VolatilityCurve& curve,
                                          OptionKind kind, double x0,
                                          const std::vector<double>& strikes) {
    PriceCurveSample s;
    s.kind = kind;
    s.spot_x0 = x0;
    s.strikes = strikes;
    s.prices.resize(strikes.size());
    double lo = std::min(x0, strikes.front()), hi = std::max(x0, strikes.back());
    GridSpec g{0.05 * lo, 4.0 * hi, 2001};
    if (kind == OptionKind::put) {
        PutPricer pr(p, curve, g);
        for (std::size_t i = 0; i < strikes.size(); ++i) s.prices[i] = pr.price(x0, strikes[i]).value;
    } else {
        CallPricer pr(p, curve, g);
        for (std::size_t i = 0; i < strikes.size(); ++i) s.prices[i] = pr.price(x0, strikes[i]).value;
    }
    return s;
}

} // namespace perpdual
