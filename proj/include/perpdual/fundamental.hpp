#pragma once
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "perpdual/detail/quadrature.hpp"
#include "perpdual/detail/rk45.hpp"
#include "perpdual/params.hpp"
#include "perpdual/volatility.hpp"

namespace perpdual {

/// Characteristic exponents of the constant-volatility pricing equation:
/// `a` is the decreasing-solution exponent under (r, delta); `b = 1 - a` is
/// the increasing-solution exponent of the rate-swapped equation. Both come
/// from one shared radicand, so b == 1 - a holds to the last bit.
struct BsExponents {
    double a;
    double b;
};

inline BsExponents bs_exponents(const ModelParams& p, double vol) {
    p.validate();
    if (!(vol > 0.0)) throw std::domain_error("bs_exponents: vol must be > 0");
    double s2 = vol * vol;
    double m = p.delta - p.r + 0.5 * s2;
    double root = std::sqrt(m * m + 2.0 * p.r * s2);
    return {(m - root) / s2, (-m + root) / s2 + 1.0};
}

enum class SolutionKind { decreasing, increasing };

inline const char* to_string(SolutionKind k) {
    return k == SolutionKind::decreasing ? "decreasing" : "increasing";
}

/// Tabulated positive solution of the pricing ODE
///   (1/2) sigma^2(x) x^2 f'' + (r - delta) x f' - r f = 0,
/// normalized to f(1) = 1. Stored as (ln f, x f'/f) on a uniform log grid
/// covering a buffered span around the requested one; evaluation is cubic
/// Hermite in log-spot, so f > 0 by construction and f' comes from solver
/// state, never from differencing f.
class FundamentalSolution {
public:
    SolutionKind kind = SolutionKind::decreasing;
    ModelParams params;
    std::string curve_id;

    std::vector<double> grid;           // requested nodes (spot levels)
    std::vector<double> f_values;
    std::vector<double> fprime_values;

    FundamentalSolution() = default;

    FundamentalSolution(SolutionKind k, ModelParams p, std::string cid, double s_first,
                        double step, std::vector<double> log_f, std::vector<double> slope,
                        std::size_t req_begin, std::size_t req_count)
        : kind(k), params(p), curve_id(std::move(cid)), s_first_(s_first), h_(step),
          logf_(std::move(log_f)), w_(std::move(slope)) {
        // shift so ln f(1) = 0
        double l0 = hermite(0.0).first;
        for (auto& v : logf_) v -= l0;
        grid.resize(req_count);
        f_values.resize(req_count);
        fprime_values.resize(req_count);
        for (std::size_t i = 0; i < req_count; ++i) {
            double s = s_first_ + h_ * double(req_begin + i);
            double x = std::exp(s);
            grid[i] = x;
            f_values[i] = std::exp(logf_[req_begin + i]);
            fprime_values[i] = w_[req_begin + i] * f_values[i] / x;
        }
    }

    double span_lo() const { return std::exp(s_first_); }
    double span_hi() const { return std::exp(s_first_ + h_ * double(logf_.size() - 1)); }

    double value(double x) const { return std::exp(hermite(check(x)).first); }
    double deriv(double x) const {
        auto [lf, w] = hermite(check(x));
        return w * std::exp(lf) / x;
    }
    /// Logarithmic slope x f'(x) / f(x); negative for the decreasing kind,
    /// positive for the increasing kind.
    double log_slope(double x) const { return hermite(check(x)).second; }

    double log_step() const { return h_; }
    const std::vector<double>& slopes() const { return w_; }

private:
    double check(double x) const {
        double s = std::log(x);
        if (!(x > 0.0) || s < s_first_ - 1e-12 || s > s_first_ + h_ * double(logf_.size() - 1) + 1e-12)
            throw std::out_of_range("FundamentalSolution: evaluation outside tabulated span");
        return s;
    }
    // value and first derivative of the Hermite interpolant of ln f at s
    std::pair<double, double> hermite(double s) const {
        double u = (s - s_first_) / h_;
        auto i = static_cast<std::size_t>(std::clamp(u, 0.0, double(logf_.size() - 2)));
        i = std::min(i, logf_.size() - 2);
        double t = u - double(i);
        double y0 = logf_[i], y1 = logf_[i + 1], m0 = h_ * w_[i], m1 = h_ * w_[i + 1];
        double t2 = t * t, t3 = t2 * t;
        double val = (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * m0 +
                     (-2 * t3 + 3 * t2) * y1 + (t3 - t2) * m1;
        double der = ((6 * t2 - 6 * t) * y0 + (3 * t2 - 4 * t + 1) * m0 +
                      (-6 * t2 + 6 * t) * y1 + (3 * t2 - 2 * t) * m1) / h_;
        return {val, der};
    }

    double s_first_ = 0.0;
    double h_ = 1.0;
    std::vector<double> logf_;  // ln f at uniform log nodes
    std::vector<double> w_;     // x f'/f at the same nodes
};

namespace detail {

struct LogGridLayout {
    double s_first;
    double h;
    std::size_t n_total;
    std::size_t req_begin;
    std::size_t req_count;
};

/// Uniform log grid over the requested span, extended by a multiplicative
/// buffer on both sides and stretched to contain x = 1 for normalization.
inline LogGridLayout buffered_layout(const GridSpec& g, double buffer_decades = 4.0) {
    g.validate();
    double s_lo = std::log(g.x_min), s_hi = std::log(g.x_max);
    double h = (s_hi - s_lo) / double(g.n - 1);
    double pad = buffer_decades * std::log(10.0);
    double want_lo = std::min(s_lo - pad, -0.5);
    double want_hi = std::max(s_hi + pad, 0.5);
    auto below = static_cast<std::size_t>(std::ceil((s_lo - want_lo) / h));
    auto above = static_cast<std::size_t>(std::ceil((want_hi - s_hi) / h));
    return {s_lo - h * double(below), h, g.n + below + above, below, g.n};
}

/// Direct integration of the pricing ODE in log-derivative form:
///   w' = (1 - 2(r - delta)/sigma^2) w + 2 r / sigma^2 - w^2,  w = x f'/f,
/// shot from the far boundary where the frozen-coefficient power behavior is
/// exact, together with the antiderivative of w giving ln f.
inline FundamentalSolution solve_fundamental_ivp(const ModelParams& p, const VolatilityCurve& curve,
                                                 SolutionKind kind, const GridSpec& g) {
    p.validate();
    auto lay = buffered_layout(g);
    std::vector<double> s(lay.n_total), lf(lay.n_total), w(lay.n_total);
    for (std::size_t i = 0; i < lay.n_total; ++i) s[i] = lay.s_first + lay.h * double(i);

    Rk45<2> rk;
    rk.rtol = 1e-10;
    rk.atol = 1e-13;
    Rk45<2>::Rhs rhs = [&](double t, const Rk45<2>::State& y, Rk45<2>::State& dy) {
        double sig = curve(std::exp(t));
        double inv = 2.0 / (sig * sig);
        dy[0] = (1.0 - (p.r - p.delta) * inv) * y[0] + p.r * inv - y[0] * y[0];
        dy[1] = y[0];
    };

    std::vector<double> path(s);
    Rk45<2>::State y0;
    if (kind == SolutionKind::decreasing) {
        std::reverse(path.begin(), path.end());
        y0 = {bs_exponents(p, curve(std::exp(path.front()))).a, 0.0};
    } else {
        y0 = {bs_exponents(dual_params(p), curve(std::exp(path.front()))).b, 0.0};
    }
    try {
        rk45_at_points<2>(rk, rhs, path.front(), path,
                          y0, [&](std::size_t i, const Rk45<2>::State& y) {
                              std::size_t j = (kind == SolutionKind::decreasing)
                                                  ? lay.n_total - 1 - i : i;
                              w[j] = y[0];
                              lf[j] = y[1];
                          });
    } catch (const std::runtime_error& e) {
        throw std::runtime_error(std::string("solve_fundamental: integration failed: ") + e.what());
    }
    for (std::size_t i = 0; i < lay.n_total; ++i) {
        bool bad = (kind == SolutionKind::decreasing) ? !(w[i] < 0.0) : !(w[i] > 0.0);
        if (bad)
            throw std::runtime_error("solve_fundamental: slope sign violated at x = " +
                                     std::to_string(std::exp(s[i])));
    }
    return FundamentalSolution(kind, p, curve.id, lay.s_first, lay.h, std::move(lf), std::move(w),
                               lay.req_begin, lay.req_count);
}

inline FundamentalSolution constant_solution(const ModelParams& p, const VolatilityCurve& curve,
                                             SolutionKind kind, const GridSpec& g, double exponent) {
    auto lay = buffered_layout(g);
    std::vector<double> lf(lay.n_total), w(lay.n_total, exponent);
    for (std::size_t i = 0; i < lay.n_total; ++i)
        lf[i] = exponent * (lay.s_first + lay.h * double(i));
    return FundamentalSolution(kind, p, curve.id, lay.s_first, lay.h, std::move(lf), std::move(w),
                               lay.req_begin, lay.req_count);
}

} // namespace detail

namespace detail {
inline double log_add_exp(double a, double b) {
    if (a < b) std::swap(a, b);
    if (b == -std::numeric_limits<double>::infinity()) return a;
    return a + std::log1p(std::exp(b - a));
}
} // namespace detail

/// Quadrature evaluation of the degenerate-rate solutions:
///  - delta = 0, decreasing:  f(x) = phi(x)/phi(1),
///      phi(x) = x * Int_x^inf v^-2 exp(-Int_1^v 2r/(u sigma^2(u)) du) dv
///  - r = 0, increasing:      f(x) = psi(x)/psi(1),
///      psi(x) = Int_0^x exp(Int_1^v 2 delta/(u sigma^2(u)) du) dv
/// All accumulation runs in log space so steep exponents cannot overflow.
inline FundamentalSolution closed_form_special(const ModelParams& p, const VolatilityCurve& curve,
                                               SolutionKind kind, const GridSpec& g = {}) {
    p.validate();
    if (p.r == 0.0 && p.delta == 0.0)
        throw std::domain_error("closed_form_special: r = 0 and delta = 0 is out of scope");
    if (kind == SolutionKind::decreasing && p.delta != 0.0)
        throw std::domain_error("closed_form_special: decreasing form requires delta = 0");
    if (kind == SolutionKind::increasing && p.r != 0.0)
        throw std::domain_error("closed_form_special: increasing form requires r = 0");
    if (kind == SolutionKind::decreasing && p.r == 0.0)
        return detail::constant_solution(p, curve, kind, g, 0.0);

    auto lay = detail::buffered_layout(g, 0.5);  // pointwise quadrature needs no shooting buffer
    const std::size_t n = lay.n_total;
    std::vector<double> s(n);
    for (std::size_t i = 0; i < n; ++i) s[i] = lay.s_first + lay.h * double(i);

    const bool dec = (kind == SolutionKind::decreasing);
    const double rate = dec ? p.r : p.delta;
    auto rate_term = [&](double u) {
        double sig = curve(std::exp(u));
        return 2.0 * rate / (sig * sig);
    };
    // cumulative inner exponent I(s) = Int_0^s 2 rate / sigma^2 du
    std::vector<double> I(n);
    I[0] = detail::adaptive_simpson(rate_term, 0.0, s[0]);
    for (std::size_t i = 1; i < n; ++i)
        I[i] = I[i - 1] + detail::adaptive_simpson(rate_term, s[i - 1], s[i]);
    auto inner = [&](double u) {
        auto i = static_cast<std::size_t>(std::clamp((u - s[0]) / lay.h, 0.0, double(n - 1)));
        i = std::min(i, n - 1);
        return I[i] + detail::adaptive_simpson(rate_term, s[i], u);
    };
    // log of the outer integrand: e^{-u - I(u)} (decreasing) / e^{u + I(u)} (increasing)
    auto log_integrand = [&](double u) { return dec ? -u - inner(u) : u + inner(u); };
    auto log_segment = [&](double lo, double hi) {
        double ref = std::max(log_integrand(lo), log_integrand(hi));
        double val = detail::adaptive_simpson(
            [&](double u) { return std::exp(log_integrand(u) - ref); }, lo, hi, 1e-12, 1e-300);
        return ref + std::log(val);
    };

    std::vector<double> lf(n), w(n);
    if (dec) {
        double s_max = s.back() + 45.0;
        double q_far = rate_term(s_max);
        double logJ = log_integrand(s_max) - std::log1p(q_far);  // analytic tail
        logJ = detail::log_add_exp(logJ, log_segment(s[n - 1], s_max));
        for (std::size_t i = n; i-- > 0;) {
            if (i + 1 < n) logJ = detail::log_add_exp(logJ, log_segment(s[i], s[i + 1]));
            lf[i] = s[i] + logJ;                            // ln phi = ln x + ln J
            w[i] = 1.0 - std::exp(-I[i] - s[i] - logJ);     // 1 - E/(x J)
            if (!(w[i] < 0.0))
                throw std::runtime_error("closed_form_special: slope sign violated");
        }
    } else {
        double s_min = s.front() - 45.0;
        double q_far = rate_term(s_min);
        double logPsi = log_integrand(s_min) - std::log1p(q_far);  // analytic lower tail
        logPsi = detail::log_add_exp(logPsi, log_segment(s_min, s[0]));
        for (std::size_t i = 0; i < n; ++i) {
            if (i > 0) logPsi = detail::log_add_exp(logPsi, log_segment(s[i - 1], s[i]));
            lf[i] = logPsi;
            w[i] = std::exp(s[i] + I[i] - logPsi);          // x psi'/psi
            if (!(w[i] > 0.0))
                throw std::runtime_error("closed_form_special: slope sign violated");
        }
    }
    return FundamentalSolution(kind, p, curve.id, lay.s_first, lay.h, std::move(lf), std::move(w),
                               lay.req_begin, lay.req_count);
}

/// Solve the pricing ODE for the requested branch. Degenerate rate regimes
/// route to their closed forms; otherwise the far-field shooting integration
/// is used.
inline FundamentalSolution solve_fundamental(const ModelParams& p, const VolatilityCurve& curve,
                                             SolutionKind kind, const GridSpec& g = {}) {
    p.validate();
    if (kind == SolutionKind::decreasing) {
        if (p.r == 0.0) return detail::constant_solution(p, curve, kind, g, 0.0);
        if (p.delta == 0.0) return closed_form_special(p, curve, kind, g);
    } else {
        if (p.r == 0.0 && p.delta == 0.0)
            throw std::domain_error("solve_fundamental: increasing branch needs r > 0 or delta > 0");
        if (p.delta == 0.0) return detail::constant_solution(p, curve, kind, g, 1.0);
        if (p.r == 0.0) return closed_form_special(p, curve, kind, g);
    }
    return detail::solve_fundamental_ivp(p, curve, kind, g);
}

/// Max over interior grid nodes of the ODE residual scaled by
/// |r f| + |(r - delta) x f'| + 1. The second derivative is reconstructed
/// from the stored slopes with 4th-order stencils on the uniform log grid.
inline double ode_residual_max(const FundamentalSolution& fs, const VolatilityCurve& curve) {
    const auto& x = fs.grid;
    const std::size_t n = x.size();
    if (n < 5) throw std::invalid_argument("ode_residual_max: need >= 5 nodes");
    double h = fs.log_step();
    std::vector<double> u(n), us(n);
    for (std::size_t i = 0; i < n; ++i) {
        u[i] = fs.f_values[i];
        us[i] = x[i] * fs.fprime_values[i];
    }
    const ModelParams p = fs.params;
    double worst = 0.0;
    for (std::size_t i = 2; i + 2 < n; ++i) {
        double uss = (-us[i + 2] + 8.0 * us[i + 1] - 8.0 * us[i - 1] + us[i - 2]) / (12.0 * h);
        double sig = curve(x[i]);
        double res = 0.5 * sig * sig * (uss - us[i]) + (p.r - p.delta) * us[i] - p.r * u[i];
        double scale = std::abs(p.r * u[i]) + std::abs((p.r - p.delta) * us[i]) + 1.0;
        worst = std::max(worst, std::abs(res) / scale);
    }
    return worst;
}

} // namespace perpdual
