#pragma once
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "perpdual/volatility.hpp"

namespace perpdual {

/// Parameters of the rational exercise-boundary family
/// y(x) = x (x + a) / (b x + c), a, b, c > 0.
/// Admissible for a rate pair when max(c/a, b) < min(1, r/delta), which keeps
/// the boundary inside the call-side cone.
struct RationalBoundaryParams {
    double a = 1.0;
    double b = 0.4;
    double c = 0.1;

    void validate(const ModelParams& p) const {
        if (!(a > 0.0) || !(b > 0.0) || !(c > 0.0))
            throw std::invalid_argument("rational family: a, b, c must be > 0");
        double lhs = std::max(c / a, b);
        double rhs = (p.delta > 0.0) ? std::min(1.0, p.r / p.delta) : 1.0;
        if (!(lhs < rhs)) {
            std::ostringstream os;
            os << "rational family: admissibility violated, max(c/a, b) = " << lhs
               << " >= min(1, r/delta) = " << rhs;
            throw std::invalid_argument(os.str());
        }
    }
};

namespace rational {

inline double boundary(const RationalBoundaryParams& q, double x) {
    return x * (x + q.a) / (q.b * x + q.c);
}

inline double boundary_prime(const RationalBoundaryParams& q, double x) {
    double d = q.b * x + q.c;
    return (q.b * x * x + 2.0 * q.c * x + q.a * q.c) / (d * d);
}

/// Inverse of the boundary: the positive root of X^2 + (a - b y) X - c y,
/// in the cancellation-free form when the linear coefficient dominates.
inline double boundary_inverse(const RationalBoundaryParams& q, double y) {
    double s = q.b * y - q.a;
    double root = std::sqrt(s * s + 4.0 * q.c * y);
    return (s >= 0.0) ? 0.5 * (s + root) : 2.0 * q.c * y / (root - s);
}

/// Primal volatility whose put exercise boundary inverts the rational family.
inline double sigma(const ModelParams& p, const RationalBoundaryParams& q, double x) {
    double num = 2.0 * ((p.r - p.delta * q.b) * x + p.r * q.a - p.delta * q.c) *
                 ((1.0 - q.b) * x + q.a - q.c);
    double den = q.b * x * x + 2.0 * q.c * x + q.a * q.c;
    return std::sqrt(num / den);
}

/// Dual volatility of the same family, evaluated on the strike axis.
inline double sigma_dual(const ModelParams& p, const RationalBoundaryParams& q, double y) {
    double xs = boundary_inverse(q, y);
    double num = 2.0 * (y - xs) * (p.r * y - p.delta * xs) *
                 (q.b * xs * xs + 2.0 * q.c * xs + q.a * q.c);
    return std::sqrt(num) / (y * (q.b * xs + q.c));
}

/// Tangent-extension volatility: equals sigma below x0, and above x0 derives
/// from the boundary continued linearly with the slope it has at x0. Gives a
/// second curve producing identical put prices at spot x0.
inline double sigma_tangent_ext(const ModelParams& p, const RationalBoundaryParams& q,
                                double x0, double x) {
    if (x <= x0) return sigma(p, q, x);
    double s = boundary_prime(q, x0);
    double y1 = boundary(q, x0);
    double k = y1 - x0 * s;
    double num = 2.0 * ((p.r * s - p.delta) * x + p.r * k) * ((s - 1.0) * x + k);
    return std::sqrt(num / (x * x * s));
}

} // namespace rational

inline VolatilityCurve make_rational_curve(const RationalBoundaryParams& q, const ModelParams& p) {
    p.validate();
    q.validate(p);
    VolatilityCurve c;
    c.family = FamilyTag::rational_boundary;
    c.eval = [p, q](double x) { return rational::sigma(p, q, x); };
    auto [lo, hi] = detail::scan_bounds(c.eval);
    c.sigma_lo = lo;
    c.sigma_hi = hi;
    std::ostringstream os;
    os << "rational(a=" << q.a << ",b=" << q.b << ",c=" << q.c << ")";
    c.id = os.str();
    return c;
}

/// The dual curve of the rational family in closed form.
inline VolatilityCurve make_rational_dual_curve(const RationalBoundaryParams& q,
                                                const ModelParams& p) {
    p.validate();
    q.validate(p);
    VolatilityCurve c;
    c.family = FamilyTag::rational_boundary;
    c.eval = [p, q](double y) { return rational::sigma_dual(p, q, y); };
    auto [lo, hi] = detail::scan_bounds(c.eval);
    c.sigma_lo = lo;
    c.sigma_hi = hi;
    std::ostringstream os;
    os << "rational_dual(a=" << q.a << ",b=" << q.b << ",c=" << q.c << ")";
    c.id = os.str();
    return c;
}

inline VolatilityCurve make_sigma2_curve(const RationalBoundaryParams& q, const ModelParams& p,
                                         double x0) {
    p.validate();
    q.validate(p);
    if (!(x0 > 0.0)) throw std::invalid_argument("tangent extension: x0 must be > 0");
    double s = rational::boundary_prime(q, x0);
    double floor = (p.r > 0.0) ? std::max(1.0, p.delta / p.r) : 1.0;
    if (!(s > floor))
        throw std::invalid_argument("tangent extension: boundary slope at x0 must exceed max(1, delta/r)");
    VolatilityCurve c;
    c.family = FamilyTag::piecewise_from_boundary;
    c.eval = [p, q, x0](double x) { return rational::sigma_tangent_ext(p, q, x0, x); };
    auto [lo, hi] = detail::scan_bounds(c.eval);
    c.sigma_lo = lo;
    c.sigma_hi = hi;
    std::ostringstream os;
    os << "sigma2(a=" << q.a << ",b=" << q.b << ",c=" << q.c << ",x0=" << x0 << ")";
    c.id = os.str();
    return c;
}

} // namespace perpdual
