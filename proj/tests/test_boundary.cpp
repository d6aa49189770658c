#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "perpdual/boundary.hpp"
#include "perpdual/rational.hpp"

using namespace perpdual;

namespace {
const ModelParams kFig1{0.2, 0.1};
const RationalBoundaryParams kAbc{1.0, 0.4, 0.1};
const double kKappa03 = 0.7372626867430794482227;  // a/(a-1) at vol 0.3, pinned offline

FundamentalSolution dec_solution(const VolatilityCurve& c, GridSpec g = {1e-3, 1e3, 2001}) {
    return solve_fundamental(kFig1, c, SolutionKind::decreasing, g);
}
}  // namespace

TEST_CASE("smooth fit reproduces the constant-volatility boundary ratio") {
    auto fs = dec_solution(make_constant_curve(0.3));
    for (double y : {0.2, 1.0, 5.0}) {
        double xs = put_boundary_smoothfit(fs, y);
        CHECK(xs / y == Catch::Approx(kKappa03).epsilon(1e-10));
        // root condition and its slope sign
        auto F = [&](double x) { return y - x + fs.value(x) / fs.deriv(x); };
        CHECK(std::abs(F(xs)) < 1e-10 * y);
        CHECK(F(xs * (1.0 - 1e-4)) > 0.0);
        CHECK(F(xs * (1.0 + 1e-4)) < 0.0);
        // second form of the fit condition
        CHECK((xs - y) * fs.deriv(xs) == Catch::Approx(fs.value(xs)).epsilon(1e-9));
    }
}

TEST_CASE("smooth fit inverts the rational boundary") {
    auto fs = dec_solution(make_rational_curve(kAbc, kFig1));
    CHECK(put_boundary_smoothfit(fs, 2.5) == Catch::Approx(0.5).epsilon(1e-7));
    for (double y : {0.2, 0.7, 1.7, 4.0, 9.0}) {
        double want = rational::boundary_inverse(kAbc, y);
        CHECK(put_boundary_smoothfit(fs, y) == Catch::Approx(want).epsilon(1e-7));
    }
}

TEST_CASE("strikes outside the solvable span raise a range error") {
    auto fs = dec_solution(make_constant_curve(0.3), GridSpec{0.5, 2.0, 301});
    CHECK_THROWS_AS(put_boundary_smoothfit(fs, 1e9), std::out_of_range);
    CHECK_THROWS_AS(put_boundary_smoothfit(fs, -1.0), std::invalid_argument);
}

TEST_CASE("boundary cone bounds hold at every node") {
    auto curve = make_rational_curve(kAbc, kFig1);
    auto fs = dec_solution(curve);
    auto cone = boundary_cone(kFig1, Side::put, curve.sigma_lo, curve.sigma_hi);
    CHECK(cone.hi < std::min(1.0, kFig1.r / kFig1.delta));
    for (double y = 0.1; y < 20.0; y *= 1.7) {
        double ratio = put_boundary_smoothfit(fs, y) / y;
        CHECK(ratio >= cone.lo * (1.0 - 1e-9));
        CHECK(ratio <= cone.hi * (1.0 + 1e-9));
    }
    auto ccone = boundary_cone(kFig1, Side::call, curve.sigma_lo, curve.sigma_hi);
    CHECK(ccone.lo > std::max(1.0, kFig1.delta / kFig1.r));
}

TEST_CASE("boundary ODE keeps the constant-volatility boundary linear") {
    auto curve = make_constant_curve(0.3);
    double y0 = 1.0, x0 = kKappa03;
    auto fwd = integrate_boundary_ode(kFig1, curve, Side::put, {y0, x0}, {0.1, 10.0},
                                      OdeDirection::forward);
    auto bwd = integrate_boundary_ode(kFig1, curve, Side::put, {y0, x0}, {0.1, 10.0},
                                      OdeDirection::backward);
    for (std::size_t i = 0; i < fwd.grid.size(); i += 50)
        CHECK(fwd.values[i] == Catch::Approx(kKappa03 * fwd.grid[i]).epsilon(1e-8));
    for (std::size_t i = 0; i < bwd.grid.size(); i += 50)
        CHECK(bwd.values[i] == Catch::Approx(kKappa03 * bwd.grid[i]).epsilon(1e-8));
    // the boundary grows strictly
    for (std::size_t i = 1; i < fwd.values.size(); ++i) CHECK(fwd.values[i] > fwd.values[i - 1]);
}

TEST_CASE("call-side ODE follows the rational boundary from its anchor") {
    auto dual_curve = make_rational_dual_curve(kAbc, kFig1);
    auto b = integrate_boundary_ode(kFig1, dual_curve, Side::call, {0.5, 2.5}, {0.5, 5.0},
                                    OdeDirection::forward);
    for (std::size_t i = 0; i < b.grid.size(); i += 40) {
        double want = rational::boundary(kAbc, b.grid[i]);
        CHECK(b.values[i] == Catch::Approx(want).epsilon(1e-6));
    }
    CHECK(b.value(2.0) == Catch::Approx(rational::boundary(kAbc, 2.0)).epsilon(1e-6));
}

TEST_CASE("route agreement between smooth fit and the boundary ODE") {
    std::vector<VolatilityCurve> curves{
        make_constant_curve(0.3),
        make_rational_curve(kAbc, kFig1),
        make_sigma2_curve(kAbc, kFig1, 0.5),
        make_bump_curve(0.3, 0.04),
    };
    for (const auto& curve : curves) {
        INFO(curve.id);
        auto fs = dec_solution(curve);
        double x1 = put_boundary_smoothfit(fs, 1.0);
        auto b = integrate_boundary_ode(kFig1, curve, Side::put, {1.0, x1}, {0.25, 4.0},
                                        OdeDirection::forward);
        auto bb = integrate_boundary_ode(kFig1, curve, Side::put, {1.0, x1}, {0.25, 4.0},
                                         OdeDirection::backward);
        for (double y : {0.3, 0.8, 1.3, 2.2, 3.7}) {
            double ode = (y >= 1.0) ? b.value(y) : bb.value(y);
            CHECK(put_boundary_smoothfit(fs, y) == Catch::Approx(ode).epsilon(1e-5));
        }
    }
}

TEST_CASE("two anchors on the same boundary integrate to the same curve") {
    auto curve = make_rational_curve(kAbc, kFig1);
    auto fs = dec_solution(curve);
    double a1 = put_boundary_smoothfit(fs, 1.0);
    double a2 = put_boundary_smoothfit(fs, 2.0);
    auto b1 = integrate_boundary_ode(kFig1, curve, Side::put, {1.0, a1}, {1.0, 8.0},
                                     OdeDirection::forward);
    auto b2 = integrate_boundary_ode(kFig1, curve, Side::put, {2.0, a2}, {2.0, 8.0},
                                     OdeDirection::forward);
    for (double y : {2.5, 3.5, 5.0, 7.5})
        CHECK(b1.value(y) == Catch::Approx(b2.value(y)).epsilon(1e-6));
}

TEST_CASE("anchors outside the cone are rejected") {
    auto curve = make_constant_curve(0.3);
    CHECK_THROWS_AS(integrate_boundary_ode(kFig1, curve, Side::put, {1.0, 0.9}, {0.5, 2.0}),
                    std::invalid_argument);
    CHECK_THROWS_AS(integrate_boundary_ode(kFig1, curve, Side::call, {1.0, 1.05}, {1.0, 2.0}),
                    std::invalid_argument);
}

TEST_CASE("a wrong in-cone anchor drifts out and aborts with the last level") {
    auto curve = make_rational_curve(kAbc, kFig1);
    // true ratio at y=1 is ~0.136; 0.3 is inside the cone but off the boundary
    try {
        integrate_boundary_ode(kFig1, curve, Side::put, {1.0, 0.30}, {1.0, 1e4},
                               OdeDirection::forward);
        FAIL("expected BoundaryOdeError");
    } catch (const BoundaryOdeError& e) {
        CHECK(e.last_level >= 1.0);
        CHECK(std::string(e.what()).find("denominator") != std::string::npos);
    }
}

TEST_CASE("volatility recovered from a linear boundary is the constant") {
    auto curve = make_constant_curve(0.3);
    auto b = integrate_boundary_ode(kFig1, curve, Side::put, {1.0, kKappa03}, {0.2, 5.0},
                                    OdeDirection::forward);
    auto rec = volatility_from_boundary(kFig1, b);
    for (double x = b.values.front() * 1.01; x < b.values.back(); x *= 1.5)
        CHECK(rec(x) == Catch::Approx(0.3).epsilon(1e-8));
}

TEST_CASE("volatility recovered from the rational put boundary matches the display") {
    auto curve = make_rational_curve(kAbc, kFig1);
    auto fs = dec_solution(curve);
    double a1 = put_boundary_smoothfit(fs, 1.0);
    auto fwd = integrate_boundary_ode(kFig1, curve, Side::put, {1.0, a1}, {1.0, 30.0},
                                      OdeDirection::forward, 1201);
    auto rec = volatility_from_boundary(kFig1, fwd);
    for (double x = fwd.values.front() * 1.05; x < fwd.values.back() * 0.95; x *= 1.6)
        CHECK(rec(x) == Catch::Approx(rational::sigma(kFig1, kAbc, x)).epsilon(1e-6));
}

TEST_CASE("degenerate boundaries are rejected as data errors") {
    Boundary flat;
    flat.side = Side::put;
    flat.params = kFig1;
    flat.grid = {1.0, 2.0, 3.0, 4.0};
    flat.values = {0.5, 0.5, 0.5, 0.5};
    CHECK_THROWS_AS(volatility_from_boundary(kFig1, flat), std::invalid_argument);
}

TEST_CASE("round trip: boundary -> volatility -> boundary") {
    auto curve = make_rational_curve(kAbc, kFig1);
    auto fs = dec_solution(curve);
    double a1 = put_boundary_smoothfit(fs, 0.5);
    auto b = integrate_boundary_ode(kFig1, curve, Side::put, {0.5, a1}, {0.5, 20.0},
                                    OdeDirection::forward, 1201);
    auto rec = volatility_from_boundary(kFig1, b);
    auto b2 = integrate_boundary_ode(kFig1, rec, Side::put, b.anchor, {0.5, 20.0},
                                     OdeDirection::forward, 601);
    for (double y : {0.8, 2.0, 6.0, 15.0})
        CHECK(b2.value(y) == Catch::Approx(b.value(y)).epsilon(1e-5));
}
