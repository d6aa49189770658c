#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "perpdual/fundamental.hpp"
#include "perpdual/rational.hpp"

using namespace perpdual;

namespace {
const ModelParams kFig1{0.2, 0.1};
const RationalBoundaryParams kAbc{1.0, 0.4, 0.1};

// exponents pinned by 50-digit evaluation of the closed forms at r=0.2, delta=0.1
struct Pinned { double vol, a, b; };
const Pinned kPinned[] = {
    {0.1, -20.91271221051332740562, 21.91271221051332740562},
    {0.3, -2.806082918348712337283, 3.806082918348712337283},
    {0.6, -0.8550399683147397809054, 1.855039968314739780905},
};
}  // namespace

TEST_CASE("exponents match high-precision values and satisfy b = 1 - a") {
    for (const auto& c : kPinned) {
        auto e = bs_exponents(kFig1, c.vol);
        CHECK(e.a == Catch::Approx(c.a).epsilon(5e-15));
        CHECK(e.b == Catch::Approx(c.b).epsilon(5e-15));
        CHECK(std::abs(e.b - (1.0 - e.a)) <= 4e-16 * std::abs(e.b));
        CHECK(e.a < 0.0);
        CHECK(e.b > 1.0);
    }
    auto sw = bs_exponents(dual_params(kFig1), 0.3);
    CHECK(sw.a < 0.0);
    CHECK(sw.b > 1.0);
    CHECK(sw.b == Catch::Approx(1.583860696126490115061).epsilon(5e-15));
    CHECK_THROWS_AS(bs_exponents(kFig1, 0.0), std::domain_error);
    CHECK_THROWS_AS(bs_exponents(kFig1, -0.2), std::domain_error);
}

TEST_CASE("constant volatility reproduces the power solutions to 1e-8") {
    GridSpec g{0.1, 10.0, 2001};
    for (const auto& c : kPinned) {
        auto curve = make_constant_curve(c.vol);
        auto fd = solve_fundamental(kFig1, curve, SolutionKind::decreasing, g);
        auto fu = solve_fundamental(kFig1, curve, SolutionKind::increasing, g);
        double b_up = bs_exponents(dual_params(kFig1), c.vol).b;
        for (std::size_t i = 0; i < fd.grid.size(); i += 40) {
            double x = fd.grid[i];
            CHECK(fd.f_values[i] == Catch::Approx(std::pow(x, c.a)).epsilon(1e-8));
            CHECK(fu.f_values[i] == Catch::Approx(std::pow(x, b_up)).epsilon(1e-8));
            CHECK(fd.fprime_values[i] < 0.0);
            CHECK(fu.fprime_values[i] > 0.0);
        }
        CHECK(fd.value(1.0) == 1.0);
        CHECK(fu.value(1.0) == 1.0);
    }
}

TEST_CASE("degenerate rates collapse to the fixed solutions") {
    auto curve = make_rational_curve(kAbc, kFig1);
    GridSpec g{0.1, 10.0, 501};
    auto f1 = solve_fundamental({0.0, 0.1}, curve, SolutionKind::decreasing, g);
    for (double f : f1.f_values) CHECK(f == 1.0);
    auto fx = solve_fundamental({0.2, 0.0}, curve, SolutionKind::increasing, g);
    for (std::size_t i = 0; i < fx.grid.size(); i += 50)
        CHECK(fx.f_values[i] == Catch::Approx(fx.grid[i]).epsilon(1e-14));
    CHECK_THROWS_AS(solve_fundamental({0.0, 0.0}, curve, SolutionKind::increasing, g),
                    std::domain_error);
}

TEST_CASE("zero-dividend quadrature reduces to the power for constant vol") {
    ModelParams p{0.2, 0.0};
    auto curve = make_constant_curve(0.3);
    GridSpec g{0.1, 10.0, 801};
    auto fs = closed_form_special(p, curve, SolutionKind::decreasing, g);
    double a = -2.0 * p.r / (0.3 * 0.3);
    for (std::size_t i = 0; i < fs.grid.size(); i += 40) {
        double x = fs.grid[i];
        CHECK(fs.f_values[i] == Catch::Approx(std::pow(x, a)).epsilon(1e-8));
        CHECK(fs.fprime_values[i] == Catch::Approx(a * std::pow(x, a - 1.0)).epsilon(1e-7));
    }
}

TEST_CASE("zero-rate quadrature reduces to the power for constant vol") {
    ModelParams p{0.0, 0.1};
    auto curve = make_constant_curve(0.3);
    GridSpec g{0.1, 10.0, 801};
    auto fs = closed_form_special(p, curve, SolutionKind::increasing, g);
    double b = 1.0 + 2.0 * p.delta / (0.3 * 0.3);
    for (std::size_t i = 0; i < fs.grid.size(); i += 40) {
        double x = fs.grid[i];
        CHECK(fs.f_values[i] == Catch::Approx(std::pow(x, b)).epsilon(1e-8));
    }
    CHECK_THROWS_AS(closed_form_special({0.0, 0.0}, curve, SolutionKind::increasing, g),
                    std::domain_error);
    CHECK_THROWS_AS(closed_form_special(kFig1, curve, SolutionKind::decreasing, g),
                    std::domain_error);
}

TEST_CASE("quadrature and direct integration agree away from constant vol") {
    // delta = 0 admits both routes; they are independent implementations
    ModelParams p{0.15, 0.0};
    auto curve = make_bump_curve(0.35, 0.1);
    GridSpec g{0.1, 10.0, 801};
    auto quad = closed_form_special(p, curve, SolutionKind::decreasing, g);
    auto ivp = detail::solve_fundamental_ivp(p, curve, SolutionKind::decreasing, g);
    for (std::size_t i = 0; i < quad.grid.size(); i += 20)
        CHECK(quad.f_values[i] == Catch::Approx(ivp.f_values[i]).epsilon(1e-8));
}

TEST_CASE("ODE residual stays below the scaled tolerance for both kinds") {
    GridSpec g{0.1, 10.0, 2001};
    std::vector<VolatilityCurve> curves{make_rational_curve(kAbc, kFig1),
                                        make_constant_curve(0.1),
                                        make_bump_curve(0.3, 0.04)};
    for (const auto& c : curves) {
        INFO(c.id);
        auto fd = solve_fundamental(kFig1, c, SolutionKind::decreasing, g);
        auto fu = solve_fundamental(kFig1, c, SolutionKind::increasing, g);
        CHECK(ode_residual_max(fd, c) < 1e-6);
        CHECK(ode_residual_max(fu, c) < 1e-6);
    }
}

TEST_CASE("discrete convexity and slope signs hold under the bounds hypothesis") {
    GridSpec g{0.1, 10.0, 2001};
    auto c = make_rational_curve(kAbc, kFig1);
    for (auto kind : {SolutionKind::decreasing, SolutionKind::increasing}) {
        auto fs = solve_fundamental(kFig1, c, kind, g);
        for (std::size_t i = 1; i + 1 < fs.grid.size(); i += 7) {
            double h1 = fs.grid[i] - fs.grid[i - 1], h2 = fs.grid[i + 1] - fs.grid[i];
            double second = 2.0 * (h1 * fs.f_values[i + 1] - (h1 + h2) * fs.f_values[i] +
                                   h2 * fs.f_values[i - 1]) / (h1 * h2 * (h1 + h2));
            CHECK(second > 0.0);
            if (kind == SolutionKind::decreasing) CHECK(fs.fprime_values[i] < 0.0);
            else CHECK(fs.fprime_values[i] > 0.0);
        }
    }
}

TEST_CASE("hitting-ratio monotonicity in the volatility level") {
    // for vol1 < vol2 and x > z: f1(x)/f1(z) <= f2(x)/f2(z)
    GridSpec g{0.1, 10.0, 1001};
    auto f1 = solve_fundamental(kFig1, make_constant_curve(0.2), SolutionKind::decreasing, g);
    auto f2 = solve_fundamental(kFig1, make_constant_curve(0.3), SolutionKind::decreasing, g);
    double z = 0.5;
    for (double x : {0.7, 1.0, 2.0, 5.0})
        CHECK(f1.value(x) / f1.value(z) <= f2.value(x) / f2.value(z) * (1.0 + 1e-12));
}

TEST_CASE("normalization holds exactly at the unit level") {
    auto c = make_rational_curve(kAbc, kFig1);
    auto fs = solve_fundamental(kFig1, c, SolutionKind::decreasing, GridSpec{0.2, 5.0, 801});
    CHECK(fs.value(1.0) == 1.0);
}
