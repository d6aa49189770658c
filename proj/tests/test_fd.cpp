#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "perpdual/fd.hpp"
#include "perpdual/pricing.hpp"
#include "perpdual/rational.hpp"

using namespace perpdual;

namespace {
const ModelParams kFig1{0.2, 0.1};
const RationalBoundaryParams kAbc{1.0, 0.4, 0.1};
}  // namespace

TEST_CASE("tiny maturity returns the intrinsic value") {
    auto c = make_constant_curve(0.3);
    FDGridSpec g{-3.0, 3.0, 801, 1, 1e-8};
    auto itm = fd_american_price(kFig1, c, OptionKind::put, 0.5, 1.0, g);
    CHECK(itm.price == Catch::Approx(0.5).margin(1e-6));
    auto otm = fd_american_price(kFig1, c, OptionKind::put, 1.5, 1.0, g);
    CHECK(otm.price == Catch::Approx(0.0).margin(1e-6));
}

TEST_CASE("long maturities converge to the perpetual price") {
    auto c = make_constant_curve(0.3);
    PutPricer put(kFig1, c);
    double perp = put.price(1.0, 1.0).value;
    auto g = default_fd_grid(kFig1, c, OptionKind::put, 1.0, 1.0, 50.0);
    auto fd = fd_american_price(kFig1, c, OptionKind::put, 1.0, 1.0, g);
    CHECK(std::abs(fd.price - perp) / perp < 1e-3);
    CHECK_FALSE(fd.kink_warning);

    CallPricer call(kFig1, c);
    double perpc = call.price(0.5, 0.4).value;
    auto gc = default_fd_grid(kFig1, c, OptionKind::call, 0.5, 0.4, 50.0);
    auto fdc = fd_american_price(kFig1, c, OptionKind::call, 0.5, 0.4, gc);
    CHECK(std::abs(fdc.price - perpc) / perpc < 1e-3);
}

TEST_CASE("the rational-family put at T=10 sits within 1% of its limit") {
    auto rat = make_rational_curve(kAbc, kFig1);
    PutPricer put(kFig1, rat);
    double perp = put.price(0.5, 0.4).value;
    auto g = default_fd_grid(kFig1, rat, OptionKind::put, 0.5, 0.4, 10.0);
    auto fd = fd_american_price(kFig1, rat, OptionKind::put, 0.5, 0.4, g);
    CHECK(fd.price <= perp * (1.0 + 1e-4));
    CHECK(std::abs(fd.price - perp) / perp < 1e-2);
}

TEST_CASE("price is nondecreasing in maturity and above intrinsic") {
    auto c = make_constant_curve(0.3);
    auto pts = convergence_sweep(kFig1, c, OptionKind::put, 0.9, 1.0, {0.25, 0.5, 1.0, 2.0, 4.0});
    REQUIRE(pts.size() == 5);
    CHECK(pts.front().price >= 0.1 - 1e-9);  // intrinsic y - x
    for (std::size_t i = 1; i < pts.size(); ++i)
        CHECK(pts[i].price >= pts[i - 1].price - 1e-9);
}

TEST_CASE("halving the steps moves the price by less than the declared tolerance") {
    auto c = make_constant_curve(0.3);
    auto g = default_fd_grid(kFig1, c, OptionKind::put, 1.0, 1.0, 1.0);
    g.n_space = 801;
    g.n_time = 400;
    double coarse = fd_american_price(kFig1, c, OptionKind::put, 1.0, 1.0, g).price;
    FDGridSpec fine = g;
    fine.n_space = 1601;
    fine.n_time = 800;
    double refined = fd_american_price(kFig1, c, OptionKind::put, 1.0, 1.0, fine).price;
    // second-order interior scheme: declared discretization tolerance 5e-4
    CHECK(std::abs(refined - coarse) / refined < 4.0 * 5e-4);
}

TEST_CASE("a grid that cannot see the payoff kink is flagged") {
    auto c = make_constant_curve(0.3);
    FDGridSpec g{-0.5, 0.4, 201, 50, 1.0};  // strike ln(2.0) lies outside
    auto r = fd_american_price(kFig1, c, OptionKind::put, 1.0, 2.0, g);
    CHECK(r.kink_warning);
    CHECK_THROWS_AS(fd_american_price(kFig1, c, OptionKind::put, 10.0, 1.0, g),
                    std::invalid_argument);
}

TEST_CASE("tangent-extension puts separate from the base curve above the spot") {
    // the generators agree below 0.5, so their put prices split only at
    // spots above it; at spot 3 the near-limit values differ visibly
    auto s1 = make_rational_curve(kAbc, kFig1);
    auto s2 = make_sigma2_curve(kAbc, kFig1, 0.5);
    double T = 6.0;
    auto g1 = default_fd_grid(kFig1, s1, OptionKind::put, 3.0, 1.0, T);
    auto g2 = default_fd_grid(kFig1, s2, OptionKind::put, 3.0, 1.0, T);
    double v1 = fd_american_price(kFig1, s1, OptionKind::put, 3.0, 1.0, g1).price;
    double v2 = fd_american_price(kFig1, s2, OptionKind::put, 3.0, 1.0, g2).price;
    CHECK(std::abs(v1 - v2) / std::max(v1, v2) > 1e-2);
}

TEST_CASE("dual-world pricing runs under swapped rates") {
    // the dual call under the dual curve approaches the primal put's value
    auto rat = make_rational_curve(kAbc, kFig1);
    auto dual = make_rational_dual_curve(kAbc, kFig1);
    PutPricer put(kFig1, rat);
    double perp = put.price(0.5, 0.4).value;
    auto g = default_fd_grid(dual_params(kFig1), dual, OptionKind::call, 0.4, 0.5, 10.0);
    auto fd = fd_american_price(dual_params(kFig1), dual, OptionKind::call, 0.4, 0.5, g);
    CHECK(std::abs(fd.price - perp) / perp < 1e-2);
}
