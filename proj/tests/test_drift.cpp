#include "nelson/drift.hpp"
#include "nelson/errors.hpp"

#include <catch_amalgamated.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>

using namespace nelson;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

StringParams with_alpha(double ap) {
    StringParams p;
    p.alpha_prime = ap;
    p.mode_cutoff = 4;
    return p;
}

double integrate(const std::function<double(double)>& f, double reach) {
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, -reach, reach, 15, 1e-13);
}

// d/dx log rho by a fourth-order finite difference.
double log_density_slope(const StationaryModeState& s, double x, double h = 1e-4) {
    auto l = [&](double y) { return std::log(s.density(y)); };
    return (-l(x + 2 * h) + 8 * l(x + h) - 8 * l(x - h) + l(x - 2 * h)) / (12 * h);
}

} // namespace

TEST_CASE("ground-state variance is 2 alpha'/n") {
    const auto p = with_alpha(0.5);
    for (int n : {1, 2}) {
        const auto s = StationaryModeState::oscillator(p, n, 0);
        const double var = integrate([&](double x) { return x * x * s.density(x); }, 20.0);
        CHECK_THAT(var, WithinRel(2 * 0.5 / n, 1e-10));
    }
    CHECK_THAT(StationaryModeState::oscillator(p, 1, 0).density(0.7),
               WithinRel(std::exp(-0.49 / 2) / std::sqrt(2 * M_PI), 1e-13));
}

TEST_CASE("first excited state vanishes at the origin") {
    for (double ap : {0.3, 1.0, 2.5}) CHECK(StationaryModeState::oscillator(with_alpha(ap), 1, 1).density(0.0) == 0.0);
}

TEST_CASE("densities are normalized") {
    for (double ap : {0.5, 1.3})
        for (int n = 1; n <= 4; ++n)
            for (int k = 0; k <= 4; ++k) {
                const auto s = StationaryModeState::oscillator(with_alpha(ap), n, k);
                const double reach = 12.0 * std::sqrt(s.ground_variance()) + 5.0;
                CHECK_THAT(integrate([&](double x) { return s.density(x); }, reach), WithinAbs(1.0, 1e-8));
            }
}

TEST_CASE("energies and the zero mode") {
    const auto p = with_alpha(0.5);
    CHECK(StationaryModeState::oscillator(p, 2, 1).energy() == 3.0);
    CHECK(StationaryModeState::oscillator(p, 1, 0).energy() == 0.5);
    const auto z = StationaryModeState::zero_mode(p, 3.0);
    CHECK_THROWS_AS(z.density(0.0), UnsupportedState);
    CHECK_THROWS_AS(StationaryModeState::oscillator(p, 0, 0), UnsupportedState);
}

TEST_CASE("osmotic velocity") {
    const auto s = StationaryModeState::oscillator(with_alpha(0.5), 1, 0);
    for (double x : {-2.0, -0.3, 0.0, 0.8, 3.1}) {
        CHECK_THAT(s.osmotic_velocity(x), WithinAbs(-x, 1e-14));
        CHECK_THAT(s.osmotic_velocity(x), WithinAbs(s.nu() * log_density_slope(s, x), 1e-8));
    }
    for (double ap : {0.2, 1.0, 4.0}) CHECK(StationaryModeState::oscillator(with_alpha(ap), 3, 0).osmotic_velocity(0.0) == 0.0);

    SECTION("divergence next to a node") {
        const auto e = StationaryModeState::oscillator(with_alpha(0.5), 1, 1);
        for (double x : {1e-3, -2e-3, 1e-4}) {
            CHECK_THAT(e.osmotic_velocity(x), WithinRel(e.nu() * 2.0 / x, 1e-2));
            CHECK_THAT(e.osmotic_velocity(x), WithinRel(e.nu() * log_density_slope(e, x, std::abs(x) / 50), 1e-6));
        }
    }
    SECTION("exactly at a node") {
        const auto e = StationaryModeState::oscillator(with_alpha(0.5), 1, 1);
        try {
            (void)e.osmotic_velocity(0.0);
            FAIL("expected SingularDrift");
        } catch (const SingularDrift& err) {
            CHECK(err.location() == 0.0);
        }
    }
}

TEST_CASE("current velocity") {
    const auto p = with_alpha(0.5);
    for (double x : {-1.0, 0.0, 2.0}) CHECK(StationaryModeState::oscillator(p, 2, 0).current_velocity(x) == 0.0);
    CHECK(StationaryModeState::zero_mode(p, 3.0).current_velocity(0.4) == 3.0);
    CHECK(StationaryModeState::zero_mode(p, 0.0).current_velocity(0.4) == 0.0);
}

TEST_CASE("forward drift") {
    const auto g = StationaryModeState::oscillator(with_alpha(0.5), 1, 0);
    for (double x : {-1.5, 0.25, 2.0}) CHECK(g.forward_drift(x) == g.current_velocity(x) + g.osmotic_velocity(x));
    const auto z = StationaryModeState::zero_mode(with_alpha(0.5), 3.0);
    for (double x : {-10.0, 0.0, 7.5}) CHECK(z.forward_drift(x) == 3.0);
    const auto s4 = StationaryModeState::oscillator(with_alpha(1.0), 4, 0);
    CHECK_THAT(s4.forward_drift(0.75), WithinAbs(-3.0, 1e-14));
}

TEST_CASE("ground-state drift is exactly linear") {
    for (double ap : {0.5, 1.0, 0.125})
        for (int n = 1; n <= 4; ++n) {
            const auto s = StationaryModeState::oscillator(with_alpha(ap), n, 0);
            for (int j = -40; j <= 40; ++j) {
                const double x = 0.1 * j;
                CHECK_THAT(s.forward_drift(x), WithinAbs(-n * x, 4 * std::numeric_limits<double>::epsilon() * (1 + n * std::abs(x))));
            }
        }
}

TEST_CASE("stationary states carry no probability current") {
    for (int n = 1; n <= 3; ++n)
        for (int k = 0; k <= 3; ++k) {
            const auto s = StationaryModeState::oscillator(with_alpha(0.5), n, k);
            const double h = 1e-3;
            for (int j = -30; j <= 30; ++j) {
                const double x = 0.1 * j + 0.013;
                auto flux = [&](double y) { return s.density(y) * s.current_velocity(y); };
                CHECK(std::abs((flux(x + h) - flux(x - h)) / (2 * h)) <= h * h);
            }
        }
}

TEST_CASE("osmotic velocity is odd for every state") {
    for (int k = 0; k <= 4; ++k) {
        const auto s = StationaryModeState::oscillator(with_alpha(0.7), 2, k);
        for (double x : {0.11, 0.5, 1.3, 2.9}) CHECK_THAT(s.osmotic_velocity(-x), WithinAbs(-s.osmotic_velocity(x), 1e-9));
    }
}

TEST_CASE("nodes are zeros of the density") {
    for (int k = 0; k <= 6; ++k) {
        const auto s = StationaryModeState::oscillator(with_alpha(0.5), 2, k);
        const auto nodes = s.nodes();
        REQUIRE(nodes.size() == static_cast<std::size_t>(k));
        for (double x : nodes) CHECK(s.density(x) < 1e-25);
    }
}

TEST_CASE("drift clamping") {
    bool clamped = false;
    CHECK(clamp_drift(5.0, 10.0, clamped) == 5.0);
    CHECK_FALSE(clamped);
    CHECK(clamp_drift(-50.0, 10.0, clamped) == -10.0);
    CHECK(clamped);
    CHECK(clamp_drift(std::numeric_limits<double>::infinity(), 1e6, clamped) == 1e6);
}
