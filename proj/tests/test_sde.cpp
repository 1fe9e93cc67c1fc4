#include "nelson/errors.hpp"
#include "nelson/sde.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

using namespace nelson;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

StringParams half_alpha(int cutoff = 2) {
    StringParams p;
    p.alpha_prime = 0.5;
    p.mode_cutoff = cutoff;
    return p;
}

ModeStateSpec excited(const StringParams& p, int n, int dir, int k) {
    auto s = ModeStateSpec::ground(p);
    s.set_occupation(n, dir, k);
    return s;
}

double record_variance(const Ensemble& e, std::int64_t r) {
    double m = 0, m2 = 0;
    for (std::int64_t j = 0; j < e.count; ++j) {
        const double q = e.sample(j, r);
        m += q;
        m2 += q * q;
    }
    m /= static_cast<double>(e.count);
    return m2 / static_cast<double>(e.count) - m * m;
}

} // namespace

TEST_CASE("driftless increments have variance 2 nu dtau") {
    SimulationSpec spec;
    spec.d_tau = 0.01;
    spec.steps = 1;
    spec.count = 100000;
    spec.seed = 11;
    spec.init = InitialCondition::point(0.0);
    const auto e = simulate_process(DriftField::linear(0, 0), 1.0, spec);
    const auto m = increment_moments(e, 0);
    CHECK_THAT(m.variance, WithinRel(0.02, 0.05));
    CHECK(std::abs(m.mean) < 3 * m.mean_standard_error);
}

TEST_CASE("zero-mode increments drift at 2 alpha' kappa") {
    const auto p = half_alpha();
    auto s = ModeStateSpec::ground(p);
    s.zero_mode_momentum[0] = 3.0;
    SimulationSpec spec;
    spec.mode = 0;
    spec.direction = 1;
    spec.d_tau = 1e-3;
    spec.steps = 1;
    spec.count = 200000;
    spec.seed = 5;
    spec.init = InitialCondition::point(0.0);
    const auto e = simulate(p, s, spec);
    const auto m = increment_moments(e, 0);
    CHECK(std::abs(m.mean / spec.d_tau - 3.0) < 3 * m.mean_standard_error / spec.d_tau);
    CHECK_THAT(m.variance, WithinRel(2 * 0.5 * 1e-3, 0.02));

    spec.init = InitialCondition::stationary();
    CHECK_THROWS_AS(simulate(p, s, spec), UnsupportedState);
}

TEST_CASE("ground-state increments") {
    const auto p = half_alpha();
    SimulationSpec spec;
    spec.d_tau = 1e-3;
    spec.steps = 1;
    spec.count = 100000;
    spec.seed = 9;
    const auto e = simulate(p, ModeStateSpec::ground(p), spec);
    const auto m = increment_moments(e, 0);
    CHECK_THAT(m.variance, WithinRel(2 * 1.0 * 1e-3, 0.05));
    CHECK(std::abs(m.mean) < 3 * m.mean_standard_error);
}

TEST_CASE("zero noise reproduces the Euler recursion of the deterministic drift") {
    const auto p = half_alpha();
    SimulationSpec spec;
    spec.d_tau = 1e-3;
    spec.steps = 500;
    spec.count = 3;
    spec.init = InitialCondition::point(1.0);
    spec.diffusion_override = 0.0;
    const auto e = simulate(p, ModeStateSpec::ground(p), spec);
    for (std::int64_t j = 0; j < e.count; ++j)
        for (std::int64_t t = 0; t <= spec.steps; ++t)
            CHECK_THAT(e.sample(j, t), WithinRel(std::pow(1.0 - spec.d_tau, static_cast<double>(t)), 1e-12));
}

TEST_CASE("stationary variance is preserved") {
    const auto p = half_alpha();
    SimulationSpec spec;
    spec.d_tau = 1e-3;
    spec.steps = 2000;
    spec.record_stride = 200;
    spec.count = 100000;
    spec.seed = 2024;
    const auto e = simulate(p, ModeStateSpec::ground(p), spec);
    const double se = std::sqrt(2.0 / static_cast<double>(spec.count - 1));
    for (std::int64_t r = 0; r < e.recorded(); ++r) CHECK(std::abs(record_variance(e, r) - 1.0) < 3 * se);
}

TEST_CASE("excited stationary ensembles keep their distribution") {
    const auto p = half_alpha();
    const auto state = excited(p, 1, 1, 1);
    SimulationSpec spec;
    spec.d_tau = 1e-3;
    spec.steps = 3000;
    spec.record_stride = 3000;
    spec.count = 20000;
    spec.seed = 77;
    const auto e = simulate(p, state, spec);
    std::vector<double> first, last;
    for (std::int64_t j = 0; j < e.count; ++j) {
        first.push_back(e.sample(j, 0));
        last.push_back(e.sample(j, 1));
    }
    const double critical = 1.628 * std::sqrt(2.0 / static_cast<double>(e.count));
    CHECK(ks_distance(first, last) < critical);
    // excited-state variance 3 sigma^2
    CHECK_THAT(record_variance(e, 1), WithinRel(3.0, 0.05));
}

TEST_CASE("ks distance oracle") {
    CHECK(ks_distance({0.0, 1.0, 2.0}, {0.0, 1.0, 2.0}) == 0.0);
    CHECK(ks_distance({0.0, 1.0}, {5.0, 6.0}) == 1.0);
    CHECK_THAT(ks_distance({0.0, 1.0, 2.0, 3.0}, {2.5, 3.5}), WithinAbs(0.75, 1e-15));
}

TEST_CASE("free diffusion mean squared displacement grows linearly") {
    SimulationSpec spec;
    spec.d_tau = 1e-3;
    spec.steps = 1000;
    spec.record_stride = 250;
    spec.count = 50000;
    spec.seed = 3;
    spec.init = InitialCondition::point(0.0);
    const double nu = 0.5;
    const auto e = simulate_process(DriftField::linear(0, 0), nu, spec);
    for (std::int64_t r = 1; r < e.recorded(); ++r) CHECK_THAT(record_variance(e, r), WithinRel(2 * nu * e.tau(r), 0.05));
}

TEST_CASE("results do not depend on thread count") {
    const auto p = half_alpha();
    const auto state = excited(p, 2, 1, 1);
    SimulationSpec spec;
    spec.mode = 2;
    spec.d_tau = 1e-3;
    spec.steps = 50;
    spec.count = 3000;
    spec.seed = 123;
    spec.threads = 1;
    const auto a = simulate(p, state, spec);
    spec.threads = 4;
    const auto b = simulate(p, state, spec);
    CHECK(a.samples == b.samples);
    spec.seed = 124;
    const auto c = simulate(p, state, spec);
    CHECK(a.samples != c.samples);

    SECTION("streaming observers are reproducible too") {
        SecondLawObserver o1(spec.d_tau, 1.0), o4(spec.d_tau, 1.0);
        spec.store_samples = false;
        spec.threads = 1;
        (void)simulate(p, state, spec, {&o1});
        spec.threads = 4;
        (void)simulate(p, state, spec, {&o4});
        CHECK(o1.forward_fit() == o4.forward_fit());
        CHECK(o1.backward_fit() == o4.backward_fit());
    }
}

TEST_CASE("a trajectory started on a node raises SingularDrift") {
    const auto p = half_alpha();
    SimulationSpec spec;
    spec.steps = 1;
    spec.count = 1;
    spec.init = InitialCondition::point(0.0);
    CHECK_THROWS_AS(simulate(p, excited(p, 1, 1, 1), spec), SingularDrift);
}

TEST_CASE("drift clamping near nodes is counted") {
    const auto p = half_alpha();
    SimulationSpec spec;
    spec.steps = 1;
    spec.count = 1;
    spec.init = InitialCondition::point(1e-9);
    const auto e = simulate(p, excited(p, 1, 1, 1), spec);
    CHECK(e.clamp_events >= 1);
}

TEST_CASE("overflowing paths report trajectory and step") {
    SimulationSpec spec;
    spec.steps = 50;
    spec.count = 4;
    spec.init = InitialCondition::point(1.0);
    spec.drift_cap = std::numeric_limits<double>::infinity();
    spec.d_tau = 1.0;
    try {
        (void)simulate_process(DriftField::custom([](double x) { return 1e200 * x * x; }), 0.0, spec);
        FAIL("expected NonFiniteSample");
    } catch (const NonFiniteSample& err) {
        CHECK(err.trajectory() == 0);
        CHECK(err.step() >= 1);
    }
}

TEST_CASE("invalid mode or direction") {
    const auto p = half_alpha(2);
    SimulationSpec spec;
    spec.mode = 3;
    CHECK_THROWS_AS(simulate(p, ModeStateSpec::ground(p), spec), ValidationError);
    spec.mode = 1;
    spec.direction = 25;
    CHECK_THROWS_AS(simulate(p, ModeStateSpec::ground(p), spec), ValidationError);
}

TEST_CASE("transport derivative of simple test functions") {
    const auto p = half_alpha();
    const auto g = StationaryModeState::oscillator(p, 1, 0);
    const auto drift = DriftField::from_state(g);
    const auto edges = uniform_edges(-2.0, 2.0, 8);
    TransportObserver one(TestFunction::constant(1.0), drift, g.nu(), 1e-3, edges);
    TransportObserver lin(TestFunction::identity(), drift, g.nu(), 1e-3, edges);
    TransportObserver sq(TestFunction::square(), drift, g.nu(), 1e-3, edges);
    SimulationSpec spec;
    spec.d_tau = 1e-3;
    spec.steps = 2000;
    spec.count = 100000;
    spec.seed = 31;
    spec.store_samples = false;
    (void)simulate(p, ModeStateSpec::ground(p), spec, {&one, &lin, &sq});

    const auto r1 = one.result();
    CHECK(r1.max_deviation == 0.0);
    CHECK(r1.max_abs_analytic == 0.0);

    const auto rx = lin.result();
    for (const auto& b : rx.bins) CHECK_THAT(b.analytic, WithinAbs(-b.center, 0.1));
    CHECK(rx.max_deviation < 0.05);

    const auto rx2 = sq.result();
    CHECK(rx2.max_deviation <= 0.1 * rx2.max_abs_analytic);

    TransportObserver far(TestFunction::identity(), drift, g.nu(), 1e-3, {6.0, 7.0});
    spec.steps = 10;
    spec.count = 100;
    (void)simulate(p, ModeStateSpec::ground(p), spec, {&far});
    CHECK_THROWS_AS(far.result(), InsufficientSamples);
}

TEST_CASE("stored-sample transport check pools consecutive records") {
    const auto p = half_alpha();
    SimulationSpec spec;
    spec.d_tau = 1e-3;
    spec.steps = 200;
    spec.count = 20000;
    spec.seed = 8;
    const auto e = simulate(p, ModeStateSpec::ground(p), spec);
    const auto r = transport_derivative_check(e, TestFunction::identity(), uniform_edges(-1.5, 1.5, 6));
    CHECK(r.max_deviation < 0.15);
}

TEST_CASE("second law of motion for a ground state") {
    const auto p = half_alpha();
    SecondLawObserver fits(1e-3, 1.0);
    SimulationSpec spec;
    spec.d_tau = 1e-3;
    spec.steps = 1000;
    spec.count = 20000;
    spec.seed = 41;
    spec.store_samples = false;
    (void)simulate(p, ModeStateSpec::ground(p), spec, {&fits});
    CHECK(fits.count() == spec.steps * spec.count);
    const auto r = second_law_check(fits, 1.0, 1, {-1.5, -1.0, -0.5, 0.5, 1.0, 1.5});
    CHECK(r.max_relative_error < 0.10);
    const auto f = fits.forward_fit();
    CHECK_THAT(f[1], WithinAbs(-1.0, 0.1));
}

TEST_CASE("ensemble export") {
    SimulationSpec spec;
    spec.steps = 2;
    spec.count = 2;
    spec.d_tau = 0.5;
    spec.init = InitialCondition::point(1.0);
    spec.diffusion_override = 0.0;
    const auto e = simulate_process(DriftField::linear(0, 0), 0.0, spec);
    std::ostringstream os;
    write_ensemble(os, e);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    CHECK(line == "trajectory_id step tau q");
    int rows = 0;
    while (std::getline(is, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 6);
    const auto t = e.trajectory(1);
    CHECK(t.samples == std::vector<double>{1.0, 1.0, 1.0});
}
