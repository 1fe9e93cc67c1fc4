#include "nelson/errors.hpp"
#include "nelson/observables.hpp"

#include <catch_amalgamated.hpp>
#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>

using namespace nelson;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

StringParams params(double ap, int dims, int cutoff) {
    StringParams p;
    p.alpha_prime = ap;
    p.dims = dims;
    p.mode_cutoff = cutoff;
    return p;
}

Ensemble ground_ensemble(const StringParams& p, int n, std::int64_t steps, std::int64_t stride, std::int64_t count,
                         std::uint64_t seed) {
    SimulationSpec spec;
    spec.mode = n;
    spec.d_tau = 1e-3;
    spec.steps = steps;
    spec.record_stride = stride;
    spec.count = count;
    spec.seed = seed;
    return simulate(p, ModeStateSpec::ground(p), spec);
}

// Brute-force count of occupation patterns sum n k_{n,i} = level over `dirs` directions.
std::uint64_t count_patterns(int level, int dirs) {
    std::function<std::uint64_t(int, int, int)> rec = [&](int slot, int remaining, int max_mode) -> std::uint64_t {
        if (remaining == 0) return 1;
        if (slot >= max_mode * dirs) return 0;
        const int n = slot / dirs + 1;
        std::uint64_t total = 0;
        for (int k = 0; k * n <= remaining; ++k) total += rec(slot + 1, remaining - k * n, max_mode);
        return total;
    };
    return rec(0, level, std::max(level, 1));
}

} // namespace

TEST_CASE("analytic correlators") {
    const auto p = params(0.5, 26, 10);
    CHECK(analytic_mode_correlator(p, 1, 0.0) == 1.0);
    CHECK_THAT(analytic_mode_correlator(p, 1, 1.0), WithinRel(std::exp(-1.0), 1e-15));
    CHECK_THAT(analytic_mode_correlator(p, 2, 3.0), WithinRel(0.5 * std::exp(-6.0), 1e-15));
    CHECK_THROWS_AS(analytic_mode_correlator(p, 0, 1.0), UnsupportedState);

    // 24 * (e^-1 + e^-2/2 + e^-3/3 + ...) summed independently.
    double partial = 0.0;
    for (int n = 1; n <= 10; ++n) partial += std::exp(-n) / n;
    CHECK_THAT(analytic_summed_correlator(p, 1.0), WithinRel(24 * partial, 1e-14));
    // The tail beyond n = 10 is below e^-11 / 11 per direction.
    CHECK_THAT(analytic_summed_correlator(p, 1.0), WithinAbs(-24 * std::log(1 - std::exp(-1.0)), 24 * std::exp(-11.0) / 11 / (1 - std::exp(-1.0))));
}

TEST_CASE("mode correlator estimates") {
    const auto p = params(0.5, 26, 2);
    const auto e = ground_ensemble(p, 1, 1000, 1000, 100000, 17);
    const auto c0 = mode_correlator(e, 0, 0);
    CHECK(std::abs(c0.value - 1.0) < 3 * c0.standard_error);
    const auto c1 = mode_correlator(e, 1000, 0);
    CHECK(c1.lag == 1.0);
    CHECK_THAT(c1.value / c0.value, WithinRel(std::exp(-1.0), 0.03));
    CHECK(std::abs(c1.z_score) < 3);
    CHECK_THROWS_AS(mode_correlator(e, 0, 1000), ValidationError);
    CHECK_THROWS_AS(mode_correlator(e, 500, 0), ValidationError);
}

TEST_CASE("high modes decorrelate quickly") {
    const auto p = params(0.5, 26, 2);
    const auto e = ground_ensemble(p, 2, 3000, 3000, 20000, 19);
    const auto c = mode_correlator(e, 3000, 0);
    CHECK(std::abs(c.value) < 3 * c.standard_error + 1e-3);
}

TEST_CASE("correlator rejects unsupported ensembles") {
    const auto p = params(0.5, 26, 2);
    auto s = ModeStateSpec::ground(p);
    s.set_occupation(1, 1, 1);
    SimulationSpec spec;
    spec.steps = 10;
    spec.count = 10;
    const auto excited = simulate(p, s, spec);
    CHECK_THROWS_AS(mode_correlator(excited, 10, 0), UnsupportedState);

    spec.mode = 0;
    spec.init = InitialCondition::point(0.0);
    const auto zero = simulate(p, ModeStateSpec::ground(p), spec);
    try {
        (void)lagged_correlator(zero, 1);
        FAIL("expected UnsupportedState");
    } catch (const UnsupportedState& err) {
        CHECK(std::string(err.what()).find("zero mode") != std::string::npos);
    }
}

TEST_CASE("pooled lag estimates and the log slope") {
    const auto p = params(0.5, 26, 2);
    const auto e = ground_ensemble(p, 2, 4000, 50, 4000, 23);
    std::vector<CorrelatorEstimate> rows;
    for (std::int64_t lag : {0, 200, 400, 600, 800}) {
        rows.push_back(lagged_correlator(e, lag));
        CHECK(std::abs(rows.back().z_score) < 4);
    }
    const auto fit = fit_log_correlator(rows);
    CHECK_THAT(fit.slope, WithinAbs(-2.0, 0.1));

    std::ostringstream os;
    write_correlator_table(os, rows);
    CHECK(os.str().rfind("n direction delta_tau value stderr analytic z_score", 0) == 0);
}

TEST_CASE("exact exponential data gives the exact slope") {
    std::vector<CorrelatorEstimate> rows;
    for (double lag : {0.0, 0.5, 1.0, 2.0}) {
        CorrelatorEstimate c;
        c.lag = lag;
        c.value = 0.7 * std::exp(-3 * lag);
        c.standard_error = 0.01 * c.value;
        rows.push_back(c);
    }
    const auto fit = fit_log_correlator(rows);
    CHECK_THAT(fit.slope, WithinAbs(-3.0, 1e-12));
    CHECK_THAT(std::exp(fit.intercept), WithinRel(0.7, 1e-12));
}

TEST_CASE("summed correlator is the sum of its parts") {
    const auto p = params(0.5, 5, 2);
    std::vector<CorrelatorEstimate> parts;
    double total = 0.0;
    for (int n = 1; n <= 2; ++n)
        for (int i = 1; i <= 3; ++i) {
            CorrelatorEstimate c;
            c.n = n;
            c.direction = i;
            c.lag = 0.0;
            c.value = 0.1 * n + 0.01 * i;
            c.standard_error = 0.001;
            total += c.value;
            parts.push_back(c);
        }
    const auto s = summed_correlator(p, parts);
    CHECK_THAT(s.value, WithinAbs(total, 1e-15));
    CHECK_THAT(s.standard_error, WithinRel(0.001 * std::sqrt(6.0), 1e-12));
    CHECK_THAT(s.analytic, WithinRel(3 * (1.0 + 0.5), 1e-15));

    auto missing = parts;
    missing.pop_back();
    CHECK_THROWS_AS(summed_correlator(p, missing), ValidationError);
    auto doubled = parts;
    doubled.push_back(parts.front());
    CHECK_THROWS_AS(summed_correlator(p, doubled), ValidationError);
}

TEST_CASE("string reconstruction") {
    const auto sigma = sigma_grid(64);
    for (double x : reconstruct_string({0.0, 0.0, 0.0}, sigma)) CHECK(x == 0.0);

    const auto ends = reconstruct_string({0.0, 1.0}, {0.0, std::numbers::pi});
    CHECK_THAT(ends[0], WithinAbs(1.0, 1e-15));
    CHECK_THAT(ends[1], WithinAbs(-1.0, 1e-15));

    std::mt19937_64 rng(5);
    std::normal_distribution<double> g;
    std::vector<double> q(6);
    for (auto& v : q) v = g(rng);
    const auto slope = string_slope(q, {0.0, std::numbers::pi});
    CHECK_THAT(slope[0], WithinAbs(0.0, 1e-14));
    CHECK_THAT(slope[1], WithinAbs(0.0, 1e-13));

    // Least-squares oracle for the cosine analysis.
    const auto x = reconstruct_string(q, sigma);
    Eigen::MatrixXd A(sigma.size(), q.size());
    Eigen::VectorXd b(sigma.size());
    for (std::size_t r = 0; r < sigma.size(); ++r) {
        b(static_cast<Eigen::Index>(r)) = x[r];
        for (std::size_t n = 0; n < q.size(); ++n)
            A(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(n)) = std::cos(static_cast<double>(n) * sigma[r]);
    }
    const Eigen::VectorXd oracle = A.colPivHouseholderQr().solve(b);
    const auto back = cosine_analysis(x, static_cast<int>(q.size()));
    for (std::size_t n = 0; n < q.size(); ++n) {
        CHECK_THAT(back[n], WithinAbs(q[n], 1e-10));
        CHECK_THAT(back[n], WithinAbs(oracle(static_cast<Eigen::Index>(n)), 1e-10));
    }
}

TEST_CASE("level degeneracies at D = 26") {
    const auto s = level_spectrum(params(0.5, 26, 1), 4);
    REQUIRE(s.levels.size() == 5);
    CHECK(s.levels[0].degeneracy == 1);
    CHECK(s.levels[1].degeneracy == 24);
    CHECK(s.levels[2].degeneracy == 324);
    for (int level = 0; level <= 4; ++level) CHECK(s.levels[static_cast<std::size_t>(level)].degeneracy == count_patterns(level, 24));
    CHECK(s.levels[2].energy_offset == 2.0);
    CHECK_FALSE(s.intercept.has_value());
    const auto z = level_spectrum(params(0.5, 26, 1), 2, true);
    REQUIRE(z.intercept.has_value());
    CHECK(*z.intercept == 1.0);
}

TEST_CASE("degeneracies match brute-force enumeration for other dimensions") {
    for (int dims : {3, 4, 7, 10})
        for (int level = 0; level <= 6; ++level)
            CHECK(level_spectrum(params(1.0, dims, 1), 6).levels[static_cast<std::size_t>(level)].degeneracy ==
                  count_patterns(level, dims - 2));
}

TEST_CASE("degeneracy overflow is reported") {
    CHECK_THROWS_AS(level_spectrum(params(0.5, 26, 1), 400), NumericalError);
    CHECK_THROWS_AS(level_spectrum(params(0.5, 2, 1), 2), ValidationError);
}
