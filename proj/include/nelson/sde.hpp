#pragma once

#include "nelson/core.hpp"
#include "nelson/drift.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace nelson {

/// Forward drift v_+(x) seen by the integrator.
///
/// The linear form a + b x is evaluated inline; anything else goes through
/// a type-erased callable.
class DriftField {
public:
    static DriftField linear(double offset, double slope);
    static DriftField custom(std::function<double(double)> fn);
    /// v_+ of a stationary state; linear for ground states and the zero mode.
    static DriftField from_state(const StationaryModeState& state);

    double operator()(double x) const { return fn_ ? fn_(x) : offset_ + slope_ * x; }
    bool is_linear() const noexcept { return !fn_; }

private:
    double offset_ = 0.0;
    double slope_ = 0.0;
    std::function<double(double)> fn_;
};

/// Initial distribution of q_0.
struct InitialCondition {
    enum class Kind { stationary, point, gaussian };
    Kind kind = Kind::stationary;
    double center = 0.0;
    double width = 0.0;

    static InitialCondition stationary() { return {}; }
    static InitialCondition point(double x) { return {Kind::point, x, 0.0}; }
    static InitialCondition gaussian(double mean, double sd) { return {Kind::gaussian, mean, sd}; }
};

/// Draws from the stationary density of an oscillator eigenstate by
/// inverse-CDF interpolation on a fine table (Gaussian draws for k = 0).
class StationarySampler {
public:
    explicit StationarySampler(const StationaryModeState& state);
    double operator()(std::mt19937_64& rng) const;

private:
    double sd_ = 1.0;
    bool gaussian_ = true;
    std::vector<double> x_;
    std::vector<double> cdf_;
};

struct SimulationSpec {
    int mode = 1;
    int direction = 1;
    double tau_0 = 0.0;
    double d_tau = 1e-3;
    std::int64_t steps = 1;
    std::int64_t count = 1;
    std::uint64_t seed = 0;
    InitialCondition init = InitialCondition::stationary();
    /// Keep every record_stride-th sample (steps must be a multiple).
    std::int64_t record_stride = 1;
    /// When false only streaming observers see the path.
    bool store_samples = true;
    double drift_cap = 1e6;
    /// Replaces the mode's diffusion constant (e.g. 0 for deterministic runs).
    std::optional<double> diffusion_override;
    /// Worker threads; 0 means hardware concurrency. Results do not depend on it.
    unsigned threads = 0;
};

/// Streaming consumer of single steps (q_t -> q_{t+1}).
///
/// The engine gives each chunk of trajectories its own spawn(), feeds it
/// trajectory by trajectory, and absorbs the chunks back in index order,
/// so accumulated sums are reproducible for any thread count.
class StepObserver {
public:
    virtual ~StepObserver() = default;
    virtual std::unique_ptr<StepObserver> spawn() const = 0;
    virtual void begin_trajectory(std::int64_t /*index*/, double /*q0*/) {}
    virtual void observe(std::int64_t step, double before, double after) = 0;
    virtual void absorb(const StepObserver& other) = 0;
};

struct Trajectory {
    int mode = 1;
    int direction = 1;
    double tau_0 = 0.0;
    double d_tau = 0.0;
    std::int64_t record_stride = 1;
    std::vector<double> samples;
};

/// Monte Carlo ensemble for one (mode, direction). Stored samples form a
/// count x recorded() row-major block, row j being trajectory j.
class Ensemble {
public:
    StringParams params;
    ModeStateSpec state;
    std::uint64_t seed = 0;
    int mode = 1;
    int direction = 1;
    int occupation = 0;
    double tau_0 = 0.0;
    double d_tau = 0.0;
    double nu = 0.0;
    std::int64_t steps = 0;
    std::int64_t record_stride = 1;
    std::int64_t count = 0;
    std::int64_t clamp_events = 0;
    DriftField drift = DriftField::linear(0.0, 0.0);
    std::vector<double> samples;

    bool has_samples() const noexcept { return !samples.empty(); }
    std::int64_t recorded() const noexcept { return steps / record_stride + 1; }
    double sample(std::int64_t trajectory, std::int64_t record) const {
        return samples[static_cast<std::size_t>(trajectory * recorded() + record)];
    }
    double tau(std::int64_t record) const noexcept {
        return tau_0 + static_cast<double>(record * record_stride) * d_tau;
    }
    Trajectory trajectory(std::int64_t index) const;
};

/// Per-trajectory random stream keyed by (seed, mode, direction, index).
std::mt19937_64 trajectory_rng(std::uint64_t seed, int mode, int direction, std::int64_t index);

/// Euler-Maruyama for dq = v_+ d tau + sqrt(2 nu d tau) xi with an arbitrary drift.
/// `init_sampler` is used for InitialCondition::stationary.
Ensemble simulate_process(const DriftField& drift, double nu, const SimulationSpec& spec,
                          const std::function<double(std::mt19937_64&)>& init_sampler = {},
                          const std::vector<StepObserver*>& observers = {});

/// Ensemble for mode n, direction i of a string state. Mode 0 uses the
/// state's zero-mode momentum and needs a non-stationary initial condition.
Ensemble simulate(const StringParams& params, const ModeStateSpec& state, const SimulationSpec& spec,
                  const std::vector<StepObserver*>& observers = {});

struct IncrementMoments {
    double mean = 0.0;
    double variance = 0.0;
    std::int64_t count = 0;
    double mean_standard_error = 0.0;
};

/// Moments of q_{r+1} - q_r between consecutive records r, r+1 (an
/// increment over record_stride steps).
IncrementMoments increment_moments(const Ensemble& ensemble, std::int64_t record);

/// A time-independent test function with its first two derivatives.
struct TestFunction {
    std::string name;
    std::function<double(double)> value;
    std::function<double(double)> first;
    std::function<double(double)> second;

    static TestFunction constant(double c);
    static TestFunction identity();
    static TestFunction square();
};

struct TransportBin {
    double center = 0.0;
    std::int64_t count = 0;
    double empirical = 0.0; // mean of Delta F / d tau
    double analytic = 0.0;  // bin mean of v_+ F' + nu F''
};

struct TransportResult {
    std::vector<TransportBin> bins;
    double max_deviation = 0.0;
    double max_abs_analytic = 0.0;
};

/// Streaming estimator of the forward transport derivative D_+F.
class TransportObserver : public StepObserver {
public:
    TransportObserver(TestFunction f, DriftField drift, double nu, double d_tau, std::vector<double> bin_edges);

    std::unique_ptr<StepObserver> spawn() const override;
    void observe(std::int64_t step, double before, double after) override;
    void absorb(const StepObserver& other) override;

    /// Throws InsufficientSamples when a bin holds fewer than min_count samples.
    TransportResult result(std::int64_t min_count = 30) const;

private:
    TestFunction f_;
    DriftField drift_;
    double nu_;
    double d_tau_;
    std::vector<double> edges_;
    std::vector<std::int64_t> count_;
    std::vector<double> sum_empirical_;
    std::vector<double> sum_analytic_;
};

/// Uniform probe bins [lo, hi] split into `bins` pieces.
std::vector<double> uniform_edges(double lo, double hi, int bins);

/// D_+F from the stored samples: pools every pair of consecutive records.
TransportResult transport_derivative_check(const Ensemble& ensemble, const TestFunction& f,
                                           const std::vector<double>& bin_edges, std::int64_t min_count = 30);

/// Least-squares polynomial fits of the forward and backward conditional
/// increments, E[dq | q_t = x] and E[dq | q_{t+1} = x], accumulated as
/// normal equations in the scaled variable x / scale.
class SecondLawObserver : public StepObserver {
public:
    SecondLawObserver(double d_tau, double scale, int degree = 3);

    std::unique_ptr<StepObserver> spawn() const override;
    void observe(std::int64_t step, double before, double after) override;
    void absorb(const StepObserver& other) override;

    /// Monomial coefficients (in x, unscaled) of the fitted v_+ and v_-.
    std::vector<double> forward_fit() const;
    std::vector<double> backward_fit() const;
    std::int64_t count() const noexcept { return count_; }

private:
    std::vector<double> solve(const std::vector<double>& rhs) const;

    double d_tau_;
    double scale_;
    int degree_;
    std::int64_t count_ = 0;
    std::vector<double> gram_;     // sums of s^j, j <= 2 degree
    std::vector<double> forward_;  // sums of s^j y, conditioning on q_t
    std::vector<double> backward_; // sums of s^j y, conditioning on q_{t+1}
    std::vector<double> gram_back_;
};

struct SecondLawPoint {
    double x = 0.0;
    double estimate = 0.0; // 1/2 (D_+ v_- + D_- v_+)
    double expected = 0.0; // -n^2 x
    double relative_error = 0.0;
};

struct SecondLawResult {
    std::vector<SecondLawPoint> points;
    double max_relative_error = 0.0;
};

/// Evaluates the stochastic acceleration from the fitted drifts with
/// D_{+-} F = v_{+-} F' +- nu F'' (stationary, so no d/d tau term) at the
/// probe points and compares with -n^2 x.
SecondLawResult second_law_check(const SecondLawObserver& fits, double nu, int n, const std::vector<double>& probes);

/// Kolmogorov-Smirnov distance between two samples.
double ks_distance(std::vector<double> a, std::vector<double> b);

/// Columnar export: header `trajectory_id step tau q`, one row per stored sample.
void write_ensemble(std::ostream& out, const Ensemble& ensemble);

} // namespace nelson
