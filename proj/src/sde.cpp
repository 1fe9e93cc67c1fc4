#include "nelson/sde.hpp"

#include "nelson/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <ostream>
#include <thread>

#include <Eigen/Dense>
#include <boost/random/normal_distribution.hpp>

namespace nelson {

namespace {

constexpr std::int64_t chunk_size = 512;

double polynomial(const std::vector<double>& c, double x) {
    double acc = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
    return acc;
}

std::vector<double> derivative(const std::vector<double>& c) {
    std::vector<double> out;
    for (std::size_t j = 1; j < c.size(); ++j) out.push_back(static_cast<double>(j) * c[j]);
    return out;
}

void validate_spec(const SimulationSpec& spec) {
    if (!(spec.d_tau > 0.0) || !std::isfinite(spec.d_tau)) throw ValidationError("d_tau must be positive");
    if (spec.steps < 1) throw ValidationError("steps must be at least 1");
    if (spec.count < 1) throw ValidationError("ensemble size must be at least 1");
    if (spec.record_stride < 1 || spec.steps % spec.record_stride != 0)
        throw ValidationError("record_stride must divide steps");
    if (!(spec.drift_cap > 0.0)) throw ValidationError("drift cap must be positive");
    if (spec.diffusion_override && !(*spec.diffusion_override >= 0.0))
        throw ValidationError("diffusion override must be non-negative");
    if (spec.init.kind == InitialCondition::Kind::gaussian && !(spec.init.width > 0.0))
        throw ValidationError("gaussian initial condition needs a positive width");
}

} // namespace

DriftField DriftField::linear(double offset, double slope) {
    DriftField d;
    d.offset_ = offset;
    d.slope_ = slope;
    return d;
}

DriftField DriftField::custom(std::function<double(double)> fn) {
    DriftField d;
    d.fn_ = std::move(fn);
    return d;
}

DriftField DriftField::from_state(const StationaryModeState& state) {
    if (state.is_zero_mode()) return linear(state.current_velocity(0.0), 0.0);
    if (state.occupation() == 0) return linear(0.0, -static_cast<double>(state.mode()));
    return custom([state](double x) { return state.forward_drift(x); });
}

StationarySampler::StationarySampler(const StationaryModeState& state) {
    sd_ = std::sqrt(state.ground_variance());
    gaussian_ = state.occupation() == 0;
    if (gaussian_) return;
    const double reach = (std::sqrt(2.0 * state.occupation() + 1.0) + 6.0) * std::sqrt(2.0) * sd_;
    constexpr int points = 20001;
    x_.resize(points);
    cdf_.resize(points);
    const double h = 2.0 * reach / (points - 1);
    double prev_density = 0.0;
    for (int j = 0; j < points; ++j) {
        x_[j] = -reach + j * h;
        const double rho = state.density(x_[j]);
        cdf_[j] = j == 0 ? 0.0 : cdf_[j - 1] + 0.5 * h * (rho + prev_density);
        prev_density = rho;
    }
    const double total = cdf_.back();
    for (double& c : cdf_) c /= total;
}

double StationarySampler::operator()(std::mt19937_64& rng) const {
    if (gaussian_) return boost::random::normal_distribution<double>(0.0, sd_)(rng);
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    if (it == cdf_.begin()) return x_.front();
    if (it == cdf_.end()) return x_.back();
    const auto j = static_cast<std::size_t>(it - cdf_.begin());
    const double w = (u - cdf_[j - 1]) / (cdf_[j] - cdf_[j - 1]);
    return x_[j - 1] + w * (x_[j] - x_[j - 1]);
}

Trajectory Ensemble::trajectory(std::int64_t index) const {
    if (index < 0 || index >= count || !has_samples()) throw ValidationError("trajectory index out of range");
    Trajectory t{mode, direction, tau_0, d_tau, record_stride, {}};
    const auto begin = samples.begin() + index * recorded();
    t.samples.assign(begin, begin + recorded());
    return t;
}

std::mt19937_64 trajectory_rng(std::uint64_t seed, int mode, int direction, std::int64_t index) {
    const auto idx = static_cast<std::uint64_t>(index);
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(mode), static_cast<std::uint32_t>(direction),
                      static_cast<std::uint32_t>(idx), static_cast<std::uint32_t>(idx >> 32)};
    return std::mt19937_64(seq);
}

Ensemble simulate_process(const DriftField& drift, double nu, const SimulationSpec& spec,
                          const std::function<double(std::mt19937_64&)>& init_sampler,
                          const std::vector<StepObserver*>& observers) {
    validate_spec(spec);
    if (!(nu >= 0.0)) throw ValidationError("diffusion constant must be non-negative");
    if (spec.init.kind == InitialCondition::Kind::stationary && !init_sampler)
        throw UnsupportedState("no stationary density to sample the initial condition from");

    Ensemble ens;
    ens.mode = spec.mode;
    ens.direction = spec.direction;
    ens.seed = spec.seed;
    ens.tau_0 = spec.tau_0;
    ens.d_tau = spec.d_tau;
    ens.nu = spec.diffusion_override.value_or(nu);
    ens.steps = spec.steps;
    ens.record_stride = spec.record_stride;
    ens.count = spec.count;
    ens.drift = drift;
    if (spec.store_samples) ens.samples.assign(static_cast<std::size_t>(spec.count * ens.recorded()), 0.0);

    const double noise = std::sqrt(2.0 * ens.nu * spec.d_tau);
    const std::int64_t chunks = (spec.count + chunk_size - 1) / chunk_size;

    struct ChunkResult {
        std::int64_t clamps = 0;
        std::vector<std::unique_ptr<StepObserver>> observers;
        std::exception_ptr error;
    };
    std::vector<ChunkResult> results(static_cast<std::size_t>(chunks));

    auto run_chunk = [&](std::int64_t c) {
        ChunkResult& res = results[static_cast<std::size_t>(c)];
        for (auto* o : observers) res.observers.push_back(o->spawn());
        try {
            boost::random::normal_distribution<double> normal;
            const std::int64_t first = c * chunk_size;
            const std::int64_t last = std::min(spec.count, first + chunk_size);
            for (std::int64_t j = first; j < last; ++j) {
                auto rng = trajectory_rng(spec.seed, spec.mode, spec.direction, j);
                double q = 0.0;
                switch (spec.init.kind) {
                case InitialCondition::Kind::stationary:
                    q = init_sampler(rng);
                    break;
                case InitialCondition::Kind::point:
                    q = spec.init.center;
                    break;
                case InitialCondition::Kind::gaussian:
                    q = spec.init.center + spec.init.width * normal(rng);
                    break;
                }
                double* row = spec.store_samples ? ens.samples.data() + j * ens.recorded() : nullptr;
                if (row) row[0] = q;
                for (auto& o : res.observers) o->begin_trajectory(j, q);
                for (std::int64_t t = 0; t < spec.steps; ++t) {
                    bool clamped = false;
                    const double v = clamp_drift(drift(q), spec.drift_cap, clamped);
                    if (clamped) ++res.clamps;
                    const double next = q + v * spec.d_tau + noise * normal(rng);
                    if (!std::isfinite(next))
                        throw NonFiniteSample("non-finite sample in trajectory " + std::to_string(j) + " at step " +
                                                  std::to_string(t + 1),
                                              j, t + 1);
                    for (auto& o : res.observers) o->observe(t, q, next);
                    q = next;
                    if (row && (t + 1) % spec.record_stride == 0) row[(t + 1) / spec.record_stride] = q;
                }
            }
        } catch (...) {
            res.error = std::current_exception();
        }
    };

    unsigned threads = spec.threads != 0 ? spec.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::int64_t>(threads, chunks));
    if (threads <= 1) {
        for (std::int64_t c = 0; c < chunks; ++c) run_chunk(c);
    } else {
        std::atomic<std::int64_t> next{0};
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < threads; ++w)
            pool.emplace_back([&] {
                for (std::int64_t c = next++; c < chunks; c = next++) run_chunk(c);
            });
        for (auto& t : pool) t.join();
    }

    for (auto& res : results) {
        if (res.error) std::rethrow_exception(res.error);
        ens.clamp_events += res.clamps;
        for (std::size_t k = 0; k < observers.size(); ++k) observers[k]->absorb(*res.observers[k]);
    }
    return ens;
}

Ensemble simulate(const StringParams& params, const ModeStateSpec& state, const SimulationSpec& spec,
                  const std::vector<StepObserver*>& observers) {
    require_valid(params);
    const auto report = validate(state, params);
    if (!report.ok()) throw ValidationError(report.message());
    if (spec.mode < 0 || spec.mode > params.mode_cutoff) throw ValidationError("mode outside 0..mode_cutoff");
    if (spec.direction < 1 || spec.direction > params.transverse_count())
        throw ValidationError("direction outside 1..D-2");

    Ensemble ens;
    if (spec.mode == 0) {
        const auto zero = StationaryModeState::zero_mode(params, state.momentum(spec.direction));
        ens = simulate_process(DriftField::from_state(zero), zero.nu(), spec, {}, observers);
    } else {
        const auto osc = StationaryModeState::oscillator(params, spec.mode, state.occupation(spec.mode, spec.direction));
        const StationarySampler sampler(osc);
        ens = simulate_process(DriftField::from_state(osc), osc.nu(), spec,
                               [&sampler](std::mt19937_64& rng) { return sampler(rng); }, observers);
        ens.occupation = osc.occupation();
    }
    ens.params = params;
    ens.state = state;
    return ens;
}

IncrementMoments increment_moments(const Ensemble& ensemble, std::int64_t record) {
    if (ensemble.count < 1 || !ensemble.has_samples()) throw ValidationError("empty ensemble");
    if (record < 0 || record + 1 >= ensemble.recorded()) throw ValidationError("record index out of range");
    IncrementMoments m;
    m.count = ensemble.count;
    double sum = 0.0;
    for (std::int64_t j = 0; j < ensemble.count; ++j) sum += ensemble.sample(j, record + 1) - ensemble.sample(j, record);
    m.mean = sum / static_cast<double>(ensemble.count);
    double ss = 0.0;
    for (std::int64_t j = 0; j < ensemble.count; ++j) {
        const double d = ensemble.sample(j, record + 1) - ensemble.sample(j, record) - m.mean;
        ss += d * d;
    }
    if (ensemble.count > 1) {
        m.variance = ss / static_cast<double>(ensemble.count - 1);
        m.mean_standard_error = std::sqrt(m.variance / static_cast<double>(ensemble.count));
    }
    return m;
}

TestFunction TestFunction::constant(double c) {
    return {"constant", [c](double) { return c; }, [](double) { return 0.0; }, [](double) { return 0.0; }};
}

TestFunction TestFunction::identity() {
    return {"x", [](double x) { return x; }, [](double) { return 1.0; }, [](double) { return 0.0; }};
}

TestFunction TestFunction::square() {
    return {"x^2", [](double x) { return x * x; }, [](double x) { return 2.0 * x; }, [](double) { return 2.0; }};
}

std::vector<double> uniform_edges(double lo, double hi, int bins) {
    if (bins < 1 || !(hi > lo)) throw ValidationError("invalid probe bins");
    std::vector<double> edges(static_cast<std::size_t>(bins) + 1);
    for (int j = 0; j <= bins; ++j) edges[static_cast<std::size_t>(j)] = lo + (hi - lo) * j / bins;
    return edges;
}

TransportObserver::TransportObserver(TestFunction f, DriftField drift, double nu, double d_tau,
                                     std::vector<double> bin_edges)
    : f_(std::move(f)), drift_(std::move(drift)), nu_(nu), d_tau_(d_tau), edges_(std::move(bin_edges)) {
    if (edges_.size() < 2 || !std::is_sorted(edges_.begin(), edges_.end()))
        throw ValidationError("probe bin edges must be sorted with at least one bin");
    const auto bins = edges_.size() - 1;
    count_.assign(bins, 0);
    sum_empirical_.assign(bins, 0.0);
    sum_analytic_.assign(bins, 0.0);
}

std::unique_ptr<StepObserver> TransportObserver::spawn() const {
    return std::make_unique<TransportObserver>(f_, drift_, nu_, d_tau_, edges_);
}

void TransportObserver::observe(std::int64_t, double before, double after) {
    if (before < edges_.front() || before >= edges_.back()) return;
    const auto b = static_cast<std::size_t>(std::upper_bound(edges_.begin(), edges_.end(), before) - edges_.begin() - 1);
    ++count_[b];
    sum_empirical_[b] += (f_.value(after) - f_.value(before)) / d_tau_;
    sum_analytic_[b] += drift_(before) * f_.first(before) + nu_ * f_.second(before);
}

void TransportObserver::absorb(const StepObserver& other) {
    const auto& o = dynamic_cast<const TransportObserver&>(other);
    for (std::size_t b = 0; b < count_.size(); ++b) {
        count_[b] += o.count_[b];
        sum_empirical_[b] += o.sum_empirical_[b];
        sum_analytic_[b] += o.sum_analytic_[b];
    }
}

TransportResult TransportObserver::result(std::int64_t min_count) const {
    TransportResult r;
    for (std::size_t b = 0; b < count_.size(); ++b) {
        if (count_[b] < min_count)
            throw InsufficientSamples("probe bin [" + std::to_string(edges_[b]) + ", " + std::to_string(edges_[b + 1]) +
                                      ") holds " + std::to_string(count_[b]) + " samples, need " +
                                      std::to_string(min_count));
        TransportBin bin;
        bin.center = 0.5 * (edges_[b] + edges_[b + 1]);
        bin.count = count_[b];
        bin.empirical = sum_empirical_[b] / static_cast<double>(count_[b]);
        bin.analytic = sum_analytic_[b] / static_cast<double>(count_[b]);
        r.max_deviation = std::max(r.max_deviation, std::abs(bin.empirical - bin.analytic));
        r.max_abs_analytic = std::max(r.max_abs_analytic, std::abs(bin.analytic));
        r.bins.push_back(bin);
    }
    return r;
}

TransportResult transport_derivative_check(const Ensemble& ensemble, const TestFunction& f,
                                           const std::vector<double>& bin_edges, std::int64_t min_count) {
    if (!ensemble.has_samples()) throw ValidationError("empty ensemble");
    TransportObserver obs(f, ensemble.drift, ensemble.nu, ensemble.d_tau * static_cast<double>(ensemble.record_stride),
                          bin_edges);
    for (std::int64_t j = 0; j < ensemble.count; ++j)
        for (std::int64_t r = 0; r + 1 < ensemble.recorded(); ++r)
            obs.observe(r, ensemble.sample(j, r), ensemble.sample(j, r + 1));
    return obs.result(min_count);
}

SecondLawObserver::SecondLawObserver(double d_tau, double scale, int degree)
    : d_tau_(d_tau), scale_(scale), degree_(degree) {
    if (degree < 1) throw ValidationError("fit degree must be at least 1");
    if (!(scale > 0.0) || !(d_tau > 0.0)) throw ValidationError("fit scale and d_tau must be positive");
    gram_.assign(static_cast<std::size_t>(2 * degree + 1), 0.0);
    gram_back_ = gram_;
    forward_.assign(static_cast<std::size_t>(degree + 1), 0.0);
    backward_ = forward_;
}

std::unique_ptr<StepObserver> SecondLawObserver::spawn() const {
    return std::make_unique<SecondLawObserver>(d_tau_, scale_, degree_);
}

void SecondLawObserver::observe(std::int64_t, double before, double after) {
    const double y = (after - before) / d_tau_;
    const double s0 = before / scale_;
    const double s1 = after / scale_;
    double p0 = 1.0;
    double p1 = 1.0;
    for (int j = 0; j <= 2 * degree_; ++j) {
        gram_[static_cast<std::size_t>(j)] += p0;
        gram_back_[static_cast<std::size_t>(j)] += p1;
        if (j <= degree_) {
            forward_[static_cast<std::size_t>(j)] += p0 * y;
            backward_[static_cast<std::size_t>(j)] += p1 * y;
        }
        p0 *= s0;
        p1 *= s1;
    }
    ++count_;
}

void SecondLawObserver::absorb(const StepObserver& other) {
    const auto& o = dynamic_cast<const SecondLawObserver&>(other);
    for (std::size_t j = 0; j < gram_.size(); ++j) {
        gram_[j] += o.gram_[j];
        gram_back_[j] += o.gram_back_[j];
    }
    for (std::size_t j = 0; j < forward_.size(); ++j) {
        forward_[j] += o.forward_[j];
        backward_[j] += o.backward_[j];
    }
    count_ += o.count_;
}

std::vector<double> SecondLawObserver::solve(const std::vector<double>& rhs) const {
    if (count_ <= degree_) throw InsufficientSamples("too few increments for the drift fit");
    const auto& gram = (&rhs == &forward_) ? gram_ : gram_back_;
    const int d = degree_ + 1;
    Eigen::MatrixXd a(d, d);
    Eigen::VectorXd b(d);
    for (int r = 0; r < d; ++r) {
        b(r) = rhs[static_cast<std::size_t>(r)];
        for (int c = 0; c < d; ++c) a(r, c) = gram[static_cast<std::size_t>(r + c)];
    }
    const Eigen::VectorXd coef = a.ldlt().solve(b);
    std::vector<double> out(static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j) out[static_cast<std::size_t>(j)] = coef(j) / std::pow(scale_, j);
    return out;
}

std::vector<double> SecondLawObserver::forward_fit() const { return solve(forward_); }
std::vector<double> SecondLawObserver::backward_fit() const { return solve(backward_); }

SecondLawResult second_law_check(const SecondLawObserver& fits, double nu, int n, const std::vector<double>& probes) {
    const auto vp = fits.forward_fit();
    const auto vm = fits.backward_fit();
    const auto vp1 = derivative(vp);
    const auto vp2 = derivative(vp1);
    const auto vm1 = derivative(vm);
    const auto vm2 = derivative(vm1);
    SecondLawResult r;
    for (double x : probes) {
        if (x == 0.0) throw ValidationError("probe point x = 0 has no relative error");
        SecondLawPoint p;
        p.x = x;
        const double d_plus_vm = polynomial(vp, x) * polynomial(vm1, x) + nu * polynomial(vm2, x);
        const double d_minus_vp = polynomial(vm, x) * polynomial(vp1, x) - nu * polynomial(vp2, x);
        p.estimate = 0.5 * (d_plus_vm + d_minus_vp);
        p.expected = -static_cast<double>(n) * n * x;
        p.relative_error = std::abs(p.estimate - p.expected) / std::abs(p.expected);
        r.max_relative_error = std::max(r.max_relative_error, p.relative_error);
        r.points.push_back(p);
    }
    return r;
}

double ks_distance(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw ValidationError("empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

void write_ensemble(std::ostream& out, const Ensemble& ensemble) {
    const auto precision = out.precision(17);
    out << "trajectory_id step tau q\n";
    for (std::int64_t j = 0; j < ensemble.count && ensemble.has_samples(); ++j)
        for (std::int64_t r = 0; r < ensemble.recorded(); ++r)
            out << j << ' ' << r * ensemble.record_stride << ' ' << ensemble.tau(r) << ' ' << ensemble.sample(j, r)
                << '\n';
    out.precision(precision);
}

} // namespace nelson
