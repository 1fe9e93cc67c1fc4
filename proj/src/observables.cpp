#include "nelson/observables.hpp"

#include "nelson/errors.hpp"

#include <cmath>
#include <numbers>
#include <ostream>
#include <set>
#include <string>

namespace nelson {

namespace {

void require_ground_ensemble(const Ensemble& ensemble) {
    if (ensemble.mode < 1)
        throw UnsupportedState("correlators exclude the zero mode (infrared divergence); use a mode n >= 1");
    if (ensemble.occupation != 0)
        throw UnsupportedState("correlator estimator is defined for ground-state (k = 0) ensembles only");
    if (!ensemble.has_samples() || ensemble.count < 1) throw ValidationError("empty ensemble");
}

std::int64_t record_of(const Ensemble& ensemble, std::int64_t step) {
    if (step < 0 || step > ensemble.steps || step % ensemble.record_stride != 0)
        throw ValidationError("step " + std::to_string(step) + " is not on the recorded lattice");
    return step / ensemble.record_stride;
}

CorrelatorEstimate finish(const Ensemble& ensemble, double lag, const std::vector<double>& per_trajectory) {
    CorrelatorEstimate e;
    e.n = ensemble.mode;
    e.direction = ensemble.direction;
    e.lag = lag;
    e.sample_count = static_cast<std::int64_t>(per_trajectory.size());
    double sum = 0.0;
    for (double v : per_trajectory) sum += v;
    e.value = sum / static_cast<double>(per_trajectory.size());
    if (per_trajectory.size() > 1) {
        double ss = 0.0;
        for (double v : per_trajectory) ss += (v - e.value) * (v - e.value);
        e.standard_error = std::sqrt(ss / static_cast<double>(per_trajectory.size() - 1) /
                                     static_cast<double>(per_trajectory.size()));
    }
    e.analytic = analytic_mode_correlator(ensemble.params, ensemble.mode, lag);
    e.z_score = e.standard_error > 0.0 ? (e.value - e.analytic) / e.standard_error : 0.0;
    return e;
}

} // namespace

double analytic_mode_correlator(const StringParams& params, int n, double lag) {
    if (n < 1) throw UnsupportedState("correlators exclude the zero mode");
    return 2.0 * params.alpha_prime / n * std::exp(-n * lag);
}

double analytic_summed_correlator(const StringParams& params, double lag) {
    double sum = 0.0;
    for (int n = 1; n <= params.mode_cutoff; ++n) sum += analytic_mode_correlator(params, n, lag);
    return params.transverse_count() * sum;
}

CorrelatorEstimate mode_correlator(const Ensemble& ensemble, std::int64_t t, std::int64_t t_prime) {
    require_ground_ensemble(ensemble);
    if (t < t_prime) throw ValidationError("mode_correlator needs t >= t'");
    const auto r = record_of(ensemble, t);
    const auto r0 = record_of(ensemble, t_prime);
    std::vector<double> products(static_cast<std::size_t>(ensemble.count));
    for (std::int64_t j = 0; j < ensemble.count; ++j)
        products[static_cast<std::size_t>(j)] = ensemble.sample(j, r) * ensemble.sample(j, r0);
    return finish(ensemble, static_cast<double>(t - t_prime) * ensemble.d_tau, products);
}

CorrelatorEstimate lagged_correlator(const Ensemble& ensemble, std::int64_t lag_steps) {
    require_ground_ensemble(ensemble);
    if (lag_steps < 0) throw ValidationError("lag must be non-negative");
    const auto lag = record_of(ensemble, lag_steps);
    const std::int64_t origins = ensemble.recorded() - lag;
    if (origins < 1) throw ValidationError("lag exceeds the simulated span");
    std::vector<double> per_trajectory(static_cast<std::size_t>(ensemble.count));
    for (std::int64_t j = 0; j < ensemble.count; ++j) {
        double acc = 0.0;
        for (std::int64_t r = 0; r < origins; ++r) acc += ensemble.sample(j, r) * ensemble.sample(j, r + lag);
        per_trajectory[static_cast<std::size_t>(j)] = acc / static_cast<double>(origins);
    }
    return finish(ensemble, static_cast<double>(lag_steps) * ensemble.d_tau, per_trajectory);
}

SlopeFit fit_log_correlator(const std::vector<CorrelatorEstimate>& estimates) {
    if (estimates.size() < 2) throw ValidationError("slope fit needs at least two lags");
    double sw = 0.0;
    double sx = 0.0;
    double sy = 0.0;
    double sxx = 0.0;
    double sxy = 0.0;
    for (const auto& e : estimates) {
        if (!(e.value > 0.0)) throw NumericalError("log fit needs positive correlator values");
        const double rel = e.standard_error > 0.0 ? e.standard_error / e.value : 1.0;
        const double w = 1.0 / (rel * rel);
        const double y = std::log(e.value);
        sw += w;
        sx += w * e.lag;
        sy += w * y;
        sxx += w * e.lag * e.lag;
        sxy += w * e.lag * y;
    }
    const double det = sw * sxx - sx * sx;
    if (!(det > 0.0)) throw NumericalError("degenerate lag set for slope fit");
    SlopeFit fit;
    fit.slope = (sw * sxy - sx * sy) / det;
    fit.intercept = (sxx * sy - sx * sxy) / det;
    fit.slope_error = std::sqrt(sw / det);
    return fit;
}

SummedCorrelator summed_correlator(const StringParams& params, const std::vector<CorrelatorEstimate>& parts) {
    require_valid(params);
    if (parts.empty()) throw ValidationError("no correlator estimates supplied");
    SummedCorrelator out;
    out.lag = parts.front().lag;
    std::set<std::pair<int, int>> seen;
    double var = 0.0;
    for (const auto& p : parts) {
        if (p.lag != out.lag) throw ValidationError("estimates at different lags");
        if (p.n < 1 || p.n > params.mode_cutoff || p.direction < 1 || p.direction > params.transverse_count())
            throw ValidationError("estimate outside the mode/direction range");
        if (!seen.insert({p.n, p.direction}).second)
            throw ValidationError("duplicate estimate for mode " + std::to_string(p.n) + ", direction " +
                                  std::to_string(p.direction));
        out.value += p.value;
        var += p.standard_error * p.standard_error;
    }
    for (int n = 1; n <= params.mode_cutoff; ++n)
        for (int i = 1; i <= params.transverse_count(); ++i)
            if (!seen.contains({n, i}))
                throw ValidationError("missing mode " + std::to_string(n) + " in direction " + std::to_string(i));
    out.standard_error = std::sqrt(var);
    out.analytic = analytic_summed_correlator(params, out.lag);
    out.parts = parts;
    return out;
}

void write_correlator_table(std::ostream& out, const std::vector<CorrelatorEstimate>& rows) {
    const auto precision = out.precision(12);
    out << "n direction delta_tau value stderr analytic z_score\n";
    for (const auto& r : rows)
        out << r.n << ' ' << r.direction << ' ' << r.lag << ' ' << r.value << ' ' << r.standard_error << ' '
            << r.analytic << ' ' << r.z_score << '\n';
    out.precision(precision);
}

std::vector<double> sigma_grid(int count) {
    if (count < 1) throw ValidationError("sigma grid needs at least one point");
    std::vector<double> s(static_cast<std::size_t>(count));
    for (int j = 0; j < count; ++j) s[static_cast<std::size_t>(j)] = std::numbers::pi * (j + 0.5) / count;
    return s;
}

std::vector<double> reconstruct_string(const std::vector<double>& q, const std::vector<double>& sigma) {
    std::vector<double> x(sigma.size(), 0.0);
    for (std::size_t j = 0; j < sigma.size(); ++j)
        for (std::size_t n = 0; n < q.size(); ++n) x[j] += q[n] * std::cos(static_cast<double>(n) * sigma[j]);
    return x;
}

std::vector<double> string_slope(const std::vector<double>& q, const std::vector<double>& sigma) {
    std::vector<double> d(sigma.size(), 0.0);
    for (std::size_t j = 0; j < sigma.size(); ++j)
        for (std::size_t n = 1; n < q.size(); ++n)
            d[j] -= static_cast<double>(n) * q[n] * std::sin(static_cast<double>(n) * sigma[j]);
    return d;
}

std::vector<double> cosine_analysis(const std::vector<double>& x, int modes) {
    const int count = static_cast<int>(x.size());
    if (modes < 1 || modes > count) throw ValidationError("cosine analysis needs 1 <= modes <= samples");
    const auto sigma = sigma_grid(count);
    std::vector<double> q(static_cast<std::size_t>(modes), 0.0);
    for (int n = 0; n < modes; ++n) {
        double acc = 0.0;
        for (int j = 0; j < count; ++j) acc += x[static_cast<std::size_t>(j)] * std::cos(n * sigma[static_cast<std::size_t>(j)]);
        q[static_cast<std::size_t>(n)] = (n == 0 ? 1.0 : 2.0) * acc / count;
    }
    return q;
}

LevelSpectrum level_spectrum(const StringParams& params, int max_level, bool zeta_intercept) {
    if (params.dims < 3) throw ValidationError("no transverse directions");
    if (max_level < 0) throw ValidationError("max level must be non-negative");
    std::vector<std::uint64_t> c(static_cast<std::size_t>(max_level) + 1, 0);
    c[0] = 1;
    // Each factor 1/(1 - q^n) is a running prefix sum with stride n.
    for (int n = 1; n <= max_level; ++n)
        for (int copy = 0; copy < params.transverse_count(); ++copy)
            for (int j = n; j <= max_level; ++j) {
                const auto a = static_cast<std::size_t>(j);
                if (__builtin_add_overflow(c[a], c[a - static_cast<std::size_t>(n)], &c[a]))
                    throw NumericalError("level degeneracy overflows 64 bits at level " + std::to_string(j));
            }
    LevelSpectrum s;
    for (int level = 0; level <= max_level; ++level)
        s.levels.push_back({level, static_cast<double>(level), c[static_cast<std::size_t>(level)]});
    if (zeta_intercept) s.intercept = params.transverse_count() / 24.0;
    return s;
}

} // namespace nelson
