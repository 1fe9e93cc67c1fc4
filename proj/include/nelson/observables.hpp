#pragma once

#include "nelson/core.hpp"
#include "nelson/sde.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

namespace nelson {

struct CorrelatorEstimate {
    int n = 1;
    int direction = 1;
    double lag = 0.0;
    double value = 0.0;
    double standard_error = 0.0;
    std::int64_t sample_count = 0;
    double analytic = 0.0;
    double z_score = 0.0;
};

/// Euclidean ground-state correlator (2 alpha'/n) exp(-n lag) of one mode amplitude.
double analytic_mode_correlator(const StringParams& params, int n, double lag);
/// (D-2) 2 alpha' sum_{n=1}^{N} exp(-n lag)/n, N = mode_cutoff.
double analytic_summed_correlator(const StringParams& params, double lag);

/// <q(tau_t) q(tau_t')> over trajectories; t, t' are step indices on the
/// recorded lattice with t >= t'. Only ground-state oscillator ensembles qualify.
CorrelatorEstimate mode_correlator(const Ensemble& ensemble, std::int64_t t, std::int64_t t_prime);

/// Stationary correlator at a lag, averaged over every recorded origin that
/// leaves room for the lag. The standard error comes from per-trajectory
/// averages, which are independent.
CorrelatorEstimate lagged_correlator(const Ensemble& ensemble, std::int64_t lag_steps);

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_error = 0.0;
};

/// Weighted least-squares line through (lag, log value); weights from the
/// delta-method variance se^2 / value^2. Needs positive values.
SlopeFit fit_log_correlator(const std::vector<CorrelatorEstimate>& estimates);

struct SummedCorrelator {
    double lag = 0.0;
    double value = 0.0;
    double standard_error = 0.0;
    double analytic = 0.0;
    std::vector<CorrelatorEstimate> parts;
};

/// Sum of per-(mode, direction) estimates at one lag. Every n in 1..N and
/// every direction in 1..D-2 must appear exactly once (ValidationError otherwise).
SummedCorrelator summed_correlator(const StringParams& params, const std::vector<CorrelatorEstimate>& parts);

/// Columnar table `n direction delta_tau value stderr analytic z_score`.
void write_correlator_table(std::ostream& out, const std::vector<CorrelatorEstimate>& rows);

/// Cell-centred sigma points pi (j + 1/2) / count on [0, pi].
std::vector<double> sigma_grid(int count);

/// x(sigma) = sum_n q_n cos(n sigma) for q = (q_0, ..., q_N).
std::vector<double> reconstruct_string(const std::vector<double>& q, const std::vector<double>& sigma);
/// d x / d sigma = -sum_n n q_n sin(n sigma).
std::vector<double> string_slope(const std::vector<double>& q, const std::vector<double>& sigma);
/// Inverse of reconstruct_string on sigma_grid(count): recovers q_0..q_{modes-1}, modes <= count.
std::vector<double> cosine_analysis(const std::vector<double>& x, int modes);

struct LevelEntry {
    int level = 0;
    double energy_offset = 0.0;
    std::uint64_t degeneracy = 0;
};

struct LevelSpectrum {
    std::vector<LevelEntry> levels;
    std::optional<double> intercept; // (D-2)/24, only with zeta regularization
};

/// Number of occupation patterns with sum n k_{n,i} = N over D-2 directions,
/// for N = 0..max_level, i.e. the coefficients of prod_n (1 - q^n)^{-(D-2)}.
/// Throws NumericalError if a degeneracy overflows 64 bits.
LevelSpectrum level_spectrum(const StringParams& params, int max_level, bool zeta_intercept = false);

} // namespace nelson
