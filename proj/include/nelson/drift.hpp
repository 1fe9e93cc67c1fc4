#pragma once

#include "nelson/core.hpp"

#include <vector>

namespace nelson {

/// Stationary wave-functional data for one (mode, direction) factor.
///
/// For n >= 1 the mode is an oscillator with mass 1/(4 alpha') and
/// frequency n, H_n = -2 alpha' d^2 + n^2 x^2 / (8 alpha'); eigenstate k has
/// energy n(k + 1/2) and ground-state variance 2 alpha'/n. For n = 0 it is
/// a free momentum eigenstate with S = kappa x and no normalizable density.
class StationaryModeState {
public:
    static StationaryModeState oscillator(const StringParams& params, int n, int k);
    static StationaryModeState zero_mode(const StringParams& params, double momentum);

    int mode() const noexcept { return n_; }
    int occupation() const noexcept { return k_; }
    double momentum() const noexcept { return kappa_; }
    double nu() const noexcept { return nu_; }
    double alpha_prime() const noexcept { return alpha_prime_; }
    bool is_zero_mode() const noexcept { return n_ == 0; }

    /// n(k + 1/2) for oscillators, alpha' kappa^2 for the zero mode.
    double energy() const noexcept;
    /// Ground-state variance 2 alpha'/n. Throws UnsupportedState for n = 0.
    double ground_variance() const;

    /// Normalized real eigenfunction psi_k(x). Throws UnsupportedState for n = 0.
    double wavefunction(double x) const;
    double density(double x) const;
    /// Phase S(x): zero for oscillator eigenstates, kappa x for the zero mode.
    double phase(double x) const noexcept;

    /// u = nu rho'/rho. Throws SingularDrift exactly at a node.
    double osmotic_velocity(double x) const;
    /// v = 2 nu dS/dx.
    double current_velocity(double x) const noexcept;
    /// v_+ = v + u.
    double forward_drift(double x) const;
    /// v_- = v - u.
    double backward_drift(double x) const;

    /// Zeros of psi_k in increasing order (empty for k = 0 or the zero mode).
    std::vector<double> nodes() const;

private:
    StationaryModeState(int n, int k, double kappa, double alpha_prime, double nu)
        : n_(n), k_(k), kappa_(kappa), alpha_prime_(alpha_prime), nu_(nu) {}

    double length_scale() const; // sqrt(2) * ground standard deviation
    void require_oscillator(const char* what) const;

    int n_;
    int k_;
    double kappa_;
    double alpha_prime_;
    double nu_;
};

/// Physicists' Hermite polynomial H_k(x) by upward recurrence.
double hermite(int k, double x) noexcept;

/// Orthonormal Hermite function h_k(x) = H_k(x) exp(-x^2/2) / sqrt(2^k k! sqrt(pi)).
double hermite_function(int k, double x) noexcept;

/// Drift with magnitude capped at `cap`; sets `clamped` when the cap applies.
double clamp_drift(double value, double cap, bool& clamped) noexcept;

} // namespace nelson
