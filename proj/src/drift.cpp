#include "nelson/drift.hpp"

#include "nelson/errors.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Eigenvalues>

namespace nelson {

double hermite(int k, double x) noexcept {
    if (k == 0) return 1.0;
    double prev = 1.0;
    double cur = 2.0 * x;
    for (int j = 1; j < k; ++j) {
        const double next = 2.0 * x * cur - 2.0 * j * prev;
        prev = cur;
        cur = next;
    }
    return cur;
}

double hermite_function(int k, double x) noexcept {
    double prev = 0.0;
    double cur = std::exp(-0.5 * x * x) / std::sqrt(std::sqrt(std::numbers::pi));
    for (int j = 0; j < k; ++j) {
        const double next = std::sqrt(2.0 / (j + 1)) * x * cur - std::sqrt(static_cast<double>(j) / (j + 1)) * prev;
        prev = cur;
        cur = next;
    }
    return cur;
}

double clamp_drift(double value, double cap, bool& clamped) noexcept {
    clamped = false;
    if (value > cap) {
        clamped = true;
        return cap;
    }
    if (value < -cap) {
        clamped = true;
        return -cap;
    }
    return value;
}

StationaryModeState StationaryModeState::oscillator(const StringParams& params, int n, int k) {
    if (n < 1) throw UnsupportedState("oscillator states need mode n >= 1");
    if (k < 0) throw ValidationError("occupation must be non-negative");
    if (!(params.alpha_prime > 0.0)) throw ValidationError("alpha_prime must be positive");
    return {n, k, 0.0, params.alpha_prime, diffusion(params, n)};
}

StationaryModeState StationaryModeState::zero_mode(const StringParams& params, double momentum) {
    if (!(params.alpha_prime > 0.0)) throw ValidationError("alpha_prime must be positive");
    if (!std::isfinite(momentum)) throw ValidationError("zero-mode momentum must be finite");
    return {0, 0, momentum, params.alpha_prime, diffusion(params, 0)};
}

void StationaryModeState::require_oscillator(const char* what) const {
    if (n_ == 0)
        throw UnsupportedState(std::string(what) + " is undefined for the zero mode (no normalizable density)");
}

double StationaryModeState::energy() const noexcept {
    if (n_ == 0) return alpha_prime_ * kappa_ * kappa_;
    return n_ * (k_ + 0.5);
}

double StationaryModeState::ground_variance() const {
    require_oscillator("ground variance");
    return 2.0 * alpha_prime_ / n_;
}

double StationaryModeState::length_scale() const { return std::sqrt(2.0 * ground_variance()); }

double StationaryModeState::wavefunction(double x) const {
    require_oscillator("wavefunction");
    const double l = length_scale();
    return hermite_function(k_, x / l) / std::sqrt(l);
}

double StationaryModeState::density(double x) const {
    const double psi = wavefunction(x);
    return psi * psi;
}

double StationaryModeState::phase(double x) const noexcept { return n_ == 0 ? kappa_ * x : 0.0; }

double StationaryModeState::osmotic_velocity(double x) const {
    if (n_ == 0) return 0.0;
    const double l = length_scale();
    const double xi = x / l;
    const double hk = hermite(k_, xi);
    if (hk == 0.0) throw SingularDrift("osmotic velocity evaluated at a density node x = " + std::to_string(x), x);
    const double ratio = k_ == 0 ? 0.0 : 2.0 * k_ * hermite(k_ - 1, xi) / hk;
    // rho'/rho = 2 psi'/psi = (2/l)(H_k'/H_k - xi)
    return nu_ * 2.0 * (ratio - xi) / l;
}

double StationaryModeState::current_velocity(double) const noexcept { return n_ == 0 ? 2.0 * nu_ * kappa_ : 0.0; }

double StationaryModeState::forward_drift(double x) const { return current_velocity(x) + osmotic_velocity(x); }

double StationaryModeState::backward_drift(double x) const { return current_velocity(x) - osmotic_velocity(x); }

std::vector<double> StationaryModeState::nodes() const {
    if (n_ == 0 || k_ == 0) return {};
    // Golub-Welsch: zeros of H_k are eigenvalues of the Jacobi matrix.
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(k_, k_);
    for (int j = 1; j < k_; ++j) jacobi(j - 1, j) = jacobi(j, j - 1) = std::sqrt(j / 2.0);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi, Eigen::EigenvaluesOnly);
    const double l = length_scale();
    std::vector<double> out;
    for (Eigen::Index j = 0; j < solver.eigenvalues().size(); ++j) {
        double xi = solver.eigenvalues()(j);
        for (int it = 0; it < 3; ++it) {
            const double d = 2.0 * k_ * hermite(k_ - 1, xi);
            if (d == 0.0) break;
            xi -= hermite(k_, xi) / d;
        }
        if (k_ % 2 == 1 && std::abs(xi) < 1e-12) xi = 0.0;
        out.push_back(xi * l);
    }
    return out;
}

} // namespace nelson
