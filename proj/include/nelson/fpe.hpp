#pragma once

#include "nelson/core.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

namespace nelson {

/// Uniform 1-D grid carrying a density rho and a phase S.
struct GridField {
    double x_min = -1.0;
    double x_max = 1.0;
    std::vector<double> rho;
    std::vector<double> S;

    GridField() = default;
    GridField(double lo, double hi, int points);

    /// Samples rho and S at the grid points; S defaults to zero.
    static GridField sample(double lo, double hi, int points, const std::function<double(double)>& rho,
                            const std::function<double(double)>& phase = {});

    int points() const noexcept { return static_cast<int>(rho.size()); }
    double h() const noexcept { return (x_max - x_min) / (points() - 1); }
    double x(int j) const noexcept { return x_min + j * h(); }

    /// Sum of rho h.
    double mass() const noexcept;
    double mean() const noexcept;
    double variance() const noexcept;
    /// Rescales rho so that mass() = 1.
    void normalize();
};

/// Sum |rho_a - rho_b| h over a shared grid.
double l1_distance(const GridField& a, const GridField& b);

struct EvolutionDiagnostics {
    std::int64_t clipped = 0;    // negative values in [-1e-12, 0) set to zero
    double max_mass_error = 0.0; // largest |mass - initial mass| seen after a step
};

inline constexpr double fpe_stability_limit = 0.45;
inline constexpr double negative_density_tolerance = 1e-12;

/// Explicit flux-form central scheme for d rho/d tau = -d(v_+ rho)/dx + nu d^2 rho/dx^2
/// with zero flux through both ends, so sum rho h is conserved up to rounding.
///
/// Throws StabilityViolation when nu d_tau / h^2 > 0.45 and NumericalError when
/// a density value drops below -1e-12. d_tau = 0 returns the input unchanged.
GridField evolve_fokker_planck(const GridField& field, const std::function<double(double)>& drift, double nu,
                               double d_tau, std::int64_t steps, EvolutionDiagnostics* diagnostics = nullptr);

struct ResidualReport {
    double max_residual = 0.0;         // over evaluated interior points
    std::int64_t evaluated = 0;
    std::int64_t excluded = 0;         // points within the node window
    double max_excluded_residual = 0.0;
    std::vector<double> nodes;
};

/// max |d(rho v)/dx| with v = 2 nu_n dS/dx on the interior grid.
double continuity_residual(const GridField& field, const StringParams& params, int n);

/// Relative depth below which an interior local minimum of rho counts as a node.
inline constexpr double node_depth = 1e-2;

/// Interior local minima of rho below node_depth * max(rho), located at the
/// vertex of the local parabola, plus exact zeros.
std::vector<double> detect_nodes(const GridField& field);

/// Single-mode Hamilton-Jacobi-Madelung residual with d S/d tau = -E:
///   -E + c_n (S')^2 - c_n (R'^2 + R'') + V_n(x),  R = ln(rho)/2,
/// with c_n = 2 alpha', V_n = n^2 x^2 / (8 alpha') for n >= 1 and
/// c_0 = alpha', V_0 = 0. R'^2 + R'' is evaluated as A''/A with A = sqrt(rho),
/// using five-point stencils on points 2..P-3.
/// Points within `node_window` grid spacings of a node are excluded and reported.
ResidualReport madelung_residual(const GridField& field, const StringParams& params, int n, double energy,
                                 std::vector<double> nodes, int node_window = 5);
ResidualReport madelung_residual(const GridField& field, const StringParams& params, int n, double energy);

/// Relative residual |H psi - E psi| / |E psi| (2-norm over interior points
/// outside the node window) for psi = sqrt(rho) exp(i S).
double eigen_residual(const GridField& field, const StringParams& params, int n, double energy,
                      std::vector<double> nodes = {}, int node_window = 5);

void write_grid_field(std::ostream& out, const GridField& field);
/// Reads `x rho S` columns (header optional); the x column must be uniform.
GridField read_grid_field(std::istream& in);

} // namespace nelson
