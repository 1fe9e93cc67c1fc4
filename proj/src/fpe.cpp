#include "nelson/fpe.hpp"

#include "nelson/errors.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

namespace nelson {

namespace {

struct QuantumTerms {
    double c; // coefficient of (S')^2 and of the quantum potential
    double potential_scale;
};

QuantumTerms mode_terms(const StringParams& params, int n) {
    require_valid(params);
    if (n < 0) throw ValidationError("mode index must be non-negative");
    if (n == 0) return {params.alpha_prime, 0.0};
    return {2.0 * params.alpha_prime, static_cast<double>(n) * n / (8.0 * params.alpha_prime)};
}

bool near_node(double x, const std::vector<double>& nodes, double window) {
    return std::any_of(nodes.begin(), nodes.end(), [&](double node) { return std::abs(x - node) < window; });
}

} // namespace

GridField::GridField(double lo, double hi, int points) : x_min(lo), x_max(hi) {
    if (points < 3) throw ValidationError("grid needs at least 3 points");
    if (!(hi > lo)) throw ValidationError("grid needs x_max > x_min");
    rho.assign(static_cast<std::size_t>(points), 0.0);
    S.assign(static_cast<std::size_t>(points), 0.0);
}

GridField GridField::sample(double lo, double hi, int points, const std::function<double(double)>& density,
                            const std::function<double(double)>& phase) {
    GridField f(lo, hi, points);
    for (int j = 0; j < points; ++j) {
        f.rho[static_cast<std::size_t>(j)] = density(f.x(j));
        if (phase) f.S[static_cast<std::size_t>(j)] = phase(f.x(j));
    }
    return f;
}

double GridField::mass() const noexcept {
    double m = 0.0;
    for (double r : rho) m += r;
    return m * h();
}

double GridField::mean() const noexcept {
    double m = 0.0;
    for (int j = 0; j < points(); ++j) m += x(j) * rho[static_cast<std::size_t>(j)];
    return m * h() / mass();
}

double GridField::variance() const noexcept {
    const double mu = mean();
    double v = 0.0;
    for (int j = 0; j < points(); ++j) v += (x(j) - mu) * (x(j) - mu) * rho[static_cast<std::size_t>(j)];
    return v * h() / mass();
}

void GridField::normalize() {
    const double m = mass();
    if (!(m > 0.0)) throw NumericalError("cannot normalize a density with non-positive mass");
    for (double& r : rho) r /= m;
}

double l1_distance(const GridField& a, const GridField& b) {
    if (a.points() != b.points() || a.x_min != b.x_min || a.x_max != b.x_max)
        throw ValidationError("fields live on different grids");
    double d = 0.0;
    for (std::size_t j = 0; j < a.rho.size(); ++j) d += std::abs(a.rho[j] - b.rho[j]);
    return d * a.h();
}

GridField evolve_fokker_planck(const GridField& field, const std::function<double(double)>& drift, double nu,
                               double d_tau, std::int64_t steps, EvolutionDiagnostics* diagnostics) {
    if (!(nu >= 0.0)) throw ValidationError("diffusion constant must be non-negative");
    if (!(d_tau >= 0.0)) throw ValidationError("d_tau must be non-negative");
    if (steps < 0) throw ValidationError("steps must be non-negative");
    if (d_tau == 0.0 || steps == 0) return field;

    const int p = field.points();
    const double h = field.h();
    const double ratio = nu * d_tau / (h * h);
    if (ratio > fpe_stability_limit)
        throw StabilityViolation("explicit stability bound violated: nu d_tau / h^2 = " + std::to_string(ratio) +
                                 " > " + std::to_string(fpe_stability_limit));

    // Drift at the p-1 cell interfaces.
    std::vector<double> v(static_cast<std::size_t>(p - 1));
    for (int j = 0; j + 1 < p; ++j) {
        v[static_cast<std::size_t>(j)] = drift(field.x(j) + 0.5 * h);
        if (!std::isfinite(v[static_cast<std::size_t>(j)]))
            throw ValidationError("drift is not finite on the grid at x = " + std::to_string(field.x(j) + 0.5 * h));
    }

    GridField out = field;
    std::vector<double> flux(static_cast<std::size_t>(p + 1), 0.0); // flux[0] and flux[p] stay zero
    const double initial_mass = field.mass();
    EvolutionDiagnostics diag;
    auto& rho = out.rho;
    for (std::int64_t step = 0; step < steps; ++step) {
        for (int j = 0; j + 1 < p; ++j) {
            const auto a = static_cast<std::size_t>(j);
            flux[a + 1] = v[a] * 0.5 * (rho[a] + rho[a + 1]) - nu * (rho[a + 1] - rho[a]) / h;
        }
        for (int j = 0; j < p; ++j) {
            const auto a = static_cast<std::size_t>(j);
            rho[a] -= d_tau / h * (flux[a + 1] - flux[a]);
            if (rho[a] < 0.0) {
                if (rho[a] < -negative_density_tolerance)
                    throw NumericalError("negative density " + std::to_string(rho[a]) + " at x = " +
                                         std::to_string(out.x(j)) + " after step " + std::to_string(step + 1));
                rho[a] = 0.0;
                ++diag.clipped;
            }
        }
        diag.max_mass_error = std::max(diag.max_mass_error, std::abs(out.mass() - initial_mass));
    }
    if (diagnostics) *diagnostics = diag;
    return out;
}

double continuity_residual(const GridField& field, const StringParams& params, int n) {
    const double nu = diffusion(params, n);
    const int p = field.points();
    const double h = field.h();
    std::vector<double> current(static_cast<std::size_t>(p), 0.0);
    for (int j = 1; j + 1 < p; ++j) {
        const auto a = static_cast<std::size_t>(j);
        current[a] = field.rho[a] * 2.0 * nu * (field.S[a + 1] - field.S[a - 1]) / (2.0 * h);
    }
    double worst = 0.0;
    for (int j = 2; j + 2 < p; ++j) {
        const auto a = static_cast<std::size_t>(j);
        worst = std::max(worst, std::abs((current[a + 1] - current[a - 1]) / (2.0 * h)));
    }
    return worst;
}

std::vector<double> detect_nodes(const GridField& field) {
    const double peak = *std::max_element(field.rho.begin(), field.rho.end());
    const double h = field.h();
    std::vector<double> nodes;
    for (int j = 1; j + 1 < field.points(); ++j) {
        const auto a = static_cast<std::size_t>(j);
        const double l = field.rho[a - 1];
        const double r = field.rho[a];
        const double u = field.rho[a + 1];
        if (r == 0.0) {
            nodes.push_back(field.x(j));
            continue;
        }
        if (!(r < l && r <= u && r < node_depth * peak)) continue;
        // rho ~ (x - x0)^2 near a node: place x0 at the vertex of the parabola.
        const double curv = l - 2 * r + u;
        const double shift = curv > 0.0 ? 0.5 * h * (l - u) / curv : 0.0;
        nodes.push_back(field.x(j) + std::clamp(shift, -h, h));
    }
    return nodes;
}

ResidualReport madelung_residual(const GridField& field, const StringParams& params, int n, double energy,
                                 std::vector<double> nodes, int node_window) {
    const auto terms = mode_terms(params, n);
    const int p = field.points();
    const double h = field.h();
    ResidualReport report;
    report.nodes = std::move(nodes);
    const double window = node_window * h;
    // Fourth-order five-point stencils, so the two outermost points per side are skipped.
    for (int j = 2; j + 2 < p; ++j) {
        const auto a = static_cast<std::size_t>(j);
        const double x = field.x(j);
        const double amp_ll = std::sqrt(field.rho[a - 2]);
        const double amp_l = std::sqrt(field.rho[a - 1]);
        const double amp = std::sqrt(field.rho[a]);
        const double amp_r = std::sqrt(field.rho[a + 1]);
        const double amp_rr = std::sqrt(field.rho[a + 2]);
        const double ds =
            (-field.S[a + 2] + 8.0 * field.S[a + 1] - 8.0 * field.S[a - 1] + field.S[a - 2]) / (12.0 * h);
        double r = std::numeric_limits<double>::infinity();
        if (amp > 0.0) {
            const double d2 = (-amp_rr + 16.0 * amp_r - 30.0 * amp + 16.0 * amp_l - amp_ll) / (12.0 * h * h);
            const double quantum = d2 / amp; // R'^2 + R''
            r = std::abs(-energy + terms.c * ds * ds - terms.c * quantum + terms.potential_scale * x * x);
        }
        if (amp == 0.0 || near_node(x, report.nodes, window)) {
            ++report.excluded;
            if (std::isfinite(r)) report.max_excluded_residual = std::max(report.max_excluded_residual, r);
            continue;
        }
        ++report.evaluated;
        report.max_residual = std::max(report.max_residual, r);
    }
    return report;
}

ResidualReport madelung_residual(const GridField& field, const StringParams& params, int n, double energy) {
    return madelung_residual(field, params, n, energy, detect_nodes(field));
}

double eigen_residual(const GridField& field, const StringParams& params, int n, double energy,
                      std::vector<double> nodes, int node_window) {
    const auto terms = mode_terms(params, n);
    const int p = field.points();
    const double h = field.h();
    std::vector<std::complex<double>> psi(static_cast<std::size_t>(p));
    for (std::size_t j = 0; j < psi.size(); ++j)
        psi[j] = std::sqrt(field.rho[j]) * std::exp(std::complex<double>(0.0, field.S[j]));
    const double window = node_window * h;
    double num = 0.0;
    double den = 0.0;
    for (int j = 1; j + 1 < p; ++j) {
        const auto a = static_cast<std::size_t>(j);
        if (near_node(field.x(j), nodes, window)) continue;
        const auto lap = (psi[a + 1] - 2.0 * psi[a] + psi[a - 1]) / (h * h);
        const auto h_psi = -terms.c * lap + terms.potential_scale * field.x(j) * field.x(j) * psi[a];
        num += std::norm(h_psi - energy * psi[a]);
        den += std::norm(energy * psi[a]);
    }
    if (!(den > 0.0)) throw NumericalError("eigen residual undefined for zero energy or empty support");
    return std::sqrt(num / den);
}

void write_grid_field(std::ostream& out, const GridField& field) {
    const auto precision = out.precision(17);
    out << "x rho S\n";
    for (int j = 0; j < field.points(); ++j)
        out << field.x(j) << ' ' << field.rho[static_cast<std::size_t>(j)] << ' '
            << field.S[static_cast<std::size_t>(j)] << '\n';
    out.precision(precision);
}

GridField read_grid_field(std::istream& in) {
    std::vector<double> xs;
    std::vector<double> rho;
    std::vector<double> phase;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream row(line);
        double x = 0.0;
        double r = 0.0;
        double s = 0.0;
        if (!(row >> x >> r >> s)) {
            if (xs.empty() && line.find("rho") != std::string::npos) continue; // header
            throw ValidationError("grid file line " + std::to_string(lineno) + ": expected x rho S");
        }
        xs.push_back(x);
        rho.push_back(r);
        phase.push_back(s);
    }
    if (xs.size() < 3) throw ValidationError("grid file needs at least 3 rows");
    GridField f(xs.front(), xs.back(), static_cast<int>(xs.size()));
    const double h = f.h();
    for (std::size_t j = 0; j < xs.size(); ++j)
        if (std::abs(xs[j] - f.x(static_cast<int>(j))) > 1e-9 * std::max(1.0, std::abs(xs[j])) + 1e-6 * h)
            throw ValidationError("grid file x column is not uniformly spaced");
    for (double r : rho)
        if (!(r >= 0.0)) throw ValidationError("grid file contains a negative or non-finite density");
    f.rho = std::move(rho);
    f.S = std::move(phase);
    return f;
}

} // namespace nelson
