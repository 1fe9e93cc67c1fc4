#include "nelson/cli.hpp"

#include "nelson/algebra/bracket.hpp"
#include "nelson/algebra/lorentz.hpp"
#include "nelson/drift.hpp"
#include "nelson/errors.hpp"
#include "nelson/fpe.hpp"
#include "nelson/observables.hpp"
#include "nelson/sde.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

namespace nelson::cli {

namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;
namespace alg = nelson::algebra;

using OptionTable = std::vector<std::pair<std::string, std::string>>;

const std::map<std::string, OptionTable>& option_tables() {
    static const std::map<std::string, OptionTable> tables = {
        {"simulate",
         {{"n", "1"},
          {"direction", "1"},
          {"occupation", "0"},
          {"momentum", "0"},
          {"init", "stationary"},
          {"init_center", "0"},
          {"init_width", "1"},
          {"record_stride", "100"},
          {"drift_cap", "1000000"},
          {"correlate", "false"}}},
        {"correlate",
         {{"n", "1"},
          {"direction", "1"},
          {"dtau_lag", "1"},
          {"lag_points", "1"},
          {"pool_steps", "0"},
          {"summed", "false"}}},
        {"fpe-check", {{"n", "1"}, {"init_center", "2"}, {"init_width", "0.5"}, {"bins", "40"}}},
        {"madelung-check",
         {{"n", "1"}, {"occupation", "0"}, {"momentum", "0"}, {"energy_offset", "0"}, {"auto_grid", "true"},
          {"field", ""}}},
        {"spectrum", {{"max_level", "2"}, {"zeta", "false"}}},
        {"anomaly", {{"m", "1,2"}, {"intercept", "1"}, {"truncation", "0"}}},
        {"bracket-check", {{"n", "1"}, {"momentum", "0"}, {"auto_grid", "true"}}},
        {"transport-check",
         {{"n", "1"},
          {"occupation", "0"},
          {"function", "x"},
          {"probe_min", "-2"},
          {"probe_max", "2"},
          {"bins", "8"},
          {"min_count", "30"}}},
    };
    return tables;
}

const std::vector<std::string> general_keys = {"alpha_prime", "dims",   "mode_cutoff", "p_plus",      "seed",
                                                "ensemble_size", "d_tau", "steps",      "x_min", "x_max",
                                                "grid_points"};

const std::vector<std::string> flag_keys = {"correlate", "summed", "zeta"};

template <typename T>
T parse_value(const std::string& key, const std::string& text) {
    T out{};
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, out);
    if (ec != std::errc() || ptr != end || text.empty())
        throw ValidationError("invalid value for " + key + ": '" + text + "'");
    return out;
}

bool parse_bool(const std::string& key, const std::string& text) {
    if (text == "true" || text == "1") return true;
    if (text == "false" || text == "0") return false;
    throw ValidationError("invalid value for " + key + ": '" + text + "' (expected true or false)");
}

const std::string& option(const RunConfig& cfg, const std::string& key) {
    const auto it = cfg.options.find(key);
    if (it == cfg.options.end()) throw ValidationError("option '" + key + "' does not apply to " + cfg.command);
    return it->second;
}

int opt_int(const RunConfig& cfg, const std::string& key) { return parse_value<int>(key, option(cfg, key)); }
double opt_double(const RunConfig& cfg, const std::string& key) { return parse_value<double>(key, option(cfg, key)); }
bool opt_bool(const RunConfig& cfg, const std::string& key) { return parse_bool(key, option(cfg, key)); }

std::string dashed(std::string key) {
    std::replace(key.begin(), key.end(), '_', '-');
    return key;
}

alg::Rational parse_rational(const std::string& key, const std::string& text) {
    const auto slash = text.find('/');
    if (slash != std::string::npos)
        return alg::Rational(parse_value<std::int64_t>(key, text.substr(0, slash)),
                             parse_value<std::int64_t>(key, text.substr(slash + 1)));
    const auto dot = text.find('.');
    if (dot == std::string::npos) return alg::Rational(parse_value<std::int64_t>(key, text));
    const std::string frac = text.substr(dot + 1);
    if (frac.size() > 15) throw ValidationError("too many decimals in " + key);
    std::int64_t scale = 1;
    for (std::size_t j = 0; j < frac.size(); ++j) scale *= 10;
    const std::string digits = text.substr(0, dot) + frac;
    return alg::Rational(parse_value<std::int64_t>(key, digits), scale);
}

// Output sink for one run: a text table with the config header and a JSON report.
class RunOutput {
public:
    RunOutput(const RunConfig& cfg, fs::path dir, std::optional<std::string> timestamp)
        : cfg_(cfg), dir_(std::move(dir)), timestamp_(std::move(timestamp)) {
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec) throw ValidationError("cannot create output directory " + dir_.string() + ": " + ec.message());
        report_["command"] = cfg.command;
        json config = json::object();
        for (const auto& [k, v] : run_config_entries(cfg)) config[k] = v;
        report_["config"] = config;
    }

    std::ofstream open(const std::string& name) const {
        std::ofstream f(dir_ / name);
        if (!f) throw ValidationError("cannot write " + (dir_ / name).string());
        f << format_run_header(cfg_, timestamp_);
        return f;
    }

    json& report() { return report_; }

    void finish() const {
        std::ofstream f(dir_ / "report.json");
        if (!f) throw ValidationError("cannot write report.json");
        f << report_.dump(2) << '\n';
    }

private:
    const RunConfig& cfg_;
    fs::path dir_;
    std::optional<std::string> timestamp_;
    json report_;
};

ModeStateSpec single_mode_state(const RunConfig& cfg, int n, int direction, int occupation, double momentum) {
    ModeStateSpec state = ModeStateSpec::ground(cfg.base.params);
    if (direction < 1 || direction > cfg.base.params.transverse_count())
        throw ValidationError("direction outside 1..D-2");
    if (n >= 1) state.set_occupation(n, direction, occupation);
    state.zero_mode_momentum[static_cast<std::size_t>(direction - 1)] = momentum;
    return state;
}

InitialCondition initial_condition(const RunConfig& cfg) {
    const auto& kind = option(cfg, "init");
    if (kind == "stationary") return InitialCondition::stationary();
    if (kind == "point") return InitialCondition::point(opt_double(cfg, "init_center"));
    if (kind == "gaussian") return InitialCondition::gaussian(opt_double(cfg, "init_center"), opt_double(cfg, "init_width"));
    throw ValidationError("init must be stationary, point or gaussian");
}

void require_nonzero_mode(int n, const char* what) {
    if (n == 0)
        throw UnsupportedState(std::string(what) +
                               " excludes the zero mode n = 0 (infrared divergence); choose n >= 1");
    if (n < 0) throw ValidationError("mode index must be non-negative");
}

json correlator_json(const CorrelatorEstimate& e) {
    return {{"n", e.n},           {"direction", e.direction}, {"delta_tau", e.lag},    {"value", e.value},
            {"stderr", e.standard_error}, {"analytic", e.analytic}, {"z_score", e.z_score}, {"samples", e.sample_count}};
}

std::int64_t steps_for(double span, double d_tau, const char* what) {
    const double ratio = span / d_tau;
    const auto steps = static_cast<std::int64_t>(std::llround(ratio));
    if (ratio < 0.0 || std::abs(ratio - static_cast<double>(steps)) > 1e-6 * std::max(1.0, ratio))
        throw ValidationError(std::string(what) + " must be a non-negative multiple of d_tau");
    return steps;
}

int cmd_simulate(const RunConfig& cfg, RunOutput& output, std::ostream& out) {
    const int n = opt_int(cfg, "n");
    const int direction = opt_int(cfg, "direction");
    if (opt_bool(cfg, "correlate")) require_nonzero_mode(n, "correlate");
    const auto state = single_mode_state(cfg, n, direction, opt_int(cfg, "occupation"), opt_double(cfg, "momentum"));
    SimulationSpec spec;
    spec.mode = n;
    spec.direction = direction;
    spec.d_tau = cfg.d_tau;
    spec.steps = cfg.steps;
    spec.count = cfg.ensemble_size;
    spec.seed = cfg.base.seed;
    spec.init = initial_condition(cfg);
    spec.record_stride = opt_int(cfg, "record_stride");
    spec.drift_cap = opt_double(cfg, "drift_cap");
    const Ensemble ens = simulate(cfg.base.params, state, spec);

    auto table = output.open("ensemble.txt");
    write_ensemble(table, ens);

    auto& rep = output.report();
    rep["clamp_events"] = ens.clamp_events;
    rep["trajectories"] = ens.count;
    const auto inc = increment_moments(ens, 0);
    rep["first_increment"] = {{"mean", inc.mean}, {"variance", inc.variance}, {"stderr", inc.mean_standard_error},
                              {"steps", ens.record_stride}};
    if (opt_bool(cfg, "correlate")) {
        const auto c = mode_correlator(ens, ens.steps, 0);
        rep["correlator"] = correlator_json(c);
        out << "correlator n=" << c.n << " delta_tau=" << c.lag << " value=" << c.value << " analytic=" << c.analytic
            << " z=" << c.z_score << '\n';
    }
    out << "simulated " << ens.count << " trajectories of mode " << n << ", clamp events " << ens.clamp_events << '\n';
    return 0;
}

int cmd_correlate(const RunConfig& cfg, RunOutput& output, std::ostream& out) {
    const int n = opt_int(cfg, "n");
    require_nonzero_mode(n, "correlate");
    const auto lag_steps = steps_for(opt_double(cfg, "dtau_lag"), cfg.d_tau, "dtau_lag");
    const int lag_points = opt_int(cfg, "lag_points");
    const auto pool = static_cast<std::int64_t>(opt_int(cfg, "pool_steps"));
    if (lag_points < 1 || pool < 0) throw ValidationError("lag_points >= 1 and pool_steps >= 0 required");

    std::vector<std::int64_t> lags;
    if (lag_points == 1) {
        lags.push_back(lag_steps);
    } else {
        for (int k = 0; k < lag_points; ++k) {
            if ((lag_steps * k) % (lag_points - 1) != 0)
                throw ValidationError("dtau_lag / d_tau must be divisible by lag_points - 1");
            lags.push_back(lag_steps * k / (lag_points - 1));
        }
    }
    std::int64_t stride = pool;
    for (auto l : lags) stride = std::gcd(stride, l);
    if (stride == 0) stride = 1;
    const std::int64_t total = std::max<std::int64_t>(lag_steps + pool, stride);

    auto run_one = [&](int mode, int direction) {
        SimulationSpec spec;
        spec.mode = mode;
        spec.direction = direction;
        spec.d_tau = cfg.d_tau;
        spec.steps = total;
        spec.count = cfg.ensemble_size;
        spec.seed = cfg.base.seed;
        spec.record_stride = stride;
        return simulate(cfg.base.params, ModeStateSpec::ground(cfg.base.params), spec);
    };

    std::vector<CorrelatorEstimate> rows;
    auto& rep = output.report();
    if (opt_bool(cfg, "summed")) {
        for (int mode = 1; mode <= cfg.base.params.mode_cutoff; ++mode)
            for (int i = 1; i <= cfg.base.params.transverse_count(); ++i)
                rows.push_back(lagged_correlator(run_one(mode, i), lag_steps));
        const auto sum = summed_correlator(cfg.base.params, rows);
        rep["summed"] = {{"delta_tau", sum.lag},
                         {"value", sum.value},
                         {"stderr", sum.standard_error},
                         {"analytic", sum.analytic},
                         {"relative_error", std::abs(sum.value - sum.analytic) / sum.analytic}};
        out << "summed correlator delta_tau=" << sum.lag << " value=" << sum.value << " stderr=" << sum.standard_error
            << " analytic=" << sum.analytic << '\n';
    } else {
        const Ensemble ens = run_one(n, opt_int(cfg, "direction"));
        for (auto l : lags) rows.push_back(lagged_correlator(ens, l));
        if (rows.size() >= 2) {
            const auto fit = fit_log_correlator(rows);
            rep["slope"] = {{"value", fit.slope}, {"stderr", fit.slope_error}, {"expected", -n}};
            out << "log-correlator slope " << fit.slope << " (expected " << -n << ")\n";
        }
        for (const auto& r : rows)
            out << "n=" << r.n << " delta_tau=" << r.lag << " value=" << r.value << " analytic=" << r.analytic
                << " z=" << r.z_score << '\n';
    }
    json arr = json::array();
    for (const auto& r : rows) arr.push_back(correlator_json(r));
    rep["rows"] = arr;
    auto table = output.open("correlate.txt");
    write_correlator_table(table, rows);
    return 0;
}

int cmd_fpe_check(const RunConfig& cfg, RunOutput& output, std::ostream& out) {
    const int n = opt_int(cfg, "n");
    if (n < 1) throw UnsupportedState("fpe-check needs an oscillator mode n >= 1");
    const double nu = diffusion(cfg.base.params, n);
    const double center = opt_double(cfg, "init_center");
    const double width = opt_double(cfg, "init_width");
    if (!(width > 0.0)) throw ValidationError("init_width must be positive");
    const int bins = opt_int(cfg, "bins");
    if (bins < 1 || bins > cfg.grid_points) throw ValidationError("bins must lie in 1..grid_points");

    GridField field = GridField::sample(cfg.x_min, cfg.x_max, cfg.grid_points, [&](double x) {
        const double z = (x - center) / width;
        return std::exp(-0.5 * z * z);
    });
    field.normalize();
    const double h = field.h();
    const auto sub = static_cast<std::int64_t>(std::ceil(nu * cfg.d_tau / (0.4 * h * h)));
    EvolutionDiagnostics diag;
    const GridField evolved = evolve_fokker_planck(
        field, [n](double x) { return -n * x; }, nu, cfg.d_tau / static_cast<double>(sub), cfg.steps * sub, &diag);

    SimulationSpec spec;
    spec.mode = n;
    spec.d_tau = cfg.d_tau;
    spec.steps = cfg.steps;
    spec.count = cfg.ensemble_size;
    spec.seed = cfg.base.seed;
    spec.init = InitialCondition::gaussian(center, width);
    spec.record_stride = cfg.steps;
    const Ensemble ens = simulate_process(DriftField::linear(0.0, -n), nu, spec);

    // Coarse bins of whole grid cells; cell j spans x_j +- h/2.
    const int per_bin = (cfg.grid_points + bins - 1) / bins;
    std::vector<double> edges;
    std::vector<double> grid_mass;
    for (int first = 0; first < cfg.grid_points; first += per_bin) {
        edges.push_back(evolved.x(first) - 0.5 * h);
        double m = 0.0;
        for (int j = first; j < std::min(cfg.grid_points, first + per_bin); ++j) m += evolved.rho[static_cast<std::size_t>(j)] * h;
        grid_mass.push_back(m);
    }
    edges.push_back(evolved.x(cfg.grid_points - 1) + 0.5 * h);
    std::vector<double> sde_mass(grid_mass.size(), 0.0);
    double outside = 0.0;
    const double w = 1.0 / static_cast<double>(ens.count);
    for (std::int64_t j = 0; j < ens.count; ++j) {
        const double q = ens.sample(j, ens.recorded() - 1);
        if (q < edges.front() || q >= edges.back()) {
            outside += w;
            continue;
        }
        const auto b = static_cast<std::size_t>(std::upper_bound(edges.begin(), edges.end(), q) - edges.begin() - 1);
        sde_mass[b] += w;
    }
    double l1 = outside;
    for (std::size_t b = 0; b < grid_mass.size(); ++b) l1 += std::abs(sde_mass[b] - grid_mass[b]);

    auto table = output.open("fpe-check.txt");
    table << "bin_lo bin_hi grid_mass sde_mass\n";
    table.precision(12);
    for (std::size_t b = 0; b < grid_mass.size(); ++b)
        table << edges[b] << ' ' << edges[b + 1] << ' ' << grid_mass[b] << ' ' << sde_mass[b] << '\n';
    auto& rep = output.report();
    rep["tau"] = cfg.d_tau * static_cast<double>(cfg.steps);
    rep["l1"] = l1;
    rep["outside_mass"] = outside;
    rep["fpe_substeps"] = sub;
    rep["fpe_mass_error"] = diag.max_mass_error;
    rep["fpe_clipped"] = diag.clipped;
    rep["pass"] = l1 < 0.02;
    out << "L1(histogram, grid) = " << l1 << " at tau = " << cfg.d_tau * static_cast<double>(cfg.steps) << '\n';
    return 0;
}

GridField state_field(const RunConfig& cfg, const StationaryModeState& st, bool auto_grid) {
    double lo = cfg.x_min;
    double hi = cfg.x_max;
    if (auto_grid && !st.is_zero_mode()) {
        const double reach = 6.0 * std::sqrt(st.ground_variance());
        lo = -reach;
        hi = reach;
    }
    if (st.is_zero_mode()) {
        GridField f = GridField::sample(lo, hi, cfg.grid_points, [](double) { return 1.0; },
                                        [&st](double x) { return st.phase(x); });
        f.normalize();
        return f;
    }
    return GridField::sample(lo, hi, cfg.grid_points, [&st](double x) { return st.density(x); },
                             [&st](double x) { return st.phase(x); });
}

int cmd_madelung_check(const RunConfig& cfg, RunOutput& output, std::ostream& out) {
    const int n = opt_int(cfg, "n");
    const int k = opt_int(cfg, "occupation");
    const auto st = n == 0 ? StationaryModeState::zero_mode(cfg.base.params, opt_double(cfg, "momentum"))
                           : StationaryModeState::oscillator(cfg.base.params, n, k);
    GridField field;
    const auto& path = option(cfg, "field");
    std::vector<double> nodes;
    if (!path.empty()) {
        std::ifstream in(path);
        if (!in) throw ValidationError("cannot read field file " + path);
        field = read_grid_field(in);
        nodes = detect_nodes(field);
    } else {
        field = state_field(cfg, st, opt_bool(cfg, "auto_grid"));
        nodes = st.nodes();
    }
    const double energy = st.energy() + opt_double(cfg, "energy_offset");
    const double cont = continuity_residual(field, cfg.base.params, n);
    const auto mad = madelung_residual(field, cfg.base.params, n, energy, nodes);

    auto table = output.open("madelung-check.txt");
    write_grid_field(table, field);
    auto& rep = output.report();
    rep["energy"] = energy;
    rep["continuity_residual"] = cont;
    rep["madelung_residual"] = mad.max_residual;
    rep["evaluated_points"] = mad.evaluated;
    rep["excluded_points"] = mad.excluded;
    rep["max_excluded_residual"] = mad.max_excluded_residual;
    rep["nodes"] = mad.nodes;
    if (n >= 1) rep["eigen_relative_residual"] = eigen_residual(field, cfg.base.params, n, energy, nodes);
    out << "continuity residual " << cont << ", madelung residual " << mad.max_residual << " (" << mad.excluded
        << " points excluded near nodes)\n";
    return 0;
}

int cmd_spectrum(const RunConfig& cfg, RunOutput& output, std::ostream& out) {
    const auto spec = level_spectrum(cfg.base.params, opt_int(cfg, "max_level"), opt_bool(cfg, "zeta"));
    auto table = output.open("spectrum.txt");
    table << "level energy_offset degeneracy\n";
    json arr = json::array();
    for (const auto& l : spec.levels) {
        table << l.level << ' ' << l.energy_offset << ' ' << l.degeneracy << '\n';
        out << "N=" << l.level << " degeneracy " << l.degeneracy << '\n';
        arr.push_back({{"level", l.level}, {"energy_offset", l.energy_offset}, {"degeneracy", l.degeneracy}});
    }
    auto& rep = output.report();
    rep["levels"] = arr;
    if (spec.intercept) {
        rep["intercept"] = *spec.intercept;
        out << "zeta-regularized intercept a = " << *spec.intercept << '\n';
    }
    return 0;
}

int cmd_anomaly(const RunConfig& cfg, RunOutput& output, std::ostream& out) {
    std::vector<int> ms;
    std::stringstream list(option(cfg, "m"));
    for (std::string item; std::getline(list, item, ',');) ms.push_back(parse_value<int>("m", item));
    if (ms.empty()) throw ValidationError("no anomaly modes requested");
    const auto intercept = parse_rational("intercept", option(cfg, "intercept"));
    const alg::Coefficient dims_value(static_cast<std::int64_t>(cfg.base.params.dims));
    const int requested_cutoff = opt_int(cfg, "truncation");

    auto at = [](const alg::Coefficient& c, const alg::Coefficient& d, const alg::Coefficient& a) {
        return c.substitute(alg::Symbol::dims, d).substitute(alg::Symbol::intercept, a);
    };

    auto table = output.open("anomaly.txt");
    table << "m delta at_26_1 at_requested truncation truncation_stable antisymmetric\n";
    json arr = json::array();
    std::vector<alg::Coefficient> equations;
    for (int m : ms) {
        const int cutoff = requested_cutoff > 0 ? requested_cutoff : 2 * m;
        const auto ac = alg::anomaly_coefficient(m, cutoff);
        const auto crit = at(ac.delta, alg::Coefficient(26), alg::Coefficient(1));
        const auto req = at(ac.delta, dims_value, alg::Coefficient(intercept));
        equations.push_back(ac.delta);
        table << m << " \"" << ac.delta.to_string() << "\" " << crit.to_string() << ' ' << req.to_string() << ' '
              << ac.mode_cutoff << ' ' << (ac.truncation_stable ? "yes" : "no") << ' '
              << (ac.antisymmetric ? "yes" : "no") << '\n';
        arr.push_back({{"m", m},
                       {"delta", ac.delta.to_string()},
                       {"at_26_1", crit.to_string()},
                       {"at_requested", req.to_string()},
                       {"truncation", ac.mode_cutoff},
                       {"truncation_stable", ac.truncation_stable},
                       {"antisymmetric", ac.antisymmetric},
                       {"clean_below_cutoff", ac.clean_below_cutoff}});
        out << "Delta_" << m << " = " << req.to_string() << "   [Delta_" << m << "(D, a) = " << ac.delta.to_string()
            << "]\n";
    }
    const auto solution = alg::solve_affine_system(equations);
    table << "# solution set: " << solution.description << '\n';
    auto& rep = output.report();
    rep["coefficients"] = arr;
    rep["requested_point"] = {{"dims", cfg.base.params.dims}, {"intercept", intercept.to_string()}};
    rep["solution_set"] = solution.description;
    out << "solution set of Delta_m = 0: " << solution.description << '\n';
    return 0;
}

int cmd_bracket_check(const RunConfig& cfg, RunOutput& output, std::ostream& out) {
    const int n = opt_int(cfg, "n");
    if (n < 1) throw UnsupportedState("bracket-check needs a normalizable density (mode n >= 1)");
    const auto st = StationaryModeState::oscillator(cfg.base.params, n, 0);
    GridField field = state_field(cfg, st, opt_bool(cfg, "auto_grid"));
    const double kappa = opt_double(cfg, "momentum");
    for (int j = 0; j < field.points(); ++j) field.S[static_cast<std::size_t>(j)] = kappa * field.x(j);

    const auto x = alg::BracketFunctional::mean_position();
    const auto p = alg::BracketFunctional::mean_momentum();
    const double xp = alg::stochastic_bracket(x, p, field);
    const double xx = alg::stochastic_bracket(x, x, field);
    const double shifted = alg::stochastic_bracket(x, x.shifted(1.0), field);

    const auto x0 = alg::OperatorExpr::generator(alg::position(1));
    const auto p0 = alg::OperatorExpr::generator(alg::momentum(1));
    const auto fock = alg::commutator_expectation(x0, p0, ModeStateSpec::ground(cfg.base.params));
    const auto grid = alg::commutator_expectation(x0, p0, field);
    const auto operator_side = alg::bracket_correspondence * fock;

    auto table = output.open("bracket-check.txt");
    table << "quantity value\n";
    table.precision(15);
    table << "bracket_x_p " << xp << "\nbracket_x_x " << xx << "\nbracket_x_x_shifted " << shifted
          << "\ncommutator_fock_re " << fock.real() << "\ncommutator_fock_im " << fock.imag()
          << "\ncommutator_grid_re " << grid.real() << "\ncommutator_grid_im " << grid.imag() << '\n';
    auto& rep = output.report();
    rep["bracket_x_p"] = xp;
    rep["bracket_x_x"] = xx;
    rep["bracket_x_x_shifted"] = shifted;
    rep["commutator_expectation_fock"] = {fock.real(), fock.imag()};
    rep["commutator_expectation_grid"] = {grid.real(), grid.imag()};
    rep["operator_side"] = {operator_side.real(), operator_side.imag()};
    rep["correspondence_factor"] = "-i";
    out << "{<x>,<p>}_s = " << xp << ", -i<[x0,p0]> = " << operator_side.real() << " + " << operator_side.imag()
        << "i\n";
    return 0;
}

int cmd_transport_check(const RunConfig& cfg, RunOutput& output, std::ostream& out) {
    const int n = opt_int(cfg, "n");
    if (n < 1) throw UnsupportedState("transport-check needs a stationary density (mode n >= 1)");
    const auto st = StationaryModeState::oscillator(cfg.base.params, n, opt_int(cfg, "occupation"));
    const auto& name = option(cfg, "function");
    TestFunction f;
    if (name == "x") {
        f = TestFunction::identity();
    } else if (name == "x2") {
        f = TestFunction::square();
    } else if (name == "1") {
        f = TestFunction::constant(1.0);
    } else {
        throw ValidationError("function must be x, x2 or 1");
    }
    TransportObserver obs(f, DriftField::from_state(st), st.nu(), cfg.d_tau,
                          uniform_edges(opt_double(cfg, "probe_min"), opt_double(cfg, "probe_max"), opt_int(cfg, "bins")));
    SimulationSpec spec;
    spec.mode = n;
    spec.d_tau = cfg.d_tau;
    spec.steps = cfg.steps;
    spec.count = cfg.ensemble_size;
    spec.seed = cfg.base.seed;
    spec.store_samples = false;
    ModeStateSpec state = ModeStateSpec::ground(cfg.base.params);
    state.set_occupation(n, 1, st.occupation());
    const Ensemble ens = simulate(cfg.base.params, state, spec, {&obs});
    const auto result = obs.result(opt_int(cfg, "min_count"));

    auto table = output.open("transport-check.txt");
    table << "bin_center count empirical analytic\n";
    table.precision(12);
    json arr = json::array();
    for (const auto& b : result.bins) {
        table << b.center << ' ' << b.count << ' ' << b.empirical << ' ' << b.analytic << '\n';
        arr.push_back({{"center", b.center}, {"count", b.count}, {"empirical", b.empirical}, {"analytic", b.analytic}});
    }
    auto& rep = output.report();
    rep["bins"] = arr;
    rep["max_deviation"] = result.max_deviation;
    rep["max_abs_analytic"] = result.max_abs_analytic;
    rep["clamp_events"] = ens.clamp_events;
    out << "D+F check for F = " << f.name << ": max deviation " << result.max_deviation << '\n';
    return 0;
}

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

} // namespace

const std::vector<std::string>& commands() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (const auto& [name, table] : option_tables()) v.push_back(name);
        return v;
    }();
    return names;
}

RunConfig default_run_config(const std::string& command) {
    const auto it = option_tables().find(command);
    if (it == option_tables().end()) throw ValidationError("unknown subcommand '" + command + "'");
    RunConfig cfg;
    cfg.command = command;
    if (command == "madelung-check" || command == "bracket-check") cfg.grid_points = 2001;
    for (const auto& [key, value] : it->second) cfg.options[key] = value;
    return cfg;
}

void set_run_key(RunConfig& cfg, const std::string& key, const std::string& value) {
    if (apply_config_key(cfg.base, key, value)) return;
    if (key == "ensemble_size") {
        cfg.ensemble_size = parse_value<std::int64_t>(key, value);
    } else if (key == "d_tau") {
        cfg.d_tau = parse_value<double>(key, value);
    } else if (key == "steps") {
        cfg.steps = parse_value<std::int64_t>(key, value);
    } else if (key == "x_min") {
        cfg.x_min = parse_value<double>(key, value);
    } else if (key == "x_max") {
        cfg.x_max = parse_value<double>(key, value);
    } else if (key == "grid_points") {
        cfg.grid_points = parse_value<int>(key, value);
    } else if (cfg.options.contains(key)) {
        cfg.options[key] = value;
    } else {
        throw ValidationError("unknown key '" + key + "' for " + cfg.command);
    }
}

std::vector<std::pair<std::string, std::string>> run_config_entries(const RunConfig& cfg) {
    std::vector<std::pair<std::string, std::string>> e;
    e.emplace_back("command", cfg.command);
    e.emplace_back("alpha_prime", format_double(cfg.base.params.alpha_prime));
    e.emplace_back("dims", std::to_string(cfg.base.params.dims));
    e.emplace_back("mode_cutoff", std::to_string(cfg.base.params.mode_cutoff));
    e.emplace_back("p_plus", format_double(cfg.base.params.p_plus));
    e.emplace_back("seed", std::to_string(cfg.base.seed));
    e.emplace_back("ensemble_size", std::to_string(cfg.ensemble_size));
    e.emplace_back("d_tau", format_double(cfg.d_tau));
    e.emplace_back("steps", std::to_string(cfg.steps));
    e.emplace_back("x_min", format_double(cfg.x_min));
    e.emplace_back("x_max", format_double(cfg.x_max));
    e.emplace_back("grid_points", std::to_string(cfg.grid_points));
    for (const auto& [k, v] : cfg.options) e.emplace_back(k, v);
    return e;
}

std::string format_run_header(const RunConfig& cfg, const std::optional<std::string>& timestamp) {
    std::ostringstream os;
    for (const auto& [k, v] : run_config_entries(cfg)) os << "# " << k << " = " << v << '\n';
    if (timestamp) os << "# timestamp = " << *timestamp << '\n';
    return os.str();
}

RunConfig parse_run_header(std::istream& in) {
    std::string text;
    std::string line;
    while (in.peek() == '#' && std::getline(in, line)) text += line.substr(1) + '\n';
    const auto pairs = parse_key_values(text);
    if (pairs.empty() || pairs.front().first != "command") throw ValidationError("output header lacks a command line");
    RunConfig cfg = default_run_config(pairs.front().second);
    for (std::size_t j = 1; j < pairs.size(); ++j) {
        if (pairs[j].first == "timestamp") continue;
        set_run_key(cfg, pairs[j].first, pairs[j].second);
    }
    return cfg;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Stochastic mechanics of open bosonic string normal modes"};
    app.require_subcommand(1);

    struct Shared {
        std::string config_path;
        std::string out_dir = "nelson-run";
        bool no_timestamp = false;
        std::map<std::string, std::string> flags;
    };
    std::map<std::string, Shared> shared;
    for (const auto& name : commands()) {
        auto* sub = app.add_subcommand(name);
        auto& s = shared[name];
        sub->add_option("--config", s.config_path, "key = value parameter file")->check(CLI::ExistingFile);
        sub->add_option("--out", s.out_dir, "output directory");
        sub->add_flag("--no-timestamp", s.no_timestamp, "omit the timestamp line from output headers");
        std::vector<std::string> keys = general_keys;
        for (const auto& [key, value] : default_run_config(name).options) keys.push_back(key);
        for (const auto& key : keys) {
            const bool is_flag = std::find(flag_keys.begin(), flag_keys.end(), key) != flag_keys.end();
            std::string names = "--" + dashed(key);
            if (key == "ensemble_size") names = "-M," + names;
            if (is_flag) {
                sub->add_flag_callback(names, [&s, key] { s.flags[key] = "true"; });
            } else {
                sub->add_option_function<std::string>(names, [&s, key](const std::string& v) { s.flags[key] = v; });
            }
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            app.exit(e, out, err);
            return 0;
        }
        err << "error: " << e.what() << '\n';
        return 1;
    }

    try {
        const auto* sub = app.get_subcommands().front();
        const std::string name = sub->get_name();
        const auto& s = shared[name];
        RunConfig cfg = default_run_config(name);
        if (!s.config_path.empty()) {
            std::ifstream in(s.config_path);
            if (!in) throw ValidationError("cannot read config file " + s.config_path);
            std::ostringstream buf;
            buf << in.rdbuf();
            for (const auto& [k, v] : parse_key_values(buf.str())) set_run_key(cfg, k, v);
        }
        for (const auto& [k, v] : s.flags) set_run_key(cfg, k, v);
        require_valid(cfg.base.params);
        if (cfg.ensemble_size < 1) throw ValidationError("ensemble_size must be at least 1");
        if (!(cfg.d_tau > 0.0)) throw ValidationError("d_tau must be positive");
        if (cfg.steps < 1) throw ValidationError("steps must be at least 1");

        RunOutput output(cfg, s.out_dir, s.no_timestamp ? std::nullopt : std::optional(utc_timestamp()));
        int code = 0;
        if (name == "simulate") {
            code = cmd_simulate(cfg, output, out);
        } else if (name == "correlate") {
            code = cmd_correlate(cfg, output, out);
        } else if (name == "fpe-check") {
            code = cmd_fpe_check(cfg, output, out);
        } else if (name == "madelung-check") {
            code = cmd_madelung_check(cfg, output, out);
        } else if (name == "spectrum") {
            code = cmd_spectrum(cfg, output, out);
        } else if (name == "anomaly") {
            code = cmd_anomaly(cfg, output, out);
        } else if (name == "bracket-check") {
            code = cmd_bracket_check(cfg, output, out);
        } else {
            code = cmd_transport_check(cfg, output, out);
        }
        output.finish();
        return code;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "numerical failure: " << e.what() << '\n';
        return 2;
    }
}

} // namespace nelson::cli
