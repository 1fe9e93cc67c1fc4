#include "nelson/core.hpp"

#include "nelson/errors.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace nelson {

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
    T out{};
    const auto* end = value.data() + value.size();
    const auto [ptr, ec] = std::from_chars(value.data(), end, out);
    if (ec != std::errc() || ptr != end) throw ValidationError("invalid value for " + key + ": '" + value + "'");
    return out;
}

} // namespace

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

double diffusion(const StringParams& params, int n) {
    if (n < 0) throw ValidationError("mode index must be non-negative");
    return n == 0 ? params.alpha_prime : 2.0 * params.alpha_prime;
}

std::string ValidationReport::message() const {
    std::string out;
    for (const auto& e : errors) {
        if (!out.empty()) out += "; ";
        out += e;
    }
    return out;
}

ValidationReport validate(const StringParams& params) {
    ValidationReport report;
    if (!(params.alpha_prime > 0.0) || !std::isfinite(params.alpha_prime))
        report.errors.emplace_back("alpha_prime must be positive");
    if (params.dims < 3) report.errors.emplace_back("no transverse directions");
    if (params.mode_cutoff < 1) report.errors.emplace_back("mode_cutoff must be at least 1");
    if (!(params.p_plus > 0.0) || !std::isfinite(params.p_plus)) report.errors.emplace_back("p_plus must be positive");
    return report;
}

void require_valid(const StringParams& params) {
    const auto report = validate(params);
    if (!report.ok()) throw ValidationError(report.message());
}

ModeStateSpec ModeStateSpec::ground(const StringParams& params) {
    ModeStateSpec s;
    s.zero_mode_momentum.assign(static_cast<std::size_t>(std::max(params.transverse_count(), 0)), 0.0);
    return s;
}

int ModeStateSpec::occupation(int n, int direction) const {
    const auto it = occupations.find({n, direction});
    return it == occupations.end() ? 0 : it->second;
}

void ModeStateSpec::set_occupation(int n, int direction, int k) {
    if (k < 0) throw ValidationError("occupation must be non-negative");
    if (k == 0) {
        occupations.erase({n, direction});
    } else {
        occupations[{n, direction}] = k;
    }
}

std::int64_t ModeStateSpec::level() const {
    std::int64_t total = 0;
    for (const auto& [key, k] : occupations) total += static_cast<std::int64_t>(key.first) * k;
    return total;
}

double ModeStateSpec::momentum(int direction) const {
    if (direction < 1 || static_cast<std::size_t>(direction) > zero_mode_momentum.size()) return 0.0;
    return zero_mode_momentum[static_cast<std::size_t>(direction - 1)];
}

ValidationReport validate(const ModeStateSpec& state, const StringParams& params) {
    ValidationReport report;
    for (const auto& [key, k] : state.occupations) {
        const auto [n, i] = key;
        const std::string where = "(" + std::to_string(n) + "," + std::to_string(i) + ")";
        if (n < 1) report.errors.push_back("occupation at non-oscillator mode " + where);
        if (n > params.mode_cutoff) report.errors.push_back("mode beyond cutoff " + where);
        if (i < 1 || i > params.transverse_count()) report.errors.push_back("direction out of range " + where);
        if (k < 0) report.errors.push_back("negative occupation " + where);
    }
    if (static_cast<int>(state.zero_mode_momentum.size()) > std::max(params.transverse_count(), 0))
        report.errors.emplace_back("more zero-mode momenta than transverse directions");
    for (double p : state.zero_mode_momentum)
        if (!std::isfinite(p)) report.errors.emplace_back("non-finite zero-mode momentum");
    return report;
}

std::vector<std::pair<std::string, std::string>> parse_key_values(std::string_view text) {
    std::vector<std::pair<std::string, std::string>> out;
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string body = trim(line.substr(0, line.find('#')));
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos)
            throw ValidationError("line " + std::to_string(lineno) + ": expected 'key = value'");
        std::string key = trim(std::string_view(body).substr(0, eq));
        std::string value = trim(std::string_view(body).substr(eq + 1));
        if (key.empty() || value.empty())
            throw ValidationError("line " + std::to_string(lineno) + ": empty key or value");
        out.emplace_back(std::move(key), std::move(value));
    }
    return out;
}

bool apply_config_key(Config& config, const std::string& key, const std::string& value) {
    if (key == "alpha_prime") {
        config.params.alpha_prime = parse_number<double>(key, value);
    } else if (key == "dims") {
        config.params.dims = parse_number<int>(key, value);
    } else if (key == "mode_cutoff") {
        config.params.mode_cutoff = parse_number<int>(key, value);
    } else if (key == "p_plus") {
        config.params.p_plus = parse_number<double>(key, value);
    } else if (key == "seed") {
        config.seed = parse_number<std::uint64_t>(key, value);
    } else {
        return false;
    }
    return true;
}

Config parse_config(std::string_view text) {
    Config config;
    for (const auto& [key, value] : parse_key_values(text))
        if (!apply_config_key(config, key, value)) throw ValidationError("unknown config key '" + key + "'");
    return config;
}

Config load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot read config file " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str());
}

std::string format_config(const Config& config) {
    std::ostringstream os;
    os << "alpha_prime = " << format_double(config.params.alpha_prime) << "\n"
       << "dims = " << config.params.dims << "\n"
       << "mode_cutoff = " << config.params.mode_cutoff << "\n"
       << "p_plus = " << format_double(config.params.p_plus) << "\n"
       << "seed = " << config.seed << "\n";
    return os.str();
}

} // namespace nelson
