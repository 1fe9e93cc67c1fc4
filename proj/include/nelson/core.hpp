#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace nelson {

/// Physical constants and conventions of the open bosonic string in
/// light-cone gauge. Natural units hbar = c = 1; tau and sigma are
/// dimensionless, mode amplitudes carry dimension sqrt(alpha').
struct StringParams {
    double alpha_prime = 0.5;
    int dims = 26;
    int mode_cutoff = 1; // largest retained oscillator mode
    double p_plus = 1.0; // light-cone momentum; only rescales Lorentz generators

    int transverse_count() const noexcept { return dims - 2; }
};

/// Diffusion constant of mode n: 2 alpha' for n >= 1, alpha' for the zero mode.
double diffusion(const StringParams& params, int n);

struct ValidationReport {
    std::vector<std::string> errors;

    bool ok() const noexcept { return errors.empty(); }
    std::string message() const;
};

ValidationReport validate(const StringParams& params);
/// Throws ValidationError carrying every violation.
void require_valid(const StringParams& params);

/// A stationary string state: occupation k_{n,i} per oscillator mode
/// n >= 1 and transverse direction i in 1..D-2, plus zero-mode momenta.
struct ModeStateSpec {
    std::map<std::pair<int, int>, int> occupations; // (n, i) -> k, zero entries omitted
    std::vector<double> zero_mode_momentum;         // one per transverse direction

    static ModeStateSpec ground(const StringParams& params);

    int occupation(int n, int direction) const;
    void set_occupation(int n, int direction, int k);
    /// Sum of n * k_{n,i}: the oscillator level of the state.
    std::int64_t level() const;
    /// Zero-mode momentum along a direction; 0 if not set.
    double momentum(int direction) const;
};

ValidationReport validate(const ModeStateSpec& state, const StringParams& params);

/// Contents of a parameter file.
struct Config {
    StringParams params;
    std::uint64_t seed = 0;
};

/// `key = value` lines; blank lines and `#` comments ignored. Returns the
/// pairs in file order. Throws ValidationError on malformed lines.
std::vector<std::pair<std::string, std::string>> parse_key_values(std::string_view text);

/// Sets one of alpha_prime, dims, mode_cutoff, p_plus, seed. Returns false
/// for keys it does not know; throws ValidationError on unparsable values.
bool apply_config_key(Config& config, const std::string& key, const std::string& value);

/// Strict parser: unknown keys are errors. Does not validate the parameters.
Config parse_config(std::string_view text);
Config load_config(const std::filesystem::path& path);
std::string format_config(const Config& config);

/// Shortest text that parses back to the same double.
std::string format_double(double value);

} // namespace nelson
