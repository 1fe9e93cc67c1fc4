#pragma once

#include "nelson/core.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace nelson::cli {

/// Everything a run depends on. Serialized verbatim as the `# key = value`
/// header of every output file; parse_run_header() reads it back.
struct RunConfig {
    std::string command;
    Config base;
    std::int64_t ensemble_size = 10000;
    double d_tau = 1e-3;
    std::int64_t steps = 1000;
    double x_min = -8.0;
    double x_max = 8.0;
    int grid_points = 401;
    std::map<std::string, std::string> options; // subcommand-specific keys
};

const std::vector<std::string>& commands();

/// Defaults for a subcommand, including every subcommand-specific key.
RunConfig default_run_config(const std::string& command);

/// Sets a general or subcommand-specific key. Throws ValidationError for
/// unknown keys or unparsable values.
void set_run_key(RunConfig& config, const std::string& key, const std::string& value);

/// All keys of the config in header order, with their values as text.
std::vector<std::pair<std::string, std::string>> run_config_entries(const RunConfig& config);

std::string format_run_header(const RunConfig& config, const std::optional<std::string>& timestamp = std::nullopt);
/// Reads the leading `# key = value` block of an output file. The timestamp
/// line, if any, is skipped.
RunConfig parse_run_header(std::istream& in);

/// Entry point shared by the executable and the tests. Exit codes: 0
/// success, 1 validation error, 2 numerical failure.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace nelson::cli
