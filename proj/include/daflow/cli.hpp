#pragma once

// Run configuration and the command-line driver.
//
// A configuration file holds `key = value` lines; `#` starts a comment.
// Keys mirror RunConfig: case, geometry, grid, stretching, reynolds, dt,
// relax (all variables) or relax_u / relax_v / relax_w / relax_p, conv_tol,
// max_outer, neighbors, sigma_factor, mode, steps, inner_tol, max_inner,
// snapshot_every, channel_height, obstacle_height, obstacle_length,
// obstacle_x, channel_length, reference_id, output_dir, write_fields,
// write_profiles, write_streamfunction, write_log, compare_reference,
// reference_file.

#include "daflow/bench.hpp"
#include "daflow/io.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace daflow::cli {

struct OutputToggles {
    bool fields = true;
    bool profiles = true;
    bool streamfunction = true;
    bool log = true;
};

struct RunConfig {
    bench::CaseSpec spec;
    std::filesystem::path output_dir = "daflow-out";
    OutputToggles outputs;
    bool compare_reference = false;
    std::filesystem::path reference_file = bench::default_reference_path();

    /// Throws ConfigError (or the parameter/geometry error of the field).
    void validate() const;
};

/// Starts from a built-in case id, or reads `source` as a configuration file
/// when it names an existing file.
RunConfig load_case(const std::string& source);

/// Applies `key = value` lines on top of `base`.
RunConfig parse_config(std::istream& is, RunConfig base = {});

/// Throws ConfigError("unknown key: ...") or ConfigError("invalid value for ...").
void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value);

/// Every field after defaults, doubles printed with 17 significant digits.
/// Parsing this back yields an identical configuration.
io::KeyValues effective_config(const RunConfig& cfg);
void write_config(std::ostream& os, const RunConfig& cfg);

/// Creates the output directory and checks it is writable. Throws IoError.
void preflight_output(const std::filesystem::path& dir);

/// Writes the field dump, profiles, vortices, convergence log, summary and
/// the effective configuration into cfg.output_dir.
void write_outputs(const bench::CaseResult& result, const RunConfig& cfg,
                   const std::optional<bench::ComparisonReport>& comparison = std::nullopt);

io::KeyValues summary(const bench::CaseResult& result,
                      const std::optional<bench::ComparisonReport>& comparison = std::nullopt);

enum ExitCode : int { kOk = 0, kUsage = 1, kNotConverged = 2, kReferenceFailed = 3 };

/// Entry point of the `daflow` executable.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace daflow::cli
