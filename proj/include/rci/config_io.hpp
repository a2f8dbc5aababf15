#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "rci/config.hpp"
#include "rci/observables.hpp"

namespace rci {

/// `start:stop:count`, inclusive of both ends.
struct GridSpec {
  double start = 0.0;
  double stop = 0.0;
  int count = 0;

  std::vector<double> values() const;
};

/// Experiment-level settings that are not part of the physical model.
struct RunOptions {
  int phi_samples = 16;
  GridSpec dl_grid{-1.0, 1.0, 41};
  std::vector<double> rotation_rates{-0.2, 0.0, 0.2};
  std::vector<double> linearity_rates{-0.2, -0.1, -0.05, -0.02, 0.02, 0.05, 0.1, 0.2};
  int oracle_nodes = 32;
  ScanMethod scan_method = ScanMethod::factorized;
};

struct ResolvedConfig {
  SimConfig sim;
  RunOptions run;
};

/// Which defaults missing keys take.
enum class Profile { single_zone, three_zone };

/// Parses `key = value` lines (`#` starts a comment) followed by `key=value`
/// overrides, merges them over the profile defaults, resolves derived
/// quantities and validates the result. Throws ConfigError on unknown keys,
/// unit-suffix mismatches, malformed values and violated invariants.
ResolvedConfig parse_config(std::string_view text, std::span<const std::string> overrides = {},
                            Profile profile = Profile::single_zone);

ResolvedConfig load_config(const std::optional<std::filesystem::path>& path,
                           std::span<const std::string> overrides = {},
                           Profile profile = Profile::single_zone);

/// Canonical `key = value` text with every default materialised; parsing it
/// back reproduces the same configuration.
std::string resolved_config_text(const ResolvedConfig& cfg);

/// Stable 64-bit FNV-1a digest (16 hex digits) of the canonical text.
std::string config_digest(const ResolvedConfig& cfg);
/// Digest of the physical model alone.
std::string config_digest(const SimConfig& cfg);

/// Shortest decimal representation that parses back to the same double.
std::string format_number(double v);

GridSpec parse_grid(std::string_view text);

struct Column {
  std::string name;
  std::string unit;
};

struct OutputTable {
  std::vector<Column> columns;
  std::vector<std::vector<double>> rows;
};

struct RunManifest {
  std::string tool_version;
  std::string subcommand;
  std::vector<std::string> arguments;
  std::string resolved_config;
  std::string config_digest;
  std::optional<std::string> timestamp;  // omitted unless requested

  nlohmann::ordered_json to_json() const;
};

enum class OutputFormat { csv, json };

/// CSV: `# key=value` preamble (digest, tool, summary), one `name[unit]`
/// header line, LF line endings. JSON: a single object with manifest,
/// summary, columns and rows. Non-finite values are written as `nan` / null.
void emit_table(const OutputTable& table, OutputFormat format, const RunManifest& manifest,
                const nlohmann::ordered_json& summary, std::ostream& out);

/// Same, to a file; throws std::runtime_error if it cannot be written.
void emit_table(const OutputTable& table, OutputFormat format, const RunManifest& manifest,
                const nlohmann::ordered_json& summary, const std::filesystem::path& destination);

}  // namespace rci
