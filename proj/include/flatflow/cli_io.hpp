#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "flatflow/flow_driver.hpp"

namespace flatflow {

/// A parsed `key = value` entry with the line it came from (0 for overrides).
struct ConfigEntry {
  std::string value;
  int line = 0;
};

/// Raw section.key -> entry map. Duplicate keys and malformed lines raise
/// ConfigError.
std::map<std::string, ConfigEntry> parse_config_entries(const std::string& text);

/// Applies `section.key=value` overrides on top of parsed entries.
void apply_overrides(std::map<std::string, ConfigEntry>& entries, const std::vector<std::string>& overrides);

/// Validates entries and fills defaults. Errors name the key and line.
FlowConfig config_from_entries(const std::map<std::string, ConfigEntry>& entries);

FlowConfig parse_config(const std::string& text, const std::vector<std::string>& overrides = {});

/// Canonical `key = value` text for a config; parse_config round-trips it.
std::string config_text(const FlowConfig& cfg);

/// Every FlowConfig field as JSON.
std::string config_json(const FlowConfig& cfg);

std::string format_double(double x);

std::string diagnostics_header(int components);
std::string diagnostics_line(const DiagnosticsRow& row);
std::string diagnostics_csv(const FlowDiagnostics& rows);

/// FNV-1a 64-bit digest, hex encoded.
std::string digest(const std::string& bytes);

std::string snapshot_name(int step, bool curve);

/// Snapshot payload: OFF text for meshes, curve JSON for curves.
std::string snapshot_text(const DiscreteSurface& surface);

struct RunSummary {
  int steps = 0;
  double final_time = 0.0;
  double perimeter_initial = 0.0;
  double perimeter_final = 0.0;
  double max_volume_drift = 0.0;  ///< relative, over all components
  double dissipation_sum = 0.0;   ///< sum of distance^2 / (2h)
  double max_constraint_margin = 0.0;
  double max_el_residual = 0.0;
  bool perimeter_monotone = true;
};

RunSummary summarize(const FlowDiagnostics& rows);

struct ManifestInput {
  FlowConfig config;
  std::string command;
  std::map<std::string, std::string> input_digests;
  int exit_status = 0;
  std::string status;
  std::string message;
  RunSummary summary;
  std::string diagnostics_digest;
};

std::string manifest_json(const ManifestInput& m);

std::string tool_version();

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace flatflow
