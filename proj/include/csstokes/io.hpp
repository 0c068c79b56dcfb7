#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "csstokes/diagnostics.hpp"
#include "csstokes/model.hpp"

namespace csstokes {

struct RunState;

/// Reads a flat `key = value` file. Blank lines and `#` comments are ignored.
/// Unknown keys, duplicates, missing required keys and constraint violations
/// throw ConfigError with the key and line number.
SimConfig parse_config(const std::filesystem::path& path);
SimConfig parse_config_text(const std::string& text, const std::string& source = "<config>");
/// Canonical `key = value` text for a config; parse_config_text(config_echo(c)) == c.
std::string config_echo(const SimConfig& config);

/// Column names of the time series, in file order.
const std::vector<std::string>& timeseries_columns();
void write_timeseries(std::span<const DiagnosticsRecord> records, const std::filesystem::path& path);
std::string format_timeseries(std::span<const DiagnosticsRecord> records);
std::vector<DiagnosticsRecord> read_timeseries(const std::filesystem::path& path);

/// Binary checkpoint: 8-byte magic "CSSCHK01", little-endian u64 header size,
/// JSON header (dimensions, step, config echo, array table), then the arrays
/// as little-endian IEEE-754 doubles.
void write_checkpoint(const std::filesystem::path& path, const SimConfig& config, const RunState& state);

struct CheckpointData {
    SimConfig config;
    std::string config_text;
    long step = 0;
    double time = 0.0;
    std::size_t particle_count = 0;
    int grid_n = 0;
};
/// Reads a checkpoint; `state` receives the restored run state.
CheckpointData read_checkpoint(const std::filesystem::path& path, RunState& state);

struct ArtifactEntry {
    std::string file;
    std::string sha256;
};

struct RunManifest {
    std::string config_text;
    std::string version;
    std::uint64_t seed = 0;
    std::string start_time;
    std::string end_time;
    std::vector<ArtifactEntry> artifacts;
};

std::string sha256_file(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const RunManifest& manifest);
std::string utc_timestamp();
const char* version_string();

}  // namespace csstokes
