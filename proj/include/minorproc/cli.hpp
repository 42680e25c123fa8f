#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "minorproc/montecarlo.hpp"

namespace minorproc::cli {

inline constexpr const char* artifact_version = "0.1.0";

// Strict JSON config: unknown keys and type errors throw std::invalid_argument with the
// key path ("config.offsets[2]: expected an integer").
ExperimentConfig config_from_json(const nlohmann::json& j, const std::string& path = "config");
nlohmann::json config_to_json(const ExperimentConfig& c);
ExperimentConfig parse_config_file(const std::string& file);

// Shortest decimal that reads back to the same double; "nan"/"inf"/"-inf" otherwise.
std::string format_double(double x);

// CSV with header experiment,offset,bin_left,bin_right,density_empirical,density_theoretical,
// one row per bin in entry order.
std::string result_csv(const ExperimentResult& r);
// Summary: config echo, KS per entry, moments, failure counts, scalar summaries.
// Excludes wall time and worker count so it is reproducible byte for byte.
nlohmann::json result_json(const ExperimentResult& r);
std::string dump_json(const nlohmann::json& j);

std::string sha256_hex(const std::string& bytes);

struct RunManifest {
  ExperimentConfig config;
  std::vector<std::string> overrides;  // config-file keys replaced by flags
  std::string config_file;
  int workers = 1;
  double wall_seconds = 0.0;
  std::map<std::string, std::string> digests;  // file name -> sha256
  std::vector<std::string> command_line;
};
nlohmann::json manifest_json(const RunManifest& m);

struct EmitOptions {
  std::string directory = ".";
  std::string prefix;  // default: experiment kind
  bool csv = true;
  bool json = true;
};

// Writes <prefix>.csv, <prefix>.json and <prefix>.manifest.json; fills the digests.
// Returns the paths written.
std::vector<std::string> emit(const ExperimentResult& r, const EmitOptions& options, RunManifest& manifest);

// The command-line front end. Exit codes: 0 success, 1 usage or validation error,
// 3 replica-failure budget exceeded (outputs are still written).
int run(int argc, const char* const* argv);

}  // namespace minorproc::cli
