#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pinlab/errors.hpp"
#include "pinlab/serialize.hpp"

namespace pinlab {

inline constexpr const char* kToolName = "pinlab";
inline constexpr const char* kToolVersion = "1.0.0";

// Thrown by the sweep command when it stops before the grid is complete; the
// manifest on disk holds every finished point, so rerunning the same config
// resumes instead of recomputing.
struct SweepIncomplete : Error {
  using Error::Error;
};

// A fully validated experiment description.  Parsed from a JSON object whose
// keys are checked against the schema of the chosen command; unknown or
// inapplicable keys are rejected with the offending name.
struct ExperimentConfig {
  std::string command;
  double alpha = 1.5;         // inter-arrival tail exponent (1 is excluded)
  double tilde_alpha = 1.5;   // disorder stretch-law exponent (> 1)
  double beta = 0.0;          // disorder coupling (>= 0)
  double h = 0.0;             // pinning reward
  std::vector<double> h_grid;         // sweep: log-spaced rewards, >= 4
  std::int64_t N = 256;               // chain length, <= 65536
  std::int64_t replicas = 8;
  std::int64_t a_max = 64;            // contacts: distribution cap
  std::int64_t a_lo = 4, a_hi = 32;   // tail-fit: count window
  std::vector<std::int64_t> sizes = {10, 100, 1000};  // renewal-check
  std::int64_t horizon = 0;      // gap-law cache; 0 = smallest that fits
  std::int64_t hat_horizon = 4096;  // stretch-law cache for environments
  std::string construction = "A";   // environment family: "A" or "B"
  std::uint64_t seed = 1;
  std::map<std::string, double> tolerances;  // name -> positive bound override
  std::string out_dir = "out";
  std::int64_t limit_points = 0;  // sweep: stop after this many new points (0 = all)
  double fit_h_min = 0.0, fit_h_max = 0.0;  // exponent-fit window (0 = grid ends)

  // Not part of the JSON schema; set from flags / environment by the driver.
  int workers = 1;
  std::vector<std::string> check_filter;  // names enabled via --check (empty = all)
};

struct CheckResult {
  std::string name;
  bool pass = false;
  bool enforced = true;  // advisory checks are reported but never gate the exit
  double measured = 0.0;
  double bound = 0.0;
  double margin = 0.0;  // positive = pass with room to spare
};

struct ResultRecord {
  ExperimentConfig config;
  std::vector<CheckResult> checks;
  Json outputs;  // command-specific numeric results
  std::map<std::string, std::string> csv_files;  // file name -> body (LF, header)
  bool all_pass = true;  // over enforced checks only
  double wall_time_s = 0.0;
};

// Parses and schema-validates a JSON config; throws ConfigInvalid naming the
// offending key or value.
ExperimentConfig parse_config(const std::string& json_text);

// Identity of the numeric experiment (command, model parameters, seed); used
// to decide whether an on-disk sweep manifest belongs to this config.
// Excludes out_dir, workers, tolerances, fit window, and limit_points, none
// of which change the computed points.
std::uint64_t config_hash(const ExperimentConfig& cfg);

// Executes the command, writes <out>/record.json, <out>/*.csv and
// <out>/report.md, and returns the record.  Numeric outputs are fully
// determined by (config, seed) and independent of the worker count.  Throws
// SweepIncomplete when a limited sweep stops early (manifest already flushed).
ResultRecord run(const ExperimentConfig& cfg);

// Human-readable aggregation: one section per record, failing records and
// failing checks first, plus a flat CSV appendix of every check.
std::string emit_report(const std::vector<ResultRecord>& records);

Json record_to_json(const ResultRecord& rec);

}  // namespace pinlab
