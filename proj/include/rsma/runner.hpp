#pragma once

#include <string>

#include "rsma/config.hpp"

namespace rsma {

/// CSV header row of each experiment.
std::string_view csv_header(ExperimentKind kind);

/// Runs the experiment and renders its CSV (header included, LF endings).
std::string render_csv(const SimConfig& cfg);

/// Writes `contents` to `path` through a temporary file and a rename, so the
/// destination either keeps its old contents or receives the complete file.
void write_file_atomically(const std::string& path, const std::string& contents);

struct RunSummary {
  std::string experiment;
  long long drops = 0;
  double wall_seconds = 0.0;
  std::string output_path;
};

RunSummary run(const SimConfig& cfg);

/// Process exit code for an exception escaping run(): 2 configuration,
/// 3 numerical, 4 I/O.
int exit_code_for(const std::exception& e);

}  // namespace rsma
