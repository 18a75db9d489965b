#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "cavlab/cli/config.hpp"
#include "cavlab/cli/manifest.hpp"

namespace cavlab::cli {

/// Names accepted by run_command, in help order.
const std::vector<std::string>& command_names();

/// Runs one command with a resolved configuration. Human-readable output goes
/// to `out`; files and manifest.json go into the resolved output directory.
/// Returns the manifest that was written (params writes files only when an
/// output directory is configured). Throws cavlab::Error subclasses.
RunManifest run_command(const std::string& name, const RunConfig& cfg, std::ostream& out);

struct RerunReport {
  bool identical = false;
  std::vector<std::string> mismatched;
  std::string output_dir;
};

/// Re-executes the command recorded in a manifest into `output_dir` (empty:
/// <original>_rerun) and compares the output digests.
RerunReport rerun(const std::string& manifest_path, const std::string& output_dir, std::ostream& out);

/// Machine-readable error object written to stderr by the executable.
json error_json(const std::exception& e);
int exit_code_for(const std::exception& e);

}  // namespace cavlab::cli
