#pragma once

#include <string>
#include <vector>

#include "cavlab/cli/config.hpp"

namespace cavlab::cli {

/// Lower-case hex SHA-256 of a byte string / of a file's contents.
std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::string& path);

struct OutputDigest {
  std::string file;  // relative to the output directory
  std::string sha256;
  bool operator==(const OutputDigest&) const = default;
};

struct RunManifest {
  std::string artifact = "cavlab";
  std::string version;
  std::string command;
  json config;  // fully resolved RunConfig
  json dressed = json::array();
  json certifications = json::array();
  json summary = json::object();
  double wall_clock_seconds = 0.0;
  std::vector<OutputDigest> outputs;
};

json to_json(const RunManifest& m);
RunManifest manifest_from_json(const json& j);
/// Writes manifest.json into dir.
void write_manifest(const RunManifest& m, const std::string& dir);
RunManifest read_manifest(const std::string& path);

/// Version string compiled into the library.
const char* artifact_version();

}  // namespace cavlab::cli
