#include "cavlab/cli/manifest.hpp"

#include <openssl/evp.h>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "cavlab/errors.hpp"

#ifndef CAVLAB_VERSION
#define CAVLAB_VERSION "0.0.0"
#endif

namespace cavlab::cli {

const char* artifact_version() { return CAVLAB_VERSION; }

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw InvalidArgument("SHA-256 computation failed");
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return os.str();
}

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return sha256_hex(buf.str());
}

json to_json(const RunManifest& m) {
  json j;
  j["artifact"] = m.artifact;
  j["version"] = m.version;
  j["command"] = m.command;
  j["config"] = m.config;
  j["dressed"] = m.dressed;
  j["certifications"] = m.certifications;
  j["summary"] = m.summary;
  j["wall_clock_seconds"] = m.wall_clock_seconds;
  json outs = json::array();
  for (const auto& o : m.outputs) outs.push_back({{"file", o.file}, {"sha256", o.sha256}});
  j["outputs"] = outs;
  return j;
}

RunManifest manifest_from_json(const json& j) {
  try {
    RunManifest m;
    m.artifact = j.at("artifact").get<std::string>();
    m.version = j.at("version").get<std::string>();
    m.command = j.at("command").get<std::string>();
    m.config = j.at("config");
    m.dressed = j.value("dressed", json::array());
    m.certifications = j.value("certifications", json::array());
    m.summary = j.value("summary", json::object());
    m.wall_clock_seconds = j.value("wall_clock_seconds", 0.0);
    for (const auto& o : j.at("outputs")) m.outputs.push_back({o.at("file").get<std::string>(), o.at("sha256").get<std::string>()});
    return m;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed manifest: ") + e.what());
  }
}

void write_manifest(const RunManifest& m, const std::string& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream out(std::filesystem::path(dir) / "manifest.json");
  if (!out) throw InvalidArgument("cannot write manifest into " + dir);
  out << to_json(m).dump(2) << "\n";
}

RunManifest read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open manifest " + path);
  try {
    return manifest_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw ConfigError("manifest " + path + " is not valid JSON: " + e.what());
  }
}

}  // namespace cavlab::cli
