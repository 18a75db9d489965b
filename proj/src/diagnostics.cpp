#include "cavlab/diagnostics.hpp"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <iostream>

#include "cavlab/errors.hpp"

namespace cavlab {

namespace {
thread_local DiagnosticCapture* active_capture = nullptr;

bool quiet() {
  const char* env = std::getenv("CAVLAB_QUIET");
  return env != nullptr && std::strcmp(env, "0") != 0;
}
}  // namespace

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid_argument";
    case ErrorKind::config: return "config";
    case ErrorKind::convergence: return "convergence";
    case ErrorKind::grid_support: return "grid_support";
  }
  return "unknown";
}

void warn(std::string code, std::string message) {
  if (active_capture != nullptr) {
    active_capture->entries_.push_back({std::move(code), std::move(message)});
    return;
  }
  if (!quiet()) std::cerr << "warning [" << code << "]: " << message << '\n';
}

DiagnosticCapture::DiagnosticCapture() : previous_(active_capture) { active_capture = this; }

DiagnosticCapture::~DiagnosticCapture() { active_capture = previous_; }

bool DiagnosticCapture::contains(const std::string& code) const {
  return std::any_of(entries_.begin(), entries_.end(),
                     [&](const Diagnostic& d) { return d.code == code; });
}

}  // namespace cavlab
