#pragma once

#include <string>
#include <vector>

namespace cavlab {

/// A non-fatal condition noticed while building or running something
/// (non-power-of-two transform sizes, wavefunction tails touching the grid
/// edge, coupling far outside the single-mode regime, ...).
struct Diagnostic {
  std::string code;
  std::string message;
};

/// Records a diagnostic on the calling thread. When no capture is active the
/// message goes to stderr unless quieted with CAVLAB_QUIET=1.
void warn(std::string code, std::string message);

/// RAII capture of diagnostics emitted on this thread. Captures nest; the
/// innermost one receives the messages.
class DiagnosticCapture {
 public:
  DiagnosticCapture();
  ~DiagnosticCapture();
  DiagnosticCapture(const DiagnosticCapture&) = delete;
  DiagnosticCapture& operator=(const DiagnosticCapture&) = delete;

  const std::vector<Diagnostic>& entries() const { return entries_; }
  bool contains(const std::string& code) const;

 private:
  friend void warn(std::string, std::string);
  std::vector<Diagnostic> entries_;
  DiagnosticCapture* previous_;
};

}  // namespace cavlab
