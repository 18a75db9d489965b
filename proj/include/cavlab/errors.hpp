#pragma once

#include <stdexcept>
#include <string>

namespace cavlab {

// Error categories map one-to-one onto CLI exit codes.
enum class ErrorKind { invalid_argument = 1, config = 2, convergence = 3, grid_support = 4 };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }
  int exit_code() const noexcept { return static_cast<int>(kind_); }

 private:
  ErrorKind kind_;
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what) : Error(ErrorKind::invalid_argument, what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::config, what) {}
};

class ConvergenceError : public Error {
 public:
  explicit ConvergenceError(const std::string& what) : Error(ErrorKind::convergence, what) {}
};

class GridSupportError : public Error {
 public:
  GridSupportError(const std::string& what, double required_extent)
      : Error(ErrorKind::grid_support, what), required_extent_(required_extent) {}
  double required_extent() const noexcept { return required_extent_; }

 private:
  double required_extent_;
};

const char* to_string(ErrorKind kind) noexcept;

}  // namespace cavlab
