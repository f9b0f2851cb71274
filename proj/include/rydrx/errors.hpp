#pragma once

#include <stdexcept>
#include <string>

namespace rydrx {

// Error taxonomy maps onto process exit codes: config/model -> 2, numeric -> 3.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

// Invalid user-supplied configuration: bad scenario files, out-of-range
// parameters, unknown keys, missing files.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error("config", what) {}
};

// Structurally invalid physical model: inconsistent drive graphs, forbidden
// transitions, systems with no dissipation.
class ModelError : public Error {
 public:
  explicit ModelError(const std::string& what) : Error("model", what) {}
};

// Numerical failure: singular solves, non-converged integration, degenerate fits.
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error("numeric", what) {}
};

}  // namespace rydrx
