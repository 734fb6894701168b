#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace fowler {

/// Raised when a configuration document or argument is invalid. `key` names
/// the offending entry so callers can report it verbatim.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string key, const std::string& what)
      : std::invalid_argument(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}

  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

/// A computation produced non-finite values or failed to converge.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what, double estimate = 0.0)
      : std::runtime_error(what), estimate_(estimate) {}

  /// Achieved error estimate (quadrature) or offending value, when known.
  double estimate() const noexcept { return estimate_; }

 private:
  double estimate_;
};

}  // namespace fowler
