#pragma once

#include <stdexcept>
#include <string>

namespace bellsim {

/// Malformed input: bad scenario file, mislabeled settings, out-of-range parameters.
/// `field` names the offending config path when one exists.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& message, std::string field = {})
      : std::runtime_error(field.empty() ? message : field + ": " + message),
        field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// A probability table that breaks normalization or range; indicates an upstream engine bug.
class InvalidDistribution : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Numerical breakdown during a run (norm growth, ledger breach).
class NumericalFault : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace bellsim
