#pragma once

#include <limits>
#include <stdexcept>
#include <string>

namespace qgraph {

/// Malformed or inconsistent input (CLI exit code 2).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical target could not be met (CLI exit code 3). Carries the best
/// bound that was achieved, if any.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what,
                          double achieved = std::numeric_limits<double>::quiet_NaN())
      : std::runtime_error(what), achieved_(achieved) {}
  [[nodiscard]] double achieved_bound() const { return achieved_; }

 private:
  double achieved_;
};

/// Valid input that the requested algorithm does not handle (exit code 2).
class UnsupportedConfiguration : public InputError {
 public:
  using InputError::InputError;
};

}  // namespace qgraph
