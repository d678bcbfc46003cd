#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace sdigs {

// Error taxonomy shared by the library and the CLI.
// Exit-code mapping: UsageError -> 1, DataError -> 2, NumericalError -> 3.

// Invalid arguments, flag combinations, or out-of-contract parameter values.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input data (files, manifests, image dimensions).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite values encountered during optimization; carries the parameter
// group the failure was detected in so the CLI can name it.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, std::string parameter_group)
      : std::runtime_error(what), parameter_group_(std::move(parameter_group)) {}
  const std::string& parameter_group() const { return parameter_group_; }

 private:
  std::string parameter_group_;
};

}  // namespace sdigs
