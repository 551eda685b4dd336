#pragma once

#include <stdexcept>
#include <string>

namespace dimsel {

/// Malformed or inconsistent input data (files, labels, pair requests).
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

/// A computation became degenerate or non-finite (zero reference energy,
/// diverged optimizer, unusable fit input).
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace dimsel
