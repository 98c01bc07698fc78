#pragma once

#include <stdexcept>
#include <string>

namespace meta_audit {

/// Malformed or invalid input data (CSV rows, study records, config files).
/// Maps to CLI exit code 2.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numeric procedure failed to produce a result (non-convergence,
/// overflow, exhausted generation budget). Maps to CLI exit code 3.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace meta_audit
