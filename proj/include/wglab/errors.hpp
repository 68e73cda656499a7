#pragma once

#include <stdexcept>
#include <string>

namespace wglab {

// Error taxonomy shared by every module. The CLI maps these to exit codes:
// PropertyFailure -> 2, everything else -> 1.

struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

struct CapacityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PrecisionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ValidationError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct ConsistencyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PropertyFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace wglab
