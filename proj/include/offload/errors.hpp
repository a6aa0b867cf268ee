#ifndef OFFLOAD_ERRORS_HPP
#define OFFLOAD_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace offload {

// Base class for everything this library throws on purpose.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed input: bad scenario fields, probabilities that do not sum to one,
// policies outside [0,1], unparsable files. CLI maps these to exit code 2.
struct ValidationError : Error {
  using Error::Error;
};

// A policy and a support distribution of different lengths were combined.
struct AlignmentError : ValidationError {
  using ValidationError::ValidationError;
};

// Requested work exceeds a configured cap (lattice size, sample budget).
struct BudgetError : ValidationError {
  using ValidationError::ValidationError;
};

// The stationary system is overloaded: f_per - lambda * E[pi L] <= 0.
// CLI maps these (and DegeneratePolicyError) to exit code 3.
struct FeasibilityError : Error {
  using Error::Error;
};

// Nobody offloads, so the per-job bandwidth f_alloc is undefined.
struct DegeneratePolicyError : Error {
  using Error::Error;
};

}  // namespace offload

#endif  // OFFLOAD_ERRORS_HPP
