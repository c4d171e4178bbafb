#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace ocifuse {

/// A problem instance violates one or more structural preconditions.
class InvalidProblemError : public std::invalid_argument {
 public:
  explicit InvalidProblemError(std::vector<std::string> violations);

  const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::vector<std::string> violations_;
};

/// The rank condition for feasibility does not hold; no gain satisfies the
/// unbiasedness and consistency constraints.
class InfeasibleProblemError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The conic backend returned no certificate, or its output could not be
/// turned into a valid gain.
class SolverFailureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ocifuse
