#pragma once

#include <stdexcept>
#include <string>

namespace activeuwb {

/// Tag coincides with an anchor, so a range direction is undefined.
class DegenerateGeometry : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// H^T H is numerically singular at the requested tag position.
class SingularGeometry : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Loss extrema collapse (l_max - l_min too small to normalize).
class DegenerateDomain : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Too many Monte Carlo trials failed to converge.
class EstimationFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ShapeMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A training loss became non-finite.
class NumericalDivergence : public std::runtime_error {
 public:
  NumericalDivergence(const std::string& what, long step)
      : std::runtime_error(what + " (update " + std::to_string(step) + ")"), step_(step) {}

  long step() const noexcept { return step_; }

 private:
  long step_;
};

class EmptyTrace : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace activeuwb
