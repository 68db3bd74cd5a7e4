#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qsec {

// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Two subspaces with different ambient dimensions were combined.
struct DimensionMismatch : Error {
  using Error::Error;
};

// Matrix shapes do not chain or do not match declared dimensions.
struct ShapeMismatch : Error {
  using Error::Error;
};

// Data width or sample count does not match the representation.
struct WidthMismatch : Error {
  using Error::Error;
};

// A map failed to carry a subspace into the declared codomain subspace.
struct NotInvariant : Error {
  using Error::Error;
};

struct NotStronglyConnected : Error {
  using Error::Error;
};

// Raised when an operation requires an acyclic quiver. Carries a witness
// cycle as a list of edge ids.
struct CyclicInput : Error {
  CyclicInput(const std::string& msg, std::vector<int> cycle)
      : Error(msg), witness_cycle(std::move(cycle)) {}
  std::vector<int> witness_cycle;
};

// Some vertices cannot be reached from the requested root.
struct Unreachable : Error {
  Unreachable(const std::string& msg, std::vector<int> missing)
      : Error(msg), vertices(std::move(missing)) {}
  std::vector<int> vertices;
};

struct PathCountOverflow : Error {
  using Error::Error;
};

struct NotCentred : Error {
  using Error::Error;
};

// The right-hand pencil matrix is not positive definite at tolerance.
// Carries a spectral condition estimate of the offending matrix.
struct NotPositiveDefinite : Error {
  NotPositiveDefinite(const std::string& msg, double cond)
      : Error(msg), condition_estimate(cond) {}
  double condition_estimate;
};

// PCA was requested against a trivial (zero-dimensional) space of sections.
struct ZeroSections : Error {
  using Error::Error;
};

struct ZeroVector : Error {
  using Error::Error;
};

// A constrained objective was evaluated at an infeasible point. Names the
// violated constraint.
struct Infeasible : Error {
  Infeasible(const std::string& msg, std::string which)
      : Error(msg), constraint(std::move(which)) {}
  std::string constraint;
};

// Malformed input file; the message carries position/field diagnostics.
struct ParseError : Error {
  using Error::Error;
};

}  // namespace qsec
