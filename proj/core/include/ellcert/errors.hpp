#pragma once

#include <stdexcept>
#include <string>

namespace ellcert {

// Base for every failure the library reports. Callers that only need a
// coarse success/failure split can catch this one type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Equality system (or stacked constraint matrix) has numerically dependent
// rows. The message names the redundant rows.
class RankDeficient : public Error {
 public:
  using Error::Error;
};

// Ellipsoid shape matrix is numerically singular.
class SingularShape : public Error {
 public:
  using Error::Error;
};

// The separation oracle produced a zero vector; no cut is possible.
class ZeroCutVector : public Error {
 public:
  using Error::Error;
};

// Iterative estimator hit its iteration cap before reaching tolerance.
class NonConvergence : public Error {
 public:
  using Error::Error;
};

// Corrective step requested while the largest singular value is still
// below the trigger threshold.
class NotTriggered : public Error {
 public:
  using Error::Error;
};

// Ellipsoid and certified enclosing ball do not intersect; the geometry
// inputs of the certificate are violated.
class EmptyIntersection : public Error {
 public:
  using Error::Error;
};

// Polytope has (numerically) no interior.
class EmptyInterior : public Error {
 public:
  using Error::Error;
};

// An LP used for certification diverges.
class Unbounded : public Error {
 public:
  using Error::Error;
};

// A matrix block that must be invertible (or full column rank) is not.
class SingularBlock : public Error {
 public:
  using Error::Error;
};

// Widened iteration budget has a nonpositive denominator: the widening
// coefficient is too large for the method to converge.
class Divergent : public Error {
 public:
  using Error::Error;
};

}  // namespace ellcert
