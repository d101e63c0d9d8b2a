#pragma once

#include <stdexcept>
#include <string>

namespace mospa {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dimension mismatch, malformed measure, infeasible plan and similar.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Request exceeds a configured size bound (e.g. factorial enumeration).
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// Quadratic form that does not decompose across target blocks.
class UnsupportedMetric : public Error {
 public:
  using Error::Error;
};

class UnsupportedDimension : public Error {
 public:
  using Error::Error;
};

/// Cholesky failure or near-singular covariance.
class FactorizationError : public Error {
 public:
  using Error::Error;
};

/// Non-finite objective, solver breakdown.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Status attached to results that are still well defined but computed on
/// an estimate with coincident target blocks.
enum class EstimateStatus { kOk, kDegenerateEstimate };

}  // namespace mospa
