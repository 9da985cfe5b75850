#pragma once

#include <stdexcept>
#include <string>

namespace popsize {

/// Base class for every failure raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class GridMismatch : public Error {
 public:
  using Error::Error;
};

/// Resource field violates m >= 0 or mean(m) > 0.
class NonPositiveResource : public Error {
 public:
  using Error::Error;
};

class NoConvergence : public Error {
 public:
  NoConvergence(const std::string& what, double last_residual)
      : Error(what), last_residual_(last_residual) {}
  double last_residual() const { return last_residual_; }

 private:
  double last_residual_;
};

/// The Newton iterate collapsed toward the trivial solution and the
/// principal eigenvalue confirms there is no positive steady state.
class ExtinctionDetected : public Error {
 public:
  ExtinctionDetected(const std::string& what, double lambda1)
      : Error(what), lambda1_(lambda1) {}
  double lambda1() const { return lambda1_; }

 private:
  double lambda1_;
};

class SingularSystem : public Error {
 public:
  SingularSystem(const std::string& what, double smallest_pivot)
      : Error(what), smallest_pivot_(smallest_pivot) {}
  double smallest_pivot() const { return smallest_pivot_; }

 private:
  double smallest_pivot_;
};

/// The linearized operator  mu*L + diag(m - 2 theta)  could not be inverted.
class SingularAdjoint : public SingularSystem {
 public:
  using SingularSystem::SingularSystem;
};

/// Zero-mean compatibility of a singular Neumann problem failed.
class GaugeViolation : public Error {
 public:
  using Error::Error;
};

class NonZeroMean : public Error {
 public:
  using Error::Error;
};

class InfeasibleBudget : public Error {
 public:
  using Error::Error;
};

class SweepTooCoarse : public Error {
 public:
  using Error::Error;
};

}  // namespace popsize
