#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace nhft {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};

class Unsupported : public Error {
 public:
  using Error::Error;
};

/// QR iteration hit its sweep cap, or eigenvector residuals stayed above tolerance.
class NonConvergence : public Error {
 public:
  NonConvergence(const std::string& what, std::vector<std::size_t> failed)
      : Error(what), failed_indices(std::move(failed)) {}
  std::vector<std::size_t> failed_indices;
};

class SingularMatrix : public Error {
 public:
  SingularMatrix(const std::string& what, double condition)
      : Error(what), condition_estimate(condition) {}
  double condition_estimate;
};

class AmbiguousPairing : public Error {
 public:
  using Error::Error;
};

class DefectiveSpectrum : public Error {
 public:
  using Error::Error;
};

class DefectiveState : public Error {
 public:
  using Error::Error;
};

class ConstructionMismatch : public Error {
 public:
  ConstructionMismatch(const std::string& what, double deviation)
      : Error(what), deviation(deviation) {}
  double deviation;
};

class ZeroNorm : public Error {
 public:
  using Error::Error;
};

class RouteMismatch : public Error {
 public:
  RouteMismatch(const std::string& what, double deviation)
      : Error(what), deviation(deviation) {}
  double deviation;
};

class AtCriticalPoint : public Error {
 public:
  AtCriticalPoint(const std::string& what, double critical)
      : Error(what), critical_lambda(critical) {}
  double critical_lambda;
};

class TrackingAmbiguous : public Error {
 public:
  using Error::Error;
};

class StepTooLarge : public Error {
 public:
  StepTooLarge(const std::string& what, double estimate)
      : Error(what), error_estimate(estimate) {}
  double error_estimate;
};

class InsufficientPoints : public Error {
 public:
  using Error::Error;
};

class NonDecayingIntegrand : public Error {
 public:
  using Error::Error;
};

/// Quadrature did not reach the requested tolerance; carries the best estimate.
class NotConverged : public Error {
 public:
  NotConverged(const std::string& what, std::complex<double> best, double error)
      : Error(what), best_estimate(best), error_estimate(error) {}
  std::complex<double> best_estimate;
  double error_estimate;
};

class DomainMismatch : public Error {
 public:
  using Error::Error;
};

}  // namespace nhft
