#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace cdopt {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shape mismatch or otherwise invalid input.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// A linear solve or factorization failed.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// A requested path needs a contract the caller did not supply.
class CapabilityError : public Error {
 public:
  using Error::Error;
};

/// The constraint Jacobian is rank deficient (LICQ fails).
class DegeneracyError : public Error {
 public:
  DegeneracyError(const std::string& what, double sigma_min)
      : Error(what), sigma_min_(sigma_min) {}
  double sigma_min() const { return sigma_min_; }

 private:
  double sigma_min_;
};

/// An iteration ran out of budget; carries the residual history.
class NonConvergenceError : public Error {
 public:
  NonConvergenceError(const std::string& what, std::vector<double> trace)
      : Error(what), trace_(std::move(trace)) {}
  const std::vector<double>& residual_trace() const { return trace_; }

 private:
  std::vector<double> trace_;
};

/// Feasibility grew on consecutive operator applications.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, std::vector<double> trace)
      : Error(what), trace_(std::move(trace)) {}
  const std::vector<double>& residual_trace() const { return trace_; }

 private:
  std::vector<double> trace_;
};

}  // namespace cdopt
