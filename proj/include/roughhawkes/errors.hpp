#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace roughhawkes {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the documented domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// An iterative numerical method did not reach its tolerance.
/// `achieved()` carries the best error estimate that was reached.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double achieved)
      : Error(what), achieved_(achieved) {}
  double achieved() const noexcept { return achieved_; }

 private:
  double achieved_;
};

/// Series evaluation whose rounding/truncation bound exceeds the target accuracy.
class PrecisionLoss : public Error {
 public:
  PrecisionLoss(const std::string& what, double relative_bound)
      : Error(what), relative_bound_(relative_bound) {}
  double relative_bound() const noexcept { return relative_bound_; }

 private:
  double relative_bound_;
};

/// A simulated path hit the per-path event cap. The partial path is discarded.
class BudgetExceeded : public Error {
 public:
  BudgetExceeded(const std::string& what, std::size_t events)
      : Error(what), events_(events) {}
  std::size_t events() const noexcept { return events_; }

 private:
  std::size_t events_;
};

}  // namespace roughhawkes
