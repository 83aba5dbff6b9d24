#pragma once

#include <stdexcept>
#include <string>

namespace skewlab {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the domain of a map or formula.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Family or model parameters violate a construction precondition.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// A finite digit stream was asked for more digits than it holds.
class DigitBudgetExhausted : public Error {
 public:
  DigitBudgetExhausted(std::size_t requested, std::size_t available)
      : Error("digit budget exhausted: requested " + std::to_string(requested) +
              " digits, stream holds " + std::to_string(available)),
        requested_(requested),
        available_(available) {}

  std::size_t requested() const noexcept { return requested_; }
  std::size_t available() const noexcept { return available_; }

 private:
  std::size_t requested_;
  std::size_t available_;
};

/// Itinerary not allowed by the transition structure of a Markov map.
class InadmissibleWord : public Error {
 public:
  using Error::Error;
};

class SingularityError : public Error {
 public:
  using Error::Error;
};

/// Iterative method stopped without meeting its tolerance.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : Error(what + " (residual " + std::to_string(residual) + ")"), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

class ResolutionOverflow : public Error {
 public:
  using Error::Error;
};

/// Pressure function stays negative on (0, t_max].
class NoPositiveZero : public Error {
 public:
  using Error::Error;
};

/// Pressure function does not decrease at t = 0.
class NegativeSlopeViolation : public Error {
 public:
  using Error::Error;
};

class BracketFailure : public Error {
 public:
  using Error::Error;
};

class NoZeroInRange : public Error {
 public:
  using Error::Error;
};

/// Stability-index row whose formula is not established.
class UnsupportedCase : public Error {
 public:
  using Error::Error;
};

/// The basin oracle could not decide a bisection midpoint, even with an enlarged budget.
class UndecidedBracket : public Error {
 public:
  UndecidedBracket(double lo, double hi)
      : Error("undecided basin label inside bracket [" + std::to_string(lo) + ", " +
              std::to_string(hi) + "]"),
        lo_(lo),
        hi_(hi) {}
  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }

 private:
  double lo_;
  double hi_;
};

/// Empirical estimator could not produce enough usable points.
class EstimationError : public Error {
 public:
  using Error::Error;
};

}  // namespace skewlab
