// error.hpp
#ifndef QLGS_ERROR_HPP
#define QLGS_ERROR_HPP

#include <stdexcept>
#include <string>

namespace qlgs {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An operator or nonlinearity violates its structural invariants.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A scalar function returned a non-finite value.
class EvaluationError : public Error {
 public:
  EvaluationError(const std::string& what, double at)
      : Error(what + " (s = " + std::to_string(at) + ")"), at_(at) {}
  double at() const noexcept { return at_; }

 private:
  double at_;
};

/// Adaptive quadrature failed to converge on [lo, hi].
class QuadratureError : public Error {
 public:
  QuadratureError(double lo, double hi)
      : Error("quadrature did not converge on [" + std::to_string(lo) + ", " +
              std::to_string(hi) + "]"),
        lo_(lo),
        hi_(hi) {}
  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }

 private:
  double lo_, hi_;
};

class SeedRejected : public Error {
 public:
  using Error::Error;
};

}  // namespace qlgs

#endif  // QLGS_ERROR_HPP
