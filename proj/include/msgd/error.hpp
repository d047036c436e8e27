#ifndef MSGD_ERROR_HPP
#define MSGD_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace msgd {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: bad configuration values, unreadable or malformed files.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A numerical precondition failed or an algorithm did not converge.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class RankDeficientError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NonConvergenceError : public NumericalError {
 public:
  NonConvergenceError(const std::string& what, std::size_t iterations)
      : NumericalError(what + " (after " + std::to_string(iterations) + " iterations)"),
        iterations_(iterations) {}

  std::size_t iterations() const noexcept { return iterations_; }

 private:
  std::size_t iterations_;
};

class StepTooLargeError : public NumericalError {
 public:
  StepTooLargeError(double alpha, double l_g)
      : NumericalError("step size " + std::to_string(alpha) +
                       " must be below 1/L_g = " + std::to_string(1.0 / l_g) +
                       " (L_g = " + std::to_string(l_g) + ")"),
        alpha_(alpha),
        l_g_(l_g) {}

  double alpha() const noexcept { return alpha_; }
  double l_g() const noexcept { return l_g_; }

 private:
  double alpha_;
  double l_g_;
};

}  // namespace msgd

#endif  // MSGD_ERROR_HPP
