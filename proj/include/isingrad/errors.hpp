#pragma once

#include <stdexcept>
#include <string>

namespace isingrad {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: wrong lengths, out-of-range indices, bad flags.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Request exceeds a size cap (basis enumeration, dense propagation).
class ResourceError : public Error {
 public:
  using Error::Error;
};

/// Parameters outside the regime where the physical model holds (e.g. beta >= 1).
class ModelValidityError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the mathematical domain of a function.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Evaluation exactly at a pole; the message names the resonance.
class PoleError : public DomainError {
 public:
  using DomainError::DomainError;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Adaptive step size collapsed below the floor or the step budget ran out.
class StiffnessError : public NumericalError {
 public:
  StiffnessError(const std::string& what, double tau, double step,
                 long accepted, long rejected)
      : NumericalError(what), tau_(tau), step_(step), accepted_(accepted),
        rejected_(rejected) {}

  double tau() const { return tau_; }
  double step() const { return step_; }
  long accepted() const { return accepted_; }
  long rejected() const { return rejected_; }

 private:
  double tau_;
  double step_;
  long accepted_;
  long rejected_;
};

}  // namespace isingrad
