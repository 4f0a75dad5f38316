#pragma once

#include <stdexcept>
#include <string>

namespace homoclinic {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller broke an operation's documented precondition.
class PreconditionViolation : public Error {
 public:
  using Error::Error;
};

/// Evaluation requested at (or within the machine guard of) the singularity.
class SingularityHit : public Error {
 public:
  using Error::Error;
};
using SingularityProximity = SingularityHit;

/// A numerical hypothesis check failed; `margin` is the offending value.
class HypothesisViolation : public Error {
 public:
  HypothesisViolation(const std::string& what, double margin)
      : Error(what), margin_(margin) {}
  double margin() const noexcept { return margin_; }

 private:
  double margin_;
};

class ShiftOutOfRange : public Error {
 public:
  using Error::Error;
};

class ZeroFunction : public Error {
 public:
  using Error::Error;
};

class WindowOutOfDomain : public Error {
 public:
  using Error::Error;
};

class InfeasibleGuess : public Error {
 public:
  using Error::Error;
};

class OverlappingBumps : public Error {
 public:
  using Error::Error;
};

/// Descent collapsed onto the trivial critical point u = 0.
class ConvergedToZero : public Error {
 public:
  using Error::Error;
};

class MaxItersExceeded : public Error {
 public:
  using Error::Error;
};

class NoSolutionFound : public Error {
 public:
  using Error::Error;
};

/// Malformed run configuration or trajectory file.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace homoclinic
