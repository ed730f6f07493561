#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace popdyn {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// A state or allocation row violates a structural invariant (simplex, shape).
class InvalidState : public Error {
 public:
  using Error::Error;
};

// A learner has total user mass below the empty threshold.
class EmptyLearner : public Error {
 public:
  EmptyLearner(int learner, const std::string& what)
      : Error(what), learner_(learner) {}
  int learner() const { return learner_; }

 private:
  int learner_;
};

class NumericUnderflow : public Error {
 public:
  using Error::Error;
};

class ConvergenceFailure : public Error {
 public:
  using Error::Error;
};

// Total risk increased across a step by more than the allowed tolerance.
class MonotonicityViolation : public Error {
 public:
  MonotonicityViolation(int step, double before, double after,
                        const std::string& what)
      : Error(what), step_(step), before_(before), after_(after) {}
  int step() const { return step_; }
  double before() const { return before_; }
  double after() const { return after_; }

 private:
  int step_;
  double before_;
  double after_;
};

class BudgetExceeded : public Error {
 public:
  BudgetExceeded(double required, const std::string& what)
      : Error(what), required_(required) {}
  double required() const { return required_; }

 private:
  double required_;
};

class CannotSplit : public Error {
 public:
  using Error::Error;
};

}  // namespace popdyn
