#pragma once

#include <stdexcept>
#include <string>

namespace catbox {

/// Base class for every fault raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Search-space definition rejected. `field()` is a JSON-path-like locator
/// such as "continuous[1].lower".
class SpaceError : public Error {
 public:
  SpaceError(std::string field, const std::string& message)
      : Error(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// A point does not belong to the search space it is used with.
class PointError : public Error {
 public:
  using Error::Error;
};

/// The regularized Gram matrix could not be factorized even after jitter
/// escalation.
class GramNotPd : public Error {
 public:
  explicit GramNotPd(double jitter)
      : Error("gram not PD (final jitter " + std::to_string(jitter) + ")"), jitter_(jitter) {}
  double jitter() const noexcept { return jitter_; }

 private:
  double jitter_;
};

/// An operation was called in a state where its precondition does not hold
/// (e.g. suggest on a campaign without observations).
class StateError : public Error {
 public:
  using Error::Error;
};

}  // namespace catbox
