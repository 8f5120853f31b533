#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>

namespace greenwave {

/// Base for every violation of a modelling assumption or contract.
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Signal clocks in a configuration the controller cannot produce.
class InvalidStateError : public ModelError {
 public:
  using ModelError::ModelError;
};

/// Negative rate or queue content handed to a pure model function.
class DomainError : public ModelError {
 public:
  using ModelError::ModelError;
};

/// A downstream artery queue reached the upstream intersection (L - x*l <= 0).
class BlockingViolation : public ModelError {
 public:
  using ModelError::ModelError;
};

/// Flow bursts overtook each other or a front arrived out of order.
class AssumptionViolation : public ModelError {
 public:
  using ModelError::ModelError;
};

/// Event-time derivative with a vanishing denominator.
class DegenerateEventError : public ModelError {
 public:
  using ModelError::ModelError;
};

/// Malformed derived data (NEP records, histories).
class DataError : public ModelError {
 public:
  using ModelError::ModelError;
};

/// A replication aborted; wraps the original diagnostic with its seed.
class PathFailure : public ModelError {
 public:
  PathFailure(std::uint64_t seed, const std::string& message)
      : ModelError("path with seed " + std::to_string(seed) + " failed: " + message), seed_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }

 private:
  std::uint64_t seed_;
};

/// Scenario file problems. `field()` names the offending JSON path, or the
/// violated invariant for semantic errors.
class ScenarioError : public std::runtime_error {
 public:
  ScenarioError(std::string field, const std::string& message)
      : std::runtime_error(field.empty() ? message : field + ": " + message),
        field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace greenwave
