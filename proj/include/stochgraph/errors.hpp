#pragma once

#include <stdexcept>
#include <string>

namespace stochgraph {

/// Malformed instance: bad identifiers, probabilities, or metric.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operation called outside its domain (empty set, odd matching, zero-mass event, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Refusal because a configured budget (enumeration cap) would be exceeded.
class BudgetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A checked mathematical invariant failed at runtime.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace stochgraph
