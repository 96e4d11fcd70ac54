#pragma once

#include <stdexcept>

namespace ek {

// Argument outside a supported numeric range (e.g. sieve limit > 10^9).
struct bounds_error : std::out_of_range {
  using std::out_of_range::out_of_range;
};

// Argument violates a mathematical precondition (non-squarefree d, m not dividing R, ...).
struct domain_error : std::domain_error {
  using std::domain_error::domain_error;
};

// An enumeration would exceed its configured budget.
struct capacity_error : std::length_error {
  using std::length_error::length_error;
};

}  // namespace ek
