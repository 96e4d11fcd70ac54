#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>

#include "ek/errors.hpp"
#include "ek/rational.hpp"

namespace ek {

// A multiplicative density h on squarefree integers, given by its values at
// primes. Only ever evaluated on squarefree arguments.
class Density {
 public:
  using Fn = std::function<Rational(std::uint64_t)>;

  Density(std::string name, Fn at_prime) : name_(std::move(name)), fn_(std::move(at_prime)) {}

  static Density unit() {
    return Density("unit", [](std::uint64_t) { return Rational(1); });
  }

  const std::string& name() const { return name_; }

  /// h(p), checked against 0 <= h(p) <= p.
  Rational at_prime(std::uint64_t p) const {
    Rational h = fn_(p);
    if (h < 0 || h > to_rational(p))
      throw domain_error("density " + name_ + ": h(" + std::to_string(p) + ") outside [0, p]");
    return h;
  }

  /// h(p) / p
  Rational ratio(std::uint64_t p) const { return at_prime(p) / to_rational(p); }

  Rational at_squarefree(std::span<const std::uint64_t> primes) const {
    Rational h = 1;
    for (auto p : primes) h *= at_prime(p);
    return h;
  }

 private:
  std::string name_;
  Fn fn_;
};

}  // namespace ek
