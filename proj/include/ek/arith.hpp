#pragma once

// Multiplicative helpers (phi, mu, tau) and exact gcd-class counting by
// inclusion-exclusion.

#include <cstdint>
#include <span>
#include <vector>

#include "ek/errors.hpp"

namespace ek {

struct PrimeFactor {
  std::uint64_t prime;
  unsigned exponent;
  friend bool operator==(const PrimeFactor&, const PrimeFactor&) = default;
};

/// Trial-division factorization; intended for moduli and radicals, not for
/// arbitrary 64-bit inputs.
inline std::vector<PrimeFactor> factorize(std::uint64_t n) {
  if (n == 0) throw domain_error("factorize: n must be >= 1");
  std::vector<PrimeFactor> out;
  for (std::uint64_t p = 2; p * p <= n; p += (p == 2 ? 1 : 2)) {
    if (n % p != 0) continue;
    unsigned e = 0;
    while (n % p == 0) {
      n /= p;
      ++e;
    }
    out.push_back({p, e});
  }
  if (n > 1) out.push_back({n, 1});
  return out;
}

inline bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  const auto f = factorize(n);
  return f.size() == 1 && f[0].exponent == 1;
}

inline bool is_squarefree(std::uint64_t n) {
  for (const auto& f : factorize(n))
    if (f.exponent > 1) return false;
  return true;
}

inline std::uint64_t euler_phi(std::uint64_t n) {
  std::uint64_t phi = n;
  for (const auto& f : factorize(n)) phi = phi / f.prime * (f.prime - 1);
  return phi;
}

inline int moebius(std::uint64_t n) {
  int mu = 1;
  for (const auto& f : factorize(n)) {
    if (f.exponent > 1) return 0;
    mu = -mu;
  }
  return mu;
}

inline std::uint64_t tau(std::uint64_t n) {
  std::uint64_t t = 1;
  for (const auto& f : factorize(n)) t *= f.exponent + 1;
  return t;
}

namespace detail {

// sum over subsets E of primes[from..] of (-1)^|E| floor(x / (base * prod E)),
// pruning once the running product exceeds x.
inline __int128 alternating_floor_sum(std::uint64_t x, std::span<const std::uint64_t> primes, std::size_t from,
                                      std::uint64_t base, int sign) {
  __int128 acc = sign * static_cast<__int128>(x / base);
  for (std::size_t j = from; j < primes.size(); ++j) {
    if (base > x / primes[j]) continue;
    acc += alternating_floor_sum(x, primes, j + 1, base * primes[j], -sign);
  }
  return acc;
}

}  // namespace detail

/// #{1 <= n <= x : gcd(n, R) = d} where R is the product of `primes` and d
/// the product of the subset selected by `d_mask`.
inline std::int64_t gcd_class_count(std::uint64_t x, std::span<const std::uint64_t> primes, std::uint64_t d_mask) {
  std::uint64_t d = 1;
  std::vector<std::uint64_t> rest;
  for (std::size_t i = 0; i < primes.size(); ++i) {
    if ((d_mask >> i) & 1) {
      if (d > x / primes[i]) return 0;
      d *= primes[i];
    } else {
      rest.push_back(primes[i]);
    }
  }
  return static_cast<std::int64_t>(detail::alternating_floor_sum(x, rest, 0, d, 1));
}

/// Exact #{n <= x : gcd(n, R) = d} for squarefree R and d | R.
inline std::int64_t count_in_gcd_class(std::uint64_t x, std::uint64_t R, std::uint64_t d) {
  if (R == 0 || d == 0 || R % d != 0) throw domain_error("count_in_gcd_class: d must divide R");
  const auto f = factorize(R);
  std::vector<std::uint64_t> primes;
  std::uint64_t mask = 0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f[i].exponent != 1) throw domain_error("count_in_gcd_class: R must be squarefree");
    primes.push_back(f[i].prime);
    if (d % f[i].prime == 0) mask |= std::uint64_t{1} << i;
  }
  return gcd_class_count(x, primes, mask);
}

}  // namespace ek
