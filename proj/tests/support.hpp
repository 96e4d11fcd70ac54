#pragma once

// Independent reference implementations used as test oracles. Nothing here
// shares code with the library beyond ek::Rational.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "ek/rational.hpp"

namespace oracle {

inline std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % m);
}

inline std::uint64_t powmod(std::uint64_t a, std::uint64_t e, std::uint64_t m) {
  std::uint64_t r = 1 % m;
  a %= m;
  while (e) {
    if (e & 1) r = mulmod(r, a, m);
    a = mulmod(a, a, m);
    e >>= 1;
  }
  return r;
}

// Deterministic Miller-Rabin for 64-bit n.
inline bool miller_rabin(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t p : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37}) {
    if (n % p == 0) return n == p;
  }
  std::uint64_t d = n - 1;
  int s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  for (std::uint64_t a : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37}) {
    std::uint64_t x = powmod(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int r = 1; r < s; ++r) {
      x = mulmod(x, x, n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

inline bool trial_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

inline std::uint64_t trial_pi(std::uint64_t x) {
  std::uint64_t c = 0;
  for (std::uint64_t n = 2; n <= x; ++n) c += trial_prime(n);
  return c;
}

// Distinct prime factors by trial division, optionally only those <= z.
inline unsigned trial_omega(std::uint64_t n, std::uint64_t z = UINT64_MAX) {
  unsigned w = 0;
  for (std::uint64_t d = 2; d * d <= n; ++d) {
    if (n % d == 0) {
      if (d <= z) ++w;
      while (n % d == 0) n /= d;
    }
  }
  if (n > 1 && n <= z) ++w;
  return w;
}

inline std::uint64_t trial_spf(std::uint64_t n) {
  for (std::uint64_t d = 2; d * d <= n; ++d)
    if (n % d == 0) return d;
  return n;
}

inline std::vector<std::uint64_t> small_primes(std::uint64_t z) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t n = 2; n <= z; ++n)
    if (trial_prime(n)) out.push_back(n);
  return out;
}

inline std::uint64_t gcd(std::uint64_t a, std::uint64_t b) {
  while (b) {
    a %= b;
    std::swap(a, b);
  }
  return a;
}

// Long-double naive sum of (v - c)^k.
inline long double naive_moment(const std::vector<double>& v, long double c, unsigned k) {
  long double s = 0;
  for (double a : v) s += std::pow(static_cast<long double>(a) - c, static_cast<int>(k));
  return s;
}

// Phi by midpoint Riemann sum of the normal density from -12.
inline double riemann_phi(double t, int steps = 10'000'000) {
  const long double lo = -12.0L;
  if (t <= lo) return 0.0;
  const long double h = (static_cast<long double>(t) - lo) / steps;
  long double s = 0;
  for (int i = 0; i < steps; ++i) {
    const long double u = lo + (i + 0.5L) * h;
    s += std::exp(-0.5L * u * u);
  }
  return static_cast<double>(s * h / std::sqrt(2.0L * 3.14159265358979323846264338327950288L));
}

}  // namespace oracle
