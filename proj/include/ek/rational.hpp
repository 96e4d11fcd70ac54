#pragma once

#include <cstdint>
#include <string>

#include <gmpxx.h>

namespace ek {

using Rational = mpq_class;
using BigInt = mpz_class;

inline BigInt to_bigint(std::uint64_t v) {
  BigInt z;
  mpz_import(z.get_mpz_t(), 1, -1, sizeof v, 0, 0, &v);
  return z;
}

inline BigInt to_bigint(__int128 v) {
  const bool neg = v < 0;
  unsigned __int128 u = neg ? static_cast<unsigned __int128>(-(v + 1)) + 1 : static_cast<unsigned __int128>(v);
  std::uint64_t words[2] = {static_cast<std::uint64_t>(u), static_cast<std::uint64_t>(u >> 64)};
  BigInt z;
  mpz_import(z.get_mpz_t(), 2, -1, sizeof(std::uint64_t), 0, 0, words);
  if (neg) z = -z;
  return z;
}

inline Rational to_rational(std::int64_t v) {
  return Rational(to_bigint(static_cast<__int128>(v)));
}

inline Rational to_rational(std::uint64_t v) { return Rational(to_bigint(v)); }

inline Rational ratio(std::int64_t num, std::uint64_t den) {
  Rational q(to_bigint(static_cast<__int128>(num)), to_bigint(den));
  q.canonicalize();
  return q;
}

inline Rational pow(const Rational& base, unsigned exponent) {
  Rational out;
  mpz_pow_ui(out.get_num_mpz_t(), base.get_num_mpz_t(), exponent);
  mpz_pow_ui(out.get_den_mpz_t(), base.get_den_mpz_t(), exponent);
  return out;  // already canonical: gcd(num^e, den^e) = 1
}

inline Rational abs(const Rational& q) { return q < 0 ? Rational(-q) : q; }

inline double to_double(const Rational& q) { return q.get_d(); }

inline std::string to_string(const Rational& q) { return q.get_str(); }

}  // namespace ek
