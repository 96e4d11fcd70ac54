#pragma once

// Moments of omega over the natural numbers via the functions
//   f_p(n) = 1 - h(p)/p if p | n, -h(p)/p otherwise,   f_r = prod f_q^alpha,
// whose averages vanish unless r is square-full. Provides the exact
// gcd-class decomposition of sum_{n<=x} f_r(n), the local factors G and E,
// the Gaussian moment constants C_k, and the square-full main term.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "ek/arith.hpp"
#include "ek/density.hpp"
#include "ek/errors.hpp"
#include "ek/moment_report.hpp"
#include "ek/rational.hpp"
#include "ek/sieve.hpp"
#include "ek/summation.hpp"

namespace ek {

// r = prod q_i^alpha_i with distinct ascending primes q_i.
class PrimePowerProduct {
 public:
  PrimePowerProduct() = default;

  explicit PrimePowerProduct(std::vector<PrimeFactor> factors) : factors_(std::move(factors)) {
    for (std::size_t i = 0; i < factors_.size(); ++i) {
      if (factors_[i].exponent < 1) throw domain_error("PrimePowerProduct: exponents must be >= 1");
      if (factors_[i].prime < 2) throw domain_error("PrimePowerProduct: primes must be >= 2");
      if (i > 0 && factors_[i].prime <= factors_[i - 1].prime)
        throw domain_error("PrimePowerProduct: primes must be strictly increasing");
    }
  }

  /// Collects a tuple (p_1, ..., p_k) of primes into prod p_i.
  static PrimePowerProduct from_primes(std::span<const std::uint64_t> tuple) {
    std::vector<std::uint64_t> sorted(tuple.begin(), tuple.end());
    std::sort(sorted.begin(), sorted.end());
    std::vector<PrimeFactor> f;
    for (auto p : sorted) {
      if (!f.empty() && f.back().prime == p)
        ++f.back().exponent;
      else
        f.push_back({p, 1});
    }
    return PrimePowerProduct(std::move(f));
  }

  static PrimePowerProduct from_integer(std::uint64_t r) { return PrimePowerProduct(r == 1 ? std::vector<PrimeFactor>{} : factorize(r)); }

  const std::vector<PrimeFactor>& factors() const { return factors_; }
  std::size_t distinct() const { return factors_.size(); }

  /// k = sum of exponents.
  unsigned order() const {
    unsigned k = 0;
    for (const auto& f : factors_) k += f.exponent;
    return k;
  }

  std::vector<std::uint64_t> radical_primes() const {
    std::vector<std::uint64_t> out;
    for (const auto& f : factors_) out.push_back(f.prime);
    return out;
  }

  std::uint64_t radical() const {
    std::uint64_t R = 1;
    for (const auto& f : factors_) {
      if (R > UINT64_MAX / f.prime) throw capacity_error("radical exceeds 64 bits");
      R *= f.prime;
    }
    return R;
  }

  bool is_squarefull() const {
    return std::all_of(factors_.begin(), factors_.end(), [](const PrimeFactor& f) { return f.exponent >= 2; });
  }

 private:
  std::vector<PrimeFactor> factors_;
};

inline Rational f_p(std::uint64_t n, std::uint64_t p, const Density& h = Density::unit()) {
  const Rational rho = h.ratio(p);
  return n % p == 0 ? Rational(1 - rho) : Rational(-rho);
}

inline Rational f_r(std::uint64_t n, const PrimePowerProduct& r, const Density& h = Density::unit()) {
  Rational v = 1;
  for (const auto& q : r.factors()) v *= pow(f_p(n, q.prime, h), q.exponent);
  return v;
}

inline constexpr std::size_t kMaxDecompositionPrimes = 20;

/// sum_{n <= x} f_r(n) over the naturals, evaluated exactly as
/// sum_{d | R} f_r(d) #{n <= x : (n, R) = d}.
inline Rational sum_f_r_exact(std::uint64_t x, const PrimePowerProduct& r) {
  if (r.distinct() > kMaxDecompositionPrimes)
    throw capacity_error("sum_f_r_exact: more than 20 distinct primes");
  const auto primes = r.radical_primes();
  const std::size_t s = primes.size();
  // f_r(d) splits per prime into "q | d" and "q does not divide d" values
  std::vector<Rational> in(s), out(s);
  for (std::size_t i = 0; i < s; ++i) {
    const Rational inv = ratio(1, primes[i]);
    in[i] = pow(Rational(1 - inv), r.factors()[i].exponent);
    out[i] = pow(Rational(-inv), r.factors()[i].exponent);
  }
  Rational total = 0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << s); ++mask) {
    const std::int64_t count = gcd_class_count(x, primes, mask);
    if (count == 0) continue;
    Rational f = 1;
    for (std::size_t i = 0; i < s; ++i) f *= ((mask >> i) & 1) ? in[i] : out[i];
    total += f * to_rational(count);
  }
  return total;
}

namespace detail {

template <class T>
T power(const T& base, unsigned e) {
  T out = 1;
  for (unsigned i = 0; i < e; ++i) out *= base;
  return out;
}

template <class T>
T convert(const Rational& q) {
  if constexpr (std::is_same_v<T, Rational>)
    return q;
  else
    return static_cast<T>(q.get_d());
}

}  // namespace detail

/// Local factor of G at q^alpha, with rho = h(q)/q:
///   rho (1 - rho)^alpha + (-rho)^alpha (1 - rho).
template <class T>
T g_local(const T& rho, unsigned alpha) {
  const T one_minus = T(1) - rho;
  return rho * detail::power(one_minus, alpha) + detail::power(T(-rho), alpha) * one_minus;
}

/// G(r) = prod_{q^alpha || r} g_local(h(q)/q, alpha); zero unless r is square-full.
inline Rational G(const PrimePowerProduct& r, const Density& h = Density::unit()) {
  Rational v = 1;
  for (const auto& q : r.factors()) v *= g_local(h.ratio(q.prime), q.exponent);
  return v;
}

/// E(r, m) for m | R given as a bitmask over r's distinct primes.
inline Rational E_mask(const PrimePowerProduct& r, std::uint64_t m_mask, const Density& h = Density::unit()) {
  Rational v = 1;
  const auto& f = r.factors();
  for (std::size_t i = 0; i < f.size(); ++i) {
    const Rational rho = h.ratio(f[i].prime);
    const Rational neg = pow(Rational(-rho), f[i].exponent);
    if ((m_mask >> i) & 1)
      v *= pow(Rational(1 - rho), f[i].exponent) - neg;
    else
      v *= neg;
  }
  return v;
}

/// E(r, m) = prod_{q | m} [(1 - rho_q)^alpha - (-rho_q)^alpha] * prod_{q | R/m} (-rho_q)^alpha.
inline Rational E(const PrimePowerProduct& r, std::uint64_t m, const Density& h = Density::unit()) {
  if (m == 0) throw domain_error("E: m must divide R");
  std::uint64_t mask = 0;
  std::uint64_t rest = m;
  const auto& f = r.factors();
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (rest % f[i].prime == 0) {
      mask |= std::uint64_t{1} << i;
      rest /= f[i].prime;
    }
  }
  if (rest != 1) throw domain_error("E: m must divide R = rad(r)");
  return E_mask(r, mask, h);
}

// C_k = Gamma(k+1) / (2^{k/2} Gamma(k/2 + 1)).
struct GaussianMoment {
  unsigned k = 0;
  std::optional<Rational> exact;  // present for even k: k! / (2^{k/2} (k/2)!)
  double value = 0.0;
};

inline GaussianMoment gaussian_moment(unsigned k) {
  if (k < 1 || k > 64) throw bounds_error("gaussian_moment: k must lie in [1, 64]");
  GaussianMoment out{k, std::nullopt, 0.0};
  if (k % 2 == 0) {
    BigInt num, den, half;
    mpz_fac_ui(num.get_mpz_t(), k);
    mpz_fac_ui(half.get_mpz_t(), k / 2);
    mpz_ui_pow_ui(den.get_mpz_t(), 2, k / 2);
    Rational c(num, den * half);
    c.canonicalize();
    out.value = c.get_d();
    out.exact = std::move(c);
  } else {
    const double kd = k;
    out.value = std::exp(std::lgamma(kd + 1.0) - 0.5 * kd * std::log(2.0) - std::lgamma(0.5 * kd + 1.0));
  }
  return out;
}

class GaussianMomentTable {
 public:
  explicit GaussianMomentTable(unsigned k_max = 64) {
    if (k_max < 1 || k_max > 64) throw bounds_error("GaussianMomentTable: k_max must lie in [1, 64]");
    for (unsigned k = 1; k <= k_max; ++k) values_.push_back(gaussian_moment(k));
  }
  unsigned k_max() const { return static_cast<unsigned>(values_.size()); }
  const GaussianMoment& operator[](unsigned k) const {
    if (k < 1 || k > values_.size()) throw bounds_error("GaussianMomentTable: k out of range");
    return values_[k - 1];
  }

 private:
  std::vector<GaussianMoment> values_;
};

inline std::uint64_t binomial(std::uint64_t n, std::uint64_t r) {
  if (r > n) return 0;
  r = std::min(r, n - r);
  unsigned __int128 c = 1;
  for (std::uint64_t i = 1; i <= r; ++i) {
    c = c * (n - r + i) / i;
    if (c > UINT64_MAX) return UINT64_MAX;
  }
  return static_cast<std::uint64_t>(c);
}

/// Number of ways to write k = a_1 + ... + a_s with every a_i >= 2.
inline std::uint64_t composition_count(unsigned k, unsigned s) {
  if (s == 0) return k == 0 ? 1 : 0;
  if (k < 2 * s) return 0;
  return binomial(k - s - 1, s - 1);
}

/// The coarser count C(k - s, s) used as an upper bound in the s < k/2 estimate.
inline std::uint64_t composition_bound(unsigned k, unsigned s) { return binomial(k - s, s); }

/// All compositions of k into s parts, each >= 2, in lexicographic order.
inline std::vector<std::vector<unsigned>> compositions_at_least_two(unsigned k, unsigned s) {
  std::vector<std::vector<unsigned>> out;
  if (s == 0) {
    if (k == 0) out.emplace_back();
    return out;
  }
  std::vector<unsigned> cur;
  auto rec = [&](auto&& self, unsigned remaining, unsigned parts_left) -> void {
    if (parts_left == 1) {
      if (remaining >= 2) {
        cur.push_back(remaining);
        out.push_back(cur);
        cur.pop_back();
      }
      return;
    }
    for (unsigned a = 2; a + 2 * (parts_left - 1) <= remaining; ++a) {
      cur.push_back(a);
      self(self, remaining - a, parts_left - 1);
      cur.pop_back();
    }
  };
  rec(rec, k, s);
  return out;
}

/// k! / (a_1! ... a_s!)
inline Rational multinomial(unsigned k, std::span<const unsigned> parts) {
  BigInt num, den = 1, f;
  mpz_fac_ui(num.get_mpz_t(), k);
  for (unsigned a : parts) {
    mpz_fac_ui(f.get_mpz_t(), a);
    den *= f;
  }
  Rational q(num, den);
  q.canonicalize();
  return q;
}

inline constexpr std::uint64_t kDefaultEnumerationBudget = 1'000'000'000;

struct SquarefullMainTerm {
  Rational total;
  std::vector<Rational> by_s;  // by_s[s]: contribution of patterns with s distinct primes
};

/// Sum over s <= k/2, q_1 < ... < q_s in P and compositions alpha_i >= 2 of k of
///   k!/prod alpha_i! * prod g(q_i)^alpha_i * G(prod q_i^alpha_i),
/// by explicit enumeration, largest s first. `weights` (aligned with
/// `primes`) defaults to g = 1.
inline SquarefullMainTerm main_term_squarefull(unsigned k, std::span<const std::uint64_t> primes,
                                               const Density& h = Density::unit(),
                                               std::span<const Rational> weights = {},
                                               std::uint64_t budget = kDefaultEnumerationBudget) {
  if (k > 12) throw bounds_error("main_term_squarefull: k must be <= 12");
  if (!weights.empty() && weights.size() != primes.size())
    throw domain_error("main_term_squarefull: weights must align with primes");
  SquarefullMainTerm out{0, std::vector<Rational>(k / 2 + 1, Rational(0))};
  if (k == 0) {
    out.total = 1;
    out.by_s[0] = 1;
    return out;
  }
  std::uint64_t terms = 0;
  for (unsigned s = 1; s <= k / 2; ++s) {
    const std::uint64_t c = binomial(primes.size(), s);
    const std::uint64_t n = composition_count(k, s);
    if (c != 0 && (c > budget || n > budget / c)) throw capacity_error("main_term_squarefull: enumeration exceeds budget");
    terms += c * n;
    if (terms > budget) throw capacity_error("main_term_squarefull: enumeration exceeds budget");
  }
  const std::size_t np = primes.size();
  // local[i][a] = g(q_i)^a * g_local(rho_i, a)
  std::vector<std::vector<Rational>> local(np, std::vector<Rational>(k + 1));
  for (std::size_t i = 0; i < np; ++i) {
    const Rational rho = h.ratio(primes[i]);
    const Rational g = weights.empty() ? Rational(1) : weights[i];
    for (unsigned a = 2; a <= k; ++a) local[i][a] = pow(g, a) * g_local(rho, a);
  }
  for (unsigned s = k / 2; s >= 1; --s) {
    const auto comps = compositions_at_least_two(k, s);
    std::vector<Rational> weights_of(comps.size());
    for (std::size_t c = 0; c < comps.size(); ++c) weights_of[c] = multinomial(k, comps[c]);
    Rational acc = 0;
    if (np >= s) {
      std::vector<std::size_t> idx(s);
      for (unsigned j = 0; j < s; ++j) idx[j] = j;
      while (true) {
        for (std::size_t c = 0; c < comps.size(); ++c) {
          Rational term = weights_of[c];
          for (unsigned j = 0; j < s; ++j) term *= local[idx[j]][comps[c][j]];
          acc += term;
        }
        int j = static_cast<int>(s) - 1;
        while (j >= 0 && idx[j] == np - s + j) --j;
        if (j < 0) break;
        ++idx[j];
        for (unsigned t = j + 1; t < s; ++t) idx[t] = idx[t - 1] + 1;
      }
    }
    out.by_s[s] = acc;
    out.total += acc;
  }
  return out;
}

/// Same quantity as main_term_squarefull, via the generating function
///   k! [t^k] prod_{q in P} (1 + sum_{a>=2} g(q)^a G(q^a) t^a / a!),
/// in O(|P| k^2) operations. T is Rational (exact) or double.
template <class T>
T main_term_generating(unsigned k, std::span<const std::uint64_t> primes, const Density& h = Density::unit(),
                       std::span<const Rational> weights = {}) {
  if (!weights.empty() && weights.size() != primes.size())
    throw domain_error("main_term_generating: weights must align with primes");
  std::vector<T> fact(k + 1);
  fact[0] = 1;
  for (unsigned a = 1; a <= k; ++a) fact[a] = fact[a - 1] * T(a);
  std::vector<T> poly(k + 1, T(0)), next(k + 1), coeff(k + 1);
  poly[0] = 1;
  for (std::size_t i = 0; i < primes.size(); ++i) {
    const T rho = detail::convert<T>(h.ratio(primes[i]));
    const T g = weights.empty() ? T(1) : detail::convert<T>(weights[i]);
    for (unsigned a = 2; a <= k; ++a) coeff[a] = detail::power(g, a) * g_local(rho, a) / fact[a];
    for (unsigned j = 0; j <= k; ++j) {
      next[j] = poly[j];
      for (unsigned a = 2; a <= j; ++a) next[j] += poly[j - a] * coeff[a];
    }
    std::swap(poly, next);
  }
  return fact[k] * poly[k];
}

namespace detail {

inline constexpr std::size_t kMomentBlock = 4096;

inline CompensatedSum tree_merge(std::span<const CompensatedSum> parts) {
  if (parts.empty()) return {};
  if (parts.size() == 1) return parts[0];
  const std::size_t half = parts.size() / 2;
  CompensatedSum left = tree_merge(parts.first(half));
  left.merge(tree_merge(parts.subspan(half)));
  return left;
}

}  // namespace detail

/// sum (v - center)^k with compensated summation over fixed 4096-value
/// blocks merged by a balanced tree; the result depends only on the input
/// order.
inline double empirical_moment(std::span<const double> values, double center, unsigned k) {
  if (k < 1) throw bounds_error("empirical_moment: k must be >= 1");
  std::vector<CompensatedSum> blocks((values.size() + detail::kMomentBlock - 1) / detail::kMomentBlock);
  for (std::size_t i = 0; i < values.size(); ++i)
    blocks[i / detail::kMomentBlock].add(detail::power(values[i] - center, k));
  return detail::tree_merge(blocks).value();
}

/// sum_j counts[j] (j - center)^k, i.e. the centered power sum of a
/// sequence whose value histogram is `counts`.
inline double histogram_moment(std::span<const std::uint64_t> counts, double center, unsigned k) {
  CompensatedSum acc;
  for (std::size_t j = 0; j < counts.size(); ++j)
    if (counts[j] != 0) acc.add(static_cast<double>(counts[j]) * detail::power(static_cast<double>(j) - center, k));
  return acc.value();
}

inline Rational histogram_moment_exact(std::span<const std::uint64_t> counts, const Rational& center, unsigned k) {
  Rational acc = 0;
  for (std::size_t j = 0; j < counts.size(); ++j)
    if (counts[j] != 0) acc += to_rational(counts[j]) * pow(Rational(to_rational(std::uint64_t{j}) - center), k);
  return acc;
}

inline double loglog(double x) { return std::log(std::log(x)); }

/// floor(x^(1/k)) computed exactly.
inline std::uint64_t integer_root(std::uint64_t x, unsigned k) {
  auto r = static_cast<std::uint64_t>(std::pow(static_cast<double>(x), 1.0 / k));
  auto pow_le = [&](std::uint64_t b) {
    unsigned __int128 v = 1;
    for (unsigned i = 0; i < k; ++i) {
      v *= b;
      if (v > x) return false;
    }
    return true;
  };
  while (r > 0 && !pow_le(r)) --r;
  while (pow_le(r + 1)) ++r;
  return r;
}

struct MomentOptions {
  SieveOptions sieve;
  double slack = 10.0;
  // exact rational evaluation of the prop2 path when pi(z) is at most this
  std::size_t exact_prime_limit = 256;
};

namespace detail {

inline constexpr std::size_t kOmegaBins = 32;

// Histogram of #{p in primes : p | n} for n in [lo, hi), by direct marking.
inline std::array<std::uint64_t, kOmegaBins> small_prime_omega_histogram(std::uint64_t lo, std::uint64_t hi,
                                                                         std::span<const std::uint32_t> primes) {
  std::vector<std::uint8_t> count(hi - lo, 0);
  for (std::uint64_t p : primes)
    for (std::uint64_t m = (lo + p - 1) / p * p; m < hi; m += p) ++count[m - lo];
  std::array<std::uint64_t, kOmegaBins> hist{};
  for (auto c : count) ++hist[c];
  return hist;
}

}  // namespace detail

/// Histogram of omega_z(n) = #{p <= z : p | n} for 1 <= n <= x.
inline std::vector<std::uint64_t> truncated_omega_histogram(std::uint64_t x, std::uint64_t z,
                                                            const SieveOptions& opt = {}) {
  if (x < 1 || x > kMaxLimit) throw bounds_error("x must lie in [1, 10^9]");
  if (z < 2) throw bounds_error("truncation bound z must be >= 2");
  std::array<std::uint64_t, detail::kOmegaBins> total{};
  if (z <= std::max<std::uint64_t>(isqrt(x), 1u << 16)) {
    const auto P = primes_up_to(std::min<std::uint64_t>(z, kMaxLimit));
    const auto segments = tile(1, x + 1, opt.segment_width);
    auto parts = parallel_map<std::array<std::uint64_t, detail::kOmegaBins>>(
        segments.size(), opt.threads, [&](std::size_t i) {
          return detail::small_prime_omega_histogram(segments[i].lo, segments[i].hi, P.up_to(z));
        });
    for (const auto& h : parts)
      for (std::size_t j = 0; j < total.size(); ++j) total[j] += h[j];
  } else {
    auto parts = map_factor_tables(1, x + 1, SieveMode::truncated_at(z), opt, [](const FactorTable& t) {
      std::array<std::uint64_t, detail::kOmegaBins> h{};
      for (auto c : t.omega_values()) ++h[c];
      return h;
    });
    for (const auto& h : parts)
      for (std::size_t j = 0; j < total.size(); ++j) total[j] += h[j];
  }
  std::size_t used = total.size();
  while (used > 1 && total[used - 1] == 0) --used;
  return {total.begin(), total.begin() + static_cast<std::ptrdiff_t>(used)};
}

/// Proposition-2 experiment: sum_{n <= x} (sum_{p <= z} f_p(n))^k against
/// x * (square-full main term), with budget slack * 2^k pi(z)^k.
inline MomentReport prop2_check(std::uint64_t x, std::uint64_t z, unsigned k, const MomentOptions& opt = {}) {
  if (x < 1 || x > kMaxLimit) throw bounds_error("prop2_check: x must lie in [1, 10^9]");
  if (z < 2 || z > kMaxLimit) throw bounds_error("prop2_check: z must lie in [2, 10^9]");
  if (k < 1 || k > 12) throw bounds_error("prop2_check: k must lie in [1, 12]");
  const auto table = primes_up_to(z, opt.sieve);
  std::vector<std::uint64_t> P(table.begin(), table.end());
  const auto hist = truncated_omega_histogram(x, z, opt.sieve);

  MomentReport rep;
  rep.mode = "prop2";
  rep.k = k;
  rep.x = x;
  rep.z = z;
  const double budget = opt.slack * std::pow(2.0, k) * std::pow(static_cast<double>(P.size()), k);
  rep.error_budget = budget;
  if (P.size() <= opt.exact_prime_limit) {
    Rational mu = 0;
    for (auto p : P) mu += ratio(1, p);
    const Rational emp = histogram_moment_exact(hist, mu, k);
    const Rational main = to_rational(x) * main_term_generating<Rational>(k, P);
    rep.empirical = to_double(emp);
    rep.main_term = to_double(main);
    rep.pass = abs(Rational(emp - main)) <= Rational(budget);
    rep.details["empirical_exact"] = to_string(emp);
    rep.details["main_term_exact"] = to_string(main);
    rep.details["exact"] = true;
  } else {
    CompensatedSum mu;
    for (auto p : P) mu.add(1.0 / static_cast<double>(p));
    rep.empirical = histogram_moment(hist, mu.value(), k);
    rep.main_term = static_cast<double>(x) * main_term_generating<double>(k, P);
    rep.pass = std::abs(rep.empirical - rep.main_term) <= budget;
    rep.details["exact"] = false;
  }
  const double L = loglog(static_cast<double>(z));
  rep.predicted = L > 0 ? gaussian_moment(k).value * static_cast<double>(x) * std::pow(L, 0.5 * k) : 0.0;
  rep.ratio = rep.predicted != 0.0 ? rep.empirical / rep.predicted : 0.0;
  rep.details["pi_z"] = P.size();
  rep.details["slack"] = opt.slack;
  rep.details["histogram"] = hist;
  return rep;
}

/// Theorem-1 experiment: sum_{n <= x} (omega(n) - loglog x)^k against
/// C_k x (loglog x)^{k/2}, with z = floor(x^{1/k}). `pass` records the
/// per-n check #{p | n : p > z} < k.
inline MomentReport theorem1_check(std::uint64_t x, unsigned k, const MomentOptions& opt = {}) {
  if (x < 16 || x > kMaxLimit) throw bounds_error("theorem1_check: x must lie in [16, 10^9]");
  if (k < 2 || k > 8 || k % 2 != 0) throw bounds_error("theorem1_check: k must be even and <= 8");
  const std::uint64_t z = integer_root(x, k);
  const SieveMode mode = z >= 2 ? SieveMode::truncated_at(z) : SieveMode::full();

  struct Partial {
    std::array<std::uint64_t, detail::kOmegaBins> hist{};
    std::uint64_t violations = 0;
    unsigned max_large = 0;
  };
  auto parts = map_factor_tables(1, x + 1, mode, opt.sieve, [&](const FactorTable& t) {
    Partial p;
    const auto full = t.omega_full_values();
    const auto small = t.omega_values();
    for (std::size_t i = 0; i < full.size(); ++i) {
      ++p.hist[full[i]];
      const unsigned large = z >= 2 ? full[i] - small[i] : full[i];
      p.max_large = std::max(p.max_large, large);
      if (large >= k) ++p.violations;
    }
    return p;
  });
  Partial total;
  for (const auto& p : parts) {
    for (std::size_t j = 0; j < total.hist.size(); ++j) total.hist[j] += p.hist[j];
    total.violations += p.violations;
    total.max_large = std::max(total.max_large, p.max_large);
  }
  std::size_t used = total.hist.size();
  while (used > 1 && total.hist[used - 1] == 0) --used;
  const std::vector<std::uint64_t> hist(total.hist.begin(), total.hist.begin() + static_cast<std::ptrdiff_t>(used));

  const double L = loglog(static_cast<double>(x));
  std::vector<std::uint64_t> P;
  if (z >= 2) {
    const auto table = primes_up_to(z, opt.sieve);
    P.assign(table.begin(), table.end());
  }
  MomentReport rep;
  rep.mode = "theorem1";
  rep.k = k;
  rep.x = x;
  rep.z = z;
  rep.empirical = histogram_moment(hist, L, k);
  rep.predicted = gaussian_moment(k).value * static_cast<double>(x) * std::pow(L, 0.5 * k);
  rep.ratio = rep.empirical / rep.predicted;
  rep.main_term = static_cast<double>(x) * main_term_generating<double>(k, P);
  rep.error_budget = opt.slack * std::pow(2.0, k) * std::pow(static_cast<double>(P.size()), k);
  rep.pass = total.violations == 0;
  rep.details["loglog_x"] = L;
  rep.details["large_prime_violations"] = total.violations;
  rep.details["max_large_prime_divisors"] = total.max_large;
  rep.details["histogram"] = hist;
  return rep;
}

}  // namespace ek
