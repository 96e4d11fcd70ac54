#pragma once

// Segmented sieving over [1, 10^9]: prime tables, smallest-prime-factor and
// omega (distinct prime factor) tables, plus drivers that stream factor
// tables segment by segment.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "ek/errors.hpp"
#include "ek/parallel.hpp"

namespace ek {

inline constexpr std::uint64_t kMaxLimit = 1'000'000'000;
inline constexpr std::uint64_t kDefaultSegmentWidth = std::uint64_t{1} << 20;

inline std::uint64_t isqrt(std::uint64_t n) {
  auto r = static_cast<std::uint64_t>(std::sqrt(static_cast<double>(n)));
  while (r * r > n) --r;
  while ((r + 1) * (r + 1) <= n) ++r;
  return r;
}

// Half-open integer interval [lo, hi).
struct Segment {
  std::uint64_t lo = 1;
  std::uint64_t hi = 2;

  std::uint64_t width() const { return hi - lo; }
  bool contains(std::uint64_t n) const { return lo <= n && n < hi; }
  friend bool operator==(const Segment&, const Segment&) = default;
};

/// Splits [lo, hi) into consecutive segments of at most `width` integers.
inline std::vector<Segment> tile(std::uint64_t lo, std::uint64_t hi, std::uint64_t width = kDefaultSegmentWidth) {
  if (width == 0) throw bounds_error("segment width must be >= 1");
  std::vector<Segment> out;
  for (std::uint64_t a = lo; a < hi;) {
    const std::uint64_t b = hi - a > width ? a + width : hi;
    out.push_back({a, b});
    a = b;
  }
  return out;
}

struct SieveOptions {
  std::uint64_t segment_width = kDefaultSegmentWidth;
  unsigned threads = 1;
};

class PrimeTable {
 public:
  PrimeTable() = default;
  PrimeTable(std::uint64_t limit, std::vector<std::uint32_t> primes) : limit_(limit), primes_(std::move(primes)) {}

  std::uint64_t limit() const { return limit_; }
  std::size_t count() const { return primes_.size(); }
  std::span<const std::uint32_t> primes() const { return primes_; }
  std::uint32_t operator[](std::size_t i) const { return primes_[i]; }
  auto begin() const { return primes_.begin(); }
  auto end() const { return primes_.end(); }

  /// The n-th smallest prime, 1-based (nth(1) == 2).
  std::uint32_t nth(std::size_t n) const {
    if (n == 0 || n > primes_.size()) throw bounds_error("prime index out of table range");
    return primes_[n - 1];
  }

  bool contains(std::uint64_t p) const {
    if (p > limit_) throw bounds_error("membership query beyond table limit");
    return std::binary_search(primes_.begin(), primes_.end(), p);
  }

  /// pi(z) for z <= limit.
  std::size_t count_up_to(std::uint64_t z) const {
    if (z > limit_) throw bounds_error("pi(z) query beyond table limit");
    return static_cast<std::size_t>(std::upper_bound(primes_.begin(), primes_.end(), z) - primes_.begin());
  }

  std::span<const std::uint32_t> up_to(std::uint64_t z) const { return primes().first(count_up_to(z)); }

 private:
  std::uint64_t limit_ = 0;
  std::vector<std::uint32_t> primes_;
};

namespace detail {

inline std::vector<std::uint32_t> simple_primes(std::uint64_t limit) {
  std::vector<std::uint32_t> out;
  if (limit < 2) return out;
  std::vector<char> composite(limit + 1, 0);
  for (std::uint64_t i = 2; i * i <= limit; ++i)
    if (!composite[i])
      for (std::uint64_t j = i * i; j <= limit; j += i) composite[j] = 1;
  for (std::uint64_t i = 2; i <= limit; ++i)
    if (!composite[i]) out.push_back(static_cast<std::uint32_t>(i));
  return out;
}

// Primes in [lo, hi) using odd-only marking; `base` must contain every prime <= sqrt(hi - 1).
inline std::vector<std::uint32_t> sieve_primes_segment(std::uint64_t lo, std::uint64_t hi,
                                                       std::span<const std::uint32_t> base) {
  std::vector<std::uint32_t> out;
  if (lo <= 2 && 2 < hi) out.push_back(2);
  const std::uint64_t first_odd = std::max<std::uint64_t>(3, lo | 1);
  if (first_odd >= hi) return out;
  const std::uint64_t n_odd = (hi - first_odd + 1) / 2;
  std::vector<char> composite(n_odd, 0);
  for (std::uint32_t p32 : base) {
    const std::uint64_t p = p32;
    if (p == 2) continue;
    if (p * p >= hi) break;
    std::uint64_t start = std::max(p * p, (first_odd + p - 1) / p * p);
    if ((start & 1) == 0) start += p;
    for (std::uint64_t m = start; m < hi; m += 2 * p) composite[(m - first_odd) / 2] = 1;
  }
  for (std::uint64_t i = 0; i < n_odd; ++i)
    if (!composite[i]) out.push_back(static_cast<std::uint32_t>(first_odd + 2 * i));
  return out;
}

}  // namespace detail

/// All primes <= z, 2 <= z <= 10^9.
inline PrimeTable primes_up_to(std::uint64_t z, const SieveOptions& opt = {}) {
  if (z < 2 || z > kMaxLimit) throw bounds_error("primes_up_to: z must lie in [2, 10^9], got " + std::to_string(z));
  const auto base = detail::simple_primes(isqrt(z));
  if (z <= (std::uint64_t{1} << 16)) return PrimeTable(z, detail::simple_primes(z));
  const auto segments = tile(1, z + 1, opt.segment_width);
  auto parts = parallel_map<std::vector<std::uint32_t>>(segments.size(), opt.threads, [&](std::size_t i) {
    return detail::sieve_primes_segment(segments[i].lo, segments[i].hi, base);
  });
  std::size_t total = 0;
  for (const auto& p : parts) total += p.size();
  std::vector<std::uint32_t> primes;
  primes.reserve(total);
  for (const auto& p : parts) primes.insert(primes.end(), p.begin(), p.end());
  return PrimeTable(z, std::move(primes));
}

// Which prime divisors an omega table counts.
struct SieveMode {
  bool truncated = false;
  std::uint64_t z = 0;

  static SieveMode full() { return {}; }
  static SieveMode truncated_at(std::uint64_t z) {
    if (z < 2) throw bounds_error("truncation bound z must be >= 2");
    return {true, z};
  }
  bool counts(std::uint64_t p) const { return !truncated || p <= z; }
};

// Smallest prime factor and omega for every integer of a segment. spf is
// stored for odd integers only; even n report spf 2.
class FactorTable {
 public:
  FactorTable(Segment range, SieveMode mode, std::vector<std::uint32_t> odd_spf, std::vector<std::uint8_t> omega_full,
              std::vector<std::uint8_t> omega_mode)
      : range_(range),
        mode_(mode),
        odd_spf_(std::move(odd_spf)),
        omega_full_(std::move(omega_full)),
        omega_mode_(std::move(omega_mode)) {}

  Segment range() const { return range_; }
  SieveMode mode() const { return mode_; }

  std::uint64_t spf(std::uint64_t n) const {
    check(n);
    if (n < 2) throw domain_error("spf is undefined for n < 2");
    if ((n & 1) == 0) return 2;
    return odd_spf_[(n - first_odd()) / 2];
  }

  /// Omega according to the table's mode (all primes, or primes <= z).
  unsigned omega(std::uint64_t n) const {
    check(n);
    return mode_.truncated ? omega_mode_[n - range_.lo] : omega_full_[n - range_.lo];
  }

  unsigned omega_full(std::uint64_t n) const {
    check(n);
    return omega_full_[n - range_.lo];
  }

  std::span<const std::uint8_t> omega_values() const { return mode_.truncated ? omega_mode_ : omega_full_; }
  std::span<const std::uint8_t> omega_full_values() const { return omega_full_; }

 private:
  std::uint64_t first_odd() const { return range_.lo | 1; }
  void check(std::uint64_t n) const {
    if (!range_.contains(n)) throw bounds_error("n outside factor table range");
  }

  Segment range_;
  SieveMode mode_;
  std::vector<std::uint32_t> odd_spf_;
  std::vector<std::uint8_t> omega_full_;
  std::vector<std::uint8_t> omega_mode_;
};

namespace detail {

inline void validate_range(Segment range) {
  if (range.lo < 1 || range.hi <= range.lo || range.hi > kMaxLimit + 1)
    throw bounds_error("sieve range must satisfy 1 <= lo < hi <= 10^9 + 1");
}

// `base` must contain every prime <= sqrt(hi - 1).
inline FactorTable factor_segment(Segment range, SieveMode mode, std::span<const std::uint32_t> base) {
  const std::uint64_t lo = range.lo, hi = range.hi, width = range.width();
  const std::uint64_t first_odd = lo | 1;
  const std::size_t n_odd = first_odd < hi ? static_cast<std::size_t>((hi - first_odd + 1) / 2) : 0;

  std::vector<std::uint32_t> rem(width);
  for (std::uint64_t i = 0; i < width; ++i) rem[i] = static_cast<std::uint32_t>(lo + i);
  std::vector<std::uint32_t> odd_spf(n_odd, 0);
  std::vector<std::uint8_t> omega_full(width, 0);
  std::vector<std::uint8_t> omega_mode(mode.truncated ? width : 0, 0);

  for (std::uint32_t p32 : base) {
    const std::uint64_t p = p32;
    if (p * p > hi - 1) break;
    const bool counted = mode.truncated && mode.counts(p);
    std::uint64_t m = (lo + p - 1) / p * p;
    if (p == 2) {
      for (; m < hi; m += 2) {
        const std::uint64_t i = m - lo;
        ++omega_full[i];
        if (counted) ++omega_mode[i];
        rem[i] >>= std::countr_zero(rem[i]);
      }
      continue;
    }
    for (; m < hi; m += p) {
      const std::uint64_t i = m - lo;
      ++omega_full[i];
      if (counted) ++omega_mode[i];
      if ((m & 1) != 0 && odd_spf[(m - first_odd) / 2] == 0) odd_spf[(m - first_odd) / 2] = p32;
      std::uint32_t r = rem[i] / p32;
      while (r % p32 == 0) r /= p32;
      rem[i] = r;
    }
  }
  // Whatever survives is a single prime above sqrt(hi - 1).
  for (std::uint64_t i = 0; i < width; ++i) {
    if (rem[i] <= 1) continue;
    ++omega_full[i];
    if (mode.truncated && mode.counts(rem[i])) ++omega_mode[i];
    const std::uint64_t n = lo + i;
    if ((n & 1) != 0 && odd_spf[(n - first_odd) / 2] == 0) odd_spf[(n - first_odd) / 2] = rem[i];
  }
  return FactorTable(range, mode, std::move(odd_spf), std::move(omega_full), std::move(omega_mode));
}

inline std::vector<std::uint32_t> base_primes_for(std::uint64_t hi) {
  return detail::simple_primes(isqrt(hi > 1 ? hi - 1 : 1));
}

}  // namespace detail

/// Factor table (spf + omega) for one segment.
inline FactorTable sieve_omega(Segment range, SieveMode mode = SieveMode::full()) {
  detail::validate_range(range);
  const auto base = detail::base_primes_for(range.hi);
  return detail::factor_segment(range, mode, base);
}

/// Sieves [lo, hi) segment by segment and returns fn(table) per segment, in
/// segment order regardless of thread count.
template <class Fn>
auto map_factor_tables(std::uint64_t lo, std::uint64_t hi, SieveMode mode, const SieveOptions& opt, Fn&& fn)
    -> std::vector<std::invoke_result_t<Fn&, const FactorTable&>> {
  using R = std::invoke_result_t<Fn&, const FactorTable&>;
  detail::validate_range({lo, hi});
  const auto base = detail::base_primes_for(hi);
  const auto segments = tile(lo, hi, opt.segment_width);
  return parallel_map<R>(segments.size(), opt.threads,
                         [&](std::size_t i) { return fn(detail::factor_segment(segments[i], mode, base)); });
}

/// omega(n) for 0 <= n <= x as a dense byte array (entry 0 is unused and 0).
inline std::vector<std::uint8_t> omega_table(std::uint64_t x, SieveMode mode = SieveMode::full(),
                                             const SieveOptions& opt = {}) {
  if (x < 1 || x > kMaxLimit) throw bounds_error("omega_table: x must lie in [1, 10^9]");
  std::vector<std::uint8_t> out(x + 1, 0);
  map_factor_tables(1, x + 1, mode, opt, [&](const FactorTable& t) {
    auto vals = t.omega_values();
    std::copy(vals.begin(), vals.end(), out.begin() + static_cast<std::ptrdiff_t>(t.range().lo));
    return 0;
  });
  return out;
}

}  // namespace ek
