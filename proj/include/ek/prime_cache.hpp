#pragma once

// On-disk prime table cache.
//
// Layout (little-endian):
//   bytes 0..3   magic "EKP1"
//   bytes 4..11  u64 limit
//   bytes 12..19 u64 count
//   then `count` LEB128 varints, each the gap to the previous prime (the
//   first gap is measured from 0).

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ek/sieve.hpp"

namespace ek {

inline constexpr std::array<char, 4> kPrimeCacheMagic = {'E', 'K', 'P', '1'};

struct prime_cache_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void put_u64_le(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline void put_varint(std::vector<std::uint8_t>& out, std::uint64_t v) {
  while (v >= 0x80) {
    out.push_back(static_cast<std::uint8_t>(v | 0x80));
    v >>= 7;
  }
  out.push_back(static_cast<std::uint8_t>(v));
}

}  // namespace detail

inline std::vector<std::uint8_t> encode_prime_table(const PrimeTable& table) {
  std::vector<std::uint8_t> out(kPrimeCacheMagic.begin(), kPrimeCacheMagic.end());
  detail::put_u64_le(out, table.limit());
  detail::put_u64_le(out, table.count());
  std::uint64_t prev = 0;
  for (std::uint32_t p : table) {
    detail::put_varint(out, p - prev);
    prev = p;
  }
  return out;
}

inline PrimeTable decode_prime_table(const std::vector<std::uint8_t>& bytes) {
  std::size_t pos = 0;
  auto need = [&](std::size_t n) {
    if (bytes.size() - pos < n) throw prime_cache_error("prime cache truncated");
  };
  need(20);
  if (!std::equal(kPrimeCacheMagic.begin(), kPrimeCacheMagic.end(), bytes.begin()))
    throw prime_cache_error("prime cache: bad magic");
  pos = 4;
  auto get_u64 = [&] {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t{bytes[pos++]} << (8 * i);
    return v;
  };
  const std::uint64_t limit = get_u64();
  const std::uint64_t count = get_u64();
  if (limit > kMaxLimit || count > limit) throw prime_cache_error("prime cache: header out of range");
  std::vector<std::uint32_t> primes;
  primes.reserve(count);
  std::uint64_t prev = 0;
  for (std::uint64_t i = 0; i < count; ++i) {
    std::uint64_t gap = 0;
    for (int shift = 0;; shift += 7) {
      need(1);
      if (shift > 63) throw prime_cache_error("prime cache: varint overflow");
      const std::uint8_t b = bytes[pos++];
      gap |= std::uint64_t{b & 0x7fu} << shift;
      if ((b & 0x80) == 0) break;
    }
    prev += gap;
    if (gap == 0 || prev > limit) throw prime_cache_error("prime cache: corrupt prime list");
    primes.push_back(static_cast<std::uint32_t>(prev));
  }
  if (pos != bytes.size()) throw prime_cache_error("prime cache: trailing bytes");
  return PrimeTable(limit, std::move(primes));
}

inline void save_prime_table(const std::filesystem::path& path, const PrimeTable& table) {
  const auto bytes = encode_prime_table(table);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw prime_cache_error("cannot open prime cache for writing: " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

inline PrimeTable load_prime_table(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw prime_cache_error("cannot open prime cache: " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_prime_table(bytes);
}

/// primes_up_to(z), reading from `cache` when it covers z and (re)writing it
/// otherwise. An unreadable cache is ignored.
inline PrimeTable cached_primes_up_to(std::uint64_t z, const std::optional<std::filesystem::path>& cache,
                                      const SieveOptions& opt = {}) {
  if (cache && std::filesystem::exists(*cache)) {
    try {
      PrimeTable t = load_prime_table(*cache);
      if (t.limit() >= z) {
        auto head = t.up_to(z);
        return PrimeTable(z, std::vector<std::uint32_t>(head.begin(), head.end()));
      }
    } catch (const prime_cache_error&) {
    }
  }
  PrimeTable t = primes_up_to(z, opt);
  if (cache) save_prime_table(*cache, t);
  return t;
}

}  // namespace ek
