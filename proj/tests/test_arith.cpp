#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "ek/arith.hpp"
#include "ek/summation.hpp"
#include "support.hpp"

namespace {

std::uint64_t phi_by_definition(std::uint64_t n) {
  std::uint64_t c = 0;
  for (std::uint64_t m = 1; m <= n; ++m) c += oracle::gcd(m, n) == 1;
  return c;
}

std::uint64_t tau_by_definition(std::uint64_t n) {
  std::uint64_t c = 0;
  for (std::uint64_t d = 1; d <= n; ++d) c += n % d == 0;
  return c;
}

int moebius_by_definition(std::uint64_t n) {
  int sign = 1;
  for (std::uint64_t p = 2; p <= n; ++p) {
    if (n % p) continue;
    if (!oracle::trial_prime(p)) continue;
    if ((n / p) % p == 0) return 0;
    sign = -sign;
  }
  return sign;
}

TEST(Arith, Examples) {
  EXPECT_EQ(ek::euler_phi(1), 1u);
  EXPECT_EQ(ek::euler_phi(12), 4u);
  EXPECT_EQ(ek::euler_phi(97), 96u);
  EXPECT_EQ(ek::moebius(6), 1);
  EXPECT_EQ(ek::tau(6), 4u);
  EXPECT_EQ(ek::moebius(4), 0);
  EXPECT_EQ(ek::moebius(30), -1);
  EXPECT_EQ(ek::tau(30), 8u);
  EXPECT_EQ(ek::moebius(1), 1);
}

TEST(Arith, MatchesDefinitions) {
  for (std::uint64_t n = 1; n <= 600; ++n) {
    ASSERT_EQ(ek::euler_phi(n), phi_by_definition(n)) << n;
    ASSERT_EQ(ek::tau(n), tau_by_definition(n)) << n;
    ASSERT_EQ(ek::moebius(n), moebius_by_definition(n)) << n;
    ASSERT_EQ(ek::is_prime(n), oracle::trial_prime(n)) << n;
  }
}

TEST(Arith, MultiplicativeOnRandomCoprimePairs) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<std::uint64_t> pick(1, 200'000);
  int checked = 0;
  while (checked < 2000) {
    const auto m = pick(rng), n = pick(rng);
    if (std::gcd(m, n) != 1) continue;
    ++checked;
    ASSERT_EQ(ek::euler_phi(m * n), ek::euler_phi(m) * ek::euler_phi(n));
    ASSERT_EQ(ek::tau(m * n), ek::tau(m) * ek::tau(n));
    ASSERT_EQ(ek::moebius(m * n), ek::moebius(m) * ek::moebius(n));
  }
}

TEST(GcdClass, Examples) {
  EXPECT_EQ(ek::count_in_gcd_class(10, 6, 1), 3);
  EXPECT_EQ(ek::count_in_gcd_class(10, 6, 6), 1);
  const std::uint64_t x = 100'000, R = 210;
  std::int64_t direct = 0;
  for (std::uint64_t n = 1; n <= x; ++n) direct += std::gcd(n, R) == 2;
  EXPECT_EQ(ek::count_in_gcd_class(x, R, 2), direct);
}

TEST(GcdClass, MatchesBruteForceScan) {
  std::mt19937_64 rng(5);
  const std::vector<std::uint64_t> pool{2, 3, 5, 7, 11, 13, 17, 19, 23};
  for (int iter = 0; iter < 60; ++iter) {
    std::uint64_t R = 1;
    for (auto p : pool)
      if (rng() % 3 == 0) R *= p;
    const std::uint64_t x = 1 + rng() % 20'000;
    std::map<std::uint64_t, std::int64_t> scan;
    for (std::uint64_t n = 1; n <= x; ++n) ++scan[std::gcd(n, R)];
    for (std::uint64_t d = 1; d <= R; ++d) {
      if (R % d) continue;
      ASSERT_EQ(ek::count_in_gcd_class(x, R, d), scan[d]) << "x=" << x << " R=" << R << " d=" << d;
    }
  }
}

TEST(GcdClass, PartitionIdentity) {
  std::mt19937_64 rng(9);
  for (std::uint64_t R : {1, 2, 30, 2310, 9699690, 223092870}) {
    for (int i = 0; i < 5; ++i) {
      const std::uint64_t x = rng() % 1'000'000'000;
      std::int64_t total = 0;
      for (std::uint64_t d = 1; d * d <= R; ++d) {
        if (R % d) continue;
        total += ek::count_in_gcd_class(x, R, d);
        if (d * d != R) total += ek::count_in_gcd_class(x, R, R / d);
      }
      ASSERT_EQ(total, static_cast<std::int64_t>(x)) << "R=" << R;
    }
  }
}

TEST(GcdClass, RejectsBadArguments) {
  EXPECT_THROW(ek::count_in_gcd_class(10, 6, 4), ek::domain_error);
  EXPECT_THROW(ek::count_in_gcd_class(10, 12, 2), ek::domain_error);
}

TEST(CompensatedSum, RecoversCancelledBits) {
  std::vector<double> v{1e16, 1.0, -1e16, 1.0};
  EXPECT_EQ(ek::compensated_sum(v), 2.0);
  ek::CompensatedSum a, b;
  a.add(1e100);
  a.add(1.0);
  b.add(-1e100);
  b.add(3.0);
  a.merge(b);
  EXPECT_EQ(a.value(), 4.0);
}

}  // namespace
