#pragma once

// Independent Bernoulli model: each prime p of P "divides" a model element
// with probability h(p)/p, independently; omega_P of a model element is the
// number of successes.
//
// Sampling is bit-reproducible: samples are split into blocks of
// kModelBlock draws, block b uses its own SplitMix64 stream seeded with the
// first output of SplitMix64(seed + b * 0x9E3779B97F4A7C15), and a draw for
// prime p succeeds when (next() >> 11) * 2^-53 < double(h(p)/p).

#include <cmath>
#include <cstdint>
#include <vector>

#include "ek/density.hpp"
#include "ek/framework.hpp"
#include "ek/parallel.hpp"
#include "ek/summation.hpp"

namespace ek {

class SplitMix64 {
 public:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += kGamma);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::uint64_t state_;
};

inline constexpr std::uint64_t kModelBlock = 65536;

inline std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t block) {
  return SplitMix64(seed + block * SplitMix64::kGamma).next();
}

/// `samples` independent draws of omega_P under the Bernoulli model.
inline std::vector<std::uint16_t> model_simulate(const PrimeSet& P, const Density& h, std::uint64_t seed,
                                                 std::uint64_t samples, unsigned threads = 1) {
  if (P.size() > UINT16_MAX) throw bounds_error("model_simulate: too many primes");
  std::vector<double> prob;
  for (auto p : P.primes()) prob.push_back(to_double(h.ratio(p)));
  std::vector<std::uint16_t> out(samples);
  const std::uint64_t blocks = (samples + kModelBlock - 1) / kModelBlock;
  parallel_map<int>(blocks, threads, [&](std::size_t b) {
    SplitMix64 rng(substream_seed(seed, b));
    const std::uint64_t end = std::min<std::uint64_t>(samples, (b + 1) * kModelBlock);
    for (std::uint64_t i = b * kModelBlock; i < end; ++i) {
      std::uint16_t w = 0;
      for (double q : prob) w += rng.bernoulli(q);
      out[i] = w;
    }
    return 0;
  });
  return out;
}

struct ModelSummary {
  std::uint64_t samples = 0;
  double mu = 0.0;      // model mean sum h(p)/p
  double sigma2 = 0.0;  // model variance
  double kurtosis = 0.0;  // exact model kurtosis 3 + sum kappa_4 / sigma^4
  double mean = 0.0;
  double variance = 0.0;
  double standardized_fourth = 0.0;  // m_4 / m_2^2 of the sample
  std::vector<std::uint64_t> histogram;
};

/// Exact kurtosis of a sum of independent Bernoulli(h(p)/p).
inline double model_kurtosis(const PrimeSet& P, const Density& h) {
  Rational s2 = 0, k4 = 0;
  for (auto p : P.primes()) {
    const Rational q = h.ratio(p);
    const Rational v = q * (1 - q);
    s2 += v;
    k4 += v * (1 - 6 * v);
  }
  if (s2 == 0) return 0.0;
  return 3.0 + to_double(Rational(k4 / (s2 * s2)));
}

inline ModelSummary summarize_model(const std::vector<std::uint16_t>& values, const PrimeSet& P, const Density& h) {
  ModelSummary s;
  s.samples = values.size();
  const auto stats = prime_set_stats(P, h);
  s.mu = to_double(stats.mu);
  s.sigma2 = to_double(stats.sigma2);
  s.kurtosis = model_kurtosis(P, h);
  for (auto v : values) {
    if (s.histogram.size() <= v) s.histogram.resize(v + 1, 0);
    ++s.histogram[v];
  }
  if (values.empty()) return s;
  const double n = static_cast<double>(values.size());
  CompensatedSum sum;
  for (std::size_t j = 0; j < s.histogram.size(); ++j) sum.add(static_cast<double>(s.histogram[j]) * static_cast<double>(j));
  s.mean = sum.value() / n;
  const double m2 = histogram_moment(s.histogram, s.mean, 2) / n;
  const double m4 = histogram_moment(s.histogram, s.mean, 4) / n;
  s.variance = m2;
  s.standardized_fourth = m2 > 0 ? m4 / (m2 * m2) : 0.0;
  return s;
}

}  // namespace ek
