#pragma once

// Distribution of omega(n) for n <= x: standardized values against the
// normal law (exact Kolmogorov-Smirnov distance), pi_k(x) counts with a
// Hardy-Ramanujan style upper bound fit, Turan's second moment and a
// fixed-kappa concentration check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ek/errors.hpp"
#include "ek/moments.hpp"
#include "ek/sieve.hpp"
#include "ek/summation.hpp"

namespace ek {

/// Phi(t), the standard normal distribution function.
inline double normal_cdf(double t) { return 0.5 * std::erfc(-t / std::numbers::sqrt2); }

enum class Centering { loglog_x, loglog_n, prime_sum };

inline std::string to_string(Centering c) {
  switch (c) {
    case Centering::loglog_x: return "loglog_x";
    case Centering::loglog_n: return "loglog_n";
    case Centering::prime_sum: return "prime_sum";
  }
  return "?";
}

inline Centering parse_centering(const std::string& s) {
  if (s == "loglog_x") return Centering::loglog_x;
  if (s == "loglog_n") return Centering::loglog_n;
  if (s == "prime_sum") return Centering::prime_sum;
  throw domain_error("unknown centering '" + s + "' (expected loglog_x, loglog_n or prime_sum)");
}

// First n with loglog n > 0.
inline constexpr std::uint64_t kFirstPositiveLogLog = 16;

/// Exact sup_t |F_N(t) - Phi(t)| for an ascending sample (ties allowed).
inline double ks_distance(std::span<const double> sorted) {
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double phi = normal_cdf(sorted[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - phi, phi - static_cast<double>(i) / n});
  }
  return d;
}

struct PlotPoint {
  double tau;
  double ecdf;
  double phi;
};

struct DistributionOptions {
  SieveOptions sieve;
  double kappa = 3.0;
  double plot_min = -4.0;
  double plot_max = 4.0;
  double plot_step = 0.05;
};

struct DistributionReport {
  std::uint64_t x = 0;
  Centering centering = Centering::loglog_n;
  std::uint64_t excluded = 0;  // n < 16 dropped under loglog_n centering
  std::uint64_t count = 0;     // standardized values examined
  double ks = 0.0;
  double ks_at = 0.0;          // standardized value where the sup is attained
  double ecdf_at_zero = 0.0;   // proportion of standardized values <= 0
  std::vector<double> quantiles;  // at levels 0.01, 0.02, ..., 0.99
  std::vector<std::uint64_t> histogram;  // pi_k(x)
  double turan = 0.0;
  double turan_ratio = 0.0;
  double kappa = 0.0;
  double concentration = 0.0;
  std::vector<PlotPoint> plot;
};

namespace detail {

// Consumes (value, multiplicity) groups in ascending value order.
class EcdfScanner {
 public:
  EcdfScanner(std::uint64_t total, std::vector<double> grid) : total_(total), grid_(std::move(grid)) {
    grid_ecdf_.assign(grid_.size(), 1.0);
    for (int q = 1; q <= 99; ++q) levels_.push_back(q / 100.0);
    quantiles_.assign(levels_.size(), 0.0);
  }

  void add(double v, std::uint64_t count) {
    const double n = static_cast<double>(total_);
    const double before = static_cast<double>(cum_) / n;
    while (next_grid_ < grid_.size() && grid_[next_grid_] < v) grid_ecdf_[next_grid_++] = before;
    if (!zero_done_ && v > 0.0) {
      ecdf_zero_ = before;
      zero_done_ = true;
    }
    cum_ += count;
    const double after = static_cast<double>(cum_) / n;
    const double phi = normal_cdf(v);
    const double gap = std::max(after - phi, phi - before);
    if (gap > ks_) {
      ks_ = gap;
      ks_at_ = v;
    }
    while (next_level_ < levels_.size() && after >= levels_[next_level_]) quantiles_[next_level_++] = v;
  }

  double ks() const { return ks_; }
  double ks_at() const { return ks_at_; }
  double ecdf_at_zero() const { return zero_done_ ? ecdf_zero_ : 1.0; }
  const std::vector<double>& quantiles() const { return quantiles_; }

  std::vector<PlotPoint> plot() const {
    std::vector<PlotPoint> out;
    for (std::size_t i = 0; i < grid_.size(); ++i) out.push_back({grid_[i], grid_ecdf_[i], normal_cdf(grid_[i])});
    return out;
  }

 private:
  std::uint64_t total_;
  std::uint64_t cum_ = 0;
  std::vector<double> grid_;
  std::vector<double> grid_ecdf_;
  std::size_t next_grid_ = 0;
  std::vector<double> levels_;
  std::vector<double> quantiles_;
  std::size_t next_level_ = 0;
  double ks_ = 0.0;
  double ks_at_ = 0.0;
  bool zero_done_ = false;
  double ecdf_zero_ = 0.0;
};

inline void check_omega_table(std::span<const std::uint8_t> omega) {
  if (omega.size() < 2) throw bounds_error("omega table must cover at least n = 1");
}

}  // namespace detail

/// pi_k(x) for k = 0, 1, ... from a dense omega table (index n).
inline std::vector<std::uint64_t> pi_k_histogram(std::span<const std::uint8_t> omega) {
  detail::check_omega_table(omega);
  std::vector<std::uint64_t> hist(1, 0);
  for (std::size_t n = 1; n < omega.size(); ++n) {
    if (hist.size() <= omega[n]) hist.resize(omega[n] + 1, 0);
    ++hist[omega[n]];
  }
  return hist;
}

/// pi_k(x) for k = 0, 1, ... by streaming segments (no dense table).
inline std::vector<std::uint64_t> pi_k_histogram(std::uint64_t x, const SieveOptions& opt = {}) {
  if (x < 1 || x > kMaxLimit) throw bounds_error("pi_k_histogram: x must lie in [1, 10^9]");
  auto parts = map_factor_tables(1, x + 1, SieveMode::full(), opt, [](const FactorTable& t) {
    std::vector<std::uint64_t> h;
    for (auto w : t.omega_values()) {
      if (h.size() <= w) h.resize(w + 1, 0);
      ++h[w];
    }
    return h;
  });
  std::vector<std::uint64_t> hist(1, 0);
  for (const auto& h : parts) {
    if (hist.size() < h.size()) hist.resize(h.size(), 0);
    for (std::size_t j = 0; j < h.size(); ++j) hist[j] += h[j];
  }
  return hist;
}

struct TuranStatistic {
  double value = 0.0;  // (1/x) sum_{16 <= n <= x} (omega(n) - loglog n)^2
  double ratio = 0.0;  // value / loglog x
};

inline TuranStatistic turan_statistic(std::span<const std::uint8_t> omega) {
  detail::check_omega_table(omega);
  const std::uint64_t x = omega.size() - 1;
  if (x < kFirstPositiveLogLog) throw bounds_error("turan_statistic: x must be >= 16");
  CompensatedSum acc;
  for (std::uint64_t n = kFirstPositiveLogLog; n <= x; ++n) {
    const double d = omega[n] - loglog(static_cast<double>(n));
    acc.add(d * d);
  }
  TuranStatistic t;
  t.value = acc.value() / static_cast<double>(x);
  t.ratio = t.value / loglog(static_cast<double>(x));
  return t;
}

inline TuranStatistic turan_statistic(std::uint64_t x, const SieveOptions& opt = {}) {
  if (x < kFirstPositiveLogLog || x > kMaxLimit) throw bounds_error("turan_statistic: x must lie in [16, 10^9]");
  auto parts = map_factor_tables(1, x + 1, SieveMode::full(), opt, [](const FactorTable& t) {
    CompensatedSum acc;
    for (std::uint64_t n = std::max(t.range().lo, kFirstPositiveLogLog); n < t.range().hi; ++n) {
      const double d = t.omega(n) - loglog(static_cast<double>(n));
      acc.add(d * d);
    }
    return acc;
  });
  CompensatedSum total;
  for (const auto& p : parts) total.merge(p);
  TuranStatistic t;
  t.value = total.value() / static_cast<double>(x);
  t.ratio = t.value / loglog(static_cast<double>(x));
  return t;
}

/// Fraction of 16 <= n <= x with |omega(n) - loglog n| > kappa sqrt(loglog n).
inline double concentration_check(std::span<const std::uint8_t> omega, double kappa) {
  detail::check_omega_table(omega);
  if (!(kappa > 0)) throw domain_error("concentration_check: kappa must be > 0");
  const std::uint64_t x = omega.size() - 1;
  if (x < kFirstPositiveLogLog) throw bounds_error("concentration_check: x must be >= 16");
  std::uint64_t bad = 0;
  for (std::uint64_t n = kFirstPositiveLogLog; n <= x; ++n) {
    const double L = loglog(static_cast<double>(n));
    if (std::abs(omega[n] - L) > kappa * std::sqrt(L)) ++bad;
  }
  return static_cast<double>(bad) / static_cast<double>(x - kFirstPositiveLogLog + 1);
}

/// Standardized statistic (omega(n) - c) / sqrt(c) against Phi, where c is
/// loglog x, loglog n, or sum_{p <= x} 1/p. Under loglog_n only n >= 16 are
/// used.
inline DistributionReport standardized_statistic(std::span<const std::uint8_t> omega, Centering centering,
                                                 const DistributionOptions& opt = {}) {
  detail::check_omega_table(omega);
  const std::uint64_t x = omega.size() - 1;
  if (x < kFirstPositiveLogLog) throw bounds_error("standardized_statistic: x must be >= 16");
  DistributionReport rep;
  rep.x = x;
  rep.centering = centering;
  rep.histogram = pi_k_histogram(omega);
  rep.kappa = opt.kappa;

  std::vector<double> grid;
  for (double t = opt.plot_min; t <= opt.plot_max + 1e-9; t += opt.plot_step) grid.push_back(t);

  if (centering == Centering::loglog_n) {
    rep.excluded = kFirstPositiveLogLog - 1;
    rep.count = x - rep.excluded;
    detail::EcdfScanner scan(rep.count, grid);
    // For fixed omega = j the value (j - L(n)) / sqrt(L(n)) decreases in n,
    // so each j yields an ascending run when n walks downward; merge the runs.
    struct Cursor {
      double value;
      unsigned j;
      std::uint64_t n;
      bool operator>(const Cursor& o) const { return value > o.value; }
    };
    auto value_at = [](unsigned j, std::uint64_t n) {
      const double L = loglog(static_cast<double>(n));
      return (j - L) / std::sqrt(L);
    };
    auto advance = [&](unsigned j, std::uint64_t from) -> std::optional<std::uint64_t> {
      for (std::uint64_t n = from; n >= kFirstPositiveLogLog; --n)
        if (omega[n] == j) return n;
      return std::nullopt;
    };
    std::priority_queue<Cursor, std::vector<Cursor>, std::greater<>> heap;
    for (unsigned j = 0; j < rep.histogram.size(); ++j)
      if (auto n = advance(j, x)) heap.push({value_at(j, *n), j, *n});
    while (!heap.empty()) {
      const Cursor c = heap.top();
      heap.pop();
      scan.add(c.value, 1);
      if (c.n > kFirstPositiveLogLog)
        if (auto n = advance(c.j, c.n - 1)) heap.push({value_at(c.j, *n), c.j, *n});
    }
    rep.ks = scan.ks();
    rep.ks_at = scan.ks_at();
    rep.ecdf_at_zero = scan.ecdf_at_zero();
    rep.quantiles = scan.quantiles();
    rep.plot = scan.plot();
  } else {
    double c = loglog(static_cast<double>(x));
    if (centering == Centering::prime_sum) {
      CompensatedSum s;
      for (auto p : primes_up_to(x, opt.sieve)) s.add(1.0 / p);
      c = s.value();
    }
    rep.count = x;
    detail::EcdfScanner scan(rep.count, grid);
    for (std::size_t j = 0; j < rep.histogram.size(); ++j)
      if (rep.histogram[j] != 0) scan.add((static_cast<double>(j) - c) / std::sqrt(c), rep.histogram[j]);
    rep.ks = scan.ks();
    rep.ks_at = scan.ks_at();
    rep.ecdf_at_zero = scan.ecdf_at_zero();
    rep.quantiles = scan.quantiles();
    rep.plot = scan.plot();
  }
  const auto t = turan_statistic(omega);
  rep.turan = t.value;
  rep.turan_ratio = t.ratio;
  rep.concentration = concentration_check(omega, opt.kappa);
  return rep;
}

inline DistributionReport standardized_statistic(std::uint64_t x, Centering centering,
                                                 const DistributionOptions& opt = {}) {
  if (x < kFirstPositiveLogLog || x > kMaxLimit) throw bounds_error("standardized_statistic: x must lie in [16, 10^9]");
  const auto omega = omega_table(x, SieveMode::full(), opt.sieve);
  return standardized_statistic(omega, centering, opt);
}

inline void to_json(nlohmann::json& j, const PlotPoint& p) { j = nlohmann::json::array({p.tau, p.ecdf, p.phi}); }

inline void from_json(const nlohmann::json& j, PlotPoint& p) {
  p.tau = j.at(0).get<double>();
  p.ecdf = j.at(1).get<double>();
  p.phi = j.at(2).get<double>();
}

inline void to_json(nlohmann::json& j, const DistributionReport& r) {
  j = nlohmann::json{{"x", r.x},
                     {"centering", to_string(r.centering)},
                     {"excluded", r.excluded},
                     {"count", r.count},
                     {"ks", r.ks},
                     {"ks_at", r.ks_at},
                     {"ecdf_at_zero", r.ecdf_at_zero},
                     {"quantiles", r.quantiles},
                     {"histogram", r.histogram},
                     {"turan", r.turan},
                     {"turan_ratio", r.turan_ratio},
                     {"kappa", r.kappa},
                     {"concentration", r.concentration},
                     {"plot", r.plot}};
}

inline void from_json(const nlohmann::json& j, DistributionReport& r) {
  j.at("x").get_to(r.x);
  r.centering = parse_centering(j.at("centering").get<std::string>());
  j.at("excluded").get_to(r.excluded);
  j.at("count").get_to(r.count);
  j.at("ks").get_to(r.ks);
  j.at("ks_at").get_to(r.ks_at);
  j.at("ecdf_at_zero").get_to(r.ecdf_at_zero);
  j.at("quantiles").get_to(r.quantiles);
  j.at("histogram").get_to(r.histogram);
  j.at("turan").get_to(r.turan);
  j.at("turan_ratio").get_to(r.turan_ratio);
  j.at("kappa").get_to(r.kappa);
  j.at("concentration").get_to(r.concentration);
  j.at("plot").get_to(r.plot);
}

inline std::vector<std::string> validate(const DistributionReport& r) {
  std::vector<std::string> problems;
  if (!(r.ks >= 0.0 && r.ks <= 1.0)) problems.push_back("ks outside [0, 1]");
  std::uint64_t total = 0;
  for (auto c : r.histogram) total += c;
  if (total != r.x) problems.push_back("sum of pi_k(x) != x");
  if (r.count + r.excluded != r.x) problems.push_back("count + excluded != x");
  if (!std::is_sorted(r.quantiles.begin(), r.quantiles.end())) problems.push_back("quantiles not nondecreasing");
  for (std::size_t i = 1; i < r.plot.size(); ++i)
    if (r.plot[i].ecdf < r.plot[i - 1].ecdf) problems.push_back("ecdf not nondecreasing");
  if (r.turan < 0.0) problems.push_back("negative turan statistic");
  if (!(r.concentration >= 0.0 && r.concentration <= 1.0)) problems.push_back("concentration outside [0, 1]");
  return problems;
}

// pi_k(x) < c0 (x / log x) (loglog x + c1)^{k-1} / (k-1)!  for k >= 1.
inline double hr_bound(std::uint64_t x, unsigned k, double c0, double c1) {
  if (k < 1) throw domain_error("hr_bound: k must be >= 1");
  const double lx = std::log(static_cast<double>(x));
  return c0 * static_cast<double>(x) / lx * std::exp((k - 1) * std::log(std::log(lx) + c1) - std::lgamma(static_cast<double>(k)));
}

struct HRFitPoint {
  std::uint64_t x = 0;
  double c0 = 0.0;       // smallest c0 making the bound hold at this x
  unsigned argmax_k = 0;  // the k that forces it
  std::vector<std::uint64_t> histogram;
};

struct HRBoundFit {
  double c1 = 0.0;
  double c0 = 0.0;  // max over the grid
  std::vector<HRFitPoint> points;
};

/// Smallest c0 (for fixed c1) with pi_k(x) < c0 * bound for every k >= 1
/// and every x in `x_values`.
inline HRBoundFit hr_bound_fit(std::span<const std::uint64_t> x_values, double c1, const SieveOptions& opt = {}) {
  if (!(c1 > 0)) throw domain_error("hr_bound_fit: c1 must be > 0");
  if (x_values.empty()) throw domain_error("hr_bound_fit: need at least one x");
  HRBoundFit fit;
  fit.c1 = c1;
  for (auto x : x_values) {
    // loglog x + c1 must stay positive for the bound to make sense
    if (x < 3) throw bounds_error("hr_bound_fit: x must be >= 3");
    HRFitPoint pt;
    pt.x = x;
    pt.histogram = pi_k_histogram(x, opt);
    for (unsigned k = 1; k < pt.histogram.size(); ++k) {
      if (pt.histogram[k] == 0) continue;
      const double need = static_cast<double>(pt.histogram[k]) / hr_bound(x, k, 1.0, c1);
      if (need > pt.c0) {
        pt.c0 = need;
        pt.argmax_k = k;
      }
    }
    // strict inequality
    pt.c0 = std::nextafter(pt.c0, INFINITY);
    fit.c0 = std::max(fit.c0, pt.c0);
    fit.points.push_back(std::move(pt));
  }
  return fit;
}

struct HRVerification {
  std::uint64_t x = 0;
  double slack = 1.0;
  bool holds = true;
  double worst_ratio = 0.0;  // max_k pi_k(x) / (slack * bound)
  unsigned worst_k = 0;
};

inline HRVerification verify_hr_bound(std::uint64_t x, const HRBoundFit& fit, double slack,
                                      const SieveOptions& opt = {}) {
  HRVerification v;
  v.x = x;
  v.slack = slack;
  const auto hist = pi_k_histogram(x, opt);
  for (unsigned k = 1; k < hist.size(); ++k) {
    const double r = static_cast<double>(hist[k]) / (slack * hr_bound(x, k, fit.c0, fit.c1));
    if (r > v.worst_ratio) {
      v.worst_ratio = r;
      v.worst_k = k;
    }
  }
  v.holds = v.worst_ratio < 1.0;
  return v;
}

struct HRTail {
  double eps = 0.0;
  double bound = 0.0;         // sum of the bound over |k - loglog x| >= eps loglog x, k >= 1
  std::uint64_t actual = 0;   // the same sum of pi_k(x)
};

inline HRTail hr_tail(std::uint64_t x, std::span<const std::uint64_t> histogram, const HRBoundFit& fit, double eps) {
  HRTail t;
  t.eps = eps;
  const double L = loglog(static_cast<double>(x));
  for (unsigned k = 1; k < 64; ++k) {
    if (std::abs(k - L) < eps * L) continue;
    t.bound += hr_bound(x, k, fit.c0, fit.c1);
    if (k < histogram.size()) t.actual += histogram[k];
  }
  return t;
}

inline void to_json(nlohmann::json& j, const HRBoundFit& f) {
  j = nlohmann::json{{"c1", f.c1}, {"c0", f.c0}, {"points", nlohmann::json::array()}};
  for (const auto& p : f.points)
    j["points"].push_back({{"x", p.x}, {"c0", p.c0}, {"argmax_k", p.argmax_k}, {"histogram", p.histogram}});
}

}  // namespace ek
