#pragma once

// Sieve-theoretic generalization: a multiset A of x integers with
// A_d = #{a in A : d | a} = h(d) x / d + r_d for squarefree d, a set of
// primes P, and the centered moments of omega_P(a) (or of a strongly
// additive g) over A.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "ek/arith.hpp"
#include "ek/density.hpp"
#include "ek/errors.hpp"
#include "ek/moment_report.hpp"
#include "ek/moments.hpp"
#include "ek/rational.hpp"
#include "ek/sieve.hpp"

namespace ek {

// Ordered set of distinct primes.
class PrimeSet {
 public:
  PrimeSet() = default;
  explicit PrimeSet(std::vector<std::uint64_t> primes) : primes_(std::move(primes)) {
    for (std::size_t i = 0; i < primes_.size(); ++i) {
      if (i > 0 && primes_[i] <= primes_[i - 1]) throw domain_error("PrimeSet: primes must be strictly increasing");
      if (!is_prime(primes_[i])) throw domain_error("PrimeSet: " + std::to_string(primes_[i]) + " is not prime");
    }
  }

  static PrimeSet up_to(std::uint64_t z) {
    PrimeSet s;
    if (z < 2) return s;
    const auto t = primes_up_to(z);
    s.primes_.assign(t.begin(), t.end());
    return s;
  }

  std::span<const std::uint64_t> primes() const { return primes_; }
  std::size_t size() const { return primes_.size(); }
  bool empty() const { return primes_.empty(); }
  std::uint64_t operator[](std::size_t i) const { return primes_[i]; }
  std::uint64_t max() const { return primes_.empty() ? 0 : primes_.back(); }
  bool contains(std::uint64_t p) const { return std::binary_search(primes_.begin(), primes_.end(), p); }

 private:
  std::vector<std::uint64_t> primes_;
};

// mu_P = sum h(p)/p and sigma_P^2 = sum (h(p)/p)(1 - h(p)/p).
struct PrimeSetStats {
  Rational mu;
  Rational sigma2;
};

inline PrimeSetStats prime_set_stats(const PrimeSet& P, const Density& h) {
  PrimeSetStats s{0, 0};
  for (auto p : P.primes()) {
    const Rational rho = h.ratio(p);
    s.mu += rho;
    s.sigma2 += rho * (1 - rho);
  }
  return s;
}

// Integer polynomial with ascending coefficients c_0 + c_1 t + ...
class Polynomial {
 public:
  explicit Polynomial(std::vector<std::int64_t> coefficients) : c_(std::move(coefficients)) {
    while (!c_.empty() && c_.back() == 0) c_.pop_back();
  }

  const std::vector<std::int64_t>& coefficients() const { return c_; }
  int degree() const { return static_cast<int>(c_.size()) - 1; }

  /// f(n); throws bounds_error if an intermediate leaves 128-bit range.
  __int128 eval(std::uint64_t n) const {
    __int128 acc = 0;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) {
      if (__builtin_mul_overflow(acc, static_cast<__int128>(n), &acc) || __builtin_add_overflow(acc, static_cast<__int128>(*it), &acc))
        throw bounds_error("polynomial value overflows 128 bits");
    }
    return acc;
  }

  /// #{0 <= a < p : f(a) = 0 mod p}
  std::uint64_t root_count_mod(std::uint64_t p) const {
    std::vector<__int128> cm(c_.size());
    for (std::size_t i = 0; i < c_.size(); ++i) cm[i] = ((c_[i] % static_cast<__int128>(p)) + p) % p;
    std::uint64_t roots = 0;
    for (std::uint64_t a = 0; a < p; ++a) {
      __int128 acc = 0;
      for (auto it = cm.rbegin(); it != cm.rend(); ++it) acc = (acc * a + *it) % p;
      if (acc == 0) ++roots;
    }
    return roots;
  }

  std::string to_string() const {
    std::string s;
    for (int i = degree(); i >= 0; --i) {
      if (c_[i] == 0) continue;
      if (!s.empty()) s += c_[i] < 0 ? " - " : " + ";
      else if (c_[i] < 0) s += "-";
      const std::uint64_t a = c_[i] < 0 ? 0 - static_cast<std::uint64_t>(c_[i]) : static_cast<std::uint64_t>(c_[i]);
      if (a != 1 || i == 0) s += std::to_string(a);
      if (i >= 1) s += "t";
      if (i >= 2) s += "^" + std::to_string(i);
    }
    return s.empty() ? "0" : s;
  }

 private:
  std::vector<std::int64_t> c_;
};

enum class SequenceKind { naturals, shifted_primes, polynomial };

inline std::string to_string(SequenceKind k) {
  switch (k) {
    case SequenceKind::naturals: return "naturals";
    case SequenceKind::shifted_primes: return "shifted_primes";
    case SequenceKind::polynomial: return "polynomial";
  }
  return "?";
}

/// h(p) = p / (p - 1), so that h(d) x / d = x / phi(d).
inline Density shifted_prime_density() {
  return Density("p/(p-1)", [](std::uint64_t p) { return ratio(static_cast<std::int64_t>(p), p - 1); });
}

/// h(p) = #{a mod p : f(a) = 0 mod p}, memoized per prime.
inline Density polynomial_density(const Polynomial& f) {
  struct Cache {
    std::mutex mu;
    std::unordered_map<std::uint64_t, std::uint64_t> roots;
  };
  auto cache = std::make_shared<Cache>();
  return Density("roots mod p of " + f.to_string(), [f, cache](std::uint64_t p) {
    std::lock_guard lock(cache->mu);
    auto it = cache->roots.find(p);
    if (it == cache->roots.end()) it = cache->roots.emplace(p, f.root_count_mod(p)).first;
    return to_rational(it->second);
  });
}

// A finite multiset A = {a_1, ..., a_x} with its multiplicative density h.
// Elements are generated on demand.
class SieveSequence {
 public:
  SequenceKind kind() const { return kind_; }
  /// The generating bound (n <= range, or p <= range for shifted primes).
  std::uint64_t range() const { return range_; }
  /// |A|, the x of the sieve hypothesis.
  std::uint64_t size() const { return size_; }
  const Density& density() const { return density_; }
  const std::string& label() const { return label_; }
  const std::optional<Polynomial>& polynomial() const { return poly_; }

  template <class Fn>
  void for_each(Fn&& fn) const {
    switch (kind_) {
      case SequenceKind::naturals:
        for (std::uint64_t n = 1; n <= range_; ++n) fn(n);
        break;
      case SequenceKind::shifted_primes:
        for (std::uint32_t p : *primes_) fn(std::uint64_t{p} - 1);
        break;
      case SequenceKind::polynomial:
        for (std::uint64_t n = 1; n <= range_; ++n) fn(static_cast<std::uint64_t>(poly_->eval(n)));
        break;
    }
  }

  /// Primes of `P` with h(p) = p (every element divisible by p).
  std::vector<std::uint64_t> degenerate_primes(const PrimeSet& P) const {
    std::vector<std::uint64_t> out;
    for (auto p : P.primes())
      if (density_.at_prime(p) == to_rational(p)) out.push_back(p);
    return out;
  }

  friend SieveSequence make_naturals(std::uint64_t x);
  friend SieveSequence make_shifted_primes(std::uint64_t x);
  friend SieveSequence make_polynomial_values(const Polynomial& f, std::uint64_t x);

 private:
  SieveSequence(SequenceKind kind, std::uint64_t range, std::uint64_t size, Density h, std::string label)
      : kind_(kind), range_(range), size_(size), density_(std::move(h)), label_(std::move(label)) {}

  SequenceKind kind_;
  std::uint64_t range_;
  std::uint64_t size_;
  Density density_;
  std::string label_;
  std::optional<Polynomial> poly_;
  std::shared_ptr<const std::vector<std::uint32_t>> primes_;
};

/// A = {1, ..., x}, h = 1.
inline SieveSequence make_naturals(std::uint64_t x) {
  if (x < 1 || x > kMaxLimit) throw bounds_error("make_naturals: x must lie in [1, 10^9]");
  return SieveSequence(SequenceKind::naturals, x, x, Density::unit(), "naturals(x=" + std::to_string(x) + ")");
}

/// A = {p - 1 : p <= x prime}, |A| = pi(x), h(p) = p / (p - 1).
inline SieveSequence make_shifted_primes(std::uint64_t x) {
  if (x < 3 || x > kMaxLimit) throw bounds_error("make_shifted_primes: x must lie in [3, 10^9]");
  auto table = primes_up_to(x);
  auto primes = std::make_shared<const std::vector<std::uint32_t>>(table.begin(), table.end());
  SieveSequence s(SequenceKind::shifted_primes, x, primes->size(), shifted_prime_density(),
                  "shifted_primes(x=" + std::to_string(x) + ")");
  s.primes_ = std::move(primes);
  return s;
}

/// A = {f(n) : 1 <= n <= x}, h(p) = number of roots of f mod p. Requires
/// 1 <= f(n) < 2^64 on [1, x].
inline SieveSequence make_polynomial_values(const Polynomial& f, std::uint64_t x) {
  if (x < 1 || x > kMaxLimit) throw bounds_error("make_polynomial_values: x must lie in [1, 10^9]");
  if (f.degree() < 1) throw domain_error("make_polynomial_values: f must be nonconstant");
  for (std::uint64_t n = 1; n <= x; ++n) {
    const __int128 v = f.eval(n);
    if (v < 1) throw domain_error("make_polynomial_values: f(" + std::to_string(n) + ") < 1");
    if (v > static_cast<__int128>(UINT64_MAX)) throw bounds_error("make_polynomial_values: f(n) exceeds 64 bits");
  }
  SieveSequence s(SequenceKind::polynomial, x, x, polynomial_density(f),
                  "polynomial(" + f.to_string() + ", x=" + std::to_string(x) + ")");
  s.poly_ = f;
  return s;
}

/// Builds a sequence from {"type": naturals|shifted_primes|polynomial, "x": ..., "coefficients": [...]}.
inline SieveSequence sequence_from_json(const nlohmann::json& spec) {
  const std::string type = spec.at("type").get<std::string>();
  const auto x = spec.at("x").get<std::uint64_t>();
  if (type == "naturals") return make_naturals(x);
  if (type == "shifted_primes") return make_shifted_primes(x);
  if (type == "polynomial") return make_polynomial_values(Polynomial(spec.at("coefficients").get<std::vector<std::int64_t>>()), x);
  throw domain_error("unknown sequence type '" + type + "'");
}

/// A_d for squarefree d >= 1.
inline std::uint64_t count_multiples(const SieveSequence& A, std::uint64_t d) {
  if (d < 1 || !is_squarefree(d)) throw domain_error("count_multiples: d must be squarefree, got " + std::to_string(d));
  if (A.kind() == SequenceKind::naturals) return A.range() / d;
  std::uint64_t c = 0;
  A.for_each([&](std::uint64_t a) { c += (a % d == 0); });
  return c;
}

// How many elements of A are divisible by exactly the primes P[i], i in key.
using DivisorPatterns = std::map<std::vector<std::uint32_t>, std::uint64_t>;

inline DivisorPatterns divisor_patterns(const SieveSequence& A, const PrimeSet& P) {
  DivisorPatterns out;
  std::vector<std::uint32_t> key;
  A.for_each([&](std::uint64_t a) {
    key.clear();
    for (std::size_t i = 0; i < P.size(); ++i)
      if (a % P[i] == 0) key.push_back(static_cast<std::uint32_t>(i));
    ++out[key];
  });
  return out;
}

// r_d = A_d - h(d) x / d for every d in D_k(P).
struct RemainderLedger {
  unsigned k = 0;
  std::uint64_t x = 0;
  std::map<std::uint64_t, std::uint64_t> counts;
  std::map<std::uint64_t, Rational> remainders;
  Rational total_abs = 0;

  const Rational& r(std::uint64_t d) const {
    auto it = remainders.find(d);
    if (it == remainders.end()) throw domain_error("remainder ledger has no entry for d = " + std::to_string(d));
    return it->second;
  }
};

inline constexpr std::uint64_t kDefaultLedgerCap = 10'000'000;

/// |D_k(P)| = sum_{j <= k} C(|P|, j).
inline std::uint64_t squarefree_product_count(std::size_t n_primes, unsigned k) {
  std::uint64_t total = 0;
  for (unsigned j = 0; j <= k && j <= n_primes; ++j) {
    const std::uint64_t c = binomial(n_primes, j);
    if (c == UINT64_MAX || total > UINT64_MAX - c) return UINT64_MAX;
    total += c;
  }
  return total;
}

namespace detail {

// Calls fn(d) for each product of at most k of the given primes (including
// d = 1); products must fit in 64 bits.
template <class Fn>
void for_each_small_product(std::span<const std::uint64_t> primes, unsigned k, Fn&& fn) {
  auto rec = [&](auto&& self, std::size_t from, unsigned left, std::uint64_t d) -> void {
    fn(d);
    if (left == 0) return;
    for (std::size_t j = from; j < primes.size(); ++j) {
      if (d > UINT64_MAX / primes[j]) throw capacity_error("squarefree product exceeds 64 bits");
      self(self, j + 1, left - 1, d * primes[j]);
    }
  };
  rec(rec, 0, k, 1);
}

}  // namespace detail

inline RemainderLedger remainder_ledger(const SieveSequence& A, const PrimeSet& P, unsigned k,
                                        const DivisorPatterns& patterns, std::uint64_t cap = kDefaultLedgerCap) {
  if (squarefree_product_count(P.size(), k) > cap) throw capacity_error("remainder_ledger: |D_k(P)| exceeds cap");
  RemainderLedger L;
  L.k = k;
  L.x = A.size();
  detail::for_each_small_product(P.primes(), k, [&](std::uint64_t d) { L.counts[d] = 0; });
  std::vector<std::uint64_t> divisors;
  for (const auto& [key, c] : patterns) {
    divisors.clear();
    for (auto i : key) divisors.push_back(P[i]);
    detail::for_each_small_product(divisors, k, [&](std::uint64_t d) { L.counts.at(d) += c; });
  }
  const Rational x = to_rational(L.x);
  const Density& h = A.density();
  for (const auto& [d, count] : L.counts) {
    Rational hd = 1;
    for (const auto& f : factorize(d)) hd *= h.at_prime(f.prime);
    Rational r = to_rational(count) - hd * x / to_rational(d);
    L.total_abs += abs(r);
    L.remainders.emplace(d, std::move(r));
  }
  return L;
}

inline RemainderLedger remainder_ledger(const SieveSequence& A, const PrimeSet& P, unsigned k,
                                        std::uint64_t cap = kDefaultLedgerCap) {
  if (squarefree_product_count(P.size(), k) > cap) throw capacity_error("remainder_ledger: |D_k(P)| exceeds cap");
  return remainder_ledger(A, P, k, divisor_patterns(A, P), cap);
}

// Strongly additive g, given by its values at primes.
class AdditiveFunction {
 public:
  using Fn = std::function<Rational(std::uint64_t)>;

  AdditiveFunction(std::string name, Fn at_prime, std::optional<Rational> bound = std::nullopt)
      : name_(std::move(name)), fn_(std::move(at_prime)), bound_(std::move(bound)) {}

  static AdditiveFunction constant(const Rational& c = 1) {
    return AdditiveFunction("constant " + c.get_str(), [c](std::uint64_t) { return c; });
  }

  /// g(p) = +1 for p = 1 mod 4, -1 for p = 3 mod 4, g(2) = 0.
  static AdditiveFunction chi4() {
    return AdditiveFunction("chi4", [](std::uint64_t p) {
      if (p == 2) return Rational(0);
      return Rational(p % 4 == 1 ? 1 : -1);
    });
  }

  const std::string& name() const { return name_; }
  Rational at(std::uint64_t p) const { return fn_(p); }

  /// M with |g(p)| <= M on P: the declared bound (validated) or max |g(p)|.
  Rational bound(const PrimeSet& P) const {
    Rational m = 0;
    for (auto p : P.primes()) m = std::max(m, abs(at(p)));
    if (bound_) {
      if (m > *bound_) throw domain_error("additive function exceeds its declared bound M");
      return *bound_;
    }
    return m;
  }

  /// g(a) = sum of g(p) over p in P dividing a.
  Rational evaluate(std::uint64_t a, const PrimeSet& P) const {
    Rational v = 0;
    for (auto p : P.primes())
      if (a % p == 0) v += at(p);
    return v;
  }

  std::vector<Rational> values(const PrimeSet& P) const {
    std::vector<Rational> out;
    for (auto p : P.primes()) out.push_back(at(p));
    return out;
  }

 private:
  std::string name_;
  Fn fn_;
  std::optional<Rational> bound_;
};

struct AdditiveStats {
  Rational mu;      // sum g(p) h(p)/p
  Rational sigma2;  // sum g(p)^2 (h(p)/p)(1 - h(p)/p)
  Rational bound;   // M
};

inline AdditiveStats additive_stats(const AdditiveFunction& g, const PrimeSet& P, const Density& h) {
  AdditiveStats s{0, 0, g.bound(P)};
  for (auto p : P.primes()) {
    const Rational rho = h.ratio(p);
    const Rational v = g.at(p);
    s.mu += v * rho;
    s.sigma2 += v * v * rho * (1 - rho);
  }
  return s;
}

/// Exact sum over a in A of (omega_P(a) - mu_P)^k, or of (g(a) - mu_P(g))^k.
inline Rational empirical_moment_exact(const DivisorPatterns& patterns, const PrimeSet& P, const Density& h,
                                       unsigned k, const AdditiveFunction* g = nullptr) {
  if (g == nullptr) {
    const Rational mu = prime_set_stats(P, h).mu;
    std::vector<std::uint64_t> hist;
    for (const auto& [key, c] : patterns) {
      if (hist.size() <= key.size()) hist.resize(key.size() + 1, 0);
      hist[key.size()] += c;
    }
    return histogram_moment_exact(hist, mu, k);
  }
  const Rational mu = additive_stats(*g, P, h).mu;
  const auto gv = g->values(P);
  Rational acc = 0;
  for (const auto& [key, c] : patterns) {
    Rational v = -mu;
    for (auto i : key) v += gv[i];
    acc += to_rational(c) * pow(v, k);
  }
  return acc;
}

struct GeneralMomentOptions {
  double slack = 10.0;
  std::uint64_t ledger_cap = kDefaultLedgerCap;
};

/// Centered k-th moment of omega_P (or of strongly additive g) over A,
/// against x * (square-full main term), the Gaussian prediction
/// C_k x sigma^k and the budget
///   slack * mu_P^k * sum_{d in D_k(P)} |r_d|          (omega_P), or
///   slack * M^k (sum h(p)/p)^k * sum_{d in D_k(P)} |r_d|  (g).
inline MomentReport moment_general(const SieveSequence& A, const PrimeSet& P, unsigned k,
                                   const AdditiveFunction* g = nullptr, const GeneralMomentOptions& opt = {}) {
  if (k < 1 || k > 12) throw bounds_error("moment_general: k must lie in [1, 12]");
  const Density& h = A.density();
  const auto patterns = divisor_patterns(A, P);
  const auto ledger = remainder_ledger(A, P, k, patterns, opt.ledger_cap);
  const PrimeSetStats stats = prime_set_stats(P, h);
  const Rational x = to_rational(A.size());

  const Rational empirical = empirical_moment_exact(patterns, P, h, k, g);
  std::vector<Rational> weights;
  if (g != nullptr) weights = g->values(P);
  const Rational main = x * main_term_generating<Rational>(k, P.primes(), h, weights);

  Rational scale = pow(stats.mu, k);
  double sigma2 = to_double(stats.sigma2);
  bool in_regime = std::pow(static_cast<double>(k), 3) <= sigma2;
  nlohmann::json details;
  if (g != nullptr) {
    const AdditiveStats gs = additive_stats(*g, P, h);
    scale = pow(gs.bound, k) * pow(stats.mu, k);
    sigma2 = to_double(gs.sigma2);
    const double M = to_double(gs.bound);
    in_regime = M > 0 && std::pow(static_cast<double>(k), 3) * M * M <= sigma2;
    details["g"] = g->name();
    details["M"] = to_string(gs.bound);
    details["mu_g"] = to_string(gs.mu);
    details["sigma2_g"] = to_string(gs.sigma2);
  }
  const Rational budget = Rational(opt.slack) * scale * ledger.total_abs;

  MomentReport rep;
  rep.mode = g == nullptr ? "prop3" : "prop4";
  rep.k = k;
  rep.x = A.size();
  rep.z = P.max();
  rep.empirical = to_double(empirical);
  rep.main_term = to_double(main);
  rep.predicted = gaussian_moment(k).value * to_double(x) * std::pow(sigma2, 0.5 * k);
  rep.ratio = rep.predicted != 0.0 ? rep.empirical / rep.predicted : 0.0;
  rep.error_budget = to_double(budget);
  rep.pass = abs(Rational(empirical - main)) <= budget;
  details["sequence"] = A.label();
  details["density"] = h.name();
  details["prime_count"] = P.size();
  details["mu"] = to_string(stats.mu);
  details["sigma2"] = to_string(stats.sigma2);
  details["in_uniformity_regime"] = in_regime;
  details["empirical_exact"] = to_string(empirical);
  details["main_term_exact"] = to_string(main);
  details["ledger_size"] = ledger.remainders.size();
  details["ledger_total_abs"] = to_double(ledger.total_abs);
  details["ledger_total_abs_exact"] = to_string(ledger.total_abs);
  details["slack"] = opt.slack;
  std::vector<std::uint64_t> degenerate;
  if (A.kind() == SequenceKind::polynomial) degenerate = A.degenerate_primes(P);
  details["degenerate_primes"] = degenerate;
  rep.details = std::move(details);
  return rep;
}

struct DecompositionResult {
  Rational lhs;  // sum_a (omega_P(a) - mu_P)^k, or the g-weighted analogue
  Rational rhs;  // sum over k-tuples of g(p_1)...g(p_k) [G(r) x + sum_{m | R} r_m E(r, m)]
  std::uint64_t tuples = 0;
  Rational ledger_total_abs;
  bool equal() const { return lhs == rhs; }
};

inline constexpr std::uint64_t kDefaultTupleCap = 10'000'000;

/// Evaluates both sides of the exact tuple expansion
///   sum_a (sum_{p in P} g(p) f_p(a))^k = sum_{p_1..p_k} prod g(p_i) [G(r) x + sum_{m|R} r_m E(r,m)]
/// with measured remainders r_m.
inline DecompositionResult decomposition_check(const SieveSequence& A, const PrimeSet& P, unsigned k,
                                               const AdditiveFunction* g = nullptr,
                                               std::uint64_t tuple_cap = kDefaultTupleCap) {
  if (k < 1) throw bounds_error("decomposition_check: k must be >= 1");
  std::uint64_t tuples = 1;
  for (unsigned i = 0; i < k; ++i) {
    if (P.size() != 0 && tuples > tuple_cap / P.size()) throw capacity_error("decomposition_check: too many tuples");
    tuples *= P.size();
  }
  const Density& h = A.density();
  const auto patterns = divisor_patterns(A, P);
  const auto ledger = remainder_ledger(A, P, k, patterns);
  DecompositionResult out;
  out.lhs = empirical_moment_exact(patterns, P, h, k, g);
  out.rhs = 0;
  out.tuples = P.empty() ? 0 : tuples;
  out.ledger_total_abs = ledger.total_abs;
  if (P.empty()) return out;

  const Rational x = to_rational(A.size());
  std::vector<Rational> gv = g != nullptr ? g->values(P) : std::vector<Rational>(P.size(), Rational(1));
  std::vector<std::size_t> idx(k, 0);
  std::vector<std::uint64_t> tuple(k);
  while (true) {
    Rational weight = 1;
    for (unsigned i = 0; i < k; ++i) {
      tuple[i] = P[idx[i]];
      weight *= gv[idx[i]];
    }
    if (weight != 0) {
      const auto r = PrimePowerProduct::from_primes(tuple);
      const auto primes = r.radical_primes();
      Rational term = G(r, h) * x;
      for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << primes.size()); ++mask) {
        std::uint64_t m = 1;
        for (std::size_t i = 0; i < primes.size(); ++i)
          if ((mask >> i) & 1) m *= primes[i];
        const Rational& rm = ledger.r(m);
        if (rm != 0) term += rm * E_mask(r, mask, h);
      }
      out.rhs += weight * term;
    }
    unsigned i = 0;
    while (i < k && ++idx[i] == P.size()) idx[i++] = 0;
    if (i == k) break;
  }
  return out;
}

}  // namespace ek
