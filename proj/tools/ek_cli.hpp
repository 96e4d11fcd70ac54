#pragma once

// Command-line front end. `run` takes the arguments after the program name
// so the commands can be driven in-process by tests.
//
// Exit codes: 0 ok, 1 unexpected failure, 2 configuration error,
// 3 capacity exceeded, 4 strict-mode assertion failed.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ek/ek.hpp"

namespace ek::cli {

enum ExitCode : int { kOk = 0, kFailure = 1, kConfigError = 2, kCapacityError = 3, kAssertionFailed = 4 };

struct config_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Accepts plain integers and scientific notation ("1e8", "2.5e3") that
/// denote a nonnegative integer.
inline std::uint64_t parse_magnitude(const std::string& text) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw config_error("not a number: '" + text + "'");
  }
  if (used != text.size()) throw config_error("not a number: '" + text + "'");
  if (!(v >= 0) || v > 9.007199254740992e15 || std::floor(v) != v)
    throw config_error("expected a nonnegative integer magnitude, got '" + text + "'");
  return static_cast<std::uint64_t>(v);
}

inline std::vector<std::uint64_t> parse_magnitude_list(const std::string& text) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) out.push_back(parse_magnitude(item));
  if (out.empty()) throw config_error("empty list");
  return out;
}

inline std::vector<std::int64_t> parse_int_list(const std::string& text) {
  std::vector<std::int64_t> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    std::size_t used = 0;
    try {
      out.push_back(std::stoll(item, &used));
    } catch (const std::exception&) {
      throw config_error("not an integer: '" + item + "'");
    }
    if (used != item.size()) throw config_error("not an integer: '" + item + "'");
  }
  return out;
}

namespace detail {

inline std::string json_scalar_to_arg(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_array()) {
    std::string s;
    for (const auto& e : v) s += (s.empty() ? "" : ",") + json_scalar_to_arg(e);
    return s;
  }
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  if (v.is_number_unsigned()) return std::to_string(v.get<std::uint64_t>());
  if (v.is_number_float()) {
    std::ostringstream os;
    os.precision(17);
    os << v.get<double>();
    return os.str();
  }
  throw config_error("unsupported config value: " + v.dump());
}

inline bool has_flag(const std::vector<std::string>& args, const std::string& flag) {
  for (const auto& a : args)
    if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
  return false;
}

// Appends "--key value" for every key of the JSON config file that is not
// already given on the command line.
inline std::vector<std::string> merge_config(std::vector<std::string> args) {
  std::optional<std::string> path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (!path) return args;
  std::ifstream in(*path);
  if (!in) throw config_error("cannot read config file " + *path);
  nlohmann::json cfg;
  try {
    cfg = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw config_error(std::string("invalid config JSON: ") + e.what());
  }
  if (!cfg.is_object()) throw config_error("config file must hold a JSON object");
  std::vector<std::string> extra;
  for (const auto& [key, value] : cfg.items()) {
    const std::string flag = "--" + key;
    if (has_flag(args, flag)) continue;
    if (value.is_boolean()) {
      if (value.get<bool>()) extra.push_back(flag);
      continue;
    }
    extra.push_back(flag);
    extra.push_back(json_scalar_to_arg(value));
  }
  args.insert(args.end(), extra.begin(), extra.end());
  return args;
}

}  // namespace detail

struct GlobalOptions {
  unsigned threads = 1;
  std::string out;
  std::string config;
  std::string prime_cache;
  std::string segment_width = "1048576";
  bool verbose = false;
};

class App {
 public:
  App(std::ostream& out, std::ostream& err) : out_(out), err_(err) {}

  int run(std::vector<std::string> args) {
    try {
      args = detail::merge_config(std::move(args));
    } catch (const config_error& e) {
      err_ << "error: " << e.what() << '\n';
      return kConfigError;
    }
    CLI::App app{"Moment-method experiments on the distribution of omega(n)", "ek"};
    app.require_subcommand(1);
    app.fallthrough();
    app.option_defaults()->always_capture_default();
    app.add_option("--threads", g_.threads, "worker threads (results do not depend on it)")->check(CLI::Range(1u, 1024u));
    app.add_option("--out", g_.out, "write output to this file instead of stdout");
    app.add_option("--config", g_.config, "JSON file whose keys mirror flag names; flags win");
    app.add_option("--prime-cache", g_.prime_cache, "optional prime table cache file");
    app.add_option("--segment-width", g_.segment_width, "sieve segment width");
    app.add_flag("--verbose", g_.verbose, "log progress to stderr");

    setup_omega(app);
    setup_moments(app);
    setup_distribution(app);
    setup_hist(app);
    setup_model(app);
    setup_hrfit(app);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
      app.parse(reversed);
    } catch (const CLI::Success& e) {
      return app.exit(e, out_, err_);
    } catch (const CLI::ParseError& e) {
      app.exit(e, out_, err_);
      return kConfigError;
    }
    try {
      return dispatch();
    } catch (const capacity_error& e) {
      err_ << "capacity error: " << e.what() << '\n';
      return kCapacityError;
    } catch (const bounds_error& e) {
      err_ << "error: " << e.what() << '\n';
      return kConfigError;
    } catch (const domain_error& e) {
      err_ << "error: " << e.what() << '\n';
      return kConfigError;
    } catch (const config_error& e) {
      err_ << "error: " << e.what() << '\n';
      return kConfigError;
    } catch (const nlohmann::json::exception& e) {
      err_ << "error: " << e.what() << '\n';
      return kConfigError;
    } catch (const std::exception& e) {
      err_ << "failure: " << e.what() << '\n';
      return kFailure;
    }
  }

 private:
  struct Flags {
    std::string x, z, k = "2", samples = "1000000", seed = "42", zmax = "1000", c1 = "1.0";
    std::string mode = "theorem1", seq = "naturals", coeffs, g = "one", center = "loglog_n";
    std::string format, plot, values, ledger_out, verify, slack, eps = "0.5", kappa = "3";
    bool summary = false, strict = false;
  };

  SieveOptions sieve_options() const { return {parse_magnitude(g_.segment_width), g_.threads}; }

  void log(const std::string& msg) const {
    if (g_.verbose) err_ << "[ek] " << msg << '\n';
  }

  std::ostream& sink() {
    if (g_.out.empty()) return out_;
    if (!file_) {
      file_ = std::make_unique<std::ofstream>(g_.out, std::ios::trunc);
      if (!*file_) throw config_error("cannot open output file " + g_.out);
    }
    return *file_;
  }

  static double parse_real(const std::string& s, const char* what) {
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      throw config_error(std::string("invalid ") + what + ": '" + s + "'");
    }
    if (used != s.size() || !std::isfinite(v)) throw config_error(std::string("invalid ") + what + ": '" + s + "'");
    return v;
  }

  std::string format_or(const std::string& fallback) const {
    const std::string f = flags_.format.empty() ? fallback : flags_.format;
    if (f != "csv" && f != "json") throw config_error("--format must be csv or json");
    return f;
  }

  void setup_omega(CLI::App& app) {
    auto* c = app.add_subcommand("omega", "omega(n) for n <= x, as rows or a summary");
    c->add_option("--x", flags_.x, "upper bound")->required();
    c->add_option("--z", flags_.z, "count only prime divisors <= z");
    c->add_flag("--summary", flags_.summary, "print mean and histogram instead of rows");
    c->add_option("--format", flags_.format, "csv or json");
    c->callback([this] { command_ = "omega"; });
  }

  void setup_moments(CLI::App& app) {
    auto* c = app.add_subcommand("moments", "centered moment experiments");
    c->add_option("--mode", flags_.mode, "theorem1 | prop2 | prop3 | prop4");
    c->add_option("--x", flags_.x, "range bound")->required();
    c->add_option("--k", flags_.k, "moment order");
    c->add_option("--z", flags_.z, "prime bound for P (prop2/prop3/prop4)");
    c->add_option("--seq", flags_.seq, "naturals | shifted_primes | polynomial");
    c->add_option("--coeffs", flags_.coeffs, "polynomial coefficients, constant term first");
    c->add_option("--g", flags_.g, "additive function for prop4: one | chi4");
    c->add_option("--slack", flags_.slack, "error budget multiplier (default 10)");
    c->add_option("--ledger-out", flags_.ledger_out, "write the remainder ledger as CSV");
    c->add_flag("--strict", flags_.strict, "exit 4 if the check fails");
    c->add_option("--format", flags_.format, "json or csv");
    c->callback([this] { command_ = "moments"; });
  }

  void setup_distribution(CLI::App& app) {
    auto* c = app.add_subcommand("distribution", "standardized omega statistic against the normal law");
    c->add_option("--x", flags_.x, "upper bound")->required();
    c->add_option("--center", flags_.center, "loglog_x | loglog_n | prime_sum");
    c->add_option("--kappa", flags_.kappa, "concentration band constant");
    c->add_option("--plot", flags_.plot, "write tau / ECDF / Phi columns to this file");
    c->add_option("--format", flags_.format, "json");
    c->callback([this] { command_ = "distribution"; });
  }

  void setup_hist(CLI::App& app) {
    auto* c = app.add_subcommand("hist", "pi_k(x) histogram");
    c->add_option("--x", flags_.x, "upper bound")->required();
    c->add_option("--format", flags_.format, "csv or json");
    c->callback([this] { command_ = "hist"; });
  }

  void setup_model(CLI::App& app) {
    auto* c = app.add_subcommand("model", "independent Bernoulli model for omega_P");
    c->add_option("--zmax", flags_.zmax, "P = primes <= zmax");
    c->add_option("--samples", flags_.samples, "number of draws");
    c->add_option("--seed", flags_.seed, "master seed");
    c->add_option("--seq", flags_.seq, "density source: naturals | shifted_primes | polynomial");
    c->add_option("--coeffs", flags_.coeffs, "polynomial coefficients, constant term first");
    c->add_option("--values", flags_.values, "write every sampled value to this file");
    c->add_option("--format", flags_.format, "json or csv");
    c->callback([this] { command_ = "model"; });
  }

  void setup_hrfit(CLI::App& app) {
    auto* c = app.add_subcommand("hrfit", "fit c0 in pi_k(x) < c0 x/log x (loglog x + c1)^(k-1)/(k-1)!");
    c->add_option("--x", flags_.x, "comma-separated x values")->required();
    c->add_option("--c1", flags_.c1, "fixed offset c1 > 0");
    c->add_option("--verify", flags_.verify, "re-check the fitted bound at this x");
    c->add_option("--slack", flags_.slack, "slack factor for --verify (default 2)");
    c->add_option("--eps", flags_.eps, "tail width for the bound's tail sum");
    c->callback([this] { command_ = "hrfit"; });
  }

  int dispatch() {
    if (command_ == "omega") return cmd_omega();
    if (command_ == "moments") return cmd_moments();
    if (command_ == "distribution") return cmd_distribution();
    if (command_ == "hist") return cmd_hist();
    if (command_ == "model") return cmd_model();
    if (command_ == "hrfit") return cmd_hrfit();
    throw config_error("no command");
  }

  std::optional<std::filesystem::path> cache_path() const {
    if (g_.prime_cache.empty()) return std::nullopt;
    return std::filesystem::path(g_.prime_cache);
  }

  PrimeSet prime_set_up_to(std::uint64_t z) const {
    if (z < 2) return PrimeSet();
    const auto t = cached_primes_up_to(z, cache_path(), sieve_options());
    return PrimeSet(std::vector<std::uint64_t>(t.begin(), t.end()));
  }

  int cmd_omega() {
    const std::uint64_t x = parse_magnitude(flags_.x);
    if (x < 1 || x > kMaxLimit) throw config_error("--x must lie in [1, 1e9]");
    const SieveMode mode = flags_.z.empty() ? SieveMode::full() : SieveMode::truncated_at(parse_magnitude(flags_.z));
    const std::string fmt = format_or(flags_.summary ? "json" : "csv");
    auto& os = sink();
    if (flags_.summary) {
      std::vector<std::uint64_t> hist;
      auto parts = map_factor_tables(1, x + 1, mode, sieve_options(), [](const FactorTable& t) {
        std::vector<std::uint64_t> h;
        for (auto w : t.omega_values()) {
          if (h.size() <= w) h.resize(w + 1, 0);
          ++h[w];
        }
        return h;
      });
      for (const auto& h : parts) {
        if (hist.size() < h.size()) hist.resize(h.size(), 0);
        for (std::size_t j = 0; j < h.size(); ++j) hist[j] += h[j];
      }
      std::uint64_t total = 0;
      for (std::size_t j = 0; j < hist.size(); ++j) total += j * hist[j];
      const double mean = static_cast<double>(total) / static_cast<double>(x);
      if (fmt == "json") {
        os << nlohmann::json{{"x", x}, {"sum", total}, {"mean", mean}, {"histogram", hist}}.dump() << '\n';
      } else {
        os << "x,sum,mean\n" << x << ',' << total << ',' << mean << '\n';
      }
      return kOk;
    }
    if (fmt == "csv") os << "n,omega\n";
    // rows stream segment by segment so memory stays bounded
    const SieveOptions one_thread{parse_magnitude(g_.segment_width), 1};
    for (const auto& seg : tile(1, x + 1, one_thread.segment_width)) {
      const auto t = sieve_omega(seg, mode);
      for (std::uint64_t n = seg.lo; n < seg.hi; ++n) {
        if (fmt == "csv")
          os << n << ',' << t.omega(n) << '\n';
        else
          os << "{\"n\":" << n << ",\"omega\":" << t.omega(n) << "}\n";
      }
    }
    return kOk;
  }

  SieveSequence make_sequence(std::uint64_t x) const {
    nlohmann::json spec{{"type", flags_.seq}, {"x", x}};
    if (flags_.seq == "polynomial") {
      if (flags_.coeffs.empty()) throw config_error("--seq polynomial needs --coeffs");
      spec["coefficients"] = parse_int_list(flags_.coeffs);
    }
    return sequence_from_json(spec);
  }

  int cmd_moments() {
    const std::uint64_t x = parse_magnitude(flags_.x);
    const auto k = static_cast<unsigned>(parse_magnitude(flags_.k));
    const double slack = flags_.slack.empty() ? 10.0 : parse_real(flags_.slack, "--slack");
    if (!(slack > 0)) throw config_error("--slack must be > 0");
    MomentReport rep;
    std::optional<RemainderLedger> ledger;
    if (flags_.mode == "theorem1") {
      MomentOptions opt{sieve_options(), slack};
      log("theorem1: sieving up to " + std::to_string(x));
      rep = theorem1_check(x, k, opt);
    } else if (flags_.mode == "prop2") {
      if (flags_.z.empty()) throw config_error("--mode prop2 needs --z");
      MomentOptions opt{sieve_options(), slack};
      rep = prop2_check(x, parse_magnitude(flags_.z), k, opt);
    } else if (flags_.mode == "prop3" || flags_.mode == "prop4") {
      const std::uint64_t z = flags_.z.empty() ? 100 : parse_magnitude(flags_.z);
      const auto A = make_sequence(x);
      const auto P = prime_set_up_to(z);
      std::optional<AdditiveFunction> g;
      if (flags_.mode == "prop4") {
        if (flags_.g == "one")
          g = AdditiveFunction::constant(1);
        else if (flags_.g == "chi4")
          g = AdditiveFunction::chi4();
        else
          throw config_error("--g must be one or chi4");
      }
      GeneralMomentOptions opt;
      opt.slack = slack;
      rep = moment_general(A, P, k, g ? &*g : nullptr, opt);
      if (!flags_.ledger_out.empty()) ledger = remainder_ledger(A, P, k);
    } else {
      throw config_error("--mode must be theorem1, prop2, prop3 or prop4");
    }
    auto& os = sink();
    if (format_or("json") == "json") {
      os << nlohmann::json(rep).dump(2) << '\n';
    } else {
      os << moment_csv_header() << '\n' << to_csv_row(rep) << '\n';
    }
    if (ledger) {
      std::ofstream lf(flags_.ledger_out, std::ios::trunc);
      if (!lf) throw config_error("cannot open " + flags_.ledger_out);
      lf.precision(17);
      lf << "d,A_d,r_d,r_d_exact\n";
      for (const auto& [d, r] : ledger->remainders)
        lf << d << ',' << ledger->counts.at(d) << ',' << to_double(r) << ',' << to_string(r) << '\n';
    }
    if (flags_.strict && !rep.pass) {
      err_ << "strict: check failed\n";
      return kAssertionFailed;
    }
    return kOk;
  }

  int cmd_distribution() {
    const std::uint64_t x = parse_magnitude(flags_.x);
    DistributionOptions opt;
    opt.sieve = sieve_options();
    opt.kappa = parse_real(flags_.kappa, "--kappa");
    if (!(opt.kappa > 0)) throw config_error("--kappa must be > 0");
    format_or("json");
    const auto rep = standardized_statistic(x, parse_centering(flags_.center), opt);
    if (!flags_.plot.empty()) {
      std::ofstream pf(flags_.plot, std::ios::trunc);
      if (!pf) throw config_error("cannot open " + flags_.plot);
      pf.precision(10);
      pf << "# tau ecdf phi\n";
      for (const auto& p : rep.plot) pf << p.tau << ' ' << p.ecdf << ' ' << p.phi << '\n';
    }
    sink() << nlohmann::json(rep).dump(2) << '\n';
    return kOk;
  }

  int cmd_hist() {
    const std::uint64_t x = parse_magnitude(flags_.x);
    const auto hist = pi_k_histogram(x, sieve_options());
    auto& os = sink();
    if (format_or("csv") == "csv") {
      os << "k,pi_k\n";
      for (std::size_t k = 0; k < hist.size(); ++k) os << k << ',' << hist[k] << '\n';
    } else {
      os << nlohmann::json{{"x", x}, {"pi_k", hist}}.dump() << '\n';
    }
    return kOk;
  }

  Density density_for_sequence() const {
    if (flags_.seq == "naturals") return Density::unit();
    if (flags_.seq == "shifted_primes") return shifted_prime_density();
    if (flags_.seq == "polynomial") {
      if (flags_.coeffs.empty()) throw config_error("--seq polynomial needs --coeffs");
      return polynomial_density(Polynomial(parse_int_list(flags_.coeffs)));
    }
    throw config_error("--seq must be naturals, shifted_primes or polynomial");
  }

  int cmd_model() {
    const std::uint64_t zmax = parse_magnitude(flags_.zmax);
    const std::uint64_t samples = parse_magnitude(flags_.samples);
    const std::uint64_t seed = parse_magnitude(flags_.seed);
    if (zmax < 2 || zmax > kMaxLimit) throw config_error("--zmax must lie in [2, 1e9]");
    if (samples < 1 || samples > 1'000'000'000) throw config_error("--samples must lie in [1, 1e9]");
    const auto P = prime_set_up_to(zmax);
    const Density h = density_for_sequence();
    const auto values = model_simulate(P, h, seed, samples, g_.threads);
    const auto s = summarize_model(values, P, h);
    if (!flags_.values.empty()) {
      std::ofstream vf(flags_.values, std::ios::trunc);
      if (!vf) throw config_error("cannot open " + flags_.values);
      for (auto v : values) vf << v << '\n';
    }
    auto& os = sink();
    if (format_or("json") == "json") {
      os << nlohmann::json{{"zmax", zmax},
                           {"prime_count", P.size()},
                           {"density", h.name()},
                           {"seed", seed},
                           {"samples", s.samples},
                           {"mu", s.mu},
                           {"sigma2", s.sigma2},
                           {"model_kurtosis", s.kurtosis},
                           {"mean", s.mean},
                           {"variance", s.variance},
                           {"standardized_fourth", s.standardized_fourth},
                           {"histogram", s.histogram}}
                .dump(2)
         << '\n';
    } else {
      os.precision(17);
      os << "samples,mu,sigma2,mean,variance,standardized_fourth\n"
         << s.samples << ',' << s.mu << ',' << s.sigma2 << ',' << s.mean << ',' << s.variance << ','
         << s.standardized_fourth << '\n';
    }
    return kOk;
  }

  int cmd_hrfit() {
    const auto xs = parse_magnitude_list(flags_.x);
    const double c1 = parse_real(flags_.c1, "--c1");
    const auto fit = hr_bound_fit(xs, c1, sieve_options());
    nlohmann::json j = fit;
    const double eps = parse_real(flags_.eps, "--eps");
    j["tails"] = nlohmann::json::array();
    for (const auto& p : fit.points) {
      const auto t = hr_tail(p.x, p.histogram, fit, eps);
      j["tails"].push_back({{"x", p.x}, {"eps", t.eps}, {"bound", t.bound}, {"actual", t.actual}});
    }
    if (!flags_.verify.empty()) {
      const double slack = flags_.slack.empty() ? 2.0 : parse_real(flags_.slack, "--slack");
      const auto v = verify_hr_bound(parse_magnitude(flags_.verify), fit, slack, sieve_options());
      j["verify"] = {{"x", v.x}, {"slack", v.slack}, {"holds", v.holds}, {"worst_ratio", v.worst_ratio}, {"worst_k", v.worst_k}};
    }
    sink() << j.dump(2) << '\n';
    return kOk;
  }

  std::ostream& out_;
  std::ostream& err_;
  std::unique_ptr<std::ofstream> file_;
  GlobalOptions g_;
  Flags flags_;
  std::string command_;
};

inline int run(std::vector<std::string> args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  App app(out, err);
  return app.run(std::move(args));
}

}  // namespace ek::cli
