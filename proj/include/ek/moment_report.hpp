#pragma once

#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace ek {

// One moment experiment: empirical centered k-th power sum against the
// square-full main term, the Gaussian prediction and the error budget.
struct MomentReport {
  std::string mode;  // theorem1 | prop2 | prop3 | prop4
  unsigned k = 0;
  std::uint64_t x = 0;
  std::uint64_t z = 0;
  double empirical = 0.0;
  double main_term = 0.0;
  double predicted = 0.0;
  double ratio = 0.0;
  double error_budget = 0.0;
  bool pass = false;
  nlohmann::json details = nlohmann::json::object();
};

inline void to_json(nlohmann::json& j, const MomentReport& r) {
  j = nlohmann::json{{"mode", r.mode},
                     {"k", r.k},
                     {"x", r.x},
                     {"z", r.z},
                     {"empirical", r.empirical},
                     {"main_term", r.main_term},
                     {"predicted", r.predicted},
                     {"ratio", r.ratio},
                     {"error_budget", r.error_budget},
                     {"pass", r.pass},
                     {"details", r.details}};
}

inline void from_json(const nlohmann::json& j, MomentReport& r) {
  j.at("mode").get_to(r.mode);
  j.at("k").get_to(r.k);
  j.at("x").get_to(r.x);
  j.at("z").get_to(r.z);
  j.at("empirical").get_to(r.empirical);
  j.at("main_term").get_to(r.main_term);
  j.at("predicted").get_to(r.predicted);
  j.at("ratio").get_to(r.ratio);
  j.at("error_budget").get_to(r.error_budget);
  j.at("pass").get_to(r.pass);
  r.details = j.value("details", nlohmann::json::object());
}

inline std::string moment_csv_header() { return "mode,k,x,z,empirical,main_term,predicted,ratio,error_budget,pass"; }

inline std::string to_csv_row(const MomentReport& r) {
  std::ostringstream os;
  os.precision(17);
  os << r.mode << ',' << r.k << ',' << r.x << ',' << r.z << ',' << r.empirical << ',' << r.main_term << ','
     << r.predicted << ',' << r.ratio << ',' << r.error_budget << ',' << (r.pass ? "true" : "false");
  return os.str();
}

/// Internal-consistency problems of a (possibly re-parsed) report; empty when valid.
inline std::vector<std::string> validate(const MomentReport& r) {
  std::vector<std::string> problems;
  if (r.mode != "theorem1" && r.mode != "prop2" && r.mode != "prop3" && r.mode != "prop4")
    problems.push_back("unknown mode '" + r.mode + "'");
  if (r.k < 1) problems.push_back("k must be >= 1");
  if (r.x < 1) problems.push_back("x must be >= 1");
  if (!(r.error_budget >= 0.0)) problems.push_back("error_budget must be >= 0");
  for (double v : {r.empirical, r.main_term, r.predicted, r.ratio})
    if (!std::isfinite(v)) problems.push_back("non-finite numeric field");
  if (r.predicted != 0.0 && std::abs(r.ratio - r.empirical / r.predicted) > 1e-9 * std::abs(r.ratio) + 1e-300)
    problems.push_back("ratio != empirical / predicted");
  if (r.mode != "theorem1") {
    const double gap = std::abs(r.empirical - r.main_term);
    // pass is decided exactly upstream; only flag disagreements beyond double rounding
    const double tol = 1e-9 * (std::abs(r.empirical) + std::abs(r.main_term) + r.error_budget);
    if (r.pass && gap > r.error_budget + tol) problems.push_back("pass=true but |empirical - main_term| > error_budget");
    if (!r.pass && gap < r.error_budget - tol) problems.push_back("pass=false but |empirical - main_term| < error_budget");
  }
  return problems;
}

}  // namespace ek
