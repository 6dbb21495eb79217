#pragma once

#include <cmath>
#include <sstream>
#include <string>
#include <utility>

#include "json.hpp"
#include "tandemq/error.hpp"

namespace tandemq {

// Rates of the two-station tandem network with coupled processors and global
// breakdowns. Station 1 receives the share p of the capacity while both
// stations are busy, station 2 the share 1 - p.
struct ModelParams {
  double lambda0 = 1.0;  // arrival rate, operating mode
  double lambda1 = 0.5;  // arrival rate, setup mode
  double nu1 = 4.0;
  double nu2 = 5.0;
  double gamma = 2.0;  // breakdown rate
  double tau = 4.0;    // setup completion rate
  double p = 0.5;

  double phi1() const { return p; }
  double phi2() const { return 1.0 - p; }

  void validate() const {
    auto fail = [](const std::string& what) { throw ConfigError("invalid parameters: " + what); };
    auto finite = [](double v) { return std::isfinite(v); };
    if (!finite(lambda0) || lambda0 < 0.0) fail("lambda0 must be >= 0");
    if (!finite(lambda1) || lambda1 < 0.0) fail("lambda1 must be >= 0");
    if (!finite(nu1) || nu1 <= 0.0) fail("nu1 must be > 0");
    if (!finite(nu2) || nu2 <= 0.0) fail("nu2 must be > 0");
    if (!finite(gamma) || gamma <= 0.0) fail("gamma must be > 0");
    if (!finite(tau) || tau <= 0.0) fail("tau must be > 0");
    if (!finite(p) || p < 0.0 || p > 1.0) fail("p must lie in [0,1]");
  }

  bool operator==(const ModelParams&) const = default;
};

struct LoadProfile {
  double rho01 = 0, rho02 = 0, rho11 = 0, rho12 = 0;
  double rho0 = 0, rho1 = 0;
  double margin = 0;  // tau - (rho0 tau + rho1 gamma)
};

inline LoadProfile load_profile(const ModelParams& m) {
  LoadProfile l;
  l.rho01 = m.lambda0 / m.nu1;
  l.rho02 = m.lambda0 / m.nu2;
  l.rho11 = m.lambda1 / m.nu1;
  l.rho12 = m.lambda1 / m.nu2;
  l.rho0 = l.rho01 + l.rho02;
  l.rho1 = l.rho11 + l.rho12;
  l.margin = m.tau - (l.rho0 * m.tau + l.rho1 * m.gamma);
  return l;
}

struct StabilityReport {
  bool stable = false;
  double slack = 0;  // margin / tau
};

// Work brought in per unit time must stay strictly below the capacity that is
// available while the network operates. Equality is unstable.
inline StabilityReport stability_check(const ModelParams& m) {
  const LoadProfile l = load_profile(m);
  return {l.margin > 0.0, l.margin / m.tau};
}

// (P(operating), P(setup)) of the autonomous two-state environment.
inline std::pair<double, double> mode_probabilities(const ModelParams& m) {
  const double s = m.tau + m.gamma;
  return {m.tau / s, m.gamma / s};
}

// Probability that the network is operating and both stations are empty. It
// does not depend on p.
inline double empty_probability(const ModelParams& m) {
  const LoadProfile l = load_profile(m);
  if (!(l.margin > 0.0)) {
    std::ostringstream os;
    os << "unstable parameters (margin " << l.margin << " <= 0)";
    throw UnstableError(os.str());
  }
  return m.tau / (m.tau + m.gamma) * (l.margin / m.tau);
}

inline void require_stable(const ModelParams& m) { (void)empty_probability(m); }

inline void to_json(nlohmann::json& j, const ModelParams& m) {
  j = nlohmann::json{{"lambda0", m.lambda0}, {"lambda1", m.lambda1}, {"nu1", m.nu1},
                     {"nu2", m.nu2},         {"gamma", m.gamma},     {"tau", m.tau},
                     {"p", m.p}};
}

// Strict: every key must be present, numeric, and no other key is accepted.
inline void from_json(const nlohmann::json& j, ModelParams& m) {
  if (!j.is_object()) throw ConfigError("params: expected a JSON object");
  static const char* const keys[] = {"lambda0", "lambda1", "nu1", "nu2", "gamma", "tau", "p"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : keys) known = known || it.key() == k;
    if (!known) throw ConfigError("params: unknown key '" + it.key() + "'");
    if (!it.value().is_number()) throw ConfigError("params: key '" + it.key() + "' must be a number");
  }
  for (const char* k : keys) {
    if (!j.contains(k)) throw ConfigError(std::string("params: missing key '") + k + "'");
  }
  m.lambda0 = j.at("lambda0").get<double>();
  m.lambda1 = j.at("lambda1").get<double>();
  m.nu1 = j.at("nu1").get<double>();
  m.nu2 = j.at("nu2").get<double>();
  m.gamma = j.at("gamma").get<double>();
  m.tau = j.at("tau").get<double>();
  m.p = j.at("p").get<double>();
}

}  // namespace tandemq
