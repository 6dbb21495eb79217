#pragma once

// Shared fixtures for the test programs: parameter sets, a per-process cache
// of truncated-chain solutions, and small independent numerical helpers.

#include <complex>
#include <functional>
#include <map>
#include <random>
#include <tuple>

#include "tandemq/model.hpp"
#include "tandemq/oracle.hpp"

namespace tandemq::testing {

using cplx = std::complex<double>;

// Baseline rates: lambda0 = 1, lambda1 = 0.5, nu1 = 4, nu2 = 5,
// gamma = 2, tau = 4.
inline ModelParams baseline_params(double p) {
  ModelParams m;
  m.p = p;
  return m;
}

inline const StationaryTable& cached_table(const ModelParams& m, int N) {
  using Key = std::tuple<double, double, double, double, double, double, double, int>;
  static std::map<Key, StationaryTable> cache;
  const Key key{m.lambda0, m.lambda1, m.nu1, m.nu2, m.gamma, m.tau, m.p, N};
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, solve_truncated(m, N)).first;
  return it->second;
}

inline double relative_error(double a, double ref) { return std::abs(a - ref) / std::abs(ref); }

// Random stable parameter sets with at least `min_slack` relative margin.
class ParamSampler {
 public:
  explicit ParamSampler(std::uint64_t seed) : rng_(seed) {}

  ModelParams next(double min_slack = 0.2, bool interior_p = true) {
    std::uniform_real_distribution<double> rate(0.5, 6.0), load(0.1, 2.0), share(0.05, 0.95), unit(0.0, 1.0);
    for (;;) {
      ModelParams m;
      m.nu1 = rate(rng_);
      m.nu2 = rate(rng_);
      m.lambda0 = load(rng_);
      m.lambda1 = load(rng_) * unit(rng_);
      m.gamma = rate(rng_);
      m.tau = rate(rng_);
      m.p = interior_p ? share(rng_) : unit(rng_);
      if (stability_check(m).slack >= min_slack) return m;
    }
  }

  double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng_); }
  cplx in_disk(double r = 1.0) {
    for (;;) {
      const cplx z(uniform(-r, r), uniform(-r, r));
      if (std::abs(z) < r) return z;
    }
  }

 private:
  std::mt19937_64 rng_;
};

// Plain bisection on a sign change of f over [a, b].
inline double bisect(const std::function<double(double)>& f, double a, double b, int iters = 200) {
  double fa = f(a);
  for (int i = 0; i < iters && b - a > 0.0; ++i) {
    const double mid = 0.5 * (a + b);
    const double fm = f(mid);
    if ((fm < 0) == (fa < 0)) {
      a = mid;
      fa = fm;
    } else {
      b = mid;
    }
  }
  return 0.5 * (a + b);
}

}  // namespace tandemq::testing
