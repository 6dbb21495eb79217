#pragma once

// Truncated continuous-time Markov chain on the box 0 <= n, k <= N for both
// environment modes, solved directly for its stationary distribution.

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <complex>
#include <ostream>
#include <sstream>
#include <vector>

#include "tandemq/error.hpp"
#include "tandemq/model.hpp"

namespace tandemq {

struct TruncatedChain {
  ModelParams params;
  int N = 0;
  Eigen::SparseMatrix<double, Eigen::RowMajor> generator;

  int state_count() const { return 2 * (N + 1) * (N + 1); }
  int index(int mode, int n, int k) const { return (mode * (N + 1) + n) * (N + 1) + k; }
};

// Transitions that would leave the box are dropped. The one exception is the
// corner k = N with both stations busy: station 1 cannot push a job forward,
// so station 2 runs at full speed (otherwise p = 1 would trap mass there).
inline TruncatedChain build_generator(const ModelParams& m, int N) {
  m.validate();
  if (N < 2) throw ConfigError("truncation level N must be >= 2");
  TruncatedChain chain;
  chain.params = m;
  chain.N = N;
  const int S = chain.state_count();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(S) * 5);
  std::vector<double> out(static_cast<std::size_t>(S), 0.0);
  auto add = [&](int from, int to, double rate) {
    if (rate <= 0.0) return;
    trip.emplace_back(from, to, rate);
    out[static_cast<std::size_t>(from)] += rate;
  };
  const double p = m.p;
  for (int n = 0; n <= N; ++n) {
    for (int k = 0; k <= N; ++k) {
      const int s = chain.index(0, n, k);
      if (n < N) add(s, chain.index(0, n + 1, k), m.lambda0);
      add(s, chain.index(1, n, k), m.gamma);
      if (n > 0 && k > 0) {
        if (k < N) {
          add(s, chain.index(0, n - 1, k + 1), p * m.nu1);
          add(s, chain.index(0, n, k - 1), (1.0 - p) * m.nu2);
        } else {
          add(s, chain.index(0, n, k - 1), m.nu2);
        }
      } else if (n > 0) {
        add(s, chain.index(0, n - 1, 1), m.nu1);
      } else if (k > 0) {
        add(s, chain.index(0, 0, k - 1), m.nu2);
      }
      const int r = chain.index(1, n, k);
      if (n < N) add(r, chain.index(1, n + 1, k), m.lambda1);
      add(r, chain.index(0, n, k), m.tau);
    }
  }
  for (int s = 0; s < S; ++s) trip.emplace_back(s, s, -out[static_cast<std::size_t>(s)]);
  chain.generator.resize(S, S);
  chain.generator.setFromTriplets(trip.begin(), trip.end());
  chain.generator.makeCompressed();
  return chain;
}

struct StationaryTable {
  ModelParams params;
  int N = 0;
  std::vector<double> prob;  // indexed like TruncatedChain::index
  double residual = 0.0;     // max |pi Q|

  double at(int mode, int n, int k) const {
    return prob[static_cast<std::size_t>((mode * (N + 1) + n) * (N + 1) + k)];
  }
  double boundary_mass() const {
    double s = 0.0;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j <= N; ++j) {
        s += at(i, N, j) + at(i, j, N);
      }
    for (int i = 0; i < 2; ++i) s -= at(i, N, N);
    return s;
  }
  void write_csv(std::ostream& os) const {
    os << "mode,n,k,prob\n";
    os.precision(17);
    for (int i = 0; i < 2; ++i)
      for (int n = 0; n <= N; ++n)
        for (int k = 0; k <= N; ++k) {
          const double v = at(i, n, k);
          if (v >= 1e-14) os << i << "," << n << "," << k << "," << v << "\n";
        }
  }
};

inline StationaryTable stationary_distribution(const TruncatedChain& chain) {
  const int S = chain.state_count();
  // pi Q = 0 with the first equation replaced by normalization
  Eigen::SparseMatrix<double> qt = chain.generator.transpose();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(qt.nonZeros()) + static_cast<std::size_t>(S));
  for (int col = 0; col < qt.outerSize(); ++col)
    for (Eigen::SparseMatrix<double>::InnerIterator it(qt, col); it; ++it)
      if (it.row() != 0) trip.emplace_back(static_cast<int>(it.row()), col, it.value());
  for (int col = 0; col < S; ++col) trip.emplace_back(0, col, 1.0);
  Eigen::SparseMatrix<double> a(S, S);
  a.setFromTriplets(trip.begin(), trip.end());
  a.makeCompressed();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(S);
  rhs(0) = 1.0;

  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(a);
  if (lu.info() != Eigen::Success) throw NumericalError("stationary_distribution: sparse LU factorization failed");
  Eigen::VectorXd pi = lu.solve(rhs);
  if (lu.info() != Eigen::Success) throw NumericalError("stationary_distribution: sparse LU solve failed");
  // one step of iterative refinement
  Eigen::VectorXd res = rhs - a * pi;
  pi += lu.solve(res);

  StationaryTable t;
  t.params = chain.params;
  t.N = chain.N;
  t.prob.resize(static_cast<std::size_t>(S));
  double total = 0.0;
  for (int s = 0; s < S; ++s) {
    double v = pi(s);
    if (v < 0.0) {
      if (v < -1e-12) throw NumericalError("stationary_distribution: negative probability in solve");
      v = 0.0;
    }
    t.prob[static_cast<std::size_t>(s)] = v;
    total += v;
  }
  for (double& v : t.prob) v /= total;
  Eigen::Map<const Eigen::VectorXd> pv(t.prob.data(), S);
  const Eigen::VectorXd r = chain.generator.transpose() * pv;
  t.residual = r.cwiseAbs().maxCoeff();
  if (t.residual > 1e-11) {
    std::ostringstream os;
    os << "stationary_distribution: balance residual " << t.residual << " exceeds 1e-11";
    throw NumericalError(os.str());
  }
  return t;
}

inline constexpr double kBoundaryMassLimit = 1e-8;

// Solves at N and enlarges the box by 1.5x until the boundary mass is small.
inline StationaryTable solve_truncated(const ModelParams& m, int N = 200, int max_N = 700) {
  require_stable(m);
  int n = N;
  for (;;) {
    StationaryTable t = stationary_distribution(build_generator(m, n));
    const double mass = t.boundary_mass();
    if (mass <= kBoundaryMassLimit) return t;
    const int next = static_cast<int>(std::ceil(n * 1.5));
    if (next > max_N) {
      std::ostringstream os;
      os << "truncated chain: boundary mass " << mass << " at N=" << n << "; use a larger N";
      throw NumericalError(os.str());
    }
    n = next;
  }
}

struct OracleMetrics {
  double EQ1 = 0, EQ2 = 0;
  double empty = 0;  // pi_0(0,0)
  double mode0 = 0, mode1 = 0;
};

inline OracleMetrics oracle_metrics(const StationaryTable& t) {
  if (t.boundary_mass() > kBoundaryMassLimit) {
    throw NumericalError("oracle_metrics: boundary mass too large; increase N");
  }
  OracleMetrics r;
  for (int i = 0; i < 2; ++i)
    for (int n = 0; n <= t.N; ++n)
      for (int k = 0; k <= t.N; ++k) {
        const double v = t.at(i, n, k);
        r.EQ1 += n * v;
        r.EQ2 += k * v;
        (i == 0 ? r.mode0 : r.mode1) += v;
      }
  r.empty = t.at(0, 0, 0);
  return r;
}

// sum_{n,k} pi_mode(n,k) x^n y^k
inline std::complex<double> pgf_from_table(const StationaryTable& t, std::complex<double> x,
                                           std::complex<double> y, int mode) {
  std::complex<double> total{};
  for (int n = t.N; n >= 0; --n) {
    std::complex<double> row{};
    for (int k = t.N; k >= 0; --k) row = row * y + t.at(mode, n, k);
    total = total * x + row;
  }
  return total;
}

}  // namespace tandemq
