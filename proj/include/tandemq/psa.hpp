#pragma once

// Power-series expansion of the mode-0 generating function in the coupling
// fraction p:  Pi0(x,y) = sum_m p^m V_m(x,y),  Pi1 = gamma/D(x) Pi0.
//
// Each V_m is a polynomial of degree m+1 in y whose coefficients are analytic
// functions of x. We store those coefficients as x-jets about a center x0, so
// a "table" is table[m][j] = Taylor expansion of the coefficient of y^j in V_m.
//
// Recursion (G is linear in y with root Ytilde(x)):
//   V_0 = V00 [G10 h + G00] / G,            h = -G00(x,Yt)/G10(x,Yt)
//   V_m = G10/G * Q_{m-1},   Q = V(x,y) - V(x,Yt) - V(0,y) + V(0,Yt).
// The factor (y - Yt) is removed by synthetic division of the y-polynomial,
// the 1/x factors by cancel-division at x0 = 0.

#include <complex>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <tuple>
#include <utility>
#include <vector>

#include "tandemq/error.hpp"
#include "tandemq/jets.hpp"
#include "tandemq/kernel.hpp"
#include "tandemq/model.hpp"

namespace tandemq {

using XJet = Jet1<cplx>;
using YPolyJets = std::vector<XJet>;       // coefficient of y^j, j = 0..deg
using PsaTable = std::vector<YPolyJets>;   // indexed by m

struct PsaMetrics {
  double p = 0;
  int M = 0;
  double EQ1 = 0, EQ2 = 0;
  std::vector<double> v1, v2;  // d/dx V_m(x,1) and d/dy V_m(1,y) at 1

  static void write_csv_header(std::ostream& os, int M) {
    os << "p,M,EQ1,EQ2";
    for (int m = 0; m <= M; ++m) os << ",v_m1_" << m;
    for (int m = 0; m <= M; ++m) os << ",v_m2_" << m;
    os << "\n";
  }
  void write_csv_row(std::ostream& os) const {
    std::ostringstream s;
    s.precision(12);
    s << p << "," << M << "," << EQ1 << "," << EQ2;
    for (double v : v1) s << "," << v;
    for (double v : v2) s << "," << v;
    os << s.str() << "\n";
  }
};

class PsaSolver {
 public:
  static constexpr int kDefaultMaxOrder = 8;

  explicit PsaSolver(const ModelParams& params, int max_order = kDefaultMaxOrder)
      : m_(params), k_(params), max_order_(max_order) {
    params.validate();
    v00_ = empty_probability(params);
  }

  const ModelParams& params() const { return m_; }
  int max_order() const { return max_order_; }

  // Coefficient table for V_0..V_M at center x0, each coefficient of order K.
  PsaTable coefficient_functions(cplx x0, int K, int M) const {
    check_order(M);
    if (K < 0) throw std::invalid_argument("PSA: negative jet order");
    const Key key{x0.real(), x0.imag(), K, M};
    {
      std::lock_guard<std::mutex> lock(mu_);
      auto it = memo_.find(key);
      if (it != memo_.end()) return it->second;
    }
    PsaTable t;
    if (x0 == cplx{}) {
      // every level loses one order to the cancel-division by x
      t = build(x0, K + M + 2, M, nullptr);
    } else {
      // one spare order for the 0/0 ratio at x0 = 1
      const PsaTable zero = values_at_zero(M);
      t = build(x0, K + 1, M, &zero);
    }
    for (auto& level : t)
      for (auto& c : level) c = c.truncated(K);
    std::lock_guard<std::mutex> lock(mu_);
    memo_.emplace(key, t);
    return t;
  }

  // Jet of V_0 at (x0, y0) with orders (Kx, Ky).
  TaylorJet2<cplx> v0_jet(std::pair<cplx, cplx> center, int Kx, int Ky) const {
    return vm_jet(0, center, Kx, Ky);
  }

  TaylorJet2<cplx> vm_jet(int m, std::pair<cplx, cplx> center, int Kx, int Ky) const {
    const PsaTable t = coefficient_functions(center.first, Kx, m);
    return expand_in_y(t[static_cast<std::size_t>(m)], center, Kx, Ky);
  }

  // Mode-1 coefficient function gamma / D(x) * V_m.
  TaylorJet2<cplx> vm_state1_jet(int m, std::pair<cplx, cplx> center, int Kx, int Ky) const {
    const TaylorJet2<cplx> v = vm_jet(m, center, Kx, Ky);
    const XJet x = XJet::variable(center.first, Kx);
    const XJet w = m_.gamma / k_.D(x);
    return TaylorJet2<cplx>::from_x(w, center.second, Ky) * v;
  }

  // V_m(x,y) at a point.
  cplx value(int m, cplx x, cplx y) const {
    const PsaTable t = coefficient_functions(x, 0, m);
    cplx r{};
    const YPolyJets& a = t[static_cast<std::size_t>(m)];
    for (std::size_t j = a.size(); j-- > 0;) r = r * y + a[j].value();
    return r;
  }

  // Truncated series sum_{m<=M} p^m V_m(x,y) for the model's own p.
  cplx pgf(cplx x, cplx y, int M) const {
    check_order(M);
    const PsaTable t = coefficient_functions(x, 0, M);
    cplx total{}, pw(1.0);
    for (int m = 0; m <= M; ++m) {
      cplx r{};
      const YPolyJets& a = t[static_cast<std::size_t>(m)];
      for (std::size_t j = a.size(); j-- > 0;) r = r * y + a[j].value();
      total += pw * r;
      pw *= m_.p;
    }
    return total;
  }

  // Mean queue lengths from the truncated series.
  PsaMetrics metrics(int M) const {
    require_stable(m_);
    check_order(M);
    const PsaTable t = coefficient_functions(cplx(1.0), 1, M);
    PsaMetrics r;
    r.p = m_.p;
    r.M = M;
    const double scale = 1.0 + m_.gamma / m_.tau;
    r.EQ1 = m_.lambda1 * m_.gamma / (m_.tau * (m_.tau + m_.gamma));
    double pw = 1.0;
    for (int m = 0; m <= M; ++m) {
      cplx d1{}, d2{};
      const YPolyJets& a = t[static_cast<std::size_t>(m)];
      for (std::size_t j = 0; j < a.size(); ++j) {
        d1 += a[j][1];
        d2 += static_cast<double>(j) * a[j][0];
      }
      r.v1.push_back(d1.real());
      r.v2.push_back(d2.real());
      r.EQ1 += scale * pw * d1.real();
      r.EQ2 += scale * pw * d2.real();
      pw *= m_.p;
    }
    return r;
  }

 private:
  using Key = std::tuple<double, double, int, int>;

  void check_order(int M) const {
    if (M < 0 || M > max_order_) {
      throw ConfigError("PSA truncation order M=" + std::to_string(M) + " outside [0, " +
                        std::to_string(max_order_) + "]");
    }
  }

  PsaTable values_at_zero(int M) const {
    const PsaTable t = coefficient_functions(cplx{}, 0, M);
    return t;
  }

  static TaylorJet2<cplx> expand_in_y(const YPolyJets& a, std::pair<cplx, cplx> center, int Kx, int Ky) {
    TaylorJet2<cplx> r(center, Kx, Ky);
    const cplx y0 = center.second;
    for (std::size_t j = 0; j < a.size(); ++j) {
      // y^j = sum_l C(j,l) y0^(j-l) (y - y0)^l
      for (int l = 0; l <= std::min<int>(static_cast<int>(j), Ky); ++l) {
        const cplx w = detail::binomial(static_cast<int>(j), l) * std::pow(y0, static_cast<int>(j) - l);
        for (int i = 0; i <= Kx; ++i) r(i, l) += w * a[j][i];
      }
    }
    return r;
  }

  // Divides by x: regular division away from 0, cancel-division at 0.
  static XJet over_x(const XJet& f) {
    if (f.center() == cplx{}) return jet_cancel_div(f, 1);
    return f / XJet::variable(f.center(), f.order());
  }

  PsaTable build(cplx x0, int K, int M, const PsaTable* zero) const {
    const XJet x = XJet::variable(x0, K);
    const XJet d = k_.D(x);
    const XJet g1 = k_.g1(x);
    const XJet yt = m_.nu2 * d / g1;
    const double nu1 = m_.nu1, nu2 = m_.nu2;

    const XJet g00 = nu1 * d * (x * yt - yt * yt);  // x G00(x, Yt)
    const XJet g10 = d * (-nu2 * x + (nu2 - nu1) * x * yt + nu1 * yt * yt);
    const XJet h = cancel_ratio(-g00, g10, 1);
    const XJet t2 = nu1 * d * over_x(h - 1.0);
    const XJet t1 = nu1 * d + (nu2 - nu1) * d * h;

    PsaTable table;
    table.push_back({v00_ * (t1 + t2 * yt) / g1, v00_ * t2 / g1});

    // x G10(x,y) = c0 + c1 y + c2 y^2
    const XJet c0 = -nu2 * d * x;
    const XJet c1 = (nu2 - nu1) * d * x;
    const XJet c2 = nu1 * d;

    for (int m = 1; m <= M; ++m) {
      const YPolyJets& prev = table.back();
      const int Kcur = prev[0].order();
      std::vector<XJet> s(static_cast<std::size_t>(m), XJet(x0, Kcur - (x0 == cplx{} ? 1 : 0)));
      const XJet ytk = yt.truncated(s[0].order());
      for (std::size_t j = 1; j < prev.size(); ++j) {
        const cplx at0 = zero ? (*zero)[static_cast<std::size_t>(m - 1)][j].value() : prev[j].value();
        const XJet bj = over_x(prev[j] - at0);
        // (y^j - Yt^j) / (y - Yt) = sum_{l<j} y^l Yt^(j-1-l)
        XJet pw = XJet::constant(cplx(1.0), x0, bj.order());
        for (std::size_t l = j; l-- > 0;) {
          s[l] = s[l] + bj * pw;
          pw = pw * ytk;
        }
      }
      const int Ko = s[0].order();
      const XJet a0 = c0.truncated(Ko), a1 = c1.truncated(Ko), a2 = c2.truncated(Ko);
      const XJet den = g1.truncated(Ko);
      YPolyJets out(static_cast<std::size_t>(m) + 2, XJet(x0, Ko));
      for (std::size_t l = 0; l < s.size(); ++l) {
        out[l] = out[l] + a0 * s[l];
        out[l + 1] = out[l + 1] + a1 * s[l];
        out[l + 2] = out[l + 2] + a2 * s[l];
      }
      for (XJet& o : out) o = o / den;
      table.push_back(std::move(out));
    }
    return table;
  }

  ModelParams m_;
  KernelFunctions k_;
  int max_order_;
  double v00_ = 0;
  mutable std::mutex mu_;
  mutable std::map<Key, PsaTable> memo_;
};

inline PsaMetrics psa_metrics(const ModelParams& params, int M) { return PsaSolver(params).metrics(M); }

}  // namespace tandemq
