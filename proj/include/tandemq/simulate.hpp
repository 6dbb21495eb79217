#pragma once

// Discrete-event simulation of the untruncated network. Each job carries an
// exponential amount of work; stations drain the work of their head-of-line
// job at a speed set by the current capacity split, so completion events are
// rescheduled whenever speeds change. Stale events are skipped by version.

#include <boost/math/distributions/students_t.hpp>
#include <array>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <queue>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "tandemq/error.hpp"
#include "tandemq/model.hpp"

namespace tandemq {

struct Estimate {
  double mean = 0.0;
  double half_width = 0.0;  // 95% confidence half-width

  bool covers(double v) const { return std::abs(v - mean) <= half_width; }
};

struct SimulationResult {
  Estimate mode0_fraction, empty_fraction, EQ1, EQ2;
  std::uint64_t events = 0;
  int batches = 0;

  void write_csv(std::ostream& os) const {
    std::ostringstream s;
    s.precision(12);
    s << "metric,mean,half_width\n";
    auto row = [&](const char* name, const Estimate& e) { s << name << "," << e.mean << "," << e.half_width << "\n"; };
    row("mode0_fraction", mode0_fraction);
    row("empty_fraction", empty_fraction);
    row("EQ1", EQ1);
    row("EQ2", EQ2);
    os << s.str();
  }
};

struct SimulationOptions {
  double horizon = 2.0e5;  // measured time, after warm-up
  double warmup = 1.0e3;
  int batches = 20;
  std::uint64_t seed = 20240611;
};

namespace detail {

enum class SimEvent : int { arrival, mode_change, done1, done2 };

struct Scheduled {
  double time;
  SimEvent kind;
  std::uint64_t version;
  bool operator>(const Scheduled& o) const { return time > o.time; }
};

class NetworkSimulator {
 public:
  NetworkSimulator(const ModelParams& m, std::uint64_t seed) : m_(m), rng_(seed) {}

  SimulationResult run(const SimulationOptions& opt) {
    if (opt.batches < 2) throw ConfigError("simulation needs at least 2 batches");
    if (!(opt.horizon > 0.0) || opt.warmup < 0.0) throw ConfigError("simulation horizon must be positive");
    const double batch_len = opt.horizon / opt.batches;
    std::vector<std::array<double, 4>> acc(static_cast<std::size_t>(opt.batches), {0, 0, 0, 0});

    schedule_arrival();
    schedule_mode_change();
    const double end = opt.warmup + opt.horizon;
    std::uint64_t events = 0;
    while (!queue_.empty()) {
      const Scheduled ev = queue_.top();
      queue_.pop();
      if (!current(ev)) continue;
      const double t_next = std::min(ev.time, end);
      accumulate(acc, opt.warmup, batch_len, now_, t_next);
      drain(t_next - now_);
      now_ = t_next;
      if (ev.time >= end) break;
      ++events;
      handle(ev.kind);
    }

    SimulationResult r;
    r.events = events;
    r.batches = opt.batches;
    const int b = opt.batches;
    const boost::math::students_t dist(b - 1);
    const double q = boost::math::quantile(boost::math::complement(dist, 0.025));
    std::array<Estimate*, 4> out = {&r.mode0_fraction, &r.empty_fraction, &r.EQ1, &r.EQ2};
    for (std::size_t i = 0; i < 4; ++i) {
      double s = 0, s2 = 0;
      for (const auto& a : acc) {
        const double v = a[i] / batch_len;
        s += v;
        s2 += v * v;
      }
      const double mean = s / b;
      const double var = std::max(0.0, (s2 - b * mean * mean) / (b - 1));
      out[i]->mean = mean;
      out[i]->half_width = q * std::sqrt(var / b);
    }
    return r;
  }

 private:
  double exp_sample(double rate) { return std::exponential_distribution<double>(rate)(rng_); }

  bool current(const Scheduled& e) const { return e.version == version_[static_cast<std::size_t>(e.kind)]; }

  void push(SimEvent kind, double time) {
    const auto i = static_cast<std::size_t>(kind);
    ++version_[i];
    queue_.push({time, kind, version_[i]});
  }
  void cancel(SimEvent kind) { ++version_[static_cast<std::size_t>(kind)]; }

  double speed1() const {
    if (mode_ != 0 || n_ == 0) return 0.0;
    return k_ > 0 ? m_.p : 1.0;
  }
  double speed2() const {
    if (mode_ != 0 || k_ == 0) return 0.0;
    return n_ > 0 ? 1.0 - m_.p : 1.0;
  }

  void schedule_arrival() {
    const double rate = mode_ == 0 ? m_.lambda0 : m_.lambda1;
    if (rate > 0.0) push(SimEvent::arrival, now_ + exp_sample(rate));
    else cancel(SimEvent::arrival);
  }
  void schedule_mode_change() { push(SimEvent::mode_change, now_ + exp_sample(mode_ == 0 ? m_.gamma : m_.tau)); }

  // Reschedules both completions from the current remaining work and speeds.
  void reschedule_service() {
    const double s1 = speed1(), s2 = speed2();
    if (s1 > 0.0) push(SimEvent::done1, now_ + work1_ / s1);
    else cancel(SimEvent::done1);
    if (s2 > 0.0) push(SimEvent::done2, now_ + work2_ / s2);
    else cancel(SimEvent::done2);
  }

  void drain(double dt) {
    work1_ = std::max(0.0, work1_ - speed1() * dt);
    work2_ = std::max(0.0, work2_ - speed2() * dt);
  }

  void handle(SimEvent kind) {
    switch (kind) {
      case SimEvent::arrival:
        if (n_++ == 0) work1_ = exp_sample(m_.nu1);
        schedule_arrival();
        break;
      case SimEvent::mode_change:
        mode_ = 1 - mode_;
        schedule_mode_change();
        schedule_arrival();
        break;
      case SimEvent::done1:
        --n_;
        work1_ = n_ > 0 ? exp_sample(m_.nu1) : 0.0;
        if (k_++ == 0) work2_ = exp_sample(m_.nu2);
        break;
      case SimEvent::done2:
        --k_;
        work2_ = k_ > 0 ? exp_sample(m_.nu2) : 0.0;
        break;
    }
    reschedule_service();
  }

  void accumulate(std::vector<std::array<double, 4>>& acc, double warmup, double batch_len, double t0,
                  double t1) const {
    double a = std::max(t0, warmup);
    while (a < t1) {
      auto idx = static_cast<std::size_t>((a - warmup) / batch_len);
      if (idx >= acc.size()) idx = acc.size() - 1;
      const double batch_end = warmup + (static_cast<double>(idx) + 1.0) * batch_len;
      const double b = (idx + 1 == acc.size()) ? t1 : std::min(t1, batch_end);
      const double dt = b - a;
      acc[idx][0] += mode_ == 0 ? dt : 0.0;
      acc[idx][1] += (mode_ == 0 && n_ == 0 && k_ == 0) ? dt : 0.0;
      acc[idx][2] += n_ * dt;
      acc[idx][3] += k_ * dt;
      a = b;
    }
  }

  ModelParams m_;
  std::mt19937_64 rng_;
  std::priority_queue<Scheduled, std::vector<Scheduled>, std::greater<>> queue_;
  std::array<std::uint64_t, 4> version_{};
  double now_ = 0.0;
  int mode_ = 0;
  long n_ = 0, k_ = 0;
  double work1_ = 0.0, work2_ = 0.0;
};

}  // namespace detail

inline SimulationResult simulate(const ModelParams& m, const SimulationOptions& opt = {}) {
  m.validate();
  require_stable(m);
  return detail::NetworkSimulator(m, opt.seed).run(opt);
}

}  // namespace tandemq
