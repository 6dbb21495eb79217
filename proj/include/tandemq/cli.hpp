#pragma once

// Command-line front end. Everything here writes to caller-supplied streams so
// the commands can be driven from tests as well as from the executable.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "tandemq/bvp.hpp"
#include "tandemq/closedform.hpp"
#include "tandemq/error.hpp"
#include "tandemq/kernel.hpp"
#include "tandemq/model.hpp"
#include "tandemq/oracle.hpp"
#include "tandemq/psa.hpp"
#include "tandemq/simulate.hpp"

namespace tandemq::cli {

enum ExitCode : int { kOk = 0, kUnstable = 1, kConfig = 2, kNumerical = 3 };

struct MethodOptions {
  int M = 5;
  int N = 200;
  int n_grid = 512;
  std::uint64_t seed = SimulationOptions{}.seed;
  double horizon = SimulationOptions{}.horizon;
  int batches = SimulationOptions{}.batches;
};

struct SweepSpec {
  std::string variable = "p";
  double from = 0.0, to = 1.0;
  int steps = 11;
  std::vector<std::string> methods = {"psa", "ctmc"};
  std::vector<int> orders = {0, 1, 2, 3, 4};  // PSA truncation orders
  std::string series_variable;               // optional second parameter
  std::vector<double> series_values;
};

struct RunConfig {
  ModelParams params;
  std::string method = "psa";
  MethodOptions options;
  SweepSpec sweep;
  std::string output;  // empty: standard output
};

inline const std::vector<std::string>& method_names() {
  static const std::vector<std::string> v = {"psa", "bvp", "ctmc", "sim", "closed"};
  return v;
}

inline void require_method(const std::string& m) {
  const auto& v = method_names();
  if (std::find(v.begin(), v.end(), m) == v.end()) {
    throw ConfigError("unknown method '" + m + "' (expected psa, bvp, ctmc, sim or closed)");
  }
}

inline double& param_ref(ModelParams& m, const std::string& name) {
  if (name == "p") return m.p;
  if (name == "gamma") return m.gamma;
  if (name == "tau") return m.tau;
  if (name == "lambda0") return m.lambda0;
  if (name == "lambda1") return m.lambda1;
  throw ConfigError("sweep variable '" + name + "' not one of p, gamma, tau, lambda0, lambda1");
}

// ---------------------------------------------------------------------------
// Config parsing
// ---------------------------------------------------------------------------

namespace detail {

using nlohmann::json;

inline void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(where + ": expected a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    if (!ok) throw ConfigError(where + ": unknown key '" + it.key() + "'");
  }
}

template <class T>
T get_as(const json& j, const std::string& key, const std::string& where) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

inline double get_number(const json& j, const std::string& key, const std::string& where) {
  if (!j.at(key).is_number()) throw ConfigError(where + "." + key + ": expected a number");
  return j.at(key).get<double>();
}

inline int get_int(const json& j, const std::string& key, const std::string& where) {
  if (!j.at(key).is_number_integer()) throw ConfigError(where + "." + key + ": expected an integer");
  return j.at(key).get<int>();
}

inline std::string position(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace detail

// Parses a JSON config on top of `base`. Unknown keys anywhere are rejected;
// missing keys keep the value from `base`.
inline RunConfig parse_config(const std::string& text, RunConfig base = {}) {
  using detail::json;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("config parse error at " + detail::position(text, e.byte) + ": " + e.what());
  }
  detail::check_keys(j, "config", {"params", "method", "options", "sweep", "output"});
  RunConfig c = std::move(base);
  if (j.contains("params")) {
    const json& p = j.at("params");
    detail::check_keys(p, "config.params", {"lambda0", "lambda1", "nu1", "nu2", "gamma", "tau", "p"});
    json full = c.params;
    for (auto it = p.begin(); it != p.end(); ++it) full[it.key()] = it.value();
    full.get_to(c.params);
  }
  if (j.contains("method")) {
    c.method = detail::get_as<std::string>(j, "method", "config");
    require_method(c.method);
  }
  if (j.contains("options")) {
    const json& o = j.at("options");
    detail::check_keys(o, "config.options", {"M", "N", "n_grid", "seed", "horizon", "batches"});
    const std::string w = "config.options";
    if (o.contains("M")) c.options.M = detail::get_int(o, "M", w);
    if (o.contains("N")) c.options.N = detail::get_int(o, "N", w);
    if (o.contains("n_grid")) c.options.n_grid = detail::get_int(o, "n_grid", w);
    if (o.contains("seed")) {
      if (!o.at("seed").is_number_unsigned()) throw ConfigError(w + ".seed: expected a non-negative integer");
      c.options.seed = o.at("seed").get<std::uint64_t>();
    }
    if (o.contains("horizon")) c.options.horizon = detail::get_number(o, "horizon", w);
    if (o.contains("batches")) c.options.batches = detail::get_int(o, "batches", w);
  }
  if (j.contains("sweep")) {
    const json& s = j.at("sweep");
    const std::string w = "config.sweep";
    detail::check_keys(s, w, {"variable", "from", "to", "steps", "methods", "orders", "series"});
    if (s.contains("variable")) c.sweep.variable = detail::get_as<std::string>(s, "variable", w);
    if (s.contains("from")) c.sweep.from = detail::get_number(s, "from", w);
    if (s.contains("to")) c.sweep.to = detail::get_number(s, "to", w);
    if (s.contains("steps")) c.sweep.steps = detail::get_int(s, "steps", w);
    if (s.contains("methods")) c.sweep.methods = detail::get_as<std::vector<std::string>>(s, "methods", w);
    if (s.contains("orders")) c.sweep.orders = detail::get_as<std::vector<int>>(s, "orders", w);
    if (s.contains("series")) {
      const json& r = s.at("series");
      detail::check_keys(r, w + ".series", {"variable", "values"});
      c.sweep.series_variable = detail::get_as<std::string>(r, "variable", w + ".series");
      c.sweep.series_values = detail::get_as<std::vector<double>>(r, "values", w + ".series");
    }
  }
  if (j.contains("output")) c.output = detail::get_as<std::string>(j, "output", "config");
  return c;
}

inline RunConfig load_config_file(const std::string& path, RunConfig base = {}) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), std::move(base));
}

inline void validate_config(const RunConfig& c) {
  c.params.validate();
  require_method(c.method);
  if (c.options.M < 0) throw ConfigError("M must be >= 0");
  if (c.options.N < 2) throw ConfigError("N must be >= 2");
  if (c.options.n_grid < 8 || (c.options.n_grid & (c.options.n_grid - 1)) != 0) {
    throw ConfigError("n_grid must be a power of two >= 8");
  }
  if (!(c.options.horizon > 0.0)) throw ConfigError("horizon must be positive");
  if (c.options.batches < 2) throw ConfigError("batches must be >= 2");
}

// ---------------------------------------------------------------------------
// Method dispatch
// ---------------------------------------------------------------------------

struct MethodResult {
  std::string method;  // label, possibly with a series suffix
  long order = 0;      // M for psa, N for ctmc, n_grid for bvp, batches for sim, 0 for closed
  double EQ1 = std::numeric_limits<double>::quiet_NaN();
  double EQ2 = std::numeric_limits<double>::quiet_NaN();
  std::string status = "ok";
};

inline bool at_endpoint(const ModelParams& m) { return m.p == 0.0 || m.p == 1.0; }

// Runs one method. At p in {0, 1} the bvp route (and psa, when
// `redirect_psa`) is replaced by the closed form and flagged "redirected".
// Errors are caught and turned into a status.
inline MethodResult run_method(const std::string& method, const ModelParams& m, const MethodOptions& o,
                               int psa_order, bool redirect_psa = true) {
  MethodResult r;
  r.method = method;
  if (method == "psa") r.order = psa_order;
  else if (method == "bvp") r.order = o.n_grid;
  else if (method == "ctmc") r.order = o.N;
  else if (method == "sim") r.order = o.batches;
  try {
    m.validate();
    if (!stability_check(m).stable) {
      r.status = "unstable";
      return r;
    }
    const bool redirect = at_endpoint(m) && (method == "bvp" || (method == "psa" && redirect_psa));
    if (method == "closed" || redirect) {
      if (!at_endpoint(m)) throw ConfigError("closed form exists only at p = 0 or p = 1");
      const EndpointSolution s = closedform_metrics(m.p == 0.0 ? Endpoint::p0 : Endpoint::p1, m);
      r.order = 0;
      r.EQ1 = s.EQ1;
      r.EQ2 = s.EQ2;
      if (redirect) r.status = "redirected";
      return r;
    }
    if (method == "psa") {
      const PsaMetrics pm = PsaSolver(m).metrics(psa_order);
      r.EQ1 = pm.EQ1;
      r.EQ2 = pm.EQ2;
    } else if (method == "bvp") {
      const BvpMetrics bm = bvp_metrics(solve_bvp(m, o.n_grid));
      r.EQ1 = bm.EQ1;
      r.EQ2 = bm.EQ2;
    } else if (method == "ctmc") {
      const StationaryTable t = solve_truncated(m, o.N);
      const OracleMetrics om = oracle_metrics(t);
      r.order = t.N;
      r.EQ1 = om.EQ1;
      r.EQ2 = om.EQ2;
    } else if (method == "sim") {
      SimulationOptions so;
      so.seed = o.seed;
      so.horizon = o.horizon;
      so.batches = o.batches;
      const SimulationResult sr = simulate(m, so);
      r.EQ1 = sr.EQ1.mean;
      r.EQ2 = sr.EQ2.mean;
    } else {
      require_method(method);
    }
  } catch (const UnstableError&) {
    r.status = "unstable";
  } catch (const ConfigError&) {
    throw;
  } catch (const NumericalError&) {
    r.status = "numerical_error";
  }
  return r;
}

inline std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  std::ostringstream s;
  s.precision(12);
  s << v;
  return s.str();
}

inline void write_result(std::ostream& os, const MethodResult& r) {
  os << r.method << "," << r.order << "," << fmt(r.EQ1) << "," << fmt(r.EQ2) << "," << r.status << "\n";
}

inline int thread_count() {
  if (const char* env = std::getenv("TANDEMQ_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs tasks on up to `threads` workers; results land in task order.
template <class R>
std::vector<R> parallel_map(const std::vector<std::function<R()>>& tasks, int threads) {
  std::vector<R> out(tasks.size());
  std::vector<std::exception_ptr> errors(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < tasks.size();) {
      try {
        out[i] = tasks[i]();
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int n = std::max(1, std::min<int>(threads, static_cast<int>(tasks.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

inline int cmd_stability(const RunConfig& c, std::ostream& out) {
  c.params.validate();
  const LoadProfile l = load_profile(c.params);
  const StabilityReport s = stability_check(c.params);
  const auto [pr0, pr1] = mode_probabilities(c.params);
  out << "stable," << (s.stable ? "true" : "false") << "\n";
  out << "margin," << fmt(l.margin) << "\n";
  out << "slack," << fmt(s.slack) << "\n";
  out << "rho0," << fmt(l.rho0) << "\n";
  out << "rho1," << fmt(l.rho1) << "\n";
  out << "mode0_probability," << fmt(pr0) << "\n";
  out << "mode1_probability," << fmt(pr1) << "\n";
  if (s.stable) out << "empty_probability," << fmt(empty_probability(c.params)) << "\n";
  return s.stable ? kOk : kUnstable;
}

inline int cmd_metrics(const RunConfig& c, std::ostream& out, std::ostream& err, bool detail = false) {
  validate_config(c);
  require_stable(c.params);
  const MethodResult r = run_method(c.method, c.params, c.options, c.options.M);
  if (r.status == "redirected") err << "note: " << c.method << " is not defined at p = " << c.params.p
                                    << "; reporting the closed form\n";
  if (detail && r.status == "ok" && c.method == "psa") {
    const PsaMetrics pm = PsaSolver(c.params).metrics(c.options.M);
    PsaMetrics::write_csv_header(out, c.options.M);
    pm.write_csv_row(out);
  } else if (detail && r.status == "ok" && c.method == "sim") {
    SimulationOptions so;
    so.seed = c.options.seed;
    so.horizon = c.options.horizon;
    so.batches = c.options.batches;
    simulate(c.params, so).write_csv(out);
  } else {
    out << "method,M_or_N,EQ1,EQ2,status\n";
    write_result(out, r);
  }
  if (r.status == "unstable") return kUnstable;
  if (r.status == "numerical_error") return kNumerical;
  return kOk;
}

// All applicable methods side by side, with relative deviations from the
// truncated chain.
inline int cmd_compare(const RunConfig& c, std::ostream& out, std::ostream& err) {
  validate_config(c);
  require_stable(c.params);
  std::vector<std::string> methods = {"ctmc", "psa", "bvp", "sim"};
  if (at_endpoint(c.params)) methods.insert(methods.begin() + 1, "closed");
  std::vector<std::function<MethodResult()>> tasks;
  for (const auto& name : methods)
    tasks.emplace_back([&c, name] { return run_method(name, c.params, c.options, c.options.M); });
  std::vector<MethodResult> rows = parallel_map(tasks, thread_count());
  const MethodResult& ref = rows.front();
  out << "method,M_or_N,EQ1,EQ2,rel_delta_EQ1,rel_delta_EQ2,status\n";
  bool numerical = ref.status != "ok";
  for (MethodResult& r : rows) {
    if (r.status == "redirected") {
      err << "note: " << r.method << " redirected to the closed form at p = " << c.params.p << "\n";
      out << r.method << ",,,,,," << r.status << "\n";
      continue;
    }
    numerical = numerical || r.status == "numerical_error";
    out << r.method << "," << r.order << "," << fmt(r.EQ1) << "," << fmt(r.EQ2) << ","
        << fmt((r.EQ1 - ref.EQ1) / ref.EQ1) << "," << fmt((r.EQ2 - ref.EQ2) / ref.EQ2) << "," << r.status
        << "\n";
  }
  return numerical ? kNumerical : kOk;
}

inline std::vector<double> sweep_grid(const SweepSpec& s) {
  if (s.steps < 1) throw ConfigError("sweep steps must be >= 1");
  std::vector<double> v;
  for (int i = 0; i < s.steps; ++i) {
    v.push_back(s.steps == 1 ? s.from : s.from + (s.to - s.from) * i / (s.steps - 1));
  }
  return v;
}

// Long-format table: one row per (value, series value, method, order).
// Unstable points are flagged and the sweep continues.
inline int cmd_sweep(const RunConfig& c, std::ostream& out) {
  validate_config(c);
  const SweepSpec& s = c.sweep;
  ModelParams probe = c.params;
  (void)param_ref(probe, s.variable);
  if (!s.series_variable.empty()) {
    (void)param_ref(probe, s.series_variable);
    if (s.series_variable == s.variable) throw ConfigError("series variable equals the sweep variable");
    if (s.series_values.empty()) throw ConfigError("series needs at least one value");
  }
  if (s.methods.empty()) throw ConfigError("sweep needs at least one method");
  for (const auto& m : s.methods) require_method(m);
  for (int M : s.orders)
    if (M < 0 || M > PsaSolver::kDefaultMaxOrder) throw ConfigError("PSA order outside [0, 8]");

  struct Point {
    double value;
    MethodResult result;
  };
  std::vector<std::function<Point()>> tasks;
  const std::vector<double> grid = sweep_grid(s);
  std::vector<std::optional<double>> series;
  if (s.series_variable.empty()) series.emplace_back();
  for (double v : s.series_values) series.emplace_back(v);

  for (double v : grid) {
    for (const auto& sv : series) {
      for (const auto& method : s.methods) {
        std::vector<int> orders = method == "psa" ? s.orders : std::vector<int>{c.options.M};
        if (orders.empty()) orders.push_back(c.options.M);
        for (int M : orders) {
          tasks.emplace_back([&c, &s, v, sv, method, M] {
            ModelParams m = c.params;
            param_ref(m, s.variable) = v;
            std::string label = method;
            if (sv) {
              param_ref(m, s.series_variable) = *sv;
              label += "@" + s.series_variable + "=" + fmt(*sv);
            }
            MethodResult r;
            try {
              r = run_method(method, m, c.options, M, false);
            } catch (const ConfigError&) {
              r.status = "invalid_params";
            }
            r.method = label;
            return Point{v, r};
          });
        }
      }
    }
  }
  const std::vector<Point> rows = parallel_map(tasks, thread_count());
  out << "sweep_var,value,method,M_or_N,EQ1,EQ2,status\n";
  for (const Point& p : rows) {
    out << s.variable << "," << fmt(p.value) << ",";
    write_result(out, p.result);
  }
  return kOk;
}

inline int cmd_contour_dump(const RunConfig& c, std::ostream& out) {
  c.params.validate();
  contour_L(c.params, c.options.n_grid).write_csv(out);
  return kOk;
}

inline int cmd_map_dump(const RunConfig& c, std::ostream& out) {
  validate_config(c);
  theodorsen_solve(contour_L(c.params, c.options.n_grid), c.options.n_grid).write_csv(out);
  return kOk;
}

// Fig-style sweep presets.
inline void apply_preset(RunConfig& c, const std::string& name) {
  if (name == "share-sweep") {
    c.params = ModelParams{};
    c.sweep = SweepSpec{};
    c.sweep.steps = 21;
    c.sweep.methods = {"psa", "ctmc"};
    c.sweep.orders = {0, 1, 2, 3, 4};
  } else if (name == "switch-rate") {
    c.params = ModelParams{};
    c.sweep = SweepSpec{};
    c.sweep.steps = 21;
    c.sweep.methods = {"psa"};
    c.sweep.orders = {3};
    c.sweep.series_variable = "gamma";
    c.sweep.series_values = {1.0, 2.0, 3.0};
  } else {
    throw ConfigError("unknown preset '" + name + "' (expected share-sweep or switch-rate)");
  }
}

// ---------------------------------------------------------------------------
// Argument parsing
// ---------------------------------------------------------------------------

inline constexpr const char* kColumnsHelp = R"(CSV columns:
  metrics            method,M_or_N,EQ1,EQ2,status
  metrics --detail   psa: p,M,EQ1,EQ2,v_m1_0..M,v_m2_0..M
                     sim: metric,mean,half_width
  compare            method,M_or_N,EQ1,EQ2,rel_delta_EQ1,rel_delta_EQ2,status
  sweep              sweep_var,value,method,M_or_N,EQ1,EQ2,status
  contour-dump       phi,re_y,im_y,rho,x_preimage
  map-dump           phi,psi,re_y,im_y
M_or_N is M for psa, the box size N for ctmc, n_grid for bvp, the batch count
for sim and 0 for closed. Status is ok, redirected, unstable, numerical_error
or invalid_params. Exit codes: 0 ok, 1 unstable, 2 usage or config error,
3 numerical failure. TANDEMQ_THREADS sets the worker count.)";

struct Overrides {
  std::string config;
  std::optional<double> lambda0, lambda1, nu1, nu2, gamma, tau, p;
  std::optional<std::string> method;
  std::optional<int> M, N, n_grid, batches;
  std::optional<std::uint64_t> seed;
  std::optional<double> horizon;
  std::optional<std::string> sweep_var, series_var;
  std::optional<double> from, to;
  std::optional<int> steps;
  std::vector<std::string> methods;
  std::vector<int> orders;
  std::vector<double> series_values;
  std::optional<std::string> output, preset;
  bool detail = false;
};

inline void add_options(CLI::App* app, Overrides& o, bool sweep_options) {
  app->add_option("-c,--config", o.config, "JSON config file");
  app->add_option("--lambda0", o.lambda0, "arrival rate, operating mode");
  app->add_option("--lambda1", o.lambda1, "arrival rate, setup mode");
  app->add_option("--nu1", o.nu1, "service rate, station 1");
  app->add_option("--nu2", o.nu2, "service rate, station 2");
  app->add_option("--gamma", o.gamma, "breakdown rate");
  app->add_option("--tau", o.tau, "setup completion rate");
  app->add_option("--p", o.p, "capacity share of station 1");
  app->add_option("--method", o.method, "psa, bvp, ctmc, sim or closed");
  app->add_option("-M,--order", o.M, "PSA truncation order");
  app->add_option("-N,--box", o.N, "truncated chain box size");
  app->add_option("--n-grid", o.n_grid, "contour/map nodes (power of two)");
  app->add_option("--seed", o.seed, "simulation seed");
  app->add_option("--horizon", o.horizon, "simulated time");
  app->add_option("--batches", o.batches, "simulation batch count");
  app->add_option("-o,--output", o.output, "output file (default: stdout)");
  if (sweep_options) {
    app->add_option("--preset", o.preset, "share-sweep or switch-rate");
    app->add_option("--var", o.sweep_var, "p, gamma, tau, lambda0 or lambda1");
    app->add_option("--from", o.from, "first value");
    app->add_option("--to", o.to, "last value");
    app->add_option("--steps", o.steps, "number of values");
    app->add_option("--methods", o.methods, "methods to run")->delimiter(',');
    app->add_option("--orders", o.orders, "PSA orders")->delimiter(',');
    app->add_option("--series-var", o.series_var, "second parameter");
    app->add_option("--series-values", o.series_values, "values of the second parameter")->delimiter(',');
  }
}

// Config file first, then preset, then flags.
inline RunConfig resolve(const Overrides& o) {
  RunConfig c;
  if (!o.config.empty()) c = load_config_file(o.config);
  if (o.preset) apply_preset(c, *o.preset);
  auto set = [](auto& dst, const auto& src) {
    if (src) dst = *src;
  };
  set(c.params.lambda0, o.lambda0);
  set(c.params.lambda1, o.lambda1);
  set(c.params.nu1, o.nu1);
  set(c.params.nu2, o.nu2);
  set(c.params.gamma, o.gamma);
  set(c.params.tau, o.tau);
  set(c.params.p, o.p);
  set(c.method, o.method);
  set(c.options.M, o.M);
  set(c.options.N, o.N);
  set(c.options.n_grid, o.n_grid);
  set(c.options.seed, o.seed);
  set(c.options.horizon, o.horizon);
  set(c.options.batches, o.batches);
  set(c.sweep.variable, o.sweep_var);
  set(c.sweep.from, o.from);
  set(c.sweep.to, o.to);
  set(c.sweep.steps, o.steps);
  if (!o.methods.empty()) c.sweep.methods = o.methods;
  if (!o.orders.empty()) c.sweep.orders = o.orders;
  set(c.sweep.series_variable, o.series_var);
  if (!o.series_values.empty()) c.sweep.series_values = o.series_values;
  set(c.output, o.output);
  return c;
}

// Entry point shared by the executable and the tests. `args` excludes argv[0].
inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Stationary metrics of a two-station tandem queue with coupled processors and global breakdowns"};
  app.footer(kColumnsHelp);
  app.require_subcommand(1);
  Overrides o;
  struct Cmd {
    const char* name;
    const char* help;
    bool sweep;
  };
  const Cmd cmds[] = {{"stability", "stability verdict, loads, empty and mode probabilities", false},
                      {"metrics", "mean queue lengths by one method", false},
                      {"compare", "all applicable methods with deviations from the truncated chain", false},
                      {"sweep", "means over a parameter range", true},
                      {"contour-dump", "samples of the contour L", false},
                      {"map-dump", "boundary correspondence of the conformal map", false}};
  std::map<std::string, CLI::App*> subs;
  for (const Cmd& cmd : cmds) {
    CLI::App* s = app.add_subcommand(cmd.name, cmd.help);
    s->footer(kColumnsHelp);
    add_options(s, o, cmd.sweep);
    if (std::string(cmd.name) == "metrics") s->add_flag("--detail", o.detail, "per-method detail table");
    subs[cmd.name] = s;
  }

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      std::stringstream ss;
      app.exit(e, ss, ss);
      out << ss.str();
      return kOk;
    }
    std::stringstream ss;
    app.exit(e, ss, ss);
    err << ss.str();
    return kConfig;
  }

  try {
    const RunConfig c = resolve(o);
    std::ofstream file;
    std::ostream* dst = &out;
    if (!c.output.empty()) {
      file.open(c.output);
      if (!file) throw ConfigError("cannot write '" + c.output + "'");
      dst = &file;
    }
    if (subs["stability"]->parsed()) return cmd_stability(c, *dst);
    if (subs["metrics"]->parsed()) return cmd_metrics(c, *dst, err, o.detail);
    if (subs["compare"]->parsed()) return cmd_compare(c, *dst, err);
    if (subs["sweep"]->parsed()) return cmd_sweep(c, *dst);
    if (subs["contour-dump"]->parsed()) return cmd_contour_dump(c, *dst);
    if (subs["map-dump"]->parsed()) return cmd_map_dump(c, *dst);
    return kConfig;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kConfig;
  } catch (const UnstableError& e) {
    err << "unstable: " << e.what() << "\n";
    return kUnstable;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kConfig;
  }
}

}  // namespace tandemq::cli
