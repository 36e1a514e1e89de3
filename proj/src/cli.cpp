#include "dmnls/cli.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <csignal>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "dmnls/dispersion.hpp"
#include "dmnls/groundstate.hpp"
#include "dmnls/lab.hpp"
#include "dmnls/linear.hpp"
#include "dmnls/reference.hpp"
#include "dmnls/solver.hpp"
#include "dmnls/spectral.hpp"

#ifndef DMNLS_GIT_DESCRIBE
#define DMNLS_GIT_DESCRIBE "unknown"
#endif

namespace dmnls::cli {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::atomic<bool> g_interrupted{false};

void on_sigint(int) { g_interrupted.store(true); }

// Config-file problems: unknown/missing keys, bad types, violated
// constraints. Mapped to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Strict schema walker over one JSON object. Every key that the schema reads
// is marked consumed; finish() rejects anything left over by its full dotted
// path, so typos never pass silently.
class Block {
 public:
  Block(const json& node, std::string path)
      : node_(node), path_(std::move(path)) {
    if (!node_.is_object())
      throw ConfigError("config node \"" + (path_.empty() ? "<root>" : path_) +
                        "\" must be a JSON object");
  }

  bool has(const char* key) const { return node_.contains(key); }

  double num(const char* key) {
    const json& v = raw(key);
    if (!v.is_number()) type_error(key, "a number");
    return v.get<double>();
  }
  double num_or(const char* key, double defv) {
    return has(key) ? num(key) : defv;
  }

  long long integer(const char* key) {
    const json& v = raw(key);
    if (!v.is_number_integer()) type_error(key, "an integer");
    return v.get<long long>();
  }
  long long integer_or(const char* key, long long defv) {
    return has(key) ? integer(key) : defv;
  }

  bool boolean_or(const char* key, bool defv) {
    if (!has(key)) return defv;
    const json& v = raw(key);
    if (!v.is_boolean()) type_error(key, "a boolean");
    return v.get<bool>();
  }

  std::string str(const char* key) {
    const json& v = raw(key);
    if (!v.is_string()) type_error(key, "a string");
    return v.get<std::string>();
  }

  std::vector<double> num_list(const char* key) {
    const json& v = raw(key);
    if (!v.is_array() || v.empty())
      type_error(key, "a non-empty array of numbers");
    std::vector<double> out;
    for (const json& e : v) {
      if (!e.is_number()) type_error(key, "a non-empty array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  Block child(const char* key) { return Block(raw(key), dotted(key)); }

  void finish() const {
    for (const auto& item : node_.items())
      if (!consumed_.count(item.key()))
        throw ConfigError("unknown key \"" + dotted(item.key().c_str()) +
                          "\"");
  }

  std::string dotted(const char* key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

 private:
  const json& raw(const char* key) {
    if (!node_.contains(key))
      throw ConfigError("missing required key \"" + dotted(key) + "\"");
    consumed_.insert(key);
    return node_.at(key);
  }
  [[noreturn]] void type_error(const char* key, const char* what) const {
    throw ConfigError("key \"" + dotted(key) + "\" must be " + what);
  }

  const json& node_;
  std::string path_;
  std::set<std::string> consumed_;
};

void check_constraint(bool ok, const std::string& dotted_key, double value,
                      const char* constraint) {
  if (!ok)
    throw ConfigError("key \"" + dotted_key + "\" = " + format_g17(value) +
                      " violates its constraint: " + constraint);
}

struct Common {
  int d = 1;
  double p = 3.0;
  double gamma_plus = 1.0, gamma_minus = 1.0, t_plus = 0.5, epsilon = 1.0;
  int n = 256;
  double half_length = 20.0;
  SolverConfig solver{};
};

Common parse_common(Block& top) {
  Common c;
  {
    Block model = top.child("model");
    const long long d = model.integer("d");
    check_constraint(d >= 1 && d <= 3, model.dotted("d"),
                     static_cast<double>(d), "dimension must be 1, 2, or 3");
    c.d = static_cast<int>(d);
    c.p = model.num("p");
    check_constraint(c.p > 1.0, model.dotted("p"), c.p,
                     "nonlinearity exponent must exceed 1");
    model.finish();
  }
  {
    Block map = top.child("map");
    c.gamma_plus = map.num("gamma_plus");
    check_constraint(c.gamma_plus > 0.0, map.dotted("gamma_plus"),
                     c.gamma_plus, "must be positive");
    c.gamma_minus = map.num("gamma_minus");
    check_constraint(c.gamma_minus > 0.0, map.dotted("gamma_minus"),
                     c.gamma_minus, "must be positive");
    c.t_plus = map.num("t_plus");
    check_constraint(c.t_plus > 0.0 && c.t_plus < 1.0, map.dotted("t_plus"),
                     c.t_plus, "must lie strictly between 0 and 1");
    c.epsilon = map.num_or("epsilon", 1.0);
    check_constraint(c.epsilon > 0.0, map.dotted("epsilon"), c.epsilon,
                     "must be positive");
    map.finish();
  }
  {
    Block grid = top.child("grid");
    const long long n = grid.integer("n");
    check_constraint(n >= 8 && n % 2 == 0, grid.dotted("n"),
                     static_cast<double>(n),
                     "points per axis must be even and at least 8");
    c.n = static_cast<int>(n);
    c.half_length = grid.num("half_length");
    check_constraint(c.half_length > 0.0, grid.dotted("half_length"),
                     c.half_length, "must be positive");
    grid.finish();
  }
  {
    Block s = top.child("solver");
    c.solver.p = c.p;
    c.solver.dt_max = s.num("dt_max");
    check_constraint(c.solver.dt_max > 0.0, s.dotted("dt_max"),
                     c.solver.dt_max, "must be positive");
    c.solver.dealias = s.boolean_or("dealias", true);
    const long long stride = s.integer_or("output_stride", 1);
    check_constraint(stride >= 1, s.dotted("output_stride"),
                     static_cast<double>(stride), "must be at least 1");
    c.solver.output_stride = static_cast<int>(stride);
    c.solver.blowup_gradient_factor = s.num_or("blowup_gradient_factor", 1e3);
    check_constraint(c.solver.blowup_gradient_factor > 1.0,
                     s.dotted("blowup_gradient_factor"),
                     c.solver.blowup_gradient_factor, "must exceed 1");
    c.solver.blowup_tail_threshold = s.num_or("blowup_tail_threshold", 0.05);
    check_constraint(c.solver.blowup_tail_threshold > 0.0 &&
                         c.solver.blowup_tail_threshold < 1.0,
                     s.dotted("blowup_tail_threshold"),
                     c.solver.blowup_tail_threshold,
                     "must lie strictly between 0 and 1");
    c.solver.nonlinearity_enabled = s.boolean_or("nonlinearity", true);
    s.finish();
  }
  return c;
}

Grid make_grid(const Common& c) { return Grid(c.d, c.n, c.half_length); }

DispersionMap make_map(const Common& c) {
  return DispersionMap(c.gamma_plus, c.gamma_minus, c.t_plus, c.epsilon);
}

Field build_datum(Block& top, const Common& c, const Grid& grid) {
  Block id = top.child("initial_datum");
  const std::string kind = id.str("kind");
  Field out = make_field(grid);
  if (kind == "gaussian") {
    const double amplitude = id.num("amplitude");
    check_constraint(amplitude > 0.0, id.dotted("amplitude"), amplitude,
                     "must be positive");
    const double width = id.num("width");
    check_constraint(width > 0.0, id.dotted("width"), width,
                     "must be positive");
    const double inv_two_w2 = 1.0 / (2.0 * width * width);
    const int d = c.d;
    out = sample_field(grid, [&](const double* x) {
      double r2 = 0.0;
      for (int a = 0; a < d; ++a) r2 += x[a] * x[a];
      return Complex{amplitude * std::exp(-r2 * inv_two_w2), 0.0};
    });
  } else if (kind == "ground_state") {
    const double ratio = id.num("mass_ratio");
    check_constraint(ratio > 0.0 && ratio <= 2.0, id.dotted("mass_ratio"),
                     ratio, "must lie in (0, 2]");
    if (c.d == 1) {
      const double root_gp = std::sqrt(c.gamma_plus);
      out = sample_field(grid, [&](const double* x) {
        return Complex{ratio * exact_q_1d(root_gp * x[0]), 0.0};
      });
    } else if (c.d == 2) {
      if (c.gamma_plus != 1.0)
        throw ConfigError(
            "key \"initial_datum.kind\" = ground_state with model.d = 2 "
            "requires map.gamma_plus = 1 (the numeric ground state cannot be "
            "rescaled off its grid)");
      GroundState gs = petviashvili(grid, 2, 1e-8, 500);
      out = gs.q_field;
      for (Complex& v : out.values) v *= ratio;
    } else {
      throw ConfigError(
          "key \"initial_datum.kind\" = ground_state supports model.d = 1 or "
          "2 only");
    }
  } else if (kind == "pseudo_conformal") {
    const double rate = id.num("rate");
    check_constraint(rate > 0.0, id.dotted("rate"), rate, "must be positive");
    if (c.d != 1)
      throw ConfigError(
          "key \"initial_datum.kind\" = pseudo_conformal requires model.d = 1");
    const BlowupProfile profile{rate, c.gamma_plus,
                                GroundState{1, 5.0, make_field(grid), 0.0, 0.0, 0}};
    out = pseudoconformal_field(profile, 0.0, grid);
  } else if (kind == "checkpoint") {
    const std::string path = id.str("path");
    Field f = make_field(grid);
    try {
      f = load_checkpoint(path).first;
    } catch (const std::runtime_error& e) {
      throw ConfigError("key \"initial_datum.path\": " + std::string(e.what()));
    }
    if (!(f.grid == grid))
      throw ConfigError(
          "key \"initial_datum.path\": checkpoint grid does not match the "
          "grid block");
    if (f.representation != Representation::Physical) f = to_physical(f);
    out = std::move(f);
  } else {
    throw ConfigError(
        "key \"initial_datum.kind\" must be one of gaussian, ground_state, "
        "pseudo_conformal, checkpoint");
  }
  id.finish();
  return out;
}

std::string hash16(const json& config) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(config.dump())));
  return buf;
}

void write_manifest(const fs::path& out, const std::string& subcommand,
                    const json& config, double wall_time, const char* status) {
  json m;
  m["config"] = config;
  m["config_hash"] = hash16(config);
  m["git_describe"] = DMNLS_GIT_DESCRIBE;
  m["wall_time"] = wall_time;
  m["subcommand"] = subcommand;
  m["status"] = status;
  std::ofstream f(out / "manifest.json", std::ios::trunc);
  if (!f)
    throw std::runtime_error("cannot write " + (out / "manifest.json").string());
  f << m.dump(2) << '\n';
}

const char* trigger_name(BlowupTrigger t) {
  switch (t) {
    case BlowupTrigger::GradientGrowth:
      return "gradient_growth";
    case BlowupTrigger::SpectralTail:
      return "spectral_tail";
    case BlowupTrigger::NonFinite:
      return "non_finite";
  }
  return "unknown";
}

int run_simulate(const json& config, const fs::path& out, bool quiet) {
  Block top(config, "");
  Common c = parse_common(top);
  double t0 = 0.0, t1 = 0.0;
  {
    Block time = top.child("time");
    t0 = time.num_or("t0", 0.0);
    t1 = time.num("t1");
    check_constraint(t1 > t0, time.dotted("t1"), t1, "must exceed time.t0");
    time.finish();
  }
  const Grid grid = make_grid(c);
  const DispersionMap map = make_map(c);
  const Field phi = build_datum(top, c, grid);
  top.finish();

  c.solver.cancel = &g_interrupted;
  EvolveResult r = evolve(phi, map, t0, t1, c.solver);

  write_diagnostics_csv((out / "diagnostics.csv").string(), r.diagnostics);
  save_checkpoint(r.state, (out / "checkpoints" / "final.dmf").string(),
                  r.diagnostics.back().time);
  {
    std::ofstream f(out / "results.csv", std::ios::trunc);
    f << "t_final,mass,grad_sq,linf,blew_up,trigger,detection_time\n";
    const DiagnosticsRecord& last = r.diagnostics.back();
    const bool blew = r.blowup && r.blowup->detected;
    f << format_g17(last.time) << ',' << format_g17(last.mass) << ','
      << format_g17(last.grad_sq) << ',' << format_g17(last.linf) << ','
      << (blew ? "true" : "false") << ','
      << (blew ? trigger_name(r.blowup->trigger) : "") << ',';
    if (blew) f << format_g17(r.blowup->detection_time);
    f << '\n';
  }
  if (!quiet) {
    std::cout << "simulate: " << r.diagnostics.size() << " diagnostic rows, t_final = "
              << format_g17(r.diagnostics.back().time) << '\n';
    if (r.blowup && r.blowup->detected)
      std::cout << "simulate: blow-up detector fired (" << trigger_name(r.blowup->trigger)
                << ") at t = " << format_g17(r.blowup->detection_time) << '\n';
  }
  return 0;
}

int run_sweep(const json& config, const fs::path& out, bool quiet,
              int threads) {
  Block top(config, "");
  Common c = parse_common(top);
  std::string mode;
  std::vector<double> epsilons;
  double horizon = 0.0, t0 = 0.0;
  long long sample_count = 33;
  {
    Block sweep = top.child("sweep");
    mode = sweep.str("mode");
    if (mode != "averaging" && mode != "zero_mean")
      throw ConfigError(
          "key \"sweep.mode\" must be \"averaging\" or \"zero_mean\"");
    epsilons = sweep.num_list("epsilons");
    for (std::size_t i = 0; i < epsilons.size(); ++i) {
      check_constraint(epsilons[i] > 0.0, sweep.dotted("epsilons"),
                       epsilons[i], "entries must be positive");
      if (i > 0)
        check_constraint(epsilons[i] < epsilons[i - 1],
                         sweep.dotted("epsilons"), epsilons[i],
                         "entries must be strictly decreasing");
    }
    horizon = sweep.num("horizon");
    check_constraint(horizon > 0.0, sweep.dotted("horizon"), horizon,
                     "must be positive");
    t0 = sweep.num_or("t0", 0.0);
    check_constraint(t0 < horizon, sweep.dotted("t0"), t0,
                     "must lie below sweep.horizon");
    if (mode == "zero_mean")
      check_constraint(t0 == 0.0, sweep.dotted("t0"), t0,
                       "zero_mean sweeps start at t0 = 0");
    sample_count = sweep.integer_or("sample_count", 33);
    check_constraint(sample_count >= 32, sweep.dotted("sample_count"),
                     static_cast<double>(sample_count), "must be at least 32");
    sweep.finish();
  }
  const Grid grid = make_grid(c);
  const DispersionMap map = make_map(c);
  const Field phi = build_datum(top, c, grid);
  top.finish();

  c.solver.cancel = &g_interrupted;
  if (mode == "averaging") {
    std::vector<SweepResult> rows =
        epsilon_sweep(phi, map, epsilons, t0, horizon, c.solver,
                      static_cast<int>(sample_count), threads);
    write_sweep_csv((out / "results.csv").string(), rows);
    if (!quiet)
      for (const SweepResult& r : rows)
        std::cout << "sweep: epsilon = " << format_g17(r.epsilon)
                  << "  error_h2 = " << format_g17(r.error_h2) << '\n';
  } else {
    std::vector<ZeroMeanRow> rows =
        zero_mean_validation(phi, map, epsilons, horizon, c.solver,
                             static_cast<int>(sample_count));
    write_zero_mean_csv((out / "results.csv").string(), rows);
    if (!quiet)
      for (const ZeroMeanRow& r : rows)
        std::cout << "sweep: epsilon = " << format_g17(r.epsilon)
                  << "  error_h2 = " << format_g17(r.error_h2)
                  << "  defect = " << format_g17(r.defect) << '\n';
  }
  return 0;
}

int run_groundstate(const json& config, const fs::path& out, bool quiet) {
  Block top(config, "");
  Common c = parse_common(top);
  double tol = 1e-10;
  long long max_iter = 500;
  if (top.has("groundstate")) {
    Block gsb = top.child("groundstate");
    tol = gsb.num_or("tol", 1e-10);
    check_constraint(tol > 0.0, gsb.dotted("tol"), tol, "must be positive");
    max_iter = gsb.integer_or("max_iter", 500);
    check_constraint(max_iter >= 1, gsb.dotted("max_iter"),
                     static_cast<double>(max_iter), "must be at least 1");
    gsb.finish();
  }
  top.finish();
  const double critical_p = 1.0 + 4.0 / c.d;
  if (std::abs(c.p - critical_p) > 1e-12)
    throw ConfigError("key \"model.p\" = " + format_g17(c.p) +
                      " violates its constraint: ground-state runs require "
                      "the mass-critical exponent 1 + 4/d = " +
                      format_g17(critical_p));

  const Grid grid = make_grid(c);
  GroundState gs = petviashvili(grid, c.d, tol, static_cast<int>(max_iter));
  const double ratio = gn_ratio(gs.q_field, gs.mass, c.d);
  {
    std::ofstream f(out / "results.csv", std::ios::trunc);
    f << "mass,mass_sq,residual_l2,iterations,gn_ratio\n";
    f << format_g17(gs.mass) << ',' << format_g17(gs.mass * gs.mass) << ','
      << format_g17(gs.residual_l2) << ',' << gs.iterations << ','
      << format_g17(ratio) << '\n';
  }
  save_checkpoint(gs.q_field, (out / "checkpoints" / "ground_state.dmf").string());
  if (!quiet)
    std::cout << "groundstate: mass = " << format_g17(gs.mass)
              << ", residual = " << format_g17(gs.residual_l2) << ", "
              << gs.iterations << " iterations\n";
  return 0;
}

int run_blowup(const json& config, const fs::path& out, bool quiet) {
  Block top(config, "");
  Common c = parse_common(top);
  std::vector<double> ratios;
  long long periods = 1;
  double rate = 0.0;
  {
    Block bb = top.child("blowup");
    ratios = bb.num_list("mass_ratios");
    for (double r : ratios)
      check_constraint(r >= 0.0 && r <= 2.0, bb.dotted("mass_ratios"), r,
                       "entries must lie in [0, 2]");
    periods = bb.integer("periods");
    check_constraint(periods >= 1, bb.dotted("periods"),
                     static_cast<double>(periods), "must be at least 1");
    rate = bb.num_or("pseudo_conformal_rate", 0.0);
    check_constraint(rate >= 0.0, bb.dotted("pseudo_conformal_rate"), rate,
                     "must be nonnegative (0 disables the extra run)");
    bb.finish();
  }
  top.finish();

  const Grid grid = make_grid(c);
  const DispersionMap map = make_map(c);
  c.solver.cancel = &g_interrupted;
  std::vector<ThresholdStudyResult> rows = threshold_study(
      ratios, map, static_cast<int>(periods), c.solver, grid, rate);
  write_threshold_csv((out / "results.csv").string(), rows);
  if (!quiet)
    for (const ThresholdStudyResult& r : rows)
      std::cout << "blowup: ratio = " << format_g17(r.mass_ratio) << "  "
                << (r.inconclusive ? "inconclusive"
                                   : (r.blew_up ? "blew up" : "survived"))
                << '\n';
  return 0;
}

// One validate-suite entry: pass iff value lands in [lo, hi].
struct Check {
  std::string name;
  double value;
  double lo, hi;
  bool pass;
};

Field random_smooth_field(const Grid& grid, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> center(-grid.half_length / 3.0,
                                                grid.half_length / 3.0);
  std::uniform_real_distribution<double> width(0.6, 2.0);
  std::uniform_real_distribution<double> amp(0.2, 1.5);
  std::uniform_real_distribution<double> phase(0.0, 6.283185307179586);
  std::uniform_real_distribution<double> wave(-2.0, 2.0);
  struct Bump {
    double c, w, a, th, k;
  };
  std::vector<Bump> bumps(3);
  for (Bump& b : bumps)
    b = {center(rng), width(rng), amp(rng), phase(rng), wave(rng)};
  return sample_field(grid, [&](const double* x) {
    Complex v{0.0, 0.0};
    for (const Bump& b : bumps) {
      const double dx = x[0] - b.c;
      v += std::polar(b.a * std::exp(-dx * dx / (2.0 * b.w * b.w)),
                      b.th + b.k * x[0]);
    }
    return v;
  });
}

int run_validate(const json& config, const fs::path& out, bool quiet,
                 std::uint64_t seed) {
  Block top(config, "");
  Common c = parse_common(top);
  top.finish();
  if (c.d != 1)
    throw ConfigError(
        "key \"model.d\" = " + format_g17(c.d) +
        " violates its constraint: validate requires d = 1 (its closed-form "
        "oracles are one-dimensional)");

  const Grid grid = make_grid(c);
  const DispersionMap map = make_map(c);
  std::vector<Check> checks;
  auto add = [&](std::string name, double value, double lo, double hi) {
    const bool pass = value >= lo && value <= hi && std::isfinite(value);
    checks.push_back({std::move(name), value, lo, hi, pass});
  };

  // Free propagator against the direct oscillatory-integral oracle, both
  // signs of the cumulative dispersion (pins the constant phase).
  const Field gauss = sample_field(grid, [](const double* x) {
    return Complex{std::exp(-0.5 * x[0] * x[0]), 0.0};
  });
  for (const double Gamma : {0.3, -0.3}) {
    const Field via_multiplier = propagate_linear(gauss, Gamma);
    const Field via_kernel = kernel_solution(gauss, Gamma);
    add(Gamma > 0 ? "kernel_gamma_pos" : "kernel_gamma_neg",
        relative_l2_error(via_multiplier, via_kernel), 0.0, 1e-6);
  }

  // Closed-form Gaussian spreading (amplitude and phase, not just modulus).
  add("gaussian_closed_form",
      relative_l2_error(propagate_linear(gauss, 0.4),
                        gaussian_linear(1.0, 0.4, grid)),
      0.0, 1e-9);

  // Ground-state oracle on a grid long enough for the soliton's exponential
  // tails (decay e^{-|x|} requires half_length ~ 25 for 1e-10 truncation).
  const Grid qgrid(1, 512, 25.0);
  const GroundState gs = petviashvili(qgrid, 1, 1e-10, 500);
  add("q_equation_residual", gs.residual_l2, 0.0, 1e-8);
  add("q_mass_oracle",
      std::abs(gs.mass * gs.mass - std::sqrt(3.0) * 3.141592653589793 / 2.0),
      0.0, 1e-6);
  add("gn_ratio_ground_state", gn_ratio(gs.q_field, gs.mass, 1), 0.999, 1.001);

  // Sharp constant: no random smooth field may beat the extremizer.
  const double q_mass_exact = std::sqrt(std::sqrt(3.0) * 3.141592653589793 / 2.0);
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i)
    worst = std::max(worst,
                     gn_ratio(random_smooth_field(grid, rng), q_mass_exact, 1));
  add("gn_ratio_random_bound", worst, 0.0, 1.0);

  // Self-convergence order of the splitting over one full map period.
  const double dt0 = c.epsilon * std::min(c.t_plus, 1.0 - c.t_plus) / 8.0;
  const std::vector<double> dts{dt0, dt0 / 2.0, dt0 / 4.0, dt0 / 8.0};
  add("splitting_order",
      splitting_order_study(gauss, map, dts, c.epsilon, c.solver), 1.8, 2.2);

  {
    std::ofstream f(out / "results.csv", std::ios::trunc);
    f << "check,value,lower,upper,pass\n";
    for (const Check& ck : checks)
      f << ck.name << ',' << format_g17(ck.value) << ',' << format_g17(ck.lo)
        << ',' << format_g17(ck.hi) << ',' << (ck.pass ? "true" : "false")
        << '\n';
  }
  bool all_pass = true;
  for (const Check& ck : checks) {
    all_pass = all_pass && ck.pass;
    if (!quiet || !ck.pass)
      std::cout << (ck.pass ? "ok   " : "FAIL ") << ck.name << "  value = "
                << format_g17(ck.value) << "  required in ["
                << format_g17(ck.lo) << ", " << format_g17(ck.hi) << "]\n";
  }
  return all_pass ? 0 : 1;
}

json load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file " + path);
  json root = json::parse(f, nullptr, true, /*ignore_comments=*/true);
  if (!root.is_object())
    throw ConfigError("config root must be a JSON object");
  if (root.contains("config")) {
    // A file with a "config" member is a run manifest; rerun its embedded
    // config so manifests double as exact reproduction recipes.
    static const std::set<std::string> manifest_keys = {
        "config", "config_hash", "git_describe", "wall_time", "subcommand",
        "status"};
    for (const auto& item : root.items())
      if (!manifest_keys.count(item.key()))
        throw ConfigError("unknown key \"" + item.key() +
                          "\" (a file with a \"config\" member is read as a "
                          "run manifest)");
    return root.at("config");
  }
  return root;
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"dispersion-managed NLS toolkit"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  int threads = 1;
  std::uint64_t seed = 20260817ULL;
  bool quiet = false;

  const std::pair<const char*, const char*> subs[] = {
      {"simulate", "single evolution run with diagnostics and a final checkpoint"},
      {"sweep", "epsilon sweep against the averaged dynamics (averaging or zero_mean mode)"},
      {"groundstate", "ground-state computation with residual and sharpness diagnostics"},
      {"blowup", "mass-ratio threshold study with blow-up detection"},
      {"validate", "oracle suite: kernel, Gaussian, ground state, sharp constant, splitting order"},
  };
  for (const auto& [name, desc] : subs) {
    CLI::App* sc = app.add_subcommand(name, desc);
    sc->add_option("--config", config_path, "JSON config (or manifest) file")
        ->required()
        ->check(CLI::ExistingFile);
    sc->add_option("--out", out_dir, "output directory")->required();
    sc->add_option("--threads", threads, "worker threads for sweep runs")
        ->check(CLI::PositiveNumber);
    sc->add_option("--seed", seed, "seed for randomized property checks");
    sc->add_flag("--quiet", quiet, "suppress progress output");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // config errors, including bad flags
  }
  const std::string cmd = app.get_subcommands().front()->get_name();

  g_interrupted.store(false);
  std::signal(SIGINT, on_sigint);

  json config;
  const fs::path out(out_dir);
  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start)
        .count();
  };

  int code = 0;
  try {
    config = load_config(config_path);
    fs::create_directories(out / "checkpoints");
    if (cmd == "simulate")
      code = run_simulate(config, out, quiet);
    else if (cmd == "sweep")
      code = run_sweep(config, out, quiet, threads);
    else if (cmd == "groundstate")
      code = run_groundstate(config, out, quiet);
    else if (cmd == "blowup")
      code = run_blowup(config, out, quiet);
    else
      code = run_validate(config, out, quiet, seed);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const json::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    try {
      write_manifest(out, cmd, config, elapsed(), "failed");
    } catch (...) {
    }
    return 1;
  }

  const bool aborted = g_interrupted.load();
  write_manifest(out, cmd, config, elapsed(), aborted ? "aborted" : "completed");
  if (aborted) {
    std::cerr << "interrupted: partial outputs flushed, manifest marked aborted\n";
    return 130;
  }
  return code;
}

}  // namespace dmnls::cli
