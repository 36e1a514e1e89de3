// Acceptance harness: one line per criterion, nonzero exit on any failure.
// Tolerances are pinned here, next to the checks they gate.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dmnls/cli.hpp"
#include "dmnls/dispersion.hpp"
#include "dmnls/groundstate.hpp"
#include "dmnls/lab.hpp"
#include "dmnls/linear.hpp"
#include "dmnls/reference.hpp"
#include "dmnls/solver.hpp"
#include "dmnls/spectral.hpp"

namespace fs = std::filesystem;
using namespace dmnls;

namespace {

struct Failure {
  std::string reason;
};

Field band_noise(const Grid& grid, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Field fhat = make_field(grid, Representation::Spectral);
  const int n = grid.points_per_axis;
  for (int j = 0; j < n; ++j)
    if (3 * std::abs(grid.mode(j)) <= n)
      fhat.values[static_cast<std::size_t>(j)] = Complex(gauss(rng), gauss(rng));
  return to_physical(fhat);
}

Field gaussian_1d(const Grid& grid, double width = 1.0) {
  const double inv = 1.0 / (2.0 * width * width);
  return sample_field(grid, [inv](const double* x) {
    return Complex(std::exp(-x[0] * x[0] * inv), 0.0);
  });
}

void require(bool ok, const std::string& reason) {
  if (!ok) throw Failure{reason};
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  require(in.good(), "cannot read " + p.string());
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

int run_cli(std::initializer_list<std::string> args) {
  std::vector<std::string> owned{"dmnls"};
  owned.insert(owned.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const std::string& a : owned) argv.push_back(a.c_str());
  return dmnls::cli::run(static_cast<int>(argv.size()), argv.data());
}

// --- criterion 1: propagator algebra -------------------------------------

std::string criterion_1() {
  const Grid g(1, 256, 20.0);
  const DispersionMap asym(2.0, 1.0, 0.3, 1.0);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> gamma_draw(-5.0, 5.0);
  std::uniform_real_distribution<double> time_draw(0.0, 3.0);

  double worst_unitary = 0.0, worst_comp = 0.0, worst_inv = 0.0;
  double worst_witness = 1e300;
  for (int i = 0; i < 100; ++i) {
    const Field f = band_noise(g, 1000 + static_cast<std::uint64_t>(i));
    const double nf = l2_norm(f);

    const double Gamma = gamma_draw(rng);
    const Field u = propagate_linear(f, Gamma);
    worst_unitary = std::max(worst_unitary, std::abs(l2_norm(u) - nf) / nf);

    double s = time_draw(rng), r = time_draw(rng), t = time_draw(rng);
    if (s > r) std::swap(s, r);
    if (r > t) std::swap(r, t);
    if (s > r) std::swap(s, r);
    const Field two_leg = propagate_linear_map(
        propagate_linear_map(f, asym, s, r), asym, r, t);
    const Field one_leg = propagate_linear_map(f, asym, s, t);
    worst_comp = std::max(worst_comp, relative_l2_error(two_leg, one_leg));

    const Field back = propagate_linear_map(
        propagate_linear_map(f, asym, s, t), asym, t, s);
    worst_inv = std::max(worst_inv, relative_l2_error(back, f));

    // Same elapsed time, different start phase: a genuine two-parameter
    // family, so the states must differ measurably.
    const Field w1 = propagate_linear_map(f, asym, 0.25, 0.75);
    const Field w2 = propagate_linear_map(f, asym, 0.0, 0.5);
    Field diff = w1;
    for (std::size_t j = 0; j < diff.values.size(); ++j)
      diff.values[j] -= w2.values[j];
    worst_witness = std::min(worst_witness, l2_norm(diff) / nf);
  }
  require(worst_unitary <= 1e-12, "unitarity drift " + num(worst_unitary));
  require(worst_comp <= 1e-12, "composition error " + num(worst_comp));
  require(worst_inv <= 1e-12, "inverse error " + num(worst_inv));
  require(worst_witness > 1e-2, "non-group witness " + num(worst_witness));
  return "unitarity " + num(worst_unitary) + ", composition " + num(worst_comp) +
         ", inverse " + num(worst_inv) + ", witness " + num(worst_witness);
}

// --- criterion 2: oscillatory kernel vs multiplier ------------------------

std::string criterion_2() {
  const Grid g(1, 256, 20.0);
  const Field f = gaussian_1d(g);
  double worst = 0.0;
  for (double Gamma : {0.1, -0.1, 0.3, -0.3, 1.0, -1.0}) {
    const Field direct = kernel_solution(f, Gamma);
    const Field fast = propagate_linear(f, Gamma);
    worst = std::max(worst, relative_l2_error(direct, fast));
  }
  require(worst <= 1e-6, "kernel mismatch " + num(worst));
  return "max relative error " + num(worst) + " over 6 Gamma values";
}

// --- criterion 3: zero-mean linear periodicity ----------------------------

std::string criterion_3() {
  const Grid g(1, 256, 20.0);
  const Field f = band_noise(g, 3);
  const DispersionMap map(1.0, 1.0, 0.5, 0.7);
  double worst = 0.0;
  for (int n = 1; n <= 5; ++n) {
    const Field u = propagate_linear_map(f, map, 0.0, 0.7 * n);
    worst = std::max(worst, relative_l2_error(u, f));
  }
  require(worst <= 1e-12, "whole-period drift " + num(worst));
  return "max relative error " + num(worst) + " over 5 periods";
}

// --- criterion 4: conservation -------------------------------------------

std::string criterion_4() {
  const Grid g(1, 256, 10.0);
  const Field phi = gaussian_1d(g);
  SolverConfig cfg;
  cfg.p = 3.0;
  cfg.dt_max = 1e-3;
  cfg.output_stride = 1;

  const DispersionMap map(1.0, 1.0, 0.5, 0.2);
  const EvolveResult res = evolve(phi, map, 0.0, 2.0, cfg);  // 10 periods
  require(!(res.blowup && res.blowup->detected), "run halted unexpectedly");
  const double m0 = res.diagnostics.front().mass;
  double drift = 0.0;
  for (const DiagnosticsRecord& rec : res.diagnostics)
    drift = std::max(drift, std::abs(rec.mass - m0) / m0);
  require(drift <= 1e-10, "mass drift " + num(drift));

  // Piecewise energy is exactly conserved by the continuum flow on a
  // constant piece; the splitting drifts at O(dt^2), so halving dt must
  // shrink the drift about fourfold.
  auto energy_drift = [&](double dt) {
    SolverConfig c2 = cfg;
    c2.dt_max = dt;
    c2.output_stride = 1 << 20;
    const EvolveResult r = evolve_constant(phi, 1.0, 0.0, 0.25, c2);
    return std::abs(piecewise_energy(r.state, 1.0, cfg.p) -
                    piecewise_energy(phi, 1.0, cfg.p));
  };
  const double e1 = energy_drift(2e-3);
  const double e2 = energy_drift(1e-3);
  const double ratio = e1 / e2;
  require(ratio >= 3.4 && ratio <= 4.6, "energy halving ratio " + num(ratio));
  return "mass drift " + num(drift) + ", energy halving ratio " + num(ratio);
}

// --- criterion 5: splitting order -----------------------------------------

std::string criterion_5() {
  const Grid g(1, 256, 10.0);
  const Field phi = gaussian_1d(g);
  SolverConfig cfg;
  cfg.p = 3.0;
  cfg.dt_max = 1e-2;
  const DispersionMap map(1.0, 1.0, 0.5, 0.5);
  const double order = splitting_order_study(
      phi, map, {1.0 / 16, 1.0 / 32, 1.0 / 64, 1.0 / 128}, 0.5, cfg);
  require(order >= 1.8 && order <= 2.2, "order estimate " + num(order));
  return "order estimate " + num(order);
}

// --- criterion 6: ground state --------------------------------------------

std::string criterion_6() {
  const Grid g1(1, 512, 25.0);
  const GroundState gs = petviashvili(g1, 1, 1e-12, 500);
  const double mass_sq = gs.mass * gs.mass;
  const double exact = std::sqrt(3.0) * M_PI / 2.0;
  require(std::abs(mass_sq - exact) <= 1e-6,
          "d=1 mass^2 off by " + num(std::abs(mass_sq - exact)));
  require(gs.residual_l2 <= 1e-8, "d=1 residual " + num(gs.residual_l2));
  const double ratio_q = gn_ratio(gs.q_field, gs.mass, 1);
  require(ratio_q >= 0.999 && ratio_q <= 1.001,
          "sharpness ratio at Q " + num(ratio_q));

  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> amp(0.2, 2.0), width(0.5, 3.0),
      center(-8.0, 8.0), chirp(-1.0, 1.0);
  double worst_ratio = 0.0;
  for (int i = 0; i < 100; ++i) {
    const int bumps = 1 + static_cast<int>(rng() % 3);
    std::vector<std::array<double, 4>> params;
    for (int b = 0; b < bumps; ++b)
      params.push_back({amp(rng), width(rng), center(rng), chirp(rng)});
    const Field f = sample_field(g1, [&](const double* x) {
      Complex v{0.0, 0.0};
      for (const auto& q : params) {
        const double dx = x[0] - q[2];
        v += std::polar(q[0] * std::exp(-dx * dx / (2.0 * q[1] * q[1])),
                        q[3] * x[0]);
      }
      return v;
    });
    worst_ratio = std::max(worst_ratio, gn_ratio(f, gs.mass, 1));
  }
  require(worst_ratio <= 1.0,
          "random field beats the sharp constant: " + num(worst_ratio));

  const GroundState c256 = petviashvili(Grid(2, 256, 12.0), 2, 1e-8, 500);
  const GroundState c512 = petviashvili(Grid(2, 512, 12.0), 2, 1e-8, 500);
  const double gap =
      std::abs(c256.mass * c256.mass - c512.mass * c512.mass);
  require(gap <= 1e-3, "d=2 mass^2 grid gap " + num(gap));
  return "d=1 mass^2 err " + num(std::abs(mass_sq - exact)) + ", residual " +
         num(gs.residual_l2) + ", ratio(Q) " + num(ratio_q) +
         ", max random ratio " + num(worst_ratio) + ", d=2 gap " + num(gap);
}

// --- criterion 7: pseudo-conformal exactness ------------------------------

std::string criterion_7() {
  const Grid g(1, 1024, 15.0);
  const BlowupProfile profile{1.0, 1.0,
                              GroundState{1, 5.0, make_field(g), 0.0, 0.0, 0}};
  const Field v0 = pseudoconformal_field(profile, 0.0, g);
  SolverConfig cfg;
  cfg.p = 5.0;
  cfg.dt_max = 1e-4;
  cfg.output_stride = 1 << 20;
  const EvolveResult res = evolve_constant(v0, 1.0, 0.0, 0.5, cfg);
  require(!(res.blowup && res.blowup->detected), "run halted before t=1/(2a)");
  const Field exact = pseudoconformal_field(profile, 0.5, g);
  const double err = relative_l2_error(res.state, exact);
  require(err <= 1e-4, "terminal error " + num(err));
  return "relative error " + num(err) + " at t = 1/(2a)";
}

// --- criterion 8: blow-up threshold ---------------------------------------

std::string criterion_8() {
  const DispersionMap map(1.0, 1.0, 0.5, 1.0);

  // Half the critical mass: five full periods with a tame gradient.
  const Grid g(1, 1024, 15.0);
  const Field half = sample_field(g, [](const double* x) {
    return Complex(0.5 * exact_q_1d(x[0]), 0.0);
  });
  SolverConfig cfg;
  cfg.p = 5.0;
  cfg.dt_max = 5e-4;
  cfg.output_stride = 1;
  const EvolveResult survive = evolve(half, map, 0.0, 5.0, cfg);
  require(!(survive.blowup && survive.blowup->detected),
          "sub-threshold datum tripped the detector");
  const double g0 = survive.diagnostics.front().grad_sq;
  double growth = 0.0;
  for (const DiagnosticsRecord& rec : survive.diagnostics)
    growth = std::max(growth, rec.grad_sq / g0);
  require(growth < 3.0, "gradient growth " + num(growth));

  // Blow-up time 1/a = 0.25 sits inside the first focusing piece (0, 0.5];
  // the detector must fire before that piece ends.
  const Grid gf(1, 16384, 10.0);
  const BlowupProfile profile{4.0, 1.0,
                              GroundState{1, 5.0, make_field(gf), 0.0, 0.0, 0}};
  const Field seed = pseudoconformal_field(profile, 0.0, gf);
  SolverConfig cff;
  cff.p = 5.0;
  cff.dt_max = 2e-5;
  cff.output_stride = 1 << 20;
  // The datum's gradient is chirp-dominated (grad_sq = 1.36 lam^2 + 6.71
  // against 8.07 at t=0) and the discrete collapse of this exactly-critical
  // datum arrests near 320x, so certify the crossing at 100x, reached while
  // the collapse still tracks the closed form.
  cff.blowup_gradient_factor = 100.0;
  const EvolveResult focus = evolve(seed, map, 0.0, 0.5, cff);
  require(focus.blowup && focus.blowup->detected,
          "super-threshold datum never tripped the detector");
  require(focus.blowup->trigger == BlowupTrigger::GradientGrowth,
          "detector fired on the wrong trigger");
  require(focus.blowup->detection_time < 0.5,
          "detection after the focusing piece");
  return "sub-threshold growth " + num(growth) + ", detection at t = " +
         num(focus.blowup->detection_time);
}

// --- criterion 9: averaging -----------------------------------------------

std::string criterion_9() {
  const Grid g(1, 256, 15.0);
  const Field phi = gaussian_1d(g);
  const DispersionMap map(1.0, 1.0, 0.5, 1.0);  // zero mean
  const std::vector<double> epsilons{0.2, 0.1, 0.05, 0.025};
  SolverConfig cfg;
  cfg.p = 3.0;
  cfg.dt_max = 2.5e-4;

  const std::vector<SweepResult> sweep =
      epsilon_sweep(phi, map, epsilons, 0.0, 1.0, cfg);
  for (std::size_t i = 1; i < sweep.size(); ++i)
    require(sweep[i].error_h2 < sweep[i - 1].error_h2,
            "error_h2 not strictly decreasing at epsilon " +
                num(sweep[i].epsilon));

  SolverConfig lin = cfg;
  lin.nonlinearity_enabled = false;
  const std::vector<SweepResult> sweep_lin =
      epsilon_sweep(phi, map, epsilons, 0.0, 1.0, lin);
  double worst_gap = 0.0;
  for (const SweepResult& row : sweep_lin) {
    const DispersionMap scaled(1.0, 1.0, 0.5, row.epsilon);
    double sup = 0.0;
    for (double t : row.sample_times)
      sup = std::max(sup, averaging_gap_linear(phi, scaled, 0.0, t, 2.0));
    worst_gap = std::max(worst_gap, std::abs(sup - row.error_h2));
  }
  require(worst_gap <= 1e-8,
          "linear-only sweep vs multiplier gap " + num(worst_gap));

  const std::vector<ZeroMeanRow> rows =
      zero_mean_validation(phi, map, epsilons, 1.0, cfg);
  for (std::size_t i = 1; i < rows.size(); ++i)
    require(rows[i].defect < rows[i - 1].defect,
            "defect not decreasing at epsilon " + num(rows[i].epsilon));

  return "error_h2 " + num(sweep.front().error_h2) + " -> " +
         num(sweep.back().error_h2) + ", linear match " + num(worst_gap) +
         ", defect " + num(rows.front().defect) + " -> " +
         num(rows.back().defect);
}

// --- criterion 10: persistence --------------------------------------------

std::string criterion_10() {
  const fs::path dir = fs::temp_directory_path() / "dmnls_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);

  // Bitwise checkpoint round trip, physical and spectral.
  {
    const Grid g(1, 128, 10.0);
    Field f = band_noise(g, 42);
    save_checkpoint(f, (dir / "phys.dmf").string(), 1.375);
    const auto [back, time] = load_checkpoint((dir / "phys.dmf").string());
    require(time == 1.375, "time not preserved");
    require(back.grid == g && back.representation == f.representation,
            "geometry not preserved");
    for (std::size_t j = 0; j < f.values.size(); ++j)
      require(back.values[j] == f.values[j], "payload not bitwise equal");

    Field s = to_spectral(f);
    save_checkpoint(s, (dir / "spec.dmf").string(), -0.625);
    const auto [back2, time2] = load_checkpoint((dir / "spec.dmf").string());
    require(time2 == -0.625 && back2.representation == Representation::Spectral,
            "spectral header not preserved");
    for (std::size_t j = 0; j < s.values.size(); ++j)
      require(back2.values[j] == s.values[j], "spectral payload not bitwise equal");
  }

  // Rerunning a manifest reproduces every CSV byte.
  auto write_file = [&](const std::string& name, const std::string& body) {
    const fs::path p = dir / name;
    std::ofstream out(p);
    out << body;
    return p;
  };
  const fs::path sim_cfg = write_file("sim.json", R"({
    "model": {"d": 1, "p": 3.0},
    "map": {"gamma_plus": 1.0, "gamma_minus": 1.0, "t_plus": 0.5, "epsilon": 0.4},
    "grid": {"n": 128, "half_length": 10.0},
    "solver": {"dt_max": 0.002},
    "time": {"t0": 0.0, "t1": 0.8},
    "initial_datum": {"kind": "gaussian", "amplitude": 1.0, "width": 1.0}
  })");
  require(run_cli({"simulate", "--config", sim_cfg.string(), "--out",
                   (dir / "sim_a").string(), "--quiet"}) == 0,
          "simulate run failed");
  require(run_cli({"simulate", "--config", (dir / "sim_a" / "manifest.json").string(),
                   "--out", (dir / "sim_b").string(), "--quiet"}) == 0,
          "manifest rerun failed");
  require(slurp(dir / "sim_a" / "results.csv") ==
              slurp(dir / "sim_b" / "results.csv"),
          "simulate results.csv not reproduced");
  require(slurp(dir / "sim_a" / "diagnostics.csv") ==
              slurp(dir / "sim_b" / "diagnostics.csv"),
          "simulate diagnostics.csv not reproduced");

  const fs::path sweep_cfg = write_file("sweep.json", R"({
    "model": {"d": 1, "p": 3.0},
    "map": {"gamma_plus": 1.0, "gamma_minus": 1.0, "t_plus": 0.5},
    "grid": {"n": 64, "half_length": 10.0},
    "solver": {"dt_max": 0.002},
    "sweep": {"mode": "zero_mean", "epsilons": [0.2, 0.1], "horizon": 0.25,
              "sample_count": 33},
    "initial_datum": {"kind": "gaussian", "amplitude": 1.0, "width": 1.0}
  })");
  require(run_cli({"sweep", "--config", sweep_cfg.string(), "--out",
                   (dir / "sw_a").string(), "--quiet"}) == 0,
          "sweep run failed");
  require(run_cli({"sweep", "--config", (dir / "sw_a" / "manifest.json").string(),
                   "--out", (dir / "sw_b").string(), "--quiet"}) == 0,
          "sweep manifest rerun failed");
  require(slurp(dir / "sw_a" / "results.csv") ==
              slurp(dir / "sw_b" / "results.csv"),
          "sweep results.csv not reproduced");

  return "checkpoints bitwise, simulate and sweep manifests byte-identical";
}

}  // namespace

int main() {
  struct Entry {
    int id;
    const char* label;
    std::function<std::string()> body;
  };
  const std::vector<Entry> entries = {
      {1, "propagator algebra", criterion_1},
      {2, "oscillatory kernel cross-validation", criterion_2},
      {3, "zero-mean linear periodicity", criterion_3},
      {4, "mass and piecewise-energy conservation", criterion_4},
      {5, "splitting order", criterion_5},
      {6, "ground state and sharpness", criterion_6},
      {7, "pseudo-conformal exactness", criterion_7},
      {8, "blow-up threshold detection", criterion_8},
      {9, "fast-map averaging", criterion_9},
      {10, "persistence and reproducibility", criterion_10},
  };

  int failures = 0;
  const auto t_start = std::chrono::steady_clock::now();
  for (const Entry& e : entries) {
    const auto c_start = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = true;
    try {
      detail = e.body();
    } catch (const Failure& f) {
      ok = false;
      detail = f.reason;
    } catch (const std::exception& ex) {
      ok = false;
      detail = std::string("unexpected exception: ") + ex.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - c_start)
            .count();
    std::printf("%s criterion %d: %s (%s) [%.1f s]\n", ok ? "PASS" : "FAIL",
                e.id, e.label, detail.c_str(), secs);
    std::fflush(stdout);
    if (!ok) ++failures;
  }
  const double total =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
          .count();
  std::printf("acceptance: %d/10 criteria passed in %.1f s\n", 10 - failures,
              total);
  return failures == 0 ? 0 : 1;
}
