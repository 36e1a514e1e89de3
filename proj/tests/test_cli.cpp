#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <vector>

#include "dmnls/cli.hpp"
#include "dmnls/lab.hpp"
#include "dmnls/spectral.hpp"

#ifndef DMNLS_SOURCE_DIR
#error "DMNLS_SOURCE_DIR must point at the repository root"
#endif

namespace fs = std::filesystem;

namespace {

int run_cli(std::initializer_list<std::string> args) {
  std::vector<std::string> owned{"dmnls"};
  owned.insert(owned.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const std::string& a : owned) argv.push_back(a.c_str());
  return dmnls::cli::run(static_cast<int>(argv.size()), argv.data());
}

fs::path scratch_dir() {
  const fs::path dir = fs::temp_directory_path() / "dmnls_cli_tests";
  fs::create_directories(dir);
  return dir;
}

fs::path write_config(const std::string& name, const std::string& body) {
  const fs::path p = scratch_dir() / name;
  std::ofstream out(p, std::ios::trunc);
  out << body;
  return p;
}

fs::path fresh_out(const std::string& name) {
  const fs::path p = scratch_dir() / name;
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

const std::string kTinySimulate = R"({
  "model": {"d": 1, "p": 3.0},
  "map": {"gamma_plus": 1.0, "gamma_minus": 1.0, "t_plus": 0.5, "epsilon": 1.0},
  "grid": {"n": 64, "half_length": 10.0},
  "solver": {"dt_max": 0.005},
  "time": {"t0": 0.0, "t1": 0.1},
  "initial_datum": {"kind": "gaussian", "amplitude": 1.0, "width": 1.0}
})";

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("validate passes on the shipped configuration") {
  const fs::path out = fresh_out("validate_out");
  const std::string config =
      (fs::path(DMNLS_SOURCE_DIR) / "configs" / "validate.json").string();
  const int rc = run_cli({"validate", "--config", config, "--out", out.string(),
                          "--quiet"});
  CHECK(rc == 0);

  REQUIRE(fs::exists(out / "results.csv"));
  const std::string results = slurp(out / "results.csv");
  CHECK(results.rfind("check,value,lower,upper,pass\n", 0) == 0);
  CHECK(results.find("false") == std::string::npos);
  CHECK(results.find("kernel_gamma_pos") != std::string::npos);
  CHECK(results.find("splitting_order") != std::string::npos);

  REQUIRE(fs::exists(out / "manifest.json"));
  const std::string manifest = slurp(out / "manifest.json");
  CHECK(manifest.find("\"status\": \"completed\"") != std::string::npos);
}

TEST_CASE("simulate produces diagnostics, results, and a checkpoint") {
  const fs::path out = fresh_out("simulate_out");
  const fs::path config = write_config("tiny_simulate.json", kTinySimulate);
  const int rc = run_cli({"simulate", "--config", config.string(), "--out",
                          out.string(), "--quiet"});
  CHECK(rc == 0);
  CHECK(fs::exists(out / "manifest.json"));
  CHECK(fs::exists(out / "diagnostics.csv"));
  CHECK(fs::exists(out / "results.csv"));
  CHECK(fs::exists(out / "checkpoints" / "final.dmf"));

  const std::string results = slurp(out / "results.csv");
  CHECK(results.rfind("t_final,mass,grad_sq,linf,blew_up,trigger,detection_time\n",
                      0) == 0);
  const std::size_t row = results.find('\n') + 1;
  CHECK(std::strtod(results.c_str() + row, nullptr) == 0.1);  // t_final
  CHECK(results.find(",false,,") != std::string::npos);  // no blow-up

  // The final checkpoint reloads onto the configured grid.
  const auto [field, time] = dmnls::load_checkpoint(
      (out / "checkpoints" / "final.dmf").string());
  CHECK(field.grid == dmnls::Grid(1, 64, 10.0));
  CHECK(time == 0.1);
}

TEST_CASE("ground state run reports the known mass") {
  const fs::path out = fresh_out("groundstate_out");
  const fs::path config = write_config("gs.json", R"({
    "model": {"d": 1, "p": 5.0},
    "map": {"gamma_plus": 1.0, "gamma_minus": 1.0, "t_plus": 0.5},
    "grid": {"n": 512, "half_length": 25.0},
    "solver": {"dt_max": 0.001},
    "groundstate": {"tol": 1e-10, "max_iter": 500}
  })");
  const int rc = run_cli({"groundstate", "--config", config.string(), "--out",
                          out.string(), "--quiet"});
  CHECK(rc == 0);
  REQUIRE(fs::exists(out / "results.csv"));
  const std::string results = slurp(out / "results.csv");
  CHECK(results.rfind("mass,mass_sq,residual_l2,iterations,gn_ratio\n", 0) == 0);

  // Parse mass_sq out of the single data row.
  const std::size_t line_start = results.find('\n') + 1;
  const std::size_t c1 = results.find(',', line_start);
  const std::size_t c2 = results.find(',', c1 + 1);
  const double mass_sq =
      std::strtod(results.substr(c1 + 1, c2 - c1 - 1).c_str(), nullptr);
  CHECK(mass_sq == doctest::Approx(2.7206990463).epsilon(1e-5));
  CHECK(fs::exists(out / "checkpoints" / "ground_state.dmf"));
}

TEST_CASE("sweep runs are reproducible and manifests rerun bit-for-bit") {
  const std::string sweep_body = R"({
    "model": {"d": 1, "p": 3.0},
    "map": {"gamma_plus": 1.0, "gamma_minus": 1.0, "t_plus": 0.5},
    "grid": {"n": 64, "half_length": 10.0},
    "solver": {"dt_max": 0.002},
    "sweep": {"mode": "zero_mean", "epsilons": [0.2, 0.1], "horizon": 0.25,
              "sample_count": 33},
    "initial_datum": {"kind": "gaussian", "amplitude": 1.0, "width": 1.0}
  })";
  const fs::path config = write_config("small_sweep.json", sweep_body);

  const fs::path out1 = fresh_out("sweep_out1");
  const fs::path out2 = fresh_out("sweep_out2");
  REQUIRE(run_cli({"sweep", "--config", config.string(), "--out", out1.string(),
                   "--quiet"}) == 0);
  REQUIRE(run_cli({"sweep", "--config", config.string(), "--out", out2.string(),
                   "--quiet"}) == 0);
  CHECK(slurp(out1 / "results.csv") == slurp(out2 / "results.csv"));

  // The manifest doubles as a config: rerunning it reproduces the results.
  const fs::path out3 = fresh_out("sweep_out3");
  REQUIRE(run_cli({"sweep", "--config", (out1 / "manifest.json").string(),
                   "--out", out3.string(), "--quiet"}) == 0);
  CHECK(slurp(out3 / "results.csv") == slurp(out1 / "results.csv"));
  CHECK(slurp(out3 / "manifest.json").find("\"config_hash\"") != std::string::npos);
}

TEST_CASE("checkpoint initial data round-trip through simulate") {
  const dmnls::Grid grid(1, 64, 10.0);
  const dmnls::Field phi = dmnls::sample_field(grid, [](const double* x) {
    return dmnls::Complex(std::exp(-0.5 * x[0] * x[0]), 0.0);
  });
  const fs::path ckpt = scratch_dir() / "datum.dmf";
  dmnls::save_checkpoint(phi, ckpt.string(), 0.0);

  const std::string body_head = R"({
    "model": {"d": 1, "p": 3.0},
    "map": {"gamma_plus": 1.0, "gamma_minus": 1.0, "t_plus": 0.5, "epsilon": 1.0},
    "solver": {"dt_max": 0.005},
    "time": {"t0": 0.0, "t1": 0.05},
    "initial_datum": {"kind": "checkpoint", "path": ")" + ckpt.string() + R"("},
  )";
  const fs::path good = write_config(
      "ckpt_good.json", body_head + R"("grid": {"n": 64, "half_length": 10.0}})");
  const fs::path out = fresh_out("ckpt_out");
  CHECK(run_cli({"simulate", "--config", good.string(), "--out", out.string(),
                 "--quiet"}) == 0);

  const fs::path mismatched = write_config(
      "ckpt_bad.json", body_head + R"("grid": {"n": 128, "half_length": 10.0}})");
  const fs::path out_bad = fresh_out("ckpt_out_bad");
  CHECK(run_cli({"simulate", "--config", mismatched.string(), "--out",
                 out_bad.string(), "--quiet"}) == 2);
}

TEST_CASE("configuration errors exit with code 2") {
  auto expect_config_error = [](const std::string& name, const std::string& body) {
    const fs::path config = write_config(name, body);
    const fs::path out = fresh_out(name + ".out");
    const int rc = run_cli({"simulate", "--config", config.string(), "--out",
                            out.string(), "--quiet"});
    CHECK(rc == 2);
  };

  expect_config_error("bad_tplus.json", R"({
    "model": {"d": 1, "p": 3.0},
    "map": {"gamma_plus": 1.0, "gamma_minus": 1.0, "t_plus": 1.5, "epsilon": 1.0},
    "grid": {"n": 64, "half_length": 10.0},
    "solver": {"dt_max": 0.005},
    "time": {"t0": 0.0, "t1": 0.1},
    "initial_datum": {"kind": "gaussian", "amplitude": 1.0, "width": 1.0}
  })");

  expect_config_error("unknown_top.json", R"({
    "model": {"d": 1, "p": 3.0},
    "map": {"gamma_plus": 1.0, "gamma_minus": 1.0, "t_plus": 0.5, "epsilon": 1.0},
    "grid": {"n": 64, "half_length": 10.0},
    "solver": {"dt_max": 0.005},
    "time": {"t0": 0.0, "t1": 0.1},
    "initial_datum": {"kind": "gaussian", "amplitude": 1.0, "width": 1.0},
    "gamma_typo": 2.0
  })");

  expect_config_error("unknown_nested.json", R"({
    "model": {"d": 1, "p": 3.0},
    "map": {"gamma_plus": 1.0, "gamma_minus": 1.0, "t_plus": 0.5, "epsilon": 1.0,
            "epsilonn": 0.1},
    "grid": {"n": 64, "half_length": 10.0},
    "solver": {"dt_max": 0.005},
    "time": {"t0": 0.0, "t1": 0.1},
    "initial_datum": {"kind": "gaussian", "amplitude": 1.0, "width": 1.0}
  })");

  expect_config_error("missing_grid_n.json", R"({
    "model": {"d": 1, "p": 3.0},
    "map": {"gamma_plus": 1.0, "gamma_minus": 1.0, "t_plus": 0.5, "epsilon": 1.0},
    "grid": {"half_length": 10.0},
    "solver": {"dt_max": 0.005},
    "time": {"t0": 0.0, "t1": 0.1},
    "initial_datum": {"kind": "gaussian", "amplitude": 1.0, "width": 1.0}
  })");

  expect_config_error("malformed.json", "{ this is not json ");

  expect_config_error("wrong_type.json", R"({
    "model": {"d": 1, "p": "three"},
    "map": {"gamma_plus": 1.0, "gamma_minus": 1.0, "t_plus": 0.5, "epsilon": 1.0},
    "grid": {"n": 64, "half_length": 10.0},
    "solver": {"dt_max": 0.005},
    "time": {"t0": 0.0, "t1": 0.1},
    "initial_datum": {"kind": "gaussian", "amplitude": 1.0, "width": 1.0}
  })");

  // A zero-mean sweep on a map whose mean is not zero.
  const fs::path skewed = write_config("skewed_zero_mean.json", R"({
    "model": {"d": 1, "p": 3.0},
    "map": {"gamma_plus": 2.0, "gamma_minus": 1.0, "t_plus": 0.5},
    "grid": {"n": 64, "half_length": 10.0},
    "solver": {"dt_max": 0.002},
    "sweep": {"mode": "zero_mean", "epsilons": [0.2, 0.1], "horizon": 0.25,
              "sample_count": 33},
    "initial_datum": {"kind": "gaussian", "amplitude": 1.0, "width": 1.0}
  })");
  const fs::path out = fresh_out("skewed_out");
  CHECK(run_cli({"sweep", "--config", skewed.string(), "--out", out.string(),
                 "--quiet"}) == 2);
}

TEST_CASE("usage errors exit with code 2") {
  const fs::path out = fresh_out("usage_out");
  CHECK(run_cli({"frobnicate", "--config", "x.json", "--out", out.string()}) == 2);
  CHECK(run_cli({"simulate", "--out", out.string()}) == 2);  // --config missing
  CHECK(run_cli({"simulate", "--config",
                 (scratch_dir() / "no_such_file.json").string(), "--out",
                 out.string()}) == 2);
}

TEST_CASE("runtime failures exit with code 1") {
  // Averaging sweep whose averaged equation blows up inside the horizon.
  const fs::path config = write_config("sweep_blowup.json", R"({
    "model": {"d": 1, "p": 5.0},
    "map": {"gamma_plus": 4.0, "gamma_minus": 1.0, "t_plus": 0.5},
    "grid": {"n": 256, "half_length": 15.0},
    "solver": {"dt_max": 0.001, "blowup_gradient_factor": 10.0},
    "sweep": {"mode": "averaging", "epsilons": [0.5], "horizon": 1.0,
              "sample_count": 33},
    "initial_datum": {"kind": "ground_state", "mass_ratio": 2.0}
  })");
  const fs::path out = fresh_out("sweep_blowup_out");
  CHECK(run_cli({"sweep", "--config", config.string(), "--out", out.string(),
                 "--quiet"}) == 1);
  // Best-effort failure manifest.
  REQUIRE(fs::exists(out / "manifest.json"));
  CHECK(slurp(out / "manifest.json").find("\"failed\"") != std::string::npos);
}

}  // TEST_SUITE
