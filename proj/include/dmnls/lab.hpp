#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dmnls/dispersion.hpp"
#include "dmnls/solver.hpp"
#include "dmnls/spectral.hpp"

namespace dmnls {

// One row of an epsilon sweep against the averaged equation.
struct SweepResult {
  double epsilon;
  double error_h2;  // sup over sampled times of ||u_eps - u_0||_{H^2}
  double error_l2;
  std::vector<double> sample_times;
  double wall_time;  // seconds
};

// One row of the zero-mean validation table.
struct ZeroMeanRow {
  double epsilon;
  double error_h2;  // sup_t ||u_eps - phi e^{i t |phi|^{p-1}}||_{H^2}
  double defect;    // sup_t || |u_eps| - |phi| ||_{L2}
};

struct ThresholdStudyResult {
  double mass_ratio;  // ||phi||_{L2} / critical_mass
  bool blew_up;
  double horizon;
  std::optional<double> detection_time;
  bool inconclusive = false;  // detector fired on the under-resolution alarm
};

// Runs the scaled equation for each epsilon and the averaged constant-
// coefficient equation once, and reports the sup over >= sample_count
// uniform times (plus each map's jump times) of the H^2 and L^2 gaps.
// epsilons must be positive and strictly decreasing; sample_count >= 32.
// Throws std::runtime_error if the averaged run blows up before T (the
// horizon must stay below the averaged equation's lifespan).
std::vector<SweepResult> epsilon_sweep(const Field& phi,
                                       const DispersionMap& map_template,
                                       const std::vector<double>& epsilons,
                                       double t0, double T,
                                       const SolverConfig& cfg,
                                       int sample_count = 33, int threads = 1);

// For a zero-mean map, compares each scaled run against the closed-form
// phase solution phi e^{i t |phi|^{p-1}} and reports the non-dispersion
// defect sup_t || |u_eps| - |phi| ||_{L2}. Starts at t0 = 0.
std::vector<ZeroMeanRow> zero_mean_validation(const Field& phi,
                                              const DispersionMap& map,
                                              const std::vector<double>& epsilons,
                                              double T, const SolverConfig& cfg,
                                              int sample_count = 33);

// Scales ground-state data c*Q(sqrt(gamma_plus) x) to each requested mass
// ratio and runs `periods` full map periods, recording blow-up or survival.
// With pseudo_conformal_rate > 0 an extra run starts from the
// pseudo-conformal datum (rate a must satisfy 1/a < epsilon*t_plus). The
// grid fixes the dimension; cfg.p must be the mass-critical exponent 1+4/d.
std::vector<ThresholdStudyResult> threshold_study(
    const std::vector<double>& mass_ratios, const DispersionMap& map,
    int periods, const SolverConfig& cfg, const Grid& grid,
    double pseudo_conformal_rate = 0.0);

// Richardson estimate of the integrator's convergence order from terminal
// states at a halving dt sequence (at least three entries). Returns
// +infinity when the differences sit at the roundoff floor (the run is exact
// to machine precision, e.g. linear-only).
double splitting_order_study(const Field& phi, const DispersionMap& map,
                             const std::vector<double>& dts, double T,
                             const SolverConfig& cfg);

// Binary field snapshot. Little-endian layout: seven 64-bit header words
// {magic, version, dimension, N, L bits, representation, time bits} followed
// by N^d interleaved (re, im) doubles in row-major order. Byte-swapped or
// foreign files fail the magic check.
void save_checkpoint(const Field& f, const std::string& path, double time = 0.0);
std::pair<Field, double> load_checkpoint(const std::string& path);

// Doubles are persisted with 17 significant digits so text round trips are
// exact.
std::string format_g17(double v);

// FNV-1a 64-bit hash; used to fingerprint run configurations in manifests.
std::uint64_t fnv1a64(std::string_view data);

// CSV emitters (17-digit values, headers fixed by the external contract).
void write_diagnostics_csv(const std::string& path,
                           const std::vector<DiagnosticsRecord>& records);
void write_sweep_csv(const std::string& path,
                     const std::vector<SweepResult>& rows);
void write_zero_mean_csv(const std::string& path,
                         const std::vector<ZeroMeanRow>& rows);
void write_threshold_csv(const std::string& path,
                         const std::vector<ThresholdStudyResult>& rows);

}  // namespace dmnls
