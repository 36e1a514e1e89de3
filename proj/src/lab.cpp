#include "dmnls/lab.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <set>
#include <stdexcept>
#include <thread>

#include "dmnls/groundstate.hpp"
#include "dmnls/linear.hpp"
#include "dmnls/reference.hpp"

namespace dmnls {

namespace {

constexpr std::uint64_t kCheckpointMagic = 0x444C46534C4E4D44ULL;  // "DMNLSFLD"
constexpr std::uint64_t kCheckpointVersion = 1;

void put_u64(std::string& buf, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint64_t get_u64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

void put_f64(std::string& buf, double d) {
  put_u64(buf, std::bit_cast<std::uint64_t>(d));
}

double get_f64(const unsigned char* p) {
  return std::bit_cast<double>(get_u64(p));
}

// Uniform sample times with the endpoints pinned exactly.
std::vector<double> uniform_samples(double t0, double T, int count) {
  std::vector<double> out(count);
  for (int k = 0; k < count; ++k)
    out[k] = t0 + (T - t0) * static_cast<double>(k) / (count - 1);
  out.front() = t0;
  out.back() = T;
  return out;
}

void check_epsilons(const std::vector<double>& epsilons) {
  if (epsilons.empty())
    throw std::invalid_argument("sweep: epsilon list is empty");
  for (std::size_t i = 0; i < epsilons.size(); ++i) {
    if (!(epsilons[i] > 0.0))
      throw std::invalid_argument("sweep: epsilons must be positive");
    if (i > 0 && !(epsilons[i] < epsilons[i - 1]))
      throw std::invalid_argument("sweep: epsilons must be strictly decreasing");
  }
}

// | |u| - |v| | as a physical field, for the non-dispersion defect.
double modulus_defect(const Field& u, const Field& v) {
  Field diff = u;
  for (std::size_t i = 0; i < diff.values.size(); ++i)
    diff.values[i] = Complex{std::abs(u.values[i]) - std::abs(v.values[i]), 0.0};
  return l2_norm(diff);
}

}  // namespace

std::vector<SweepResult> epsilon_sweep(const Field& phi,
                                       const DispersionMap& map_template,
                                       const std::vector<double>& epsilons,
                                       double t0, double T,
                                       const SolverConfig& cfg,
                                       int sample_count, int threads) {
  check_epsilons(epsilons);
  if (sample_count < 32)
    throw std::invalid_argument("epsilon_sweep: need at least 32 sample times");
  if (!(t0 < T)) throw std::invalid_argument("epsilon_sweep: requires t0 < T");

  const std::vector<double> uniform = uniform_samples(t0, T, sample_count);

  // The averaged run is sampled once, at the uniform times plus every jump
  // time of every requested map, so each scaled run can compare at its own
  // breakpoints as well.
  std::set<double> all_times(uniform.begin(), uniform.end());
  std::vector<DispersionMap> maps;
  for (double eps : epsilons) {
    maps.emplace_back(map_template.gamma_plus, map_template.gamma_minus,
                      map_template.t_plus, eps);
    for (const Breakpoint& bp : breakpoints_between(maps.back(), t0, T))
      all_times.insert(bp.time);
  }
  const std::vector<double> averaged_times(all_times.begin(), all_times.end());

  const double mean = average_dispersion(map_template);
  std::map<double, Field> averaged_states;
  EvolveResult averaged = evolve_constant_sampled(
      phi, mean, t0, T, cfg, averaged_times,
      [&](double t, const Field& u) { averaged_states.emplace(t, u); });
  if (averaged.blowup && averaged.blowup->detected)
    throw std::runtime_error(
        "epsilon_sweep: the averaged run blew up before the horizon (at t = " +
        format_g17(averaged.blowup->detection_time) +
        "); shorten T below the averaged equation's lifespan");

  std::vector<SweepResult> results(epsilons.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= epsilons.size()) return;
      try {
        const DispersionMap& map = maps[i];
        std::set<double> times(uniform.begin(), uniform.end());
        for (const Breakpoint& bp : breakpoints_between(map, t0, T))
          times.insert(bp.time);
        const std::vector<double> sample_times(times.begin(), times.end());

        SweepResult row{epsilons[i], 0.0, 0.0, sample_times, 0.0};
        const auto start = std::chrono::steady_clock::now();
        EvolveResult run = evolve_sampled(
            phi, map, t0, T, cfg, sample_times, [&](double t, const Field& u) {
              const Field diff = subtract(u, averaged_states.at(t));
              row.error_h2 = std::max(row.error_h2, sobolev_norm(diff, 2.0));
              row.error_l2 = std::max(row.error_l2, l2_norm(diff));
            });
        if (run.blowup && run.blowup->detected)
          throw std::runtime_error(
              "epsilon_sweep: scaled run blew up before the horizon at epsilon "
              "= " +
              format_g17(epsilons[i]));
        row.wall_time = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - start)
                            .count();
        results[i] = std::move(row);
      } catch (...) {
        std::scoped_lock lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);
  return results;
}

std::vector<ZeroMeanRow> zero_mean_validation(const Field& phi,
                                              const DispersionMap& map,
                                              const std::vector<double>& epsilons,
                                              double T, const SolverConfig& cfg,
                                              int sample_count) {
  check_epsilons(epsilons);
  const double mean = average_dispersion(map);
  const double scale = map.gamma_plus + map.gamma_minus;
  if (std::abs(mean) > 1e-12 * scale)
    throw std::invalid_argument(
        "zero_mean_validation: map must have zero average dispersion");
  if (sample_count < 32)
    throw std::invalid_argument("zero_mean_validation: need at least 32 sample times");

  const std::vector<double> uniform = uniform_samples(0.0, T, sample_count);
  std::vector<ZeroMeanRow> rows;
  for (double eps : epsilons) {
    const DispersionMap scaled(map.gamma_plus, map.gamma_minus, map.t_plus, eps);
    std::set<double> times(uniform.begin(), uniform.end());
    for (const Breakpoint& bp : breakpoints_between(scaled, 0.0, T))
      times.insert(bp.time);
    const std::vector<double> sample_times(times.begin(), times.end());

    ZeroMeanRow row{eps, 0.0, 0.0};
    EvolveResult run = evolve_sampled(
        phi, scaled, 0.0, T, cfg, sample_times, [&](double t, const Field& u) {
          const Field ref = zero_mean_averaged(phi, t, 0.0, cfg.p);
          row.error_h2 = std::max(row.error_h2, sobolev_norm(subtract(u, ref), 2.0));
          row.defect = std::max(row.defect, modulus_defect(u, phi));
        });
    if (run.blowup && run.blowup->detected)
      throw std::runtime_error(
          "zero_mean_validation: run blew up at epsilon = " + format_g17(eps));
    rows.push_back(row);
  }
  return rows;
}

std::vector<ThresholdStudyResult> threshold_study(
    const std::vector<double>& mass_ratios, const DispersionMap& map,
    int periods, const SolverConfig& cfg, const Grid& grid,
    double pseudo_conformal_rate) {
  const int d = grid.dimension;
  if (std::abs(cfg.p - (1.0 + 4.0 / d)) > 1e-12)
    throw std::invalid_argument(
        "threshold_study: cfg.p must be the mass-critical exponent 1 + 4/d");
  if (periods < 1) throw std::invalid_argument("threshold_study: periods must be >= 1");
  for (double r : mass_ratios)
    if (!(r >= 0.0 && r <= 2.0))
      throw std::invalid_argument("threshold_study: mass ratios must lie in [0, 2]");
  if (d == 2 && map.gamma_plus != 1.0)
    throw std::invalid_argument(
        "threshold_study: d = 2 requires gamma_plus = 1 (the numeric ground "
        "state cannot be rescaled off its grid)");

  // Ground state on this grid; d=1 has the closed form.
  GroundState gs =
      d == 1 ? GroundState{1, 5.0,
                           sample_field(grid,
                                        [](const double* x) {
                                          return Complex{exact_q_1d(x[0]), 0.0};
                                        }),
                           0.0, 0.0, 0}
             : petviashvili(grid, d, 1e-8, 500);
  if (d == 1) gs.mass = l2_norm(gs.q_field);

  const double critical = critical_mass(map.gamma_plus, gs.mass, d);
  const double horizon = static_cast<double>(periods) * map.epsilon;
  const double root_gp = std::sqrt(map.gamma_plus);

  std::vector<ThresholdStudyResult> rows;
  auto run_datum = [&](const Field& datum) {
    ThresholdStudyResult row;
    row.mass_ratio = l2_norm(datum) / critical;
    row.horizon = horizon;
    EvolveResult run = evolve(datum, map, 0.0, horizon, cfg);
    if (run.blowup && run.blowup->detected) {
      row.detection_time = run.blowup->detection_time;
      if (run.blowup->trigger == BlowupTrigger::GradientGrowth) {
        row.blew_up = true;
      } else {
        // Under-resolution alarm (or non-finite values): inconclusive, not a
        // certified blow-up.
        row.blew_up = false;
        row.inconclusive = true;
      }
    } else {
      row.blew_up = false;
    }
    rows.push_back(row);
  };

  for (double r : mass_ratios) {
    Field datum =
        d == 1 ? sample_field(grid,
                              [&](const double* x) {
                                return Complex{r * exact_q_1d(root_gp * x[0]), 0.0};
                              })
               : gs.q_field;
    if (d == 2)
      for (Complex& v : datum.values) v *= r;
    run_datum(datum);
  }

  if (pseudo_conformal_rate > 0.0) {
    if (!(1.0 / pseudo_conformal_rate < map.epsilon * map.t_plus))
      throw std::invalid_argument(
          "threshold_study: pseudo-conformal rate must satisfy 1/a < epsilon*t_plus");
    BlowupProfile profile{pseudo_conformal_rate, map.gamma_plus, gs};
    run_datum(pseudoconformal_field(profile, 0.0, grid));
  }
  return rows;
}

double splitting_order_study(const Field& phi, const DispersionMap& map,
                             const std::vector<double>& dts, double T,
                             const SolverConfig& cfg) {
  if (dts.size() < 3)
    throw std::invalid_argument("splitting_order_study: need at least three dt values");
  for (std::size_t i = 0; i + 1 < dts.size(); ++i)
    if (std::abs(dts[i] / dts[i + 1] - 2.0) > 1e-9)
      throw std::invalid_argument("splitting_order_study: dts must halve");

  std::vector<Field> terminal;
  for (double dt : dts) {
    SolverConfig run_cfg = cfg;
    run_cfg.dt_max = dt;
    EvolveResult run = evolve(phi, map, 0.0, T, run_cfg);
    if (run.blowup && run.blowup->detected)
      throw std::runtime_error("splitting_order_study: run blew up; use tamer data");
    terminal.push_back(std::move(run.state));
  }

  std::vector<double> errs;
  for (std::size_t i = 0; i + 1 < terminal.size(); ++i)
    errs.push_back(l2_norm(subtract(terminal[i], terminal[i + 1])));
  const double floor = 1e-12 * l2_norm(phi);
  if (*std::max_element(errs.begin(), errs.end()) < floor)
    return std::numeric_limits<double>::infinity();  // exact at this resolution
  return std::log2(errs[errs.size() - 2] / errs.back());
}

void save_checkpoint(const Field& f, const std::string& path, double time) {
  std::string buf;
  buf.reserve(56 + 16 * f.values.size());
  put_u64(buf, kCheckpointMagic);
  put_u64(buf, kCheckpointVersion);
  put_u64(buf, static_cast<std::uint64_t>(f.grid.dimension));
  put_u64(buf, static_cast<std::uint64_t>(f.grid.points_per_axis));
  put_f64(buf, f.grid.half_length);
  put_u64(buf, static_cast<std::uint64_t>(f.representation));
  put_f64(buf, time);
  for (const Complex& v : f.values) {
    put_f64(buf, v.real());
    put_f64(buf, v.imag());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("save_checkpoint: cannot open " + path);
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw std::runtime_error("save_checkpoint: write failed for " + path);
}

std::pair<Field, double> load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_checkpoint: cannot open " + path);
  std::string buf((std::istreambuf_iterator<char>(in)),
                  std::istreambuf_iterator<char>());
  if (buf.size() < 56)
    throw std::runtime_error("load_checkpoint: file too short for a header");
  const unsigned char* p = reinterpret_cast<const unsigned char*>(buf.data());
  if (get_u64(p) != kCheckpointMagic)
    throw std::runtime_error(
        "load_checkpoint: bad magic (not a field checkpoint, or written with "
        "foreign byte order)");
  const std::uint64_t version = get_u64(p + 8);
  if (version != kCheckpointVersion)
    throw std::runtime_error("load_checkpoint: unsupported version " +
                             std::to_string(version));
  const auto dim = static_cast<int>(get_u64(p + 16));
  const auto n = static_cast<int>(get_u64(p + 24));
  const double L = get_f64(p + 32);
  const std::uint64_t rep = get_u64(p + 40);
  const double time = get_f64(p + 48);
  if (rep > 1) throw std::runtime_error("load_checkpoint: bad representation tag");

  const Grid grid(dim, n, L);  // validates dim/n/L
  const std::size_t expected = 56 + 16 * grid.num_points();
  if (buf.size() != expected)
    throw std::runtime_error("load_checkpoint: truncated or oversized payload");

  Field f = make_field(grid, static_cast<Representation>(rep));
  for (std::size_t i = 0; i < f.values.size(); ++i)
    f.values[i] = Complex{get_f64(p + 56 + 16 * i), get_f64(p + 64 + 16 * i)};
  return {std::move(f), time};
}

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

void write_diagnostics_csv(const std::string& path,
                           const std::vector<DiagnosticsRecord>& records) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("write_diagnostics_csv: cannot open " + path);
  out << "time,mass,grad_sq,linf,piecewise_energy,current_gamma,tail_fraction\n";
  for (const DiagnosticsRecord& r : records)
    out << format_g17(r.time) << ',' << format_g17(r.mass) << ','
        << format_g17(r.grad_sq) << ',' << format_g17(r.linf) << ','
        << format_g17(r.piecewise_energy) << ',' << format_g17(r.current_gamma)
        << ',' << format_g17(r.tail_fraction) << '\n';
}

void write_sweep_csv(const std::string& path,
                     const std::vector<SweepResult>& rows) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("write_sweep_csv: cannot open " + path);
  out << "epsilon,error_h2,error_l2\n";
  for (const SweepResult& r : rows)
    out << format_g17(r.epsilon) << ',' << format_g17(r.error_h2) << ','
        << format_g17(r.error_l2) << '\n';
}

void write_zero_mean_csv(const std::string& path,
                         const std::vector<ZeroMeanRow>& rows) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("write_zero_mean_csv: cannot open " + path);
  out << "epsilon,error_h2,defect\n";
  for (const ZeroMeanRow& r : rows)
    out << format_g17(r.epsilon) << ',' << format_g17(r.error_h2) << ','
        << format_g17(r.defect) << '\n';
}

void write_threshold_csv(const std::string& path,
                         const std::vector<ThresholdStudyResult>& rows) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("write_threshold_csv: cannot open " + path);
  out << "mass_ratio,blew_up,detection_time\n";
  for (const ThresholdStudyResult& r : rows) {
    out << format_g17(r.mass_ratio) << ',' << (r.blew_up ? "true" : "false")
        << ',';
    if (r.detection_time) out << format_g17(*r.detection_time);
    out << '\n';
  }
}

}  // namespace dmnls
