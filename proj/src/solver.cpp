#include "dmnls/solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dmnls {

namespace {

constexpr double kStepCountGuard = 1e-12;  // absorbs roundoff in len/dt_max

struct Segment {
  double t0, t1, gamma;
};

void check_config(const SolverConfig& cfg) {
  if (!(std::isfinite(cfg.dt_max) && cfg.dt_max > 0.0))
    throw std::invalid_argument("SolverConfig: dt_max must be positive");
  if (!(std::isfinite(cfg.p) && cfg.p > 1.0))
    throw std::invalid_argument("SolverConfig: p must exceed 1");
  if (cfg.output_stride < 1)
    throw std::invalid_argument("SolverConfig: output_stride must be >= 1");
  if (!(cfg.blowup_gradient_factor > 0.0))
    throw std::invalid_argument("SolverConfig: blowup_gradient_factor must be positive");
  if (!(cfg.blowup_tail_threshold > 0.0 && cfg.blowup_tail_threshold < 1.0))
    throw std::invalid_argument("SolverConfig: blowup_tail_threshold must lie in (0,1)");
}

// |u|^{p-1} with the convention 0^{p-1} = 0; fast paths for the shipped
// cubic and quintic nonlinearities.
inline double modulus_power(const Complex& u, double p) {
  const double m2 = std::norm(u);
  if (p == 3.0) return m2;
  if (p == 5.0) return m2 * m2;
  return m2 > 0.0 ? std::pow(m2, 0.5 * (p - 1.0)) : 0.0;
}

// Everything the stepping loop needs that depends only on the grid.
struct Engine {
  const Grid grid;
  const SolverConfig& cfg;
  std::vector<double> xi_sq;       // |xi|^2 per flattened spectral index
  std::vector<std::uint8_t> tail;  // 1 where the 2/3-rule mask removes the mode
  std::vector<Complex> half_mult;  // exp(-i*gamma*dt/2*|xi|^2), cached
  double cached_gamma = 0.0, cached_dt = -1.0;

  Field phys;                // current state, physical representation
  double mass = 0.0;         // of the current state
  double grad = 0.0;
  double tail_raw = 0.0;     // pre-dealias tail fraction of the last step
  double grad_initial = 0.0;

  Engine(const Field& phi, const SolverConfig& cfg_)
      : grid(phi.grid), cfg(cfg_), phys(phi) {
    const int n = grid.points_per_axis;
    const int d = grid.dimension;
    xi_sq.resize(grid.num_points());
    tail.resize(grid.num_points());
    std::array<int, 3> idx{0, 0, 0};
    for (std::size_t p = 0; p < xi_sq.size(); ++p) {
      double acc = 0.0;
      bool in_tail = false;
      for (int a = 0; a < d; ++a) {
        const double xi = grid.wavenumber(idx[a]);
        acc += xi * xi;
        if (3 * std::abs(grid.mode(idx[a])) > n) in_tail = true;
      }
      xi_sq[p] = acc;
      tail[p] = in_tail ? 1 : 0;
      for (int a = d - 1; a >= 0; --a) {
        if (++idx[a] < n) break;
        idx[a] = 0;
      }
    }
    refresh_from_state();
    grad_initial = grad;
    tail_raw = spectral_tail_fraction(phys);
  }

  void refresh_from_state() {
    const Field spec = to_spectral(phys);
    const double w = grid.weight();
    double m = 0.0, g = 0.0;
    for (std::size_t i = 0; i < spec.values.size(); ++i) {
      const double a = std::norm(spec.values[i]);
      m += a;
      g += xi_sq[i] * a;
    }
    mass = m * w;
    grad = g * w;
  }

  void ensure_multiplier(double gamma, double dt) {
    if (!half_mult.empty() && gamma == cached_gamma && dt == cached_dt) return;
    half_mult.resize(xi_sq.size());
    const double G = 0.5 * gamma * dt;
    for (std::size_t i = 0; i < xi_sq.size(); ++i)
      half_mult[i] = std::polar(1.0, -G * xi_sq[i]);
    cached_gamma = gamma;
    cached_dt = dt;
  }

  // One Strang step; updates phys/mass/grad/tail_raw.
  void step(double gamma, double dt) {
    ensure_multiplier(gamma, dt);
    Field spec = to_spectral(phys);
    for (std::size_t i = 0; i < spec.values.size(); ++i)
      spec.values[i] *= half_mult[i];
    Field mid = to_physical(spec);
    if (cfg.nonlinearity_enabled) {
      for (Complex& u : mid.values)
        u *= std::polar(1.0, dt * modulus_power(u, cfg.p));
    }
    spec = to_spectral(mid);

    const double w = grid.weight();
    double total = 0.0, tail_mass = 0.0;
    for (std::size_t i = 0; i < spec.values.size(); ++i) {
      const double a = std::norm(spec.values[i]);
      total += a;
      if (tail[i]) tail_mass += a;
    }
    tail_raw = total > 0.0 ? tail_mass / total : 0.0;

    if (cfg.dealias) {
      for (std::size_t i = 0; i < spec.values.size(); ++i)
        if (tail[i]) spec.values[i] = Complex{0.0, 0.0};
    }
    double m = 0.0, g = 0.0;
    for (std::size_t i = 0; i < spec.values.size(); ++i) {
      spec.values[i] *= half_mult[i];
      const double a = std::norm(spec.values[i]);
      m += a;
      g += xi_sq[i] * a;
    }
    mass = m * w;
    grad = g * w;
    phys = to_physical(spec);
  }

  DiagnosticsRecord record(double t, double gamma) const {
    DiagnosticsRecord r;
    r.time = t;
    r.mass = mass;
    r.grad_sq = grad;
    r.linf = linf_norm(phys);
    r.piecewise_energy =
        0.5 * gamma * grad - lp_pow_sum(phys, cfg.p + 1.0) / (cfg.p + 1.0);
    r.current_gamma = gamma;
    r.tail_fraction = tail_raw;
    return r;
  }

  // Returns a report if a halt condition fired at time t.
  std::optional<BlowupReport> check(double t) const {
    if (!std::isfinite(mass) || !std::isfinite(grad))
      return BlowupReport{true, t, BlowupTrigger::NonFinite, grad};
    if (grad_initial > 0.0 && grad > cfg.blowup_gradient_factor * grad_initial)
      return BlowupReport{true, t, BlowupTrigger::GradientGrowth, grad};
    if (tail_raw > cfg.blowup_tail_threshold)
      return BlowupReport{true, t, BlowupTrigger::SpectralTail, grad};
    return std::nullopt;
  }
};

// Sample times restricted to (a, b]; assumes sample_times sorted.
std::vector<double> knots_in(const std::vector<double>& sample_times, double a,
                             double b) {
  std::vector<double> out;
  for (double s : sample_times)
    if (s > a && s <= b) out.push_back(s);
  return out;
}

EvolveResult run_segments(const Field& phi, const std::vector<Segment>& segments,
                          const SolverConfig& cfg,
                          const std::vector<double>& sample_times,
                          const SampleObserver& observer) {
  check_config(cfg);
  Engine eng(phi, cfg);
  EvolveResult result{phi, {}, std::nullopt};

  const double t_begin = segments.front().t0;
  if (!sample_times.empty()) {
    if (!std::is_sorted(sample_times.begin(), sample_times.end()))
      throw std::invalid_argument("evolve: sample times must be sorted");
    if (sample_times.front() < t_begin || sample_times.back() > segments.back().t1)
      throw std::invalid_argument("evolve: sample times outside the interval");
  }

  result.diagnostics.push_back(eng.record(t_begin, segments.front().gamma));
  if (auto rep = eng.check(t_begin)) {  // non-finite initial data aborts here
    if (rep->trigger == BlowupTrigger::NonFinite) {
      result.blowup = rep;
      result.state = eng.phys;
      return result;
    }
  }
  if (observer && !sample_times.empty() && sample_times.front() == t_begin)
    observer(t_begin, eng.phys);

  long long global_step = 0;
  for (const Segment& seg : segments) {
    // Step endpoints: uniform subdivision between consecutive sample knots.
    std::vector<double> knots = knots_in(sample_times, seg.t0, seg.t1);
    if (knots.empty() || knots.back() != seg.t1) knots.push_back(seg.t1);

    double a = seg.t0;
    for (double b : knots) {
      const double len = b - a;
      if (len > 0.0) {
        const long long nsteps = std::max<long long>(
            1, static_cast<long long>(std::ceil(len / cfg.dt_max - kStepCountGuard)));
        const double dt = len / static_cast<double>(nsteps);
        for (long long i = 0; i < nsteps; ++i) {
          if (cfg.cancel && cfg.cancel->load()) {
            result.state = eng.phys;
            return result;
          }
          const double t_end = (i == nsteps - 1) ? b : a + dt * static_cast<double>(i + 1);
          eng.step(seg.gamma, dt);
          ++global_step;
          if (auto rep = eng.check(t_end)) {
            result.diagnostics.push_back(eng.record(t_end, seg.gamma));
            result.blowup = rep;
            result.state = eng.phys;
            return result;
          }
          if (global_step % cfg.output_stride == 0)
            result.diagnostics.push_back(eng.record(t_end, seg.gamma));
        }
      }
      if (observer && std::binary_search(sample_times.begin(), sample_times.end(), b))
        observer(b, eng.phys);
      a = b;
    }
    if (result.diagnostics.back().time != seg.t1)
      result.diagnostics.push_back(eng.record(seg.t1, seg.gamma));
  }
  result.state = eng.phys;
  return result;
}

std::vector<Segment> segments_of_map(const DispersionMap& map, double t0,
                                     double t1) {
  std::vector<Segment> segs;
  double a = t0;
  for (const Breakpoint& bp : breakpoints_between(map, t0, t1)) {
    segs.push_back({a, bp.time, gamma_at(map, 0.5 * (a + bp.time))});
    a = bp.time;
  }
  segs.push_back({a, t1, gamma_at(map, 0.5 * (a + t1))});
  return segs;
}

// Negative-control path: uniform steps across the whole interval, gamma
// sampled at each step's midpoint, jumps straddled freely.
EvolveResult run_misaligned(const Field& phi, const DispersionMap& map,
                            double t0, double t1, const SolverConfig& cfg,
                            const std::vector<double>& sample_times,
                            const SampleObserver& observer) {
  check_config(cfg);
  Engine eng(phi, cfg);
  EvolveResult result{phi, {}, std::nullopt};
  result.diagnostics.push_back(eng.record(t0, gamma_at(map, t0)));
  if (observer && !sample_times.empty() && sample_times.front() == t0)
    observer(t0, eng.phys);

  const long long nsteps = std::max<long long>(
      1, static_cast<long long>(std::ceil((t1 - t0) / cfg.dt_max - kStepCountGuard)));
  const double dt = (t1 - t0) / static_cast<double>(nsteps);
  std::size_t next_sample = 0;
  while (next_sample < sample_times.size() && sample_times[next_sample] <= t0)
    ++next_sample;
  for (long long i = 0; i < nsteps; ++i) {
    const double t_end = (i == nsteps - 1) ? t1 : t0 + dt * static_cast<double>(i + 1);
    const double gamma = gamma_at(map, t0 + dt * (static_cast<double>(i) + 0.5));
    eng.step(gamma, dt);
    if (auto rep = eng.check(t_end)) {
      result.diagnostics.push_back(eng.record(t_end, gamma));
      result.blowup = rep;
      result.state = eng.phys;
      return result;
    }
    if ((i + 1) % cfg.output_stride == 0 || i == nsteps - 1)
      result.diagnostics.push_back(eng.record(t_end, gamma));
    // Misaligned steps do not land on sample times exactly; hand over the
    // state at the first step boundary past each one.
    while (next_sample < sample_times.size() && sample_times[next_sample] <= t_end) {
      if (observer) observer(sample_times[next_sample], eng.phys);
      ++next_sample;
    }
  }
  result.state = eng.phys;
  return result;
}

}  // namespace

Field nonlinear_phase(const Field& f, double tau, double p) {
  if (f.representation != Representation::Physical)
    throw std::invalid_argument("nonlinear_phase: field must be physical");
  if (!(p > 1.0)) throw std::invalid_argument("nonlinear_phase: p must exceed 1");
  Field out = f;
  for (Complex& u : out.values) u *= std::polar(1.0, tau * modulus_power(u, p));
  return out;
}

Field strang_step(const Field& f, double gamma, double dt,
                  const SolverConfig& cfg) {
  if (!(dt > 0.0)) throw std::invalid_argument("strang_step: dt must be positive");
  Engine eng(f.representation == Representation::Physical ? f : to_physical(f),
             cfg);
  eng.step(gamma, dt);
  return eng.phys;
}

EvolveResult evolve_sampled(const Field& phi, const DispersionMap& map,
                            double t0, double t1, const SolverConfig& cfg,
                            const std::vector<double>& sample_times,
                            const SampleObserver& observer) {
  if (!(t0 < t1)) throw std::invalid_argument("evolve: requires t0 < t1");
  if (!(cfg.dt_max < map.epsilon * std::min(map.t_plus, 1.0 - map.t_plus)))
    throw std::invalid_argument(
        "evolve: dt_max must be below epsilon*min(t_plus, 1-t_plus) so no "
        "step can straddle a coefficient jump");
  if (!cfg.align_breakpoints)
    return run_misaligned(phi, map, t0, t1, cfg, sample_times, observer);
  return run_segments(phi, segments_of_map(map, t0, t1), cfg, sample_times,
                      observer);
}

EvolveResult evolve(const Field& phi, const DispersionMap& map, double t0,
                    double t1, const SolverConfig& cfg) {
  return evolve_sampled(phi, map, t0, t1, cfg, {}, nullptr);
}

EvolveResult evolve_constant_sampled(const Field& phi, double gamma, double t0,
                                     double t1, const SolverConfig& cfg,
                                     const std::vector<double>& sample_times,
                                     const SampleObserver& observer) {
  if (!(t0 < t1)) throw std::invalid_argument("evolve_constant: requires t0 < t1");
  if (!std::isfinite(gamma))
    throw std::invalid_argument("evolve_constant: gamma must be finite");
  return run_segments(phi, {{t0, t1, gamma}}, cfg, sample_times, observer);
}

EvolveResult evolve_constant(const Field& phi, double gamma, double t0,
                             double t1, const SolverConfig& cfg) {
  return evolve_constant_sampled(phi, gamma, t0, t1, cfg, {}, nullptr);
}

double piecewise_energy(const Field& f, double gamma, double p) {
  return 0.5 * gamma * gradient_norm_sq(f) - lp_pow_sum(f, p + 1.0) / (p + 1.0);
}

}  // namespace dmnls
