#include "dmnls/reference.hpp"

#include <cmath>
#include <stdexcept>

namespace dmnls {

Field pseudoconformal_field(const BlowupProfile& profile, double t,
                            const Grid& grid) {
  if (!(profile.a > 0.0))
    throw std::invalid_argument("pseudoconformal_field: rate a must be positive");
  if (!(profile.gamma_plus > 0.0))
    throw std::invalid_argument("pseudoconformal_field: gamma_plus must be positive");
  if (grid.dimension != 1)
    throw std::invalid_argument("pseudoconformal_field: only d = 1 is supported");
  if (!(t < 1.0 / profile.a))
    throw std::domain_error("pseudoconformal_field: t is at or past the blow-up time 1/a");

  const double a = profile.a;
  const double gp = profile.gamma_plus;
  const double lam = 1.0 / (1.0 - a * t);       // focusing factor, 1 at t=0
  const double b = -a * lam / (4.0 * gp);       // quadratic phase coefficient
  const double theta = t * lam;                 // t / (1-at)
  const double scale = lam / std::sqrt(gp);     // Q argument scale
  return sample_field(grid, [&](const double* x) {
    const double r = x[0];
    const double amp = std::sqrt(lam) * exact_q_1d(scale * r);
    return std::polar(amp, b * r * r + theta);
  });
}

Field zero_mean_averaged(const Field& phi, double t, double t0, double p) {
  if (phi.representation != Representation::Physical)
    throw std::invalid_argument("zero_mean_averaged: phi must be physical");
  Field out = phi;
  const double dt = t - t0;
  for (Complex& v : out.values) {
    const double m2 = std::norm(v);
    const double amp = m2 > 0.0 ? std::pow(m2, 0.5 * (p - 1.0)) : 0.0;
    v *= std::polar(1.0, dt * amp);
  }
  return out;
}

Field gaussian_linear(double sigma0, double Gamma, const Grid& grid) {
  if (!(sigma0 > 0.0))
    throw std::invalid_argument("gaussian_linear: sigma0 must be positive");
  const Complex z{sigma0 * sigma0, 2.0 * Gamma};  // sigma0^2 + 2 i Gamma
  const Complex prefactor =
      std::pow(Complex{sigma0 * sigma0, 0.0} / z, 0.5 * grid.dimension);
  const Complex inv_2z = 1.0 / (2.0 * z);
  const int d = grid.dimension;
  return sample_field(grid, [&](const double* x) {
    double r2 = 0.0;
    for (int a = 0; a < d; ++a) r2 += x[a] * x[a];
    return prefactor * std::exp(-r2 * inv_2z);
  });
}

Field blowup_seed_after_defocusing(const BlowupProfile& profile,
                                   const DispersionMap& map, double t0,
                                   const SolverConfig& cfg) {
  if (!(gamma_at(map, t0) < 0.0))
    throw std::invalid_argument(
        "blowup_seed_after_defocusing: t0 must lie inside a defocusing piece");
  if (!(1.0 / profile.a < map.epsilon * map.t_plus))
    throw std::invalid_argument(
        "blowup_seed_after_defocusing: need 1/a < epsilon*t_plus so the "
        "blow-up happens before the next coefficient jump");

  const Grid& grid = profile.ground_state.q_field.grid;
  const double eps = map.epsilon;
  const double period_start = eps * std::ceil(t0 / eps);
  Field target = pseudoconformal_field(profile, 0.0, grid);
  const double duration = period_start - t0;
  if (duration <= 0.0) return target;  // t0 already at the period start

  // Backward defocusing integration via the conjugation symmetry: conjugate,
  // run the same defocusing equation forward for the same duration,
  // conjugate back.
  for (Complex& v : target.values) v = std::conj(v);
  SolverConfig back = cfg;
  back.cancel = nullptr;
  EvolveResult run =
      evolve_constant(target, -map.gamma_minus, 0.0, duration, back);
  if (run.blowup && run.blowup->detected)
    throw std::runtime_error(
        "blowup_seed_after_defocusing: backward defocusing run halted early");
  Field seed = run.state;
  for (Complex& v : seed.values) v = std::conj(v);
  return seed;
}

}  // namespace dmnls
