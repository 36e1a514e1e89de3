#pragma once

#include "dmnls/dispersion.hpp"
#include "dmnls/groundstate.hpp"
#include "dmnls/solver.hpp"
#include "dmnls/spectral.hpp"

namespace dmnls {

// Parameters of the explicit blow-up solution of the focusing mass-critical
// equation with constant dispersion gamma_plus; blow-up time is 1/a.
struct BlowupProfile {
  double a;            // blow-up rate, > 0
  double gamma_plus;   // constant dispersion of the focusing piece, > 0
  GroundState ground_state;
};

// Exact solution of  i v_t + gamma_plus Laplacian(v) + |v|^{4/d} v = 0:
//
//   v_a(t,x) = (1-at)^{-d/2} Q( x / (sqrt(gamma_plus) (1-at)) )
//              * exp( -i a |x|^2 / (4 gamma_plus (1-at)) )
//              * exp(  i t / (1-at) ),
//
// verified against the PDE by direct substitution (the phase signs and the
// sqrt(gamma_plus) placement are forced by that computation; see the
// discrete residual test). Mass gamma_plus^{d/4} ||Q||; focuses to the
// blow-up at t = 1/a. Requires t < 1/a; only d = 1 is supported (the 1D
// ground state has a closed form, so no off-grid interpolation is needed).
Field pseudoconformal_field(const BlowupProfile& profile, double t,
                            const Grid& grid);

// Closed-form solution of the averaged equation when <gamma> = 0:
// u0(t,x) = phi(x) exp(i (t-t0) |phi(x)|^{p-1}). The modulus never moves.
Field zero_mean_averaged(const Field& phi, double t, double t0, double p);

// Closed-form free evolution of the Gaussian exp(-|x|^2/(2 sigma0^2)) over
// cumulative dispersion Gamma:
//
//   (sigma0^2 / (sigma0^2 + 2 i Gamma))^{d/2}
//       * exp( -|x|^2 / (2 (sigma0^2 + 2 i Gamma)) ),
//
// the analytic continuation of heat-kernel spreading. Pins down the
// propagator's sign convention, which unitarity checks cannot see.
Field gaussian_linear(double sigma0, double Gamma, const Grid& grid);

// Initial datum at time t0 (inside a defocusing piece) whose forward
// evolution reaches the pseudo-conformal profile v_a(0) exactly at the next
// period start and then blows up inside the following focusing piece.
// Obtained by integrating the defocusing equation backwards from v_a(0)
// via the conjugation symmetry u(t) -> conj(u(-t)). Requires
// gamma_at(map, t0) < 0 and 1/a < epsilon*t_plus (blow-up must precede the
// next coefficient jump). The grid is taken from profile.ground_state.
Field blowup_seed_after_defocusing(const BlowupProfile& profile,
                                   const DispersionMap& map, double t0,
                                   const SolverConfig& cfg);

}  // namespace dmnls
