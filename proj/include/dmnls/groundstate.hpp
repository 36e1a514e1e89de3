#pragma once

#include "dmnls/spectral.hpp"

namespace dmnls {

// Positive radial solution of  Laplacian(Q) - Q + Q^p = 0  at the
// mass-critical exponent p = 1 + 4/d, computed on a periodic grid.
struct GroundState {
  int dimension;
  double p;
  Field q_field;      // physical, real and positive up to roundoff
  double residual_l2; // ||Laplacian(Q) - Q + Q^p||_{L2} at convergence
  double mass;        // ||Q||_{L2}
  int iterations;
};

// Closed form of the d=1 (quintic) ground state: 3^{1/4} sech^{1/2}(2x).
// The ODE residual Q'' - Q + Q^5 = 0 is verified spectrally in the tests
// before any other module leans on this.
double exact_q_1d(double x);

// Stabilized fixed-point iteration
//   Q_{n+1} = S_n^{p/(p-1)} (1 - Laplacian)^{-1} [Q_n^p],
//   S_n = <(1 - Laplacian) Q_n, Q_n> / <Q_n^p, Q_n>,
// from a Gaussian seed (amplitude 2, width 1). Stops when the equation
// residual drops to tol; throws std::runtime_error (carrying the last
// residual) if max_iter passes first. Requires grid.dimension == d.
GroundState petviashvili(const Grid& grid, int d, double tol = 1e-10,
                         int max_iter = 500);

// Sharpness functional of the Gagliardo-Nirenberg inequality:
//
//   ||f||_{2+4/d}^{2+4/d} / [ (1+2/d) q_mass^{-4/d} ||f||_2^{4/d} ||grad f||_2^2 ]
//
// where q_mass = ||Q||_{L2}. Values are <= 1 with equality exactly on the
// ground-state orbit. Throws std::domain_error on the zero field.
double gn_ratio(const Field& f, double q_mass, int d);

// Mass threshold gamma_plus^{-d/4} * q_mass below which initial data evolve
// globally under the dispersion-managed flow.
double critical_mass(double gamma_plus, double q_mass, int d);

}  // namespace dmnls
