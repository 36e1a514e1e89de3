#pragma once

#include "dmnls/dispersion.hpp"
#include "dmnls/spectral.hpp"

namespace dmnls {

// Exact free flow over cumulative dispersion Gamma: multiplies each spectral
// mode by exp(-i*Gamma*|xi|^2) and returns the field in physical
// representation. Mass-preserving up to transform roundoff.
Field propagate_linear(const Field& f, double Gamma);

// propagate_linear with Gamma = cumulative_dispersion(map, s, t).
Field propagate_linear_map(const Field& f, const DispersionMap& map, double s,
                           double t);

// Independent oracle for propagate_linear: evaluates the oscillatory
// convolution
//
//   e^{-i sgn(Gamma) pi d/4} |4 pi Gamma|^{-d/2}
//       * integral over the box of e^{i|x-y|^2/(4 Gamma)} f(y) dy
//
// by trapezoid quadrature. The chirp is sampled on a refined copy of the
// grid (band-limited upsampling of f) chosen so that the quadrature's alias
// images land far outside the box; see kernel_oversampling in linear.cpp.
// O(N^{2d}) cost: restricted to N <= 512 in 1D and N <= 64 per axis in 2D.
// The constant phase depends on the sign of Gamma (it is the conjugate pair
// of stationary-phase factors); the cross-validation tests pin this down.
Field kernel_solution(const Field& f, double Gamma);

// ||U_eps(t,s) f - U_0(t,s) f||_{H^sigma} where U_eps uses the map's
// cumulative dispersion and U_0 uses <gamma>*(t-s). Evaluated exactly in
// spectral space: both multipliers are unimodular, so the gap reduces to
// |exp(-i*m*|xi|^2) - 1| with m = mean_zero_integral(map, s, t).
double averaging_gap_linear(const Field& f, const DispersionMap& map, double s,
                            double t, double sigma = 2.0);

}  // namespace dmnls
