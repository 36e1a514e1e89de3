#pragma once

#include <vector>

namespace dmnls {

// Piecewise-constant dispersion coefficient. The unscaled map is 1-periodic:
//
//   gamma(t) =  gamma_plus   for frac(t) in (0, t_plus]
//            = -gamma_minus  for frac(t) in (t_plus, 1]
//
// and the object represents the scaled coefficient gamma(t/epsilon), whose
// period is exactly epsilon. Intervals are half-open on the left, so the
// value at a switch time belongs to the piece that ends there; in particular
// gamma_at(0) == gamma_at(epsilon) == -gamma_minus.
struct DispersionMap {
  double gamma_plus;   // dispersion on the focusing piece, > 0
  double gamma_minus;  // magnitude on the defocusing piece, > 0
  double t_plus;       // focusing fraction of the unit period, in (0, 1)
  double epsilon;      // period of the scaled map, > 0

  DispersionMap(double gamma_plus, double gamma_minus, double t_plus,
                double epsilon = 1.0);
};

// Direction of a coefficient jump: at epsilon*(n + t_plus) the map switches
// from +gamma_plus to -gamma_minus (ToDefocusing); at epsilon*n it switches
// back (ToFocusing).
enum class SwitchKind { ToDefocusing, ToFocusing };

struct Breakpoint {
  double time;
  SwitchKind switch_kind;
};

// Value of the scaled coefficient at time t (any real).
double gamma_at(const DispersionMap& map, double t);

// Mean over one period: gamma_plus*t_plus - gamma_minus*(1-t_plus).
// Independent of epsilon.
double average_dispersion(const DispersionMap& map);

// Cumulative dispersion Gamma(t,s) = integral of gamma(tau/epsilon) over
// [s,t], evaluated in closed form (whole periods plus partial pieces, no
// quadrature). Antisymmetric in (s,t).
double cumulative_dispersion(const DispersionMap& map, double s, double t);

// Integral over [s,t] of the mean-zero part gamma - <gamma>, i.e.
// Gamma(t,s) - <gamma>*(t-s).
double mean_zero_integral(const DispersionMap& map, double s, double t);

// Jump times of the scaled map strictly inside (s,t), in increasing order.
// Requires s <= t.
std::vector<Breakpoint> breakpoints_between(const DispersionMap& map,
                                            double s, double t);

}  // namespace dmnls
