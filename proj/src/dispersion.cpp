#include "dmnls/dispersion.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace dmnls {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument("DispersionMap: " + what);
}

// Fractional part of r mapped into (0, 1]: switch times themselves belong to
// the piece that ends there.
double frac_left(double r) {
  double f = r - std::floor(r);
  if (f == 0.0) f = 1.0;
  return f;
}

// Integral of the unscaled map over [0, f] for f in [0, 1].
double partial_piece(const DispersionMap& m, double f) {
  return m.gamma_plus * std::min(f, m.t_plus) -
         m.gamma_minus * std::max(0.0, f - m.t_plus);
}

// Antiderivative of the unscaled 1-periodic map, G(r) = integral over [0, r].
double unit_antiderivative(const DispersionMap& m, double r) {
  const double whole = std::floor(r);
  return whole * average_dispersion(m) + partial_piece(m, r - whole);
}

}  // namespace

DispersionMap::DispersionMap(double gamma_plus_, double gamma_minus_,
                             double t_plus_, double epsilon_)
    : gamma_plus(gamma_plus_),
      gamma_minus(gamma_minus_),
      t_plus(t_plus_),
      epsilon(epsilon_) {
  require(std::isfinite(gamma_plus) && gamma_plus > 0.0, "gamma_plus must be positive");
  require(std::isfinite(gamma_minus) && gamma_minus > 0.0, "gamma_minus must be positive");
  require(std::isfinite(t_plus) && t_plus > 0.0 && t_plus < 1.0, "t_plus must lie in (0,1)");
  require(std::isfinite(epsilon) && epsilon > 0.0, "epsilon must be positive");
}

double gamma_at(const DispersionMap& map, double t) {
  const double f = frac_left(t / map.epsilon);
  return f <= map.t_plus ? map.gamma_plus : -map.gamma_minus;
}

double average_dispersion(const DispersionMap& map) {
  return map.gamma_plus * map.t_plus - map.gamma_minus * (1.0 - map.t_plus);
}

double cumulative_dispersion(const DispersionMap& map, double s, double t) {
  // Gamma(t,s) = epsilon * (G(t/eps) - G(s/eps)); the difference form keeps
  // antisymmetry and additivity exact up to roundoff.
  return map.epsilon * (unit_antiderivative(map, t / map.epsilon) -
                        unit_antiderivative(map, s / map.epsilon));
}

double mean_zero_integral(const DispersionMap& map, double s, double t) {
  return cumulative_dispersion(map, s, t) - average_dispersion(map) * (t - s);
}

std::vector<Breakpoint> breakpoints_between(const DispersionMap& map,
                                            double s, double t) {
  if (!(s <= t))
    throw std::invalid_argument("breakpoints_between: interval is reversed");

  std::vector<Breakpoint> out;
  const double eps = map.epsilon;
  const auto push_if_inside = [&](double time, SwitchKind kind) {
    if (time > s && time < t) out.push_back({time, kind});
  };
  // Candidate jumps live at eps*n (ToFocusing) and eps*(n + t_plus)
  // (ToDefocusing); scan one period beyond each end to be safe against
  // floor roundoff.
  const long long n_lo = static_cast<long long>(std::floor(s / eps)) - 1;
  const long long n_hi = static_cast<long long>(std::floor(t / eps)) + 1;
  for (long long n = n_lo; n <= n_hi; ++n) {
    push_if_inside(eps * static_cast<double>(n), SwitchKind::ToFocusing);
    push_if_inside(eps * (static_cast<double>(n) + map.t_plus),
                   SwitchKind::ToDefocusing);
  }
  std::sort(out.begin(), out.end(),
            [](const Breakpoint& a, const Breakpoint& b) { return a.time < b.time; });
  return out;
}

}  // namespace dmnls
