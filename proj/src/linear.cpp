#include "dmnls/linear.hpp"

#include <cmath>
#include <stdexcept>

namespace dmnls {

namespace {

// Multiplies each spectral mode by exp(-i*Gamma*|xi|^2) in place.
void apply_free_multiplier(Field& fhat, double Gamma) {
  const Grid& g = fhat.grid;
  const int n = g.points_per_axis;
  const int d = g.dimension;
  std::array<int, 3> idx{0, 0, 0};
  for (std::size_t p = 0; p < fhat.values.size(); ++p) {
    double xi_sq = 0.0;
    for (int a = 0; a < d; ++a) {
      const double xi = g.wavenumber(idx[a]);
      xi_sq += xi * xi;
    }
    fhat.values[p] *= std::polar(1.0, -Gamma * xi_sq);
    for (int a = d - 1; a >= 0; --a) {
      if (++idx[a] < n) break;
      idx[a] = 0;
    }
  }
}

// Band-limited upsampling: zero-pad the spectrum to factor*N points per axis
// so the returned physical samples interpolate f on the refined grid.
Field upsample(const Field& f, int factor) {
  if (factor == 1) {
    return f.representation == Representation::Physical ? f : to_physical(f);
  }
  const Grid& g = f.grid;
  const Grid fine(g.dimension, g.points_per_axis * factor, g.half_length);
  const Field fhat =
      f.representation == Representation::Spectral ? f : to_spectral(f);

  Field fine_hat = make_field(fine, Representation::Spectral);
  // Unitary transforms scale by N^{-d/2}, so carrying samples across sizes
  // needs a factor^{d/2} amplitude correction.
  const double amp = std::pow(static_cast<double>(factor), 0.5 * g.dimension);
  const int n = g.points_per_axis;
  const int nf = fine.points_per_axis;
  std::array<int, 3> idx{0, 0, 0};
  for (std::size_t p = 0; p < fhat.values.size(); ++p) {
    std::size_t q = 0;
    for (int a = 0; a < g.dimension; ++a) {
      const int k = g.mode(idx[a]);
      const int jf = k >= 0 ? k : k + nf;  // same signed mode in the fine array
      q = q * static_cast<std::size_t>(nf) + static_cast<std::size_t>(jf);
    }
    fine_hat.values[q] = fhat.values[p] * amp;
    for (int a = g.dimension - 1; a >= 0; --a) {
      if (++idx[a] < n) break;
      idx[a] = 0;
    }
  }
  return to_physical(fine_hat);
}

// Smallest refinement factor keeping the quadrature's alias images (displaced
// copies of the propagated field at distance 4*pi*|Gamma|*R/h) well outside
// the box, with a 16-length safety margin for the data's own tails.
int kernel_oversampling(const Grid& g, double Gamma) {
  const double ghost_distance_per_factor = 4.0 * M_PI * std::abs(Gamma) / g.spacing();
  const double needed = 2.0 * g.half_length + 16.0;
  const int r = static_cast<int>(std::ceil(needed / ghost_distance_per_factor));
  return std::max(r, 1);
}

}  // namespace

Field propagate_linear(const Field& f, double Gamma) {
  if (!std::isfinite(Gamma))
    throw std::invalid_argument("propagate_linear: Gamma must be finite");
  Field fhat = f.representation == Representation::Spectral ? f : to_spectral(f);
  apply_free_multiplier(fhat, Gamma);
  return to_physical(fhat);
}

Field propagate_linear_map(const Field& f, const DispersionMap& map, double s,
                           double t) {
  return propagate_linear(f, cumulative_dispersion(map, s, t));
}

Field kernel_solution(const Field& f, double Gamma) {
  if (Gamma == 0.0)
    throw std::domain_error("kernel_solution: formula is invalid at Gamma = 0");
  if (!std::isfinite(Gamma))
    throw std::invalid_argument("kernel_solution: Gamma must be finite");
  const Grid& g = f.grid;
  const int d = g.dimension;
  if (d == 1 && g.points_per_axis > 512)
    throw std::invalid_argument("kernel_solution: N <= 512 in 1D (quadrature oracle)");
  if (d == 2 && g.points_per_axis > 64)
    throw std::invalid_argument("kernel_solution: N <= 64 per axis in 2D (quadrature oracle)");
  if (d > 2)
    throw std::invalid_argument("kernel_solution: only d <= 2 supported");

  const int factor = kernel_oversampling(g, Gamma);
  if (factor > 64)
    throw std::domain_error(
        "kernel_solution: |Gamma| too small for this grid; the quadrature "
        "refinement needed to push alias images out of the box is impractical");
  if (d == 2 && factor > 4)
    throw std::domain_error("kernel_solution: |Gamma| too small for a 2D quadrature");

  const Field fine = upsample(f, factor);
  const Grid& gf = fine.grid;
  const double w = gf.weight();
  const double inv4G = 1.0 / (4.0 * Gamma);
  const double sgn = Gamma > 0.0 ? 1.0 : -1.0;
  const Complex prefactor =
      std::polar(std::pow(4.0 * M_PI * std::abs(Gamma), -0.5 * d),
                 -sgn * M_PI * d / 4.0);

  Field out = make_field(g, Representation::Physical);
  const int n = g.points_per_axis;
  const int nf = gf.points_per_axis;
  if (d == 1) {
    for (int i = 0; i < n; ++i) {
      const double x = g.coordinate(i);
      Complex acc{0.0, 0.0};
      for (int j = 0; j < nf; ++j) {
        const double r = x - gf.coordinate(j);
        acc += std::polar(1.0, r * r * inv4G) * fine.values[j];
      }
      out.values[i] = prefactor * acc * w;
    }
  } else {
    for (int i0 = 0; i0 < n; ++i0) {
      const double x0 = g.coordinate(i0);
      for (int i1 = 0; i1 < n; ++i1) {
        const double x1 = g.coordinate(i1);
        Complex acc{0.0, 0.0};
        for (int j0 = 0; j0 < nf; ++j0) {
          const double r0 = x0 - gf.coordinate(j0);
          for (int j1 = 0; j1 < nf; ++j1) {
            const double r1 = x1 - gf.coordinate(j1);
            acc += std::polar(1.0, (r0 * r0 + r1 * r1) * inv4G) *
                   fine.values[static_cast<std::size_t>(j0) * nf + j1];
          }
        }
        out.values[static_cast<std::size_t>(i0) * n + i1] = prefactor * acc * w;
      }
    }
  }
  return out;
}

double averaging_gap_linear(const Field& f, const DispersionMap& map, double s,
                            double t, double sigma) {
  const double m = mean_zero_integral(map, s, t);
  const Field fhat =
      f.representation == Representation::Spectral ? f : to_spectral(f);
  const Grid& g = fhat.grid;
  const int n = g.points_per_axis;
  const int d = g.dimension;
  std::array<int, 3> idx{0, 0, 0};
  double acc = 0.0;
  for (std::size_t p = 0; p < fhat.values.size(); ++p) {
    double xi_sq = 0.0;
    for (int a = 0; a < d; ++a) {
      const double xi = g.wavenumber(idx[a]);
      xi_sq += xi * xi;
    }
    const double gap = std::abs(std::polar(1.0, -m * xi_sq) - Complex{1.0, 0.0});
    acc += std::pow(1.0 + xi_sq, sigma) * gap * gap * std::norm(fhat.values[p]);
    for (int a = d - 1; a >= 0; --a) {
      if (++idx[a] < n) break;
      idx[a] = 0;
    }
  }
  return std::sqrt(acc * g.weight());
}

}  // namespace dmnls
