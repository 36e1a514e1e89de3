#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace dmnls {

using Complex = std::complex<double>;

// Uniform periodic grid on the box [-L, L)^d, N points per axis, N even.
// Wavenumbers are xi_k = pi*k/L for k in {-N/2, ..., N/2-1}, stored in the
// native transform ordering (k = j for j <= N/2-1, k = j-N above; the
// unpaired Nyquist mode sits at k = -N/2).
struct Grid {
  int dimension;       // 1, 2, or 3
  int points_per_axis; // N, even
  double half_length;  // L

  Grid(int dimension, int points_per_axis, double half_length);

  double spacing() const { return 2.0 * half_length / points_per_axis; }
  double weight() const;           // quadrature weight h^d
  std::size_t num_points() const;  // N^d
  int mode(int j) const {          // transform index -> signed mode k
    return j <= points_per_axis / 2 - 1 ? j : j - points_per_axis;
  }
  double wavenumber(int j) const;  // xi_k = pi*k/L
  double coordinate(int j) const { return -half_length + spacing() * j; }

  bool operator==(const Grid&) const = default;
};

enum class Representation : std::uint8_t { Physical = 0, Spectral = 1 };

// Complex samples over a grid, row-major across axes, tagged with the
// representation they live in. Treated as an immutable value everywhere.
struct Field {
  Grid grid;
  Representation representation;
  std::vector<Complex> values;
};

Field make_field(const Grid& grid,
                 Representation rep = Representation::Physical);

// Samples f(x) on the grid; f receives the d coordinates of each point.
template <class F>
Field sample_field(const Grid& grid, F&& f) {
  Field out = make_field(grid, Representation::Physical);
  const int d = grid.dimension;
  const int n = grid.points_per_axis;
  std::array<int, 3> idx{0, 0, 0};
  std::array<double, 3> x{0.0, 0.0, 0.0};
  for (std::size_t p = 0; p < out.values.size(); ++p) {
    for (int a = 0; a < d; ++a) x[a] = grid.coordinate(idx[a]);
    out.values[p] = f(x.data());
    for (int a = d - 1; a >= 0; --a) {  // row-major odometer
      if (++idx[a] < n) break;
      idx[a] = 0;
    }
  }
  return out;
}

// Unitary discrete Fourier transforms (scaled by N^{-d/2} each way), so that
// Parseval holds exactly with the shared quadrature weight.
Field to_spectral(const Field& f);
Field to_physical(const Field& f);

// Discrete L2 norm sqrt(sum |v|^2 * h^d); identical in either representation.
double l2_norm(const Field& f);

// Discrete H^sigma norm (sum over modes of (1+|xi|^2)^sigma |fhat|^2 h^d)^{1/2}.
double sobolev_norm(const Field& f, double sigma);

// sum over modes of |xi|^2 |fhat|^2 h^d, i.e. the squared L2 norm of the
// gradient.
double gradient_norm_sq(const Field& f);

// Fraction of spectral L2 mass carried by modes with |k| > N/3 on any axis
// (the part the 2/3-rule dealias mask would remove). Under-resolution alarm.
double spectral_tail_fraction(const Field& f);

// max |v| over physical samples.
double linf_norm(const Field& f);

// sum of |v|^q * h^d over physical samples.
double lp_pow_sum(const Field& f, double q);

// a - b elementwise; grids and representations must match.
Field subtract(const Field& a, const Field& b);

// ||a - b||_{L2} / ||b||_{L2}; representations must match.
double relative_l2_error(const Field& a, const Field& b);

}  // namespace dmnls
