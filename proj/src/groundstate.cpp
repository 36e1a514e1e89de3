#include "dmnls/groundstate.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace dmnls {

namespace {

// Signed power r |r|^{p-1}; keeps the iterate real and odd-symmetric in
// amplitude even when roundoff makes Q dip slightly negative in the tails.
inline double signed_power(double r, double p) {
  return r == 0.0 ? 0.0 : r * std::pow(std::abs(r), p - 1.0);
}

// |xi|^2 for every flattened spectral index.
std::vector<double> xi_sq_table(const Grid& g) {
  std::vector<double> out(g.num_points());
  const int n = g.points_per_axis;
  const int d = g.dimension;
  std::array<int, 3> idx{0, 0, 0};
  for (std::size_t p = 0; p < out.size(); ++p) {
    double acc = 0.0;
    for (int a = 0; a < d; ++a) {
      const double xi = g.wavenumber(idx[a]);
      acc += xi * xi;
    }
    out[p] = acc;
    for (int a = d - 1; a >= 0; --a) {
      if (++idx[a] < n) break;
      idx[a] = 0;
    }
  }
  return out;
}

}  // namespace

double exact_q_1d(double x) {
  return std::pow(3.0, 0.25) / std::sqrt(std::cosh(2.0 * x));
}

GroundState petviashvili(const Grid& grid, int d, double tol, int max_iter) {
  if (grid.dimension != d)
    throw std::invalid_argument("petviashvili: grid dimension does not match d");
  if (!(tol > 0.0)) throw std::invalid_argument("petviashvili: tol must be positive");
  const double p = 1.0 + 4.0 / d;
  const double nu = p / (p - 1.0);
  const std::vector<double> xi_sq = xi_sq_table(grid);
  const double w = grid.weight();

  Field q = sample_field(grid, [d](const double* x) {
    double r2 = 0.0;
    for (int a = 0; a < d; ++a) r2 += x[a] * x[a];
    return Complex{2.0 * std::exp(-0.5 * r2), 0.0};
  });

  double residual = std::numeric_limits<double>::infinity();
  for (int iter = 1; iter <= max_iter; ++iter) {
    Field qp = q;
    for (Complex& v : qp.values) v = Complex{signed_power(v.real(), p), 0.0};

    const Field qhat = to_spectral(q);
    const Field qphat = to_spectral(qp);

    // S = <(1 - Laplacian) Q, Q> / <Q^p, Q>, both in the grid inner product.
    double num = 0.0;
    for (std::size_t i = 0; i < qhat.values.size(); ++i)
      num += (1.0 + xi_sq[i]) * std::norm(qhat.values[i]);
    num *= w;
    double den = 0.0;
    for (std::size_t i = 0; i < q.values.size(); ++i)
      den += qp.values[i].real() * q.values[i].real();
    den *= w;
    if (!(den > 0.0))
      throw std::runtime_error("petviashvili: iteration collapsed (nonpositive <Q^p, Q>)");
    const double S = num / den;

    // Residual of the current iterate: Laplacian(Q) - Q + Q^p.
    double res_acc = 0.0;
    for (std::size_t i = 0; i < qhat.values.size(); ++i)
      res_acc += std::norm(-(1.0 + xi_sq[i]) * qhat.values[i] + qphat.values[i]);
    residual = std::sqrt(res_acc * w);
    if (residual <= tol) {
      GroundState gs{d, p, q, residual, l2_norm(q), iter - 1};
      return gs;
    }

    Field next_hat = qphat;
    const double s_nu = std::pow(S, nu);
    for (std::size_t i = 0; i < next_hat.values.size(); ++i)
      next_hat.values[i] *= s_nu / (1.0 + xi_sq[i]);
    q = to_physical(next_hat);
    for (Complex& v : q.values) v = Complex{v.real(), 0.0};  // iterate stays real
  }
  throw std::runtime_error("petviashvili: no convergence after " +
                           std::to_string(max_iter) +
                           " iterations (last residual " +
                           std::to_string(residual) + ")");
}

double gn_ratio(const Field& f, double q_mass, int d) {
  if (!(q_mass > 0.0)) throw std::invalid_argument("gn_ratio: q_mass must be positive");
  const double l2 = l2_norm(f);
  if (l2 == 0.0) throw std::domain_error("gn_ratio: zero field");
  const double num = lp_pow_sum(f, 2.0 + 4.0 / d);
  const double den = (1.0 + 2.0 / d) * std::pow(q_mass, -4.0 / d) *
                     std::pow(l2, 4.0 / d) * gradient_norm_sq(f);
  return num / den;
}

double critical_mass(double gamma_plus, double q_mass, int d) {
  if (!(gamma_plus > 0.0))
    throw std::invalid_argument("critical_mass: gamma_plus must be positive");
  return std::pow(gamma_plus, -0.25 * d) * q_mass;
}

}  // namespace dmnls
