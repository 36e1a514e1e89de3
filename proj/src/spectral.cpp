#include "dmnls/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>
#include <map>
#include <mutex>
#include <tuple>

namespace dmnls {

namespace {

// FFTW's planner is not thread-safe; plan creation and destruction are
// serialized. Executing distinct plans on their own buffers is safe, so each
// thread keeps its own plan cache keyed by (dimension, N, direction).
std::mutex planner_mutex;

struct PlanSlot {
  fftw_plan plan = nullptr;
  fftw_complex* in = nullptr;
  fftw_complex* out = nullptr;
  std::size_t size = 0;

  PlanSlot() = default;
  PlanSlot(const PlanSlot&) = delete;
  PlanSlot& operator=(const PlanSlot&) = delete;
  PlanSlot(PlanSlot&& other) noexcept { *this = std::move(other); }
  PlanSlot& operator=(PlanSlot&& other) noexcept {
    std::swap(plan, other.plan);
    std::swap(in, other.in);
    std::swap(out, other.out);
    std::swap(size, other.size);
    return *this;
  }
  ~PlanSlot() {
    if (plan || in || out) {
      std::lock_guard<std::mutex> lock(planner_mutex);
      if (plan) fftw_destroy_plan(plan);
      if (in) fftw_free(in);
      if (out) fftw_free(out);
    }
  }
};

using PlanKey = std::tuple<int, int, int>;  // (dimension, N, sign)

PlanSlot& plan_for(const Grid& grid, int sign) {
  thread_local std::map<PlanKey, PlanSlot> cache;
  const PlanKey key{grid.dimension, grid.points_per_axis, sign};
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;

  PlanSlot slot;
  slot.size = grid.num_points();
  slot.in = fftw_alloc_complex(slot.size);
  slot.out = fftw_alloc_complex(slot.size);
  int dims[3] = {grid.points_per_axis, grid.points_per_axis,
                 grid.points_per_axis};
  {
    std::lock_guard<std::mutex> lock(planner_mutex);
    // FFTW_ESTIMATE keeps planning deterministic and leaves the input intact.
    slot.plan = fftw_plan_dft(grid.dimension, dims, slot.in, slot.out, sign,
                              FFTW_ESTIMATE);
  }
  if (!slot.plan) throw std::runtime_error("spectral: transform planning failed");
  auto [pos, inserted] = cache.emplace(key, std::move(slot));
  (void)inserted;
  return pos->second;
}

Field transform(const Field& f, int sign, Representation out_rep) {
  PlanSlot& slot = plan_for(f.grid, sign);
  static_assert(sizeof(Complex) == sizeof(fftw_complex));
  std::memcpy(slot.in, f.values.data(), slot.size * sizeof(Complex));
  fftw_execute(slot.plan);

  Field out{f.grid, out_rep, std::vector<Complex>(slot.size)};
  const double scale = 1.0 / std::sqrt(static_cast<double>(slot.size));
  const Complex* src = reinterpret_cast<const Complex*>(slot.out);
  for (std::size_t i = 0; i < slot.size; ++i) out.values[i] = src[i] * scale;
  return out;
}

Field as_spectral(const Field& f) {
  return f.representation == Representation::Spectral ? f : to_spectral(f);
}

Field as_physical(const Field& f) {
  return f.representation == Representation::Physical ? f : to_physical(f);
}

// Accumulates sum of w(|xi|^2)*|fhat|^2 over all modes.
template <class WeightFn>
double spectral_sum(const Field& fhat, WeightFn&& w) {
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
    acc += w(xi_sq) * std::norm(fhat.values[p]);
    for (int a = d - 1; a >= 0; --a) {
      if (++idx[a] < n) break;
      idx[a] = 0;
    }
  }
  return acc;
}

}  // namespace

Grid::Grid(int dimension_, int points_per_axis_, double half_length_)
    : dimension(dimension_),
      points_per_axis(points_per_axis_),
      half_length(half_length_) {
  if (dimension < 1 || dimension > 3)
    throw std::invalid_argument("Grid: dimension must be 1, 2, or 3");
  if (points_per_axis < 2 || points_per_axis % 2 != 0)
    throw std::invalid_argument("Grid: points_per_axis must be even and >= 2");
  if (!(std::isfinite(half_length) && half_length > 0.0))
    throw std::invalid_argument("Grid: half_length must be positive");
}

double Grid::weight() const {
  double w = 1.0;
  for (int a = 0; a < dimension; ++a) w *= spacing();
  return w;
}

std::size_t Grid::num_points() const {
  std::size_t n = 1;
  for (int a = 0; a < dimension; ++a) n *= static_cast<std::size_t>(points_per_axis);
  return n;
}

double Grid::wavenumber(int j) const {
  return M_PI * mode(j) / half_length;
}

Field make_field(const Grid& grid, Representation rep) {
  return Field{grid, rep, std::vector<Complex>(grid.num_points())};
}

Field to_spectral(const Field& f) {
  if (f.representation != Representation::Physical)
    throw std::invalid_argument("to_spectral: field is already spectral");
  return transform(f, FFTW_FORWARD, Representation::Spectral);
}

Field to_physical(const Field& f) {
  if (f.representation != Representation::Spectral)
    throw std::invalid_argument("to_physical: field is already physical");
  return transform(f, FFTW_BACKWARD, Representation::Physical);
}

double l2_norm(const Field& f) {
  double acc = 0.0;
  for (const Complex& v : f.values) acc += std::norm(v);
  return std::sqrt(acc * f.grid.weight());
}

double sobolev_norm(const Field& f, double sigma) {
  const Field fhat = as_spectral(f);
  const double acc = spectral_sum(
      fhat, [sigma](double xi_sq) { return std::pow(1.0 + xi_sq, sigma); });
  return std::sqrt(acc * f.grid.weight());
}

double gradient_norm_sq(const Field& f) {
  const Field fhat = as_spectral(f);
  return spectral_sum(fhat, [](double xi_sq) { return xi_sq; }) *
         f.grid.weight();
}

double spectral_tail_fraction(const Field& f) {
  const Field fhat = as_spectral(f);
  const Grid& g = fhat.grid;
  const int n = g.points_per_axis;
  const int d = g.dimension;
  std::array<int, 3> idx{0, 0, 0};
  double tail = 0.0, total = 0.0;
  for (std::size_t p = 0; p < fhat.values.size(); ++p) {
    bool in_tail = false;
    for (int a = 0; a < d; ++a)
      if (3 * std::abs(g.mode(idx[a])) > n) in_tail = true;
    const double m = std::norm(fhat.values[p]);
    total += m;
    if (in_tail) tail += m;
    for (int a = d - 1; a >= 0; --a) {
      if (++idx[a] < n) break;
      idx[a] = 0;
    }
  }
  return total > 0.0 ? tail / total : 0.0;
}

double linf_norm(const Field& f) {
  const Field phys = as_physical(f);
  double m = 0.0;
  for (const Complex& v : phys.values) m = std::max(m, std::abs(v));
  return m;
}

double lp_pow_sum(const Field& f, double q) {
  const Field phys = as_physical(f);
  double acc = 0.0;
  for (const Complex& v : phys.values) acc += std::pow(std::abs(v), q);
  return acc * f.grid.weight();
}

Field subtract(const Field& a, const Field& b) {
  if (!(a.grid == b.grid) || a.representation != b.representation)
    throw std::invalid_argument("subtract: fields live on different grids or representations");
  Field out = a;
  for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] -= b.values[i];
  return out;
}

double relative_l2_error(const Field& a, const Field& b) {
  return l2_norm(subtract(a, b)) / l2_norm(b);
}

}  // namespace dmnls
