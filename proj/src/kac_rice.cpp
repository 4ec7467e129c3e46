#include "nodal/kac_rice.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "nodal/error.hpp"
#include "nodal/sign_mesh.hpp"

namespace nodal {

namespace {

struct MeanAccumulator {
  double sum = 0.0;
  double sum_sq = 0.0;
  std::size_t n = 0;

  void add(double x) {
    sum += x;
    sum_sq += x * x;
    ++n;
  }
  double mean() const { return n ? sum / static_cast<double>(n) : 0.0; }
  double std_error() const {
    if (n < 2) return 0.0;
    const double m = mean();
    const double var = (sum_sq - static_cast<double>(n) * m * m) / static_cast<double>(n - 1);
    return std::sqrt(std::max(var, 0.0) / static_cast<double>(n));
  }
};

}  // namespace

double beta_1_alpha(double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in [0,1]");
  return std::sqrt(1.0 + alpha + alpha * alpha) / std::sqrt(3.0);
}

SpectralMoments spectral_moments(const SpectralParams& params) {
  params.validate();
  const double a = params.alpha;
  SpectralMoments out;
  if (params.dim == 1) {
    out.lambda2_per_axis = (1.0 + a + a * a) / 3.0;
    out.fourth_moment = (1.0 + a + a * a + a * a * a + a * a * a * a) / 5.0;
  } else {
    const double a2 = a * a;
    out.lambda2_per_axis = (1.0 + a2) / 4.0;
    out.fourth_moment = (1.0 + a2 + a2 * a2) / 3.0;
  }
  return out;
}

double zero_density_1d(const SpectralParams& params) {
  if (params.dim != 1) throw UnsupportedError("zero_density_1d requires a one-dimensional field");
  const auto m = spectral_moments(params);
  return std::sqrt(m.lambda2_per_axis / m.lambda0) / std::numbers::pi;
}

double nodal_length_density_2d(const SpectralParams& params) {
  if (params.dim != 2) throw UnsupportedError("nodal_length_density_2d requires a two-dimensional field");
  const auto m = spectral_moments(params);
  // E|grad F| * density of F at 0: sigma sqrt(pi/2) / sqrt(2 pi).
  return 0.5 * std::sqrt(m.lambda2_per_axis);
}

CriticalPointBound critical_point_bound(const SpectralParams& params, double r) {
  if (!(r > 0.0)) throw PreconditionError("critical_point_bound requires r > 0");
  const auto m = spectral_moments(params);
  const int n = params.dim;
  // H = grad F: E[H H^T] = lambda2 I_n, E|grad H|^2 = E|xi|^4.
  const double det_sqrt = std::pow(m.lambda2_per_axis, 0.5 * n);
  if (!(det_sqrt > 0.0)) throw InvariantError("degenerate gradient covariance");
  CriticalPointBound out;
  out.moment_ratio = std::pow(m.fourth_moment, 0.5 * n) / det_sqrt;
  out.volume = n == 1 ? 2.0 * r : std::numbers::pi * r * r;
  out.bound = out.constant * out.moment_ratio * out.volume;
  return out;
}

CriticalPointCount count_critical_points(const FieldGrid& grid, double radius) {
  if (!grid.has_gradient()) throw PreconditionError("count_critical_points needs a grid with gradient");
  CriticalPointCount out;
  if (grid.dim() == 1) {
    for (std::size_t i = 0; i + 1 < grid.grad_x.size(); ++i) {
      const double x = grid.position(i, 0)[0] + 0.5 * grid.spec.spacing;
      if (radius > 0.0 && std::abs(x) > radius) continue;
      if ((grid.grad_x[i] >= 0.0) != (grid.grad_x[i + 1] >= 0.0)) ++out.count;
    }
    return out;
  }
  double scale = 0.0;
  for (std::size_t i = 0; i < grid.grad_x.size(); ++i) {
    scale = std::max({scale, std::abs(grid.grad_x[i]), std::abs(grid.grad_y[i])});
  }
  const double tol = 1e-9 * scale;
  const std::size_t nx = grid.spec.dims[0];
  const std::size_t ny = grid.spec.dims[1];
  auto changes = [&](const std::vector<double>& g, std::size_t i0, bool& flat) {
    const std::size_t idx[4] = {i0, i0 + 1, i0 + nx, i0 + nx + 1};
    bool any_pos = false, any_neg = false, all_flat = true;
    for (std::size_t k : idx) {
      (g[k] >= 0.0 ? any_pos : any_neg) = true;
      all_flat = all_flat && std::abs(g[k]) <= tol;
    }
    flat = all_flat;
    return (any_pos && any_neg) || all_flat;
  };
  for (std::size_t iy = 0; iy + 1 < ny; ++iy) {
    for (std::size_t ix = 0; ix + 1 < nx; ++ix) {
      const Vec2 p = grid.position(ix, iy);
      const double cx = p[0] + 0.5 * grid.spec.spacing;
      const double cy = p[1] + 0.5 * grid.spec.spacing;
      if (radius > 0.0 && cx * cx + cy * cy > radius * radius) continue;
      bool flat_x = false, flat_y = false;
      const std::size_t i0 = grid.index(ix, iy);
      if (changes(grid.grad_x, i0, flat_x) && changes(grid.grad_y, i0, flat_y)) {
        ++out.count;
        out.degenerate = out.degenerate || flat_x || flat_y;
      }
    }
  }
  return out;
}

std::size_t count_sign_changes(const FieldGrid& grid) {
  std::size_t count = 0;
  for (std::size_t i = 0; i + 1 < grid.values.size(); ++i) {
    if ((grid.values[i] > 0.0) != (grid.values[i + 1] > 0.0)) ++count;
  }
  return count;
}

double nodal_length_in_ball(const std::vector<NodalCurve>& curves, double radius) {
  const double r2 = radius * radius;
  double total = 0.0;
  for (const auto& c : curves) {
    const std::size_t n = c.polyline.size();
    const std::size_t segments = c.clipped ? (n ? n - 1 : 0) : n;
    for (std::size_t i = 0; i < segments; ++i) {
      const auto& a = c.polyline[i];
      const auto& b = c.polyline[(i + 1) % n];
      const double mx = 0.5 * (a[0] + b[0]);
      const double my = 0.5 * (a[1] + b[1]);
      if (mx * mx + my * my <= r2) total += std::hypot(b[0] - a[0], b[1] - a[1]);
    }
  }
  return total;
}

DensityEstimate empirical_zero_density(const SpectralParams& params, double length, double spacing,
                                       std::size_t n_samples, const EvalOptions& options) {
  if (params.dim != 1) throw UnsupportedError("empirical_zero_density requires a one-dimensional field");
  if (n_samples < 2) throw PreconditionError("empirical_zero_density needs at least 2 samples");
  const GridSpec spec = GridSpec::covering_ball(0.5 * length, spacing, 1);
  const double covered = spacing * static_cast<double>(spec.dims[0] - 1);
  MeanAccumulator acc;
  for (std::size_t s = 0; s < n_samples; ++s) {
    const auto waves = draw_plane_waves(params, s);
    const auto grid = eval_field(waves, spec, false, options);
    acc.add(static_cast<double>(count_sign_changes(grid)) / covered);
  }
  DensityEstimate out;
  out.analytic = zero_density_1d(params);
  out.estimate = acc.mean();
  out.std_error = acc.std_error();
  out.samples = n_samples;
  out.total_measure = covered * static_cast<double>(n_samples);
  return out;
}

DensityEstimate empirical_length_density(const SpectralParams& params, double radius, double spacing,
                                         std::size_t n_samples, const EvalOptions& options) {
  if (params.dim != 2) throw UnsupportedError("empirical_length_density requires a two-dimensional field");
  if (n_samples < 2) throw PreconditionError("empirical_length_density needs at least 2 samples");
  const GridSpec spec = GridSpec::covering_ball(radius, spacing, 2);
  const double area = std::numbers::pi * radius * radius;
  MeanAccumulator acc;
  for (std::size_t s = 0; s < n_samples; ++s) {
    const auto waves = draw_plane_waves(params, s);
    const auto grid = eval_field(waves, spec, false, options, radius);
    const auto mesh = mesh_from_grid(grid);
    const auto labeling = label_domains(mesh);
    const auto curves = trace_curves(mesh, labeling);
    acc.add(nodal_length_in_ball(curves, radius) / area);
  }
  DensityEstimate out;
  out.analytic = nodal_length_density_2d(params);
  out.estimate = acc.mean();
  out.std_error = acc.std_error();
  out.samples = n_samples;
  out.total_measure = area * static_cast<double>(n_samples);
  return out;
}

}  // namespace nodal
