#pragma once

// Scale-invariant Gaussian fields on R^n (n = 1, 2) with spectral measure
// uniform on the annulus {alpha <= |xi| <= 1}, or on the unit sphere when
// alpha = 1, sampled by random-phase plane-wave superposition
//
//   F(x) = sqrt(2/M) * sum_j cos(<x, xi_j> + phi_j).
//
// Characters are e(t) = exp(i t), so the covariance is the Fourier transform
// of the spectral measure with no 2*pi in the exponent.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace nodal {

struct SpectralParams {
  int dim = 2;
  double alpha = 1.0;
  std::size_t wave_count = 2048;
  std::uint64_t seed = 0;

  /// Throws ConfigError when any invariant fails.
  void validate() const;
};

using Vec2 = std::array<double, 2>;

struct PlaneWaveSet {
  int dim = 2;
  std::vector<Vec2> wavevectors;  // second component is 0 when dim == 1
  std::vector<double> phases;
  double amplitude = 0.0;  // sqrt(2 / M)
  std::vector<double> weights;  // optional per-wave factors; empty means all 1

  std::size_t size() const { return phases.size(); }
};

/// Uniform sampling lattice. `dims` are sample counts per axis; dims[1] == 1
/// for one-dimensional grids.
struct GridSpec {
  Vec2 origin{0.0, 0.0};
  double spacing = 0.1;
  std::array<std::size_t, 2> dims{1, 1};

  std::size_t size() const { return dims[0] * dims[1]; }

  /// Smallest centred grid of the given spacing whose sample points cover
  /// [-radius, radius]^dim.
  static GridSpec covering_ball(double radius, double spacing, int dim);
};

struct FieldGrid {
  GridSpec spec;
  double window_radius = 0.0;
  std::vector<double> values;  // row-major: index = iy * dims[0] + ix
  std::vector<double> grad_x;  // empty unless requested
  std::vector<double> grad_y;  // empty unless requested and dim == 2

  int dim() const { return spec.dims[1] == 1 ? 1 : 2; }
  bool has_gradient() const { return !grad_x.empty(); }
  std::size_t index(std::size_t ix, std::size_t iy) const { return iy * spec.dims[0] + ix; }
  Vec2 position(std::size_t ix, std::size_t iy) const {
    return {spec.origin[0] + spec.spacing * static_cast<double>(ix),
            spec.origin[1] + spec.spacing * static_cast<double>(iy)};
  }
};

struct EvalOptions {
  unsigned threads = 1;
  std::size_t memory_budget_bytes = std::size_t{2} << 30;
  bool single_precision = false;  // float products; values still returned as double
};

/// Draws wavevectors from nu_alpha and uniform phases. `sample_index` selects
/// an independent realization under the same seed.
PlaneWaveSet draw_plane_waves(const SpectralParams& params, std::uint64_t sample_index = 0);

/// Evaluates the superposition (and optionally its analytic gradient) on a
/// grid. Output is bit-identical for any thread count: rows are processed in
/// fixed blocks whose boundaries do not depend on `options.threads`.
FieldGrid eval_field(const PlaneWaveSet& waves, const GridSpec& spec, bool with_gradient,
                     const EvalOptions& options = {}, double window_radius = 0.0);

/// Single-point evaluation, used by covariance estimators.
double eval_point(const PlaneWaveSet& waves, Vec2 x);

/// Normalized covariance B_{n,alpha}(r), B(0) = 1.
double covariance_exact(const SpectralParams& params, double r);

struct CovarianceEstimate {
  double r = 0.0;
  double estimate = 0.0;
  double std_error = 0.0;
};

/// Monte Carlo estimate of E[F(base) F(base + r * direction)] over
/// `n_samples` independent wave sets.
std::vector<CovarianceEstimate> covariance_empirical(const SpectralParams& params,
                                                     std::span<const double> r_list,
                                                     std::size_t n_samples,
                                                     Vec2 direction = {1.0, 0.0},
                                                     Vec2 base = {0.0, 0.0});

}  // namespace nodal
