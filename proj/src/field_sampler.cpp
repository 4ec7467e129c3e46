#include "nodal/field_sampler.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <sstream>
#include <thread>

#include "nodal/error.hpp"
#include "nodal/rng.hpp"
#include "quadrature.hpp"

namespace nodal {

namespace {

constexpr std::size_t kRowBlock = 256;
constexpr std::size_t kLineBlock = 256;  // 1-D grids are folded into rows of this length

// Runs body(block) for block in [0, n_blocks) on up to `threads` workers.
template <class Body>
void parallel_blocks(std::size_t n_blocks, unsigned threads, Body&& body) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n_blocks)));
  if (threads <= 1) {
    for (std::size_t b = 0; b < n_blocks; ++b) body(b);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t b = next++; b < n_blocks; b = next++) body(b);
    });
  }
  for (auto& th : pool) th.join();
}

// Writes cos and sin of (coef_k * (t0 + i * h) + offset_k) into columns
// [0, M) and [M, 2M) of `table`, with the imaginary half scaled by sign_im.
// Angles advance by complex rotation and are recomputed exactly every
// kRestart steps.
template <class Mat>
void phase_table(double t0, double h, std::size_t n, const std::vector<double>& coef,
                 const std::vector<double>& offset, double sign_im, Mat& table) {
  constexpr std::size_t kRestart = 32;
  const std::size_t m = coef.size();
  table.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(2 * m));
  for (std::size_t k = 0; k < m; ++k) {
    const double step_re = std::cos(coef[k] * h);
    const double step_im = std::sin(coef[k] * h);
    const auto re_col = static_cast<Eigen::Index>(k);
    const auto im_col = static_cast<Eigen::Index>(m + k);
    double re = 0.0, im = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (i % kRestart == 0) {
        const double a = coef[k] * (t0 + h * static_cast<double>(i)) + offset[k];
        re = std::cos(a);
        im = std::sin(a);
      } else {
        const double next_re = re * step_re - im * step_im;
        im = re * step_im + im * step_re;
        re = next_re;
      }
      const auto row = static_cast<Eigen::Index>(i);
      table(row, re_col) = static_cast<typename Mat::Scalar>(re);
      table(row, im_col) = static_cast<typename Mat::Scalar>(sign_im * im);
    }
  }
}

// Scales column halves [0, M) and [M, 2M) of `table` by w, optionally
// swapping the halves.
template <class Mat>
Mat weighted(const Mat& table, const std::vector<double>& w, bool swap_halves) {
  const auto m = static_cast<Eigen::Index>(w.size());
  Mat out(table.rows(), table.cols());
  for (Eigen::Index k = 0; k < m; ++k) {
    const auto wk = static_cast<typename Mat::Scalar>(w[static_cast<std::size_t>(k)]);
    out.col(k) = wk * table.col(swap_halves ? m + k : k);
    out.col(m + k) = wk * table.col(swap_halves ? k : m + k);
  }
  return out;
}

// value(row, col) = amp * Re[sum_k R_k(row) C_k(col)] evaluated as one real
// product of [Re R | Im R] with [Re C | -Im C]^T.
template <class Scalar>
void evaluate_tables(const PlaneWaveSet& waves, const GridSpec& spec, bool with_gradient, unsigned threads,
                     FieldGrid& grid) {
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Out = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const std::size_t m = waves.size();
  const bool one_d = spec.dims[1] == 1;
  const std::size_t nx = spec.dims[0];
  const std::size_t rows = one_d ? (nx + kLineBlock - 1) / kLineBlock : spec.dims[1];
  const std::size_t cols = one_d ? kLineBlock : nx;
  std::vector<double> xi1(m), xi2(m), zero(m, 0.0);
  for (std::size_t k = 0; k < m; ++k) {
    xi1[k] = waves.wavevectors[k][0];
    xi2[k] = waves.wavevectors[k][1];
  }
  const double h = spec.spacing;
  Mat row_table, col_table;
  if (one_d) {
    // x = origin + (row * kLineBlock + col) * h
    phase_table(spec.origin[0], h * static_cast<double>(kLineBlock), rows, xi1, waves.phases, 1.0, row_table);
    phase_table(0.0, h, cols, xi1, zero, -1.0, col_table);
  } else {
    phase_table(spec.origin[1], h, rows, xi2, zero, 1.0, row_table);
    phase_table(spec.origin[0], h, cols, xi1, waves.phases, -1.0, col_table);
  }
  if (!waves.weights.empty()) {
    for (std::size_t k = 0; k < m; ++k) {
      const auto w = static_cast<Scalar>(waves.weights[k]);
      col_table.col(static_cast<Eigen::Index>(k)) *= w;
      col_table.col(static_cast<Eigen::Index>(m + k)) *= w;
    }
  }
  const auto amp = static_cast<Scalar>(waves.amplitude);
  Out values(rows, cols), gx, gy;
  Mat col_x, row_y, col_swapped;
  if (with_gradient) {
    // d/dx: -amp * Re-part of sin terms = -amp * [Re R | Im R] . [xi1 Im C | xi1 Re C]^T
    // where the stored column table holds -Im C.
    std::vector<double> neg_xi1(m);
    for (std::size_t k = 0; k < m; ++k) neg_xi1[k] = -xi1[k];
    col_x = weighted(col_table, neg_xi1, true);
    for (std::size_t k = 0; k < m; ++k) col_x.col(static_cast<Eigen::Index>(m + k)) *= Scalar(-1);
    gx.resize(rows, cols);
    if (!one_d) {
      row_y = weighted(row_table, xi2, false);
      col_swapped = weighted(col_table, std::vector<double>(m, 1.0), true);
      for (std::size_t k = 0; k < m; ++k) col_swapped.col(static_cast<Eigen::Index>(k)) *= Scalar(-1);
      gy.resize(rows, cols);
    }
  }
  const std::size_t n_blocks = (rows + kRowBlock - 1) / kRowBlock;
  parallel_blocks(n_blocks, threads, [&](std::size_t b) {
    const auto r0 = static_cast<Eigen::Index>(b * kRowBlock);
    const auto nr = static_cast<Eigen::Index>(std::min(kRowBlock, rows - b * kRowBlock));
    values.middleRows(r0, nr).noalias() = amp * (row_table.middleRows(r0, nr) * col_table.transpose());
    if (!with_gradient) return;
    gx.middleRows(r0, nr).noalias() = (-amp) * (row_table.middleRows(r0, nr) * col_x.transpose());
    if (!one_d) {
      gy.middleRows(r0, nr).noalias() = (-amp) * (row_y.middleRows(r0, nr) * col_swapped.transpose());
    }
  });
  const std::size_t n = spec.size();
  grid.values.assign(values.data(), values.data() + n);
  if (with_gradient) {
    grid.grad_x.assign(gx.data(), gx.data() + n);
    if (!one_d) grid.grad_y.assign(gy.data(), gy.data() + n);
  }
}

double annulus_covariance_2d(double alpha, double r) {
  if (1.0 - alpha < 1e-3) {
    // Near-degenerate annulus: integrate s J0(r s) directly to avoid cancellation.
    const double integral =
        detail::integrate([r](double s) { return s * std::cyl_bessel_j(0.0, r * s); }, alpha, 1.0, 1, 16);
    return 2.0 * integral / (1.0 - alpha * alpha);
  }
  const double outer = std::cyl_bessel_j(1.0, r) / r;
  const double inner = alpha == 0.0 ? 0.0 : alpha * std::cyl_bessel_j(1.0, alpha * r) / r;
  return 2.0 / (1.0 - alpha * alpha) * (outer - inner);
}

double band_covariance_1d(double alpha, double r) {
  if (1.0 - alpha < 1e-3) {
    const double integral =
        detail::integrate([r](double s) { return std::cos(r * s); }, alpha, 1.0, 1, 16);
    return integral / (1.0 - alpha);
  }
  return (std::sin(r) - std::sin(alpha * r)) / (r * (1.0 - alpha));
}

}  // namespace

void SpectralParams::validate() const {
  std::ostringstream msg;
  if (dim != 1 && dim != 2) msg << "dimension must be 1 or 2 (got " << dim << "); ";
  if (!(alpha >= 0.0 && alpha <= 1.0)) msg << "alpha must lie in [0,1] (got " << alpha << "); ";
  if (wave_count == 0) msg << "wave_count must be positive; ";
  if (!msg.str().empty()) throw ConfigError("invalid spectral parameters: " + msg.str());
}

GridSpec GridSpec::covering_ball(double radius, double spacing, int dim) {
  if (!(radius > 0.0) || !(spacing > 0.0)) {
    throw ConfigError("grid radius and spacing must be positive");
  }
  const auto per_axis = static_cast<std::size_t>(std::ceil(2.0 * radius / spacing)) + 1;
  const double half = 0.5 * spacing * static_cast<double>(per_axis - 1);
  GridSpec spec;
  spec.spacing = spacing;
  spec.dims = {per_axis, dim == 1 ? std::size_t{1} : per_axis};
  spec.origin = {-half, dim == 1 ? 0.0 : -half};
  return spec;
}

PlaneWaveSet draw_plane_waves(const SpectralParams& params, std::uint64_t sample_index) {
  params.validate();
  RandomStream stream(params.seed, sample_index, StreamTag::kPlaneWaves);
  PlaneWaveSet waves;
  waves.dim = params.dim;
  waves.amplitude = std::sqrt(2.0 / static_cast<double>(params.wave_count));
  waves.wavevectors.reserve(params.wave_count);
  waves.phases.reserve(params.wave_count);
  const double a = params.alpha;
  for (std::size_t j = 0; j < params.wave_count; ++j) {
    const double u_radius = stream.uniform();
    const double u_angle = stream.uniform();
    const double u_phase = stream.uniform();
    if (params.dim == 2) {
      // Inverse CDF of the radial density proportional to s on [alpha, 1].
      const double s = a == 1.0 ? 1.0 : std::sqrt(a * a + u_radius * (1.0 - a * a));
      const double theta = 2.0 * std::numbers::pi * u_angle;
      waves.wavevectors.push_back({s * std::cos(theta), s * std::sin(theta)});
    } else {
      const double s = a == 1.0 ? 1.0 : a + u_radius * (1.0 - a);
      waves.wavevectors.push_back({u_angle < 0.5 ? -s : s, 0.0});
    }
    waves.phases.push_back(2.0 * std::numbers::pi * u_phase);
  }
  return waves;
}

double eval_point(const PlaneWaveSet& waves, Vec2 x) {
  double sum = 0.0;
  for (std::size_t j = 0; j < waves.size(); ++j) {
    const auto& xi = waves.wavevectors[j];
    const double w = waves.weights.empty() ? 1.0 : waves.weights[j];
    sum += w * std::cos(xi[0] * x[0] + xi[1] * x[1] + waves.phases[j]);
  }
  return waves.amplitude * sum;
}

FieldGrid eval_field(const PlaneWaveSet& waves, const GridSpec& spec, bool with_gradient,
                     const EvalOptions& options, double window_radius) {
  if (waves.size() == 0) throw ConfigError("empty plane-wave set");
  if (!waves.weights.empty() && waves.weights.size() != waves.size()) {
    throw ConfigError("plane-wave weights must match the wave count");
  }
  if (!(spec.spacing > 0.0) || spec.dims[0] == 0 || spec.dims[1] == 0) {
    throw ConfigError("grid spec must have positive spacing and nonzero dims");
  }
  const std::size_t m = waves.size();
  const bool one_d = spec.dims[1] == 1;
  const std::size_t nx = spec.dims[0];
  const std::size_t ny = spec.dims[1];
  const std::size_t rows = one_d ? (nx + kLineBlock - 1) / kLineBlock : ny;
  const std::size_t cols = one_d ? kLineBlock : nx;
  const std::size_t fields = with_gradient ? (one_d ? 2 : 3) : 1;
  const std::size_t bytes = rows * cols * 8 * fields + (rows + cols) * m * 16 * (with_gradient ? 2 : 1);
  if (bytes > options.memory_budget_bytes) {
    std::ostringstream msg;
    msg << "grid of " << nx << "x" << ny << " samples with " << m << " waves needs ~" << bytes
        << " bytes, over the budget of " << options.memory_budget_bytes;
    throw ResourceError(msg.str());
  }

  FieldGrid grid;
  grid.spec = spec;
  grid.window_radius = window_radius;
  if (options.single_precision) {
    evaluate_tables<float>(waves, spec, with_gradient, options.threads, grid);
  } else {
    evaluate_tables<double>(waves, spec, with_gradient, options.threads, grid);
  }
  return grid;
}

double covariance_exact(const SpectralParams& params, double r) {
  params.validate();
  if (!(r >= 0.0)) throw PreconditionError("covariance_exact requires r >= 0");
  if (r == 0.0) return 1.0;
  if (params.dim == 1) {
    return params.alpha == 1.0 ? std::cos(r) : band_covariance_1d(params.alpha, r);
  }
  return params.alpha == 1.0 ? std::cyl_bessel_j(0.0, r) : annulus_covariance_2d(params.alpha, r);
}

std::vector<CovarianceEstimate> covariance_empirical(const SpectralParams& params,
                                                     std::span<const double> r_list,
                                                     std::size_t n_samples, Vec2 direction,
                                                     Vec2 base) {
  if (n_samples < 2) throw PreconditionError("covariance_empirical needs at least 2 samples");
  std::vector<double> sum(r_list.size(), 0.0), sum_sq(r_list.size(), 0.0);
  for (std::size_t s = 0; s < n_samples; ++s) {
    const PlaneWaveSet waves = draw_plane_waves(params, s);
    const double at_base = eval_point(waves, base);
    for (std::size_t i = 0; i < r_list.size(); ++i) {
      const Vec2 x{base[0] + r_list[i] * direction[0], base[1] + r_list[i] * direction[1]};
      const double prod = at_base * eval_point(waves, x);
      sum[i] += prod;
      sum_sq[i] += prod * prod;
    }
  }
  std::vector<CovarianceEstimate> out;
  const auto n = static_cast<double>(n_samples);
  for (std::size_t i = 0; i < r_list.size(); ++i) {
    const double mean = sum[i] / n;
    const double var = std::max(0.0, (sum_sq[i] - n * mean * mean) / (n - 1.0));
    out.push_back({r_list[i], mean, std::sqrt(var / n)});
  }
  return out;
}

}  // namespace nodal
