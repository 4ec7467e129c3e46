#pragma once

// Kac-Rice densities of the scale-invariant fields and the empirical counters
// that check them. Unit wavenumber, character e(t) = exp(it).

#include <cstddef>
#include <vector>

#include "nodal/field_sampler.hpp"
#include "nodal/nodal_topology.hpp"

namespace nodal {

/// (1/sqrt 3) * sqrt(1 + alpha + alpha^2).
double beta_1_alpha(double alpha);

struct SpectralMoments {
  double lambda0 = 1.0;
  double lambda2_per_axis = 0.0;  // E[xi_1^2]
  double fourth_moment = 0.0;     // E|xi|^4
};

SpectralMoments spectral_moments(const SpectralParams& params);

/// Rice zero density (1/pi) sqrt(lambda2 / lambda0). Requires dim == 1.
double zero_density_1d(const SpectralParams& params);

/// Expected nodal length per unit area, sqrt(lambda2_per_axis) / 2. Requires dim == 2.
double nodal_length_density_2d(const SpectralParams& params);

struct CriticalPointBound {
  double moment_ratio = 0.0;  // E|grad H|^2 / sqrt(det E[H H^T]) for H = grad F
  double constant = 1.0;      // normalization of the absolute constant
  double volume = 0.0;        // Vol(B(r))
  double bound = 0.0;         // constant * moment_ratio * volume
};

/// Right-hand side of the Kac-Rice upper bound for the number of critical
/// points of F in B(r), with the absolute constant normalized to 1.
CriticalPointBound critical_point_bound(const SpectralParams& params, double r);

struct CriticalPointCount {
  std::size_t count = 0;
  bool degenerate = false;  // a gradient component vanishes on a whole counted cell
};

/// Counts grid cells where both gradient components change sign (zero counts
/// as positive); a component that vanishes at all four corners also counts and
/// sets the degeneracy flag. Only cells whose centre lies within `radius` of
/// the origin are counted; radius <= 0 counts every cell.
CriticalPointCount count_critical_points(const FieldGrid& grid, double radius = 0.0);

/// Sign changes between consecutive samples of a 1-D grid.
std::size_t count_sign_changes(const FieldGrid& grid);

/// Nodal length inside B(radius): segments whose midpoint lies in the ball.
double nodal_length_in_ball(const std::vector<NodalCurve>& curves, double radius);

struct DensityEstimate {
  double analytic = 0.0;
  double estimate = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
  double total_measure = 0.0;  // length units (1-D) or area (2-D) covered
};

/// Zero density of the 1-D field from `n_samples` independent lines of the
/// given length.
DensityEstimate empirical_zero_density(const SpectralParams& params, double length, double spacing,
                                       std::size_t n_samples, const EvalOptions& options = {});

/// Nodal length per area of the 2-D field inside B(radius).
DensityEstimate empirical_length_density(const SpectralParams& params, double radius, double spacing,
                                         std::size_t n_samples, const EvalOptions& options = {});

}  // namespace nodal
