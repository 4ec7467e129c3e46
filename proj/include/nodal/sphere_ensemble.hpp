#pragma once

// Band-limited Gaussian ensembles on the round unit 2-sphere:
//   f = sum_{l in window} sum_{m=-l..l} c_{l,m} Y_{l,m},  c_{l,m} iid N(0,1),
// with Y_{l,m} the real spherical harmonics of unit L^2 norm and eigenvalue
// t_l^2 = l(l+1). The window is alpha*T <= t_l <= T (alpha < 1) or
// T - T^beta <= t_l <= T (alpha = 1).

#include <cstddef>
#include <cstdint>
#include <vector>

namespace nodal {

struct SphereEnsembleParams {
  double T = 60.0;
  double alpha = 1.0;
  double eta_exponent = 0.4;  // beta in (0, 1/2), used when alpha == 1
  std::uint64_t seed = 0;
};

struct SphericalSample {
  std::vector<int> degrees;
  /// coeffs[i] holds 2l+1 values for degrees[i], ordered m = -l..l.
  std::vector<std::vector<double>> coeffs;

  std::size_t coefficient_count() const;
};

/// Equiangular latitude-longitude samples. Ring i (0 < i < n_lat-1) sits at
/// colatitude theta_i = i*pi/(n_lat-1); the two poles are single values.
struct SphereGrid {
  std::size_t n_lat = 0;
  std::size_t n_lon = 0;
  double north = 0.0;
  double south = 0.0;
  std::vector<double> rings;  // (n_lat - 2) x n_lon, row-major
  bool resolution_warning = false;

  double theta(std::size_t i) const;
  double phi(std::size_t j) const;
  double at(std::size_t i, std::size_t j) const;  // 0 < i < n_lat - 1
  /// Area-weighted mean of f^2 over the grid (trapezoid in theta).
  double mean_square() const;
};

std::vector<int> select_degrees(const SphereEnsembleParams& params);

SphericalSample draw_spherical(const SphereEnsembleParams& params, std::uint64_t sample_index = 0);

/// Synthesis on the grid via the fully normalized associated Legendre
/// recurrence. Rings are evaluated independently; any thread count gives
/// identical output.
SphereGrid eval_sphere_grid(const SphericalSample& sample, std::size_t n_lat, std::size_t n_lon,
                            unsigned threads = 1);

/// Latitude count giving at least `points_per_wavelength` samples per
/// wavelength at degree `max_degree` (longitudes are twice as many).
std::size_t recommended_latitudes(int max_degree, double points_per_wavelength = 8.0);

}  // namespace nodal
