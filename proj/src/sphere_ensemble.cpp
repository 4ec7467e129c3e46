#include "nodal/sphere_ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <sstream>
#include <thread>

#include "nodal/error.hpp"
#include "nodal/rng.hpp"

namespace nodal {

namespace {

// Fully normalized associated Legendre values pbar[l][m] (l <= lmax) at
// x = cos(theta), s = sin(theta), such that Y_{l,0} = pbar[l][0] and
// Y_{l,+-m} = sqrt(2) pbar[l][m] {cos, sin}(m phi) have unit L^2 norm.
void normalized_legendre(int lmax, double x, double s, std::vector<double>& pbar) {
  const auto idx = [](int l, int m) { return static_cast<std::size_t>(l * (l + 1) / 2 + m); };
  pbar.assign(idx(lmax, lmax) + 1, 0.0);
  pbar[idx(0, 0)] = 1.0 / std::sqrt(4.0 * std::numbers::pi);
  for (int m = 1; m <= lmax; ++m) {
    pbar[idx(m, m)] = std::sqrt((2.0 * m + 1.0) / (2.0 * m)) * s * pbar[idx(m - 1, m - 1)];
  }
  for (int m = 0; m < lmax; ++m) {
    pbar[idx(m + 1, m)] = std::sqrt(2.0 * m + 3.0) * x * pbar[idx(m, m)];
  }
  for (int m = 0; m <= lmax; ++m) {
    for (int l = m + 2; l <= lmax; ++l) {
      const double l2 = static_cast<double>(l) * l;
      const double m2 = static_cast<double>(m) * m;
      const double a = std::sqrt((4.0 * l2 - 1.0) / (l2 - m2));
      const double lm1 = static_cast<double>(l - 1);
      const double b = std::sqrt((lm1 * lm1 - m2) / (4.0 * lm1 * lm1 - 1.0));
      pbar[idx(l, m)] = a * (x * pbar[idx(l - 1, m)] - b * pbar[idx(l - 2, m)]);
    }
  }
}

}  // namespace

std::size_t SphericalSample::coefficient_count() const {
  std::size_t n = 0;
  for (const auto& c : coeffs) n += c.size();
  return n;
}

double SphereGrid::theta(std::size_t i) const {
  return std::numbers::pi * static_cast<double>(i) / static_cast<double>(n_lat - 1);
}

double SphereGrid::phi(std::size_t j) const {
  return 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n_lon);
}

double SphereGrid::at(std::size_t i, std::size_t j) const { return rings[(i - 1) * n_lon + j]; }

double SphereGrid::mean_square() const {
  const double dtheta = std::numbers::pi / static_cast<double>(n_lat - 1);
  double total = 0.0, weight = 0.0;
  for (std::size_t i = 1; i + 1 < n_lat; ++i) {
    const double w = std::sin(theta(i));
    for (std::size_t j = 0; j < n_lon; ++j) {
      const double v = at(i, j);
      total += w * v * v;
    }
    weight += w * static_cast<double>(n_lon);
  }
  // Pole caps, weighted by their cap area relative to a ring cell.
  const double cap = (1.0 - std::cos(0.5 * dtheta)) / dtheta * static_cast<double>(n_lon);
  total += cap * (north * north + south * south);
  weight += 2.0 * cap;
  return total / weight;
}

std::vector<int> select_degrees(const SphereEnsembleParams& params) {
  if (!(params.T > 0.0)) throw ConfigError("band edge T must be positive");
  if (!(params.alpha >= 0.0 && params.alpha <= 1.0)) throw ConfigError("alpha must lie in [0,1]");
  const bool monochromatic = params.alpha == 1.0;
  if (monochromatic && !(params.eta_exponent > 0.0 && params.eta_exponent < 0.5)) {
    throw ConfigError("eta exponent must lie in (0, 1/2)");
  }
  const double lower =
      monochromatic ? params.T - std::pow(params.T, params.eta_exponent) : params.alpha * params.T;
  std::vector<int> degrees;
  for (int l = 0;; ++l) {
    const double t = std::sqrt(static_cast<double>(l) * (l + 1));
    if (t > params.T) break;
    if (t >= lower) degrees.push_back(l);
  }
  if (degrees.empty()) {
    std::ostringstream msg;
    msg << "empty spherical degree window for T=" << params.T << ", alpha=" << params.alpha;
    throw ConfigError(msg.str());
  }
  return degrees;
}

SphericalSample draw_spherical(const SphereEnsembleParams& params, std::uint64_t sample_index) {
  SphericalSample sample;
  sample.degrees = select_degrees(params);
  RandomStream stream(params.seed, sample_index, StreamTag::kSphereCoefficients);
  for (int l : sample.degrees) {
    std::vector<double> c(2 * static_cast<std::size_t>(l) + 1);
    for (auto& v : c) v = stream.normal();
    sample.coeffs.push_back(std::move(c));
  }
  return sample;
}

std::size_t recommended_latitudes(int max_degree, double points_per_wavelength) {
  const double wavenumber = std::max(1.0, std::sqrt(static_cast<double>(max_degree) * (max_degree + 1)));
  const double spacing = 2.0 * std::numbers::pi / wavenumber / points_per_wavelength;
  return std::max<std::size_t>(4, static_cast<std::size_t>(std::ceil(std::numbers::pi / spacing)) + 1);
}

SphereGrid eval_sphere_grid(const SphericalSample& sample, std::size_t n_lat, std::size_t n_lon,
                            unsigned threads) {
  if (n_lat < 4 || n_lon < 8) throw PreconditionError("sphere grid needs n_lat >= 4 and n_lon >= 8");
  if (sample.degrees.empty()) throw PreconditionError("spherical sample has no degrees");
  SphereGrid grid;
  grid.n_lat = n_lat;
  grid.n_lon = n_lon;
  grid.rings.assign((n_lat - 2) * n_lon, 0.0);

  const int lmax = sample.degrees.back();
  if (lmax > 0) {
    const double wavelength = 2.0 * std::numbers::pi / std::sqrt(static_cast<double>(lmax) * (lmax + 1));
    const double spacing = std::max(std::numbers::pi / static_cast<double>(n_lat - 1),
                                    2.0 * std::numbers::pi / static_cast<double>(n_lon));
    grid.resolution_warning = wavelength / spacing < 4.0;
  }

  // cos(m phi_j), sin(m phi_j)
  std::vector<double> cos_table((lmax + 1) * n_lon), sin_table((lmax + 1) * n_lon);
  for (int m = 0; m <= lmax; ++m) {
    for (std::size_t j = 0; j < n_lon; ++j) {
      const double a = m * grid.phi(j);
      cos_table[m * n_lon + j] = std::cos(a);
      sin_table[m * n_lon + j] = std::sin(a);
    }
  }

  const auto idx = [](int l, int m) { return static_cast<std::size_t>(l * (l + 1) / 2 + m); };
  const double root2 = std::numbers::sqrt2;
  auto ring_values = [&](double theta, double* out, std::size_t count) {
    std::vector<double> pbar;
    normalized_legendre(lmax, std::cos(theta), std::sin(theta), pbar);
    std::vector<double> a(lmax + 1, 0.0), b(lmax + 1, 0.0);
    for (std::size_t d = 0; d < sample.degrees.size(); ++d) {
      const int l = sample.degrees[d];
      const auto& c = sample.coeffs[d];
      a[0] += c[l] * pbar[idx(l, 0)];
      for (int m = 1; m <= l; ++m) {
        a[m] += root2 * c[l + m] * pbar[idx(l, m)];
        b[m] += root2 * c[l - m] * pbar[idx(l, m)];
      }
    }
    for (std::size_t j = 0; j < count; ++j) {
      double v = 0.0;
      for (int m = 0; m <= lmax; ++m) {
        v += a[m] * cos_table[m * n_lon + j] + b[m] * sin_table[m * n_lon + j];
      }
      out[j] = v;
    }
  };

  double pole[1];
  ring_values(0.0, pole, 1);
  grid.north = pole[0];
  ring_values(std::numbers::pi, pole, 1);
  grid.south = pole[0];

  const std::size_t n_rings = n_lat - 2;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t r = next++; r < n_rings; r = next++) {
      ring_values(grid.theta(r + 1), grid.rings.data() + r * n_lon, n_lon);
    }
  };
  const unsigned n_threads = std::max(1u, threads);
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return grid;
}

}  // namespace nodal
