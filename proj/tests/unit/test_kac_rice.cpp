#include "doctest.h"
#include "nodal/error.hpp"
#include "nodal/kac_rice.hpp"
#include "nodal/sign_mesh.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>

using namespace nodal;

namespace {

double integrate(const std::function<double(double)>& f, double a, double b) {
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 10, 1e-13);
}

// E[xi_1^2] and E|xi|^4 from the radial law of the spectral measure.
std::pair<double, double> moments_oracle(int dim, double alpha) {
  if (dim == 1) {
    if (alpha == 1.0) return {1.0, 1.0};
    const double n = 1.0 - alpha;
    return {integrate([](double s) { return s * s; }, alpha, 1.0) / n,
            integrate([](double s) { return s * s * s * s; }, alpha, 1.0) / n};
  }
  if (alpha == 1.0) return {0.5, 1.0};
  const double n = integrate([](double s) { return s; }, alpha, 1.0);
  const double r2 = integrate([](double s) { return s * s * s; }, alpha, 1.0) / n;
  const double r4 = integrate([](double s) { return s * s * s * s * s; }, alpha, 1.0) / n;
  return {0.5 * r2, r4};
}

}  // namespace

TEST_CASE("one-dimensional constant") {
  CHECK(beta_1_alpha(1.0) == doctest::Approx(1.0));
  CHECK(beta_1_alpha(0.0) == doctest::Approx(1.0 / std::sqrt(3.0)));
  for (double a : {0.0, 0.25, 0.5, 0.999, 1.0}) {
    SpectralParams p;
    p.dim = 1;
    p.alpha = a;
    CAPTURE(a);
    CHECK(zero_density_1d(p) == doctest::Approx(beta_1_alpha(a) / std::numbers::pi).epsilon(1e-12));
  }
}

TEST_CASE("spectral moments") {
  for (int dim : {1, 2}) {
    for (double a : {0.0, 0.4, 0.9999, 1.0}) {
      SpectralParams p;
      p.dim = dim;
      p.alpha = a;
      const auto m = spectral_moments(p);
      const auto [l2, l4] = moments_oracle(dim, a);
      CAPTURE(dim);
      CAPTURE(a);
      CHECK(m.lambda0 == 1.0);
      CHECK(m.lambda2_per_axis == doctest::Approx(l2).epsilon(1e-10));
      CHECK(m.fourth_moment == doctest::Approx(l4).epsilon(1e-10));
    }
  }
}

TEST_CASE("nodal length density") {
  SpectralParams p;
  CHECK(nodal_length_density_2d(p) == doctest::Approx(1.0 / (2.0 * std::numbers::sqrt2)));
  p.dim = 1;
  CHECK_THROWS_AS(nodal_length_density_2d(p), UnsupportedError);
  p.dim = 2;
  CHECK_THROWS_AS(zero_density_1d(p), UnsupportedError);
}

TEST_CASE("critical point bound") {
  SpectralParams p;
  const auto b = critical_point_bound(p, 2.0);
  CHECK(b.constant == 1.0);
  CHECK(b.volume == doctest::Approx(4.0 * std::numbers::pi));
  CHECK(b.moment_ratio == doctest::Approx(2.0));
  CHECK(b.bound == doctest::Approx(8.0 * std::numbers::pi));
}

TEST_CASE("sign changes of a sine") {
  FieldGrid g;
  g.spec.origin = {0.05, 0.0};
  g.spec.spacing = 0.1;
  g.spec.dims = {1000, 1};
  for (std::size_t i = 0; i < 1000; ++i) g.values.push_back(std::sin(g.position(i, 0)[0]));
  // Zeros of sin at k*pi in (0.05, 99.95): k = 1..31.
  CHECK(count_sign_changes(g) == 31);
}

TEST_CASE("critical points of a product of sines") {
  FieldGrid g;
  const double h = 0.05;
  g.spec.origin = {0.013, 0.017};
  g.spec.spacing = h;
  g.spec.dims = {400, 400};
  for (std::size_t iy = 0; iy < 400; ++iy) {
    for (std::size_t ix = 0; ix < 400; ++ix) {
      const Vec2 x = g.position(ix, iy);
      g.values.push_back(std::sin(x[0]) * std::sin(x[1]));
      g.grad_x.push_back(std::cos(x[0]) * std::sin(x[1]));
      g.grad_y.push_back(std::sin(x[0]) * std::cos(x[1]));
    }
  }
  // Extrema at (pi/2 + i pi, pi/2 + j pi), saddles at (i pi, j pi) inside
  // (0.013, 19.963)^2: 6 x 6 extrema and 6 x 6 saddles.
  const auto c = count_critical_points(g);
  CHECK(c.count == 72);
  CHECK_FALSE(c.degenerate);
}

TEST_CASE("empirical zero density is unbiased") {
  SpectralParams p;
  p.dim = 1;
  p.alpha = 0.5;
  p.wave_count = 512;
  const auto d = empirical_zero_density(p, 2000.0, 0.1, 20);
  CHECK(d.analytic == doctest::Approx(beta_1_alpha(0.5) / std::numbers::pi));
  CHECK(std::abs(d.estimate - d.analytic) < 4.0 * d.std_error + 1e-3);
  CHECK(d.total_measure == doctest::Approx(40000.0).epsilon(0.01));
}

TEST_CASE("nodal length in a ball") {
  FieldGrid g;
  g.spec = GridSpec::covering_ball(6.0, 0.05, 2);
  for (std::size_t iy = 0; iy < g.spec.dims[1]; ++iy) {
    for (std::size_t ix = 0; ix < g.spec.dims[0]; ++ix) {
      const Vec2 x = g.position(ix, iy);
      g.values.push_back(x[0] - 0.01);
    }
  }
  const auto forest = extract_forest(mesh_from_grid(g));
  CHECK(nodal_length_in_ball(forest.curves, 3.0) == doctest::Approx(6.0).epsilon(0.01));
}
