#include "doctest.h"
#include "nodal/error.hpp"
#include "nodal/field_sampler.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <numbers>

using namespace nodal;

namespace {

// Composite Gauss-Legendre over [a, b] in equal panels.
template <class F>
double panels(F f, double a, double b, int n) {
  double sum = 0.0;
  const double w = (b - a) / n;
  for (int i = 0; i < n; ++i) {
    sum += boost::math::quadrature::gauss<double, 30>::integrate(f, a + i * w, a + (i + 1) * w);
  }
  return sum;
}

// Average of cos(r xi_1) over the spectral measure, straight from its
// definition as a uniform law on the annulus (or circle / pair of intervals).
double covariance_oracle(int dim, double alpha, double r) {
  const double pi = std::numbers::pi;
  if (dim == 1) {
    if (alpha == 1.0) return std::cos(r);
    return panels([r](double s) { return std::cos(r * s); }, alpha, 1.0, 16) / (1.0 - alpha);
  }
  auto ring = [r, pi](double rho) {
    return panels([r, rho](double t) { return std::cos(r * rho * std::cos(t)); }, 0.0, 2.0 * pi, 16) / (2.0 * pi);
  };
  if (alpha == 1.0) return ring(1.0);
  return panels([&](double rho) { return rho * ring(rho); }, alpha, 1.0, 8) * 2.0 / (1.0 - alpha * alpha);
}

}  // namespace

TEST_CASE("covariance matches quadrature of the spectral measure") {
  for (int dim : {1, 2}) {
    for (double alpha : {0.0, 0.3, 0.9995, 1.0}) {
      SpectralParams p;
      p.dim = dim;
      p.alpha = alpha;
      double worst = 0.0;
      for (int i = 0; i < 100; ++i) {
        const double r = 0.3 * i;
        worst = std::max(worst, std::abs(covariance_exact(p, r) - covariance_oracle(dim, alpha, r)));
      }
      CAPTURE(dim);
      CAPTURE(alpha);
      CHECK(worst < 1e-8);
    }
  }
}

TEST_CASE("empirical covariance agrees with the exact one") {
  SpectralParams p;
  p.alpha = 0.5;
  p.wave_count = 256;
  const std::vector<double> r{0.0, 1.0, 2.5, 5.0};
  const auto est = covariance_empirical(p, r, 4000);
  for (const auto& e : est) {
    CAPTURE(e.r);
    CHECK(std::abs(e.estimate - covariance_exact(p, e.r)) < 5.0 * e.std_error + 1e-3);
  }
}

TEST_CASE("wavevectors lie in the annulus and unit variance holds") {
  SpectralParams p;
  p.alpha = 0.4;
  p.wave_count = 512;
  const auto w = draw_plane_waves(p, 3);
  REQUIRE(w.size() == 512);
  for (const auto& k : w.wavevectors) {
    const double n = std::hypot(k[0], k[1]);
    CHECK(n >= 0.4 - 1e-12);
    CHECK(n <= 1.0 + 1e-12);
  }
  CHECK(w.amplitude == doctest::Approx(std::sqrt(2.0 / 512)));
}

TEST_CASE("grid values and gradient") {
  SpectralParams p;
  p.wave_count = 64;
  const auto waves = draw_plane_waves(p, 0);
  GridSpec spec;
  spec.origin = {-3.0, -2.0};
  spec.spacing = 0.37;
  spec.dims = {19, 13};
  const auto grid = eval_field(waves, spec, true);
  const double step = 1e-5;
  double worst_value = 0.0, worst_grad = 0.0;
  for (std::size_t iy = 0; iy < spec.dims[1]; iy += 3) {
    for (std::size_t ix = 0; ix < spec.dims[0]; ix += 2) {
      const Vec2 x = grid.position(ix, iy);
      const std::size_t i = grid.index(ix, iy);
      worst_value = std::max(worst_value, std::abs(grid.values[i] - eval_point(waves, x)));
      const double fx = (eval_point(waves, {x[0] + step, x[1]}) - eval_point(waves, {x[0] - step, x[1]})) / (2 * step);
      const double fy = (eval_point(waves, {x[0], x[1] + step}) - eval_point(waves, {x[0], x[1] - step})) / (2 * step);
      const double scale = std::max(1.0, std::hypot(fx, fy));
      worst_grad = std::max(worst_grad, std::hypot(grid.grad_x[i] - fx, grid.grad_y[i] - fy) / scale);
    }
  }
  CHECK(worst_value < 1e-10);
  CHECK(worst_grad < 1e-3);
}

TEST_CASE("single precision stays close to double") {
  SpectralParams p;
  const auto waves = draw_plane_waves(p, 1);
  const auto spec = GridSpec::covering_ball(5.0, 0.2, 2);
  EvalOptions single;
  single.single_precision = true;
  const auto a = eval_field(waves, spec, false);
  const auto b = eval_field(waves, spec, false, single);
  double worst = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) worst = std::max(worst, std::abs(a.values[i] - b.values[i]));
  CHECK(worst < 1e-4);
}

TEST_CASE("thread count does not change the output") {
  SpectralParams p;
  p.wave_count = 300;
  const auto waves = draw_plane_waves(p, 5);
  const auto spec = GridSpec::covering_ball(20.0, 0.15, 2);
  EvalOptions one, four;
  four.threads = 4;
  const auto a = eval_field(waves, spec, true, one);
  const auto b = eval_field(waves, spec, true, four);
  CHECK(a.values == b.values);
  CHECK(a.grad_x == b.grad_x);
  CHECK(a.grad_y == b.grad_y);
}

TEST_CASE("weights scale individual waves") {
  PlaneWaveSet w;
  w.amplitude = 1.0;
  w.wavevectors = {{1.0, 0.0}, {0.0, 1.0}};
  w.phases = {0.0, 0.5};
  w.weights = {2.0, -0.5};
  GridSpec spec;
  spec.dims = {4, 3};
  spec.spacing = 0.7;
  const auto grid = eval_field(w, spec, false);
  for (std::size_t iy = 0; iy < 3; ++iy) {
    for (std::size_t ix = 0; ix < 4; ++ix) {
      const Vec2 x = grid.position(ix, iy);
      CHECK(grid.values[grid.index(ix, iy)] ==
            doctest::Approx(2.0 * std::cos(x[0]) - 0.5 * std::cos(x[1] + 0.5)).epsilon(1e-12));
    }
  }
  w.weights = {1.0};
  CHECK_THROWS_AS(eval_field(w, spec, false), ConfigError);
}

TEST_CASE("invalid parameters and budgets") {
  SpectralParams p;
  p.alpha = 1.5;
  CHECK_THROWS_AS(draw_plane_waves(p), ConfigError);
  p.alpha = 1.0;
  p.dim = 3;
  CHECK_THROWS_AS(draw_plane_waves(p), ConfigError);
  p.dim = 2;
  p.wave_count = 0;
  CHECK_THROWS_AS(draw_plane_waves(p), ConfigError);
  p.wave_count = 4096;
  EvalOptions tight;
  tight.memory_budget_bytes = 1024;
  CHECK_THROWS_AS(eval_field(draw_plane_waves(p), GridSpec::covering_ball(50.0, 0.1, 2), false, tight), ResourceError);
}

TEST_CASE("covering grid contains the ball") {
  const auto spec = GridSpec::covering_ball(10.0, 0.3, 2);
  CHECK(spec.origin[0] <= -10.0);
  CHECK(spec.origin[0] + spec.spacing * (spec.dims[0] - 1) >= 10.0);
  const auto line = GridSpec::covering_ball(10.0, 0.3, 1);
  CHECK(line.dims[1] == 1);
}
