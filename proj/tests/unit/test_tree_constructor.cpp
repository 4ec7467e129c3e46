#include "doctest.h"
#include "nodal/error.hpp"
#include "nodal/tree_constructor.hpp"

#include <cmath>
#include <numbers>

using namespace nodal;

TEST_CASE("rooted tree enumeration") {
  // Number of unlabeled rooted trees on n vertices.
  const std::vector<std::size_t> expected{1, 1, 2, 4, 9, 20, 48, 115};
  for (int n = 1; n <= 8; ++n) {
    const auto trees = all_rooted_trees(n);
    CHECK(trees.size() == expected[n - 1]);
    for (const auto& t : trees) CHECK(canonical_code(parse_tree_code(t)).vertex_count == n);
  }
  CHECK(all_rooted_trees(0).empty());
}

TEST_CASE("checkerboard") {
  CHECK(std::abs(checkerboard({1.0, 0.3})) < 1e-15);
  CHECK(checkerboard({0.5, 0.5}) == doctest::Approx(1.0));
  CHECK(checkerboard({1.5, 0.5}) == doctest::Approx(-1.0));
  CHECK(kCheckerboardWavenumber == doctest::Approx(std::numbers::sqrt2 * std::numbers::pi));
}

TEST_CASE("engulf and join bookkeeping") {
  const auto leaf = trivial_pattern();
  CHECK(leaf.root_sign == 1);
  CHECK(leaf.root_codes == std::vector<std::string>{"()"});
  const auto ring = engulf(leaf);
  CHECK(ring.root_sign == -1);
  CHECK(ring.root_codes == std::vector<std::string>{"(())"});
  const auto again = engulf(ring);
  CHECK(again.root_sign == 1);
  CHECK(again.root_codes == std::vector<std::string>{"((()))"});
  CHECK(grow_chain(3).root_codes == again.root_codes);
  const auto pair = join(ring, ring);
  CHECK(pair.root_codes.size() == 2);
  CHECK(engulf(pair).root_codes == std::vector<std::string>{"((())(()))"});
  const auto mixed = join(ring, trivial_pattern());
  CHECK(mixed.root_sign == -1);
  CHECK(engulf(mixed).root_codes == std::vector<std::string>{"((())())"});
  CHECK_THROWS_AS(grow_chain(0), PreconditionError);
}

TEST_CASE("pattern geometry") {
  const auto p = pattern_for_tree("(()())");
  REQUIRE(p.size() == p.eta.size());
  CHECK(std::is_sorted(p.points.begin(), p.points.end()));
  for (std::size_t i = 0; i < p.size(); ++i) {
    CHECK(std::abs(p.eta[i]) == 1);
    CHECK(p.points[i][0] >= p.bbox_min[0]);
    CHECK(p.points[i][1] <= p.bbox_max[1]);
  }
  CHECK(p.root_codes == std::vector<std::string>{"(()())"});
  CHECK(layout_tree("(()())", 1).root_codes == p.root_codes);
}

TEST_CASE("sign-margin fit") {
  const auto p = pattern_for_tree("((())())");
  const auto fit = fit_sign_margin(p);
  CHECK(fit.margin >= 1.0 - 1e-9);
  CHECK(fit.directions.size() == 4 * p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const Vec2 x{static_cast<double>(p.points[i][0]), static_cast<double>(p.points[i][1])};
    CHECK(p.eta[i] * fit.evaluate(x) >= 1.0 - 1e-9);
  }
  // Plane waves of wavenumber sqrt(2) pi: -Laplacian psi = 2 pi^2 psi.
  const Vec2 x{0.37, -1.21};
  const double h = 1e-3;
  const double lap = (fit.evaluate({x[0] + h, x[1]}) + fit.evaluate({x[0] - h, x[1]}) + fit.evaluate({x[0], x[1] + h}) +
                      fit.evaluate({x[0], x[1] - h}) - 4.0 * fit.evaluate(x)) /
                     (h * h);
  CHECK(-lap == doctest::Approx(2.0 * std::numbers::pi * std::numbers::pi * fit.evaluate(x)).epsilon(1e-3));
  const auto waves = fit.as_waves();
  CHECK(eval_point(waves, x) == doctest::Approx(fit.evaluate(x)).epsilon(1e-12));
}

TEST_CASE("exact interpolation on small patterns") {
  const auto p = trivial_pattern();
  const auto fit = fit_monochromatic(p);
  CHECK(fit.residual < 1e-6);
  for (std::size_t i = 0; i < p.size(); ++i) {
    const Vec2 x{static_cast<double>(p.points[i][0]), static_cast<double>(p.points[i][1])};
    CHECK(fit.evaluate(x) == doctest::Approx(p.eta[i]).epsilon(1e-6));
  }
  FitOptions strict;
  strict.max_direction_factor = 1;
  strict.direction_factor = 1;
  strict.tolerance = 0.0;
  CHECK_THROWS_AS(fit_monochromatic(pattern_for_tree("((()))"), strict), NumericalError);
}

TEST_CASE("realization of small trees") {
  for (int n = 1; n <= 4; ++n) {
    for (const auto& code : all_rooted_trees(n)) {
      const auto r = realize_and_verify(code);
      CAPTURE(code);
      CHECK(r.matched);
      CHECK(r.target == code);
      bool signs = false;
      for (const auto& s : r.sweep) signs |= s.match && s.signs_ok;
      CHECK(signs);
    }
  }
}

TEST_CASE("non-positive epsilon is rejected") {
  RealizeOptions o;
  o.epsilons = {0.1, 0.0};
  CHECK_THROWS_AS(realize_and_verify("(())", o), PreconditionError);
  CHECK_THROWS_AS(realize_and_verify("(()", {}), ConfigError);
}
