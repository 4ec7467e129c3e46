#include "doctest.h"
#include "nodal/error.hpp"
#include "nodal/nodal_topology.hpp"
#include "nodal/sign_mesh.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <queue>

using namespace nodal;

namespace {

FieldGrid sample(const std::function<double(double, double)>& f, double half, double h) {
  FieldGrid g;
  g.spec = GridSpec::covering_ball(half, h, 2);
  g.values.resize(g.spec.size());
  for (std::size_t iy = 0; iy < g.spec.dims[1]; ++iy) {
    for (std::size_t ix = 0; ix < g.spec.dims[0]; ++ix) {
      const Vec2 x = g.position(ix, iy);
      g.values[g.index(ix, iy)] = f(x[0], x[1]);
    }
  }
  return g;
}

NestingForest forest_of(const std::function<double(double, double)>& f, double half = 12.0, double h = 0.05) {
  return extract_forest(mesh_from_grid(sample(f, half, h)));
}

// Flood fill over grid samples: 4-neighbours of equal sign, plus the diagonal
// of a mixed quad whose corner mean has that diagonal's sign.
int oracle_domain_count(const FieldGrid& g) {
  const auto nx = static_cast<int>(g.spec.dims[0]);
  const auto ny = static_cast<int>(g.spec.dims[1]);
  auto pos = [&](int x, int y) { return g.values[static_cast<std::size_t>(y * nx + x)] > 0.0; };
  std::vector<int> label(static_cast<std::size_t>(nx * ny), -1);
  int count = 0;
  for (int s = 0; s < nx * ny; ++s) {
    if (label[s] >= 0) continue;
    label[s] = count;
    std::queue<int> q;
    q.push(s);
    while (!q.empty()) {
      const int v = q.front();
      q.pop();
      const int x = v % nx, y = v / nx;
      auto visit = [&](int a, int b) {
        if (a < 0 || b < 0 || a >= nx || b >= ny) return;
        const int w = b * nx + a;
        if (label[w] < 0 && pos(a, b) == pos(x, y)) {
          label[w] = count;
          q.push(w);
        }
      };
      visit(x + 1, y);
      visit(x - 1, y);
      visit(x, y + 1);
      visit(x, y - 1);
      for (int dx : {-1, 1}) {
        for (int dy : {-1, 1}) {
          const int a = x + dx, b = y + dy;
          if (a < 0 || b < 0 || a >= nx || b >= ny) continue;
          if (pos(a, y) == pos(x, y) || pos(x, b) == pos(x, y) || pos(a, b) != pos(x, y)) continue;
          const double mean = 0.25 * (g.values[static_cast<std::size_t>(y * nx + x)] +
                                      g.values[static_cast<std::size_t>(y * nx + a)] +
                                      g.values[static_cast<std::size_t>(b * nx + x)] +
                                      g.values[static_cast<std::size_t>(b * nx + a)]);
          if ((mean > 0.0) == pos(x, y)) visit(a, b);
        }
      }
    }
    ++count;
  }
  return count;
}

int curve_with_inside(const NestingForest& f, double area) {
  for (const auto& c : f.curves) {
    if (!c.clipped && std::abs(c.enclosed_area - area) < 0.05 * area) return c.id;
  }
  return -1;
}

}  // namespace

TEST_CASE("single bump") {
  const auto f = forest_of([](double x, double y) { return 1.0 - (x * x + y * y) / 4.0; }, 5.0, 0.05);
  REQUIRE(f.domain_count() == 2);
  REQUIRE(f.curves.size() == 1);
  const auto& c = f.curves[0];
  CHECK_FALSE(c.clipped);
  CHECK(c.length == doctest::Approx(4.0 * std::numbers::pi).epsilon(1e-3));
  CHECK(c.enclosed_area == doctest::Approx(4.0 * std::numbers::pi).epsilon(1e-3));
  CHECK(c.diameter == doctest::Approx(4.0).epsilon(1e-2));
  CHECK(f.vertices[c.inside].sign == 1);
  CHECK(f.vertices[c.inside].interior);
  CHECK_FALSE(f.vertices[c.outside].interior);
  CHECK(tree_end(f, 0).code == "()");
  CHECK(is_countable(f, 0));
}

TEST_CASE("concentric rings form a chain") {
  // Four closed rings; the square window also clips the ring at 4.5 pi at
  // its four corners.
  const auto f = forest_of([](double x, double y) { return std::cos(std::hypot(x, y)); });
  CHECK(f.domain_count() == 9);
  CHECK(f.edges.size() == 4);
  CHECK(f.curves.size() == 8);
  const double r = 3.5 * std::numbers::pi;
  const int outer = curve_with_inside(f, std::numbers::pi * r * r);
  REQUIRE(outer >= 0);
  const auto end = tree_end(f, outer);
  CHECK(end.code == "(((())))");
  CHECK(end.vertex_count == 4);
  for (const auto& v : f.vertices) {
    if (v.interior) CHECK(v.connectivity <= 2);
  }
}

TEST_CASE("disk with two holes") {
  auto field = [](double x, double y) {
    return 1.0 - (x * x + y * y) / 36.0 - 2.0 * std::exp(-((x - 2.5) * (x - 2.5) + y * y)) -
           2.0 * std::exp(-((x + 2.5) * (x + 2.5) + y * y));
  };
  const auto f = forest_of(field, 9.0, 0.05);
  CHECK(f.domain_count() == 4);
  const int outer = curve_with_inside(f, 36.0 * std::numbers::pi);
  REQUIRE(outer >= 0);
  CHECK(tree_end(f, outer).code == "(()())");
  const int disk = f.curves[outer].inside;
  CHECK(f.vertices[disk].connectivity == 3);
  CHECK(f.vertices[disk].child_curves.size() == 2);
  const auto codes = subtree_codes(f);
  CHECK(codes[disk] == "(()())");
}

TEST_CASE("clipped curves are not countable") {
  const auto f = forest_of([](double x, double y) { return x + 0.3 * y + 0.01; }, 5.0, 0.1);
  REQUIRE(f.curves.size() == 1);
  CHECK(f.curves[0].clipped);
  CHECK(f.edges.empty());
  CHECK_FALSE(is_countable(f, 0));
  CHECK_THROWS_AS(tree_end(f, 0), NotCountableError);
}

TEST_CASE("exact zeros are broken consistently") {
  const auto g = sample([](double x, double y) { return x * y; }, 3.0, 0.5);
  const auto mesh = mesh_from_grid(g);
  CHECK(mesh.tie_epsilon > 0.0);
  const auto f = extract_forest(mesh, LabelOptions{1.0, true});
  std::size_t m = 0;
  for (const auto& v : f.vertices) m += v.connectivity;
  CHECK(m == 2 * f.curves.size());
}

TEST_CASE("labeling matches a flood-fill oracle on random fields") {
  for (std::uint64_t s = 0; s < 4; ++s) {
    SpectralParams p;
    p.wave_count = 256;
    p.alpha = s % 2 ? 0.0 : 1.0;
    const auto waves = draw_plane_waves(p, s);
    const auto grid = eval_field(waves, GridSpec::covering_ball(25.0, 0.2, 2), false);
    const auto mesh = mesh_from_grid(grid);
    const auto labels = label_domains(mesh);
    CHECK(labels.domain_count == oracle_domain_count(grid));
    const auto forest = build_forest(trace_curves(mesh, labels), labels);
    std::size_t degree = 0, m = 0;
    for (const auto& v : forest.vertices) {
      m += v.connectivity;
      const int parent = v.parent_curve >= 0 && !forest.curves[v.parent_curve].clipped ? 1 : 0;
      int kids = 0;
      for (int c : v.child_curves) kids += forest.curves[c].clipped ? 0 : 1;
      degree += parent + kids;
    }
    CHECK(m == 2 * forest.curves.size());
    CHECK(degree == 2 * forest.edges.size());
  }
}

TEST_CASE("coarse grids are rejected") {
  const auto g = sample([](double x, double y) { return std::sin(x) * std::cos(y); }, 10.0, 1.0);
  CHECK_THROWS_AS(label_domains(mesh_from_grid(g)), PreconditionError);
  CHECK_NOTHROW(label_domains(mesh_from_grid(g), LabelOptions{1.0, true}));
}

TEST_CASE("canonical codes identify isomorphic trees") {
  RootedTree a;
  a.children = {{1, 2}, {3}, {}, {}};
  RootedTree b;
  b.children = {{1, 3}, {}, {}, {2}};
  CHECK(canonical_code(a) == canonical_code(b));
  CHECK(canonical_code(a).code == "((())())");
  CHECK(canonical_code(a).vertex_count == 4);
  RootedTree chain;
  chain.children = {{1}, {2}, {3}, {}};
  CHECK(canonical_code(chain) != canonical_code(a));
  for (const std::string code : {"()", "(())", "((())())", "((()())(()))"}) {
    CHECK(canonical_code(parse_tree_code(code)).code == code);
  }
  CHECK(canonical_code(parse_tree_code("((())(()()))")).code == "((()())(()))");
  CHECK(canonical_code(parse_tree_code("(()(()))")).code == "((())())");
  for (const std::string bad : {"", "(", "(()", "())", "()()", "(x)"}) {
    CHECK_THROWS_AS(parse_tree_code(bad), ConfigError);
  }
}

TEST_CASE("deep chains do not overflow") {
  RootedTree t;
  const int n = 200000;
  t.children.resize(n);
  for (int i = 0; i + 1 < n; ++i) t.children[i] = {i + 1};
  const auto code = canonical_code(t);
  CHECK(code.vertex_count == n);
  CHECK(code.code.size() == 2u * n);
}

TEST_CASE("forest dump lists vertices and edges") {
  const auto f = forest_of([](double x, double y) { return 1.0 - (x * x + y * y) / 4.0; }, 5.0, 0.1);
  const auto text = dump_forest(f);
  CHECK(text.find("v 0 m=1") != std::string::npos);
  CHECK(text.find("e 0 ") != std::string::npos);
  CHECK(text.find("clipped=0") != std::string::npos);
}
