#include "nodal/nodal_topology.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include "geometry.hpp"
#include "nodal/error.hpp"
#include "nodal/union_find.hpp"

namespace nodal {

namespace {

bool saddle(const SignMesh& mesh, const MeshFace& f) {
  if (f.size != 4) return false;
  const bool s0 = mesh.positive(f.v[0]);
  return s0 != mesh.positive(f.v[1]) && s0 == mesh.positive(f.v[2]) && s0 != mesh.positive(f.v[3]);
}

// Sign of the bilinear interpolant at the quad centre.
bool centre_positive(const SignMesh& mesh, const MeshFace& f) {
  const double c = mesh.value[f.v[0]] + mesh.value[f.v[1]] + mesh.value[f.v[2]] + mesh.value[f.v[3]];
  return c > 0.0;
}

struct Crossing {
  int edge = -1;
  int plus_vertex = -1;
  int minus_vertex = -1;
  Vec3 point{};
  std::array<int, 2> next{-1, -1};
};

void link(std::vector<Crossing>& crossings, int a, int b) {
  auto attach = [&](int from, int to) {
    auto& slots = crossings[from].next;
    if (slots[0] < 0) {
      slots[0] = to;
    } else if (slots[1] < 0) {
      slots[1] = to;
    } else {
      throw InvariantError("edge crossing linked to more than two faces");
    }
  };
  attach(a, b);
  attach(b, a);
}

void finish_planar_geometry(NodalCurve& curve, const std::vector<Crossing>& crossings,
                            const std::vector<int>& chain, const SignMesh& mesh) {
  const auto& pts = curve.polyline;
  const std::size_t n = pts.size();
  curve.bbox_min = curve.bbox_max = pts.front();
  for (const auto& p : pts) {
    curve.bbox_min = {std::min(curve.bbox_min[0], p[0]), std::min(curve.bbox_min[1], p[1])};
    curve.bbox_max = {std::max(curve.bbox_max[0], p[0]), std::max(curve.bbox_max[1], p[1])};
  }
  double length = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) length += detail::distance(pts[i], pts[i + 1]);
  if (!curve.clipped && n > 1) length += detail::distance(pts.back(), pts.front());
  curve.length = length;
  curve.hull = detail::convex_hull(pts);
  curve.diameter = detail::hull_diameter(curve.hull);
  if (curve.clipped) {
    curve.outside = curve.negative_domain;
    curve.inside = curve.positive_domain;
    return;
  }
  double twice_area = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = pts[i];
    const auto& b = pts[(i + 1) % n];
    twice_area += a[0] * b[1] - a[1] * b[0];
  }
  curve.enclosed_area = 0.5 * std::abs(twice_area);
  // Which side carries the positive domain: majority vote of the orientation
  // of (tangent, crossing -> positive vertex) along the traversal.
  long vote = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& prev = pts[(i + n - 1) % n];
    const auto& next = pts[(i + 1) % n];
    const auto& plus = mesh.position[crossings[chain[i]].plus_vertex];
    const double tx = next[0] - prev[0], ty = next[1] - prev[1];
    const double wx = plus[0] - pts[i][0], wy = plus[1] - pts[i][1];
    const double c = tx * wy - ty * wx;
    vote += c > 0.0 ? 1 : (c < 0.0 ? -1 : 0);
  }
  const bool plus_left = vote > 0;
  const bool counter_clockwise = twice_area > 0.0;
  const bool plus_inside = plus_left == counter_clockwise;
  curve.inside = plus_inside ? curve.positive_domain : curve.negative_domain;
  curve.outside = plus_inside ? curve.negative_domain : curve.positive_domain;
}

}  // namespace

DomainLabeling label_domains(const SignMesh& mesh, const LabelOptions& options) {
  if (mesh.planar && !options.allow_coarse) {
    const double limit = std::numbers::pi / (4.0 * options.wavenumber);
    if (mesh.spacing > limit * (1.0 + 1e-12)) {
      std::ostringstream msg;
      msg << "grid spacing " << mesh.spacing << " resolves fewer than 8 samples per wavelength (limit "
          << limit << "); set allow_coarse to override";
      throw PreconditionError(msg.str());
    }
  }
  const std::size_t n = mesh.vertex_count();
  UnionFind sets(n);
  for (const auto& e : mesh.edges) {
    if (mesh.positive(e[0]) == mesh.positive(e[1])) sets.unite(e[0], e[1]);
  }
  for (const auto& f : mesh.faces) {
    if (!saddle(mesh, f)) continue;
    // Join the diagonal whose sign matches the centre.
    if (mesh.positive(f.v[0]) == centre_positive(mesh, f)) {
      sets.unite(f.v[0], f.v[2]);
    } else {
      sets.unite(f.v[1], f.v[3]);
    }
  }
  DomainLabeling out;
  out.component_id = sets.dense_labels(&out.domain_count);
  const auto count = static_cast<std::size_t>(out.domain_count);
  out.domain_sign.assign(count, 0);
  out.touches_boundary.assign(count, 0);
  out.domain_area.assign(count, 0.0);
  out.domain_vertex_count.assign(count, 0);
  for (std::size_t v = 0; v < n; ++v) {
    const int d = out.component_id[v];
    out.domain_sign[d] = mesh.positive(static_cast<int>(v)) ? 1 : -1;
    if (mesh.boundary_vertex[v]) out.touches_boundary[d] = 1;
    out.domain_area[d] += mesh.vertex_area[v];
    ++out.domain_vertex_count[d];
  }
  return out;
}

std::vector<NodalCurve> trace_curves(const SignMesh& mesh, const DomainLabeling& labeling) {
  if (labeling.component_id.size() != mesh.vertex_count()) {
    throw InvariantError("labeling does not match mesh");
  }
  std::vector<int> crossing_of_edge(mesh.edges.size(), -1);
  std::vector<Crossing> crossings;
  for (std::size_t e = 0; e < mesh.edges.size(); ++e) {
    const int a = mesh.edges[e][0];
    const int b = mesh.edges[e][1];
    if (mesh.positive(a) == mesh.positive(b)) continue;
    const double va = mesh.value[a];
    const double vb = mesh.value[b];
    const double t = va / (va - vb);
    Crossing c;
    c.edge = static_cast<int>(e);
    c.plus_vertex = mesh.positive(a) ? a : b;
    c.minus_vertex = mesh.positive(a) ? b : a;
    const auto& pa = mesh.position[a];
    const auto& pb = mesh.position[b];
    c.point = {pa[0] + t * (pb[0] - pa[0]), pa[1] + t * (pb[1] - pa[1]), pa[2] + t * (pb[2] - pa[2])};
    crossing_of_edge[e] = static_cast<int>(crossings.size());
    crossings.push_back(c);
  }
  for (const auto& f : mesh.faces) {
    int hits[4];
    int n_hits = 0;
    for (int k = 0; k < f.size; ++k) {
      if (crossing_of_edge[f.e[k]] >= 0) hits[n_hits++] = k;
    }
    if (n_hits == 0) continue;
    if (n_hits == 2) {
      link(crossings, crossing_of_edge[f.e[hits[0]]], crossing_of_edge[f.e[hits[1]]]);
    } else if (n_hits == 4) {
      // Saddle: cut off the two corners whose sign differs from the centre.
      const bool centre = centre_positive(mesh, f);
      for (int k = 0; k < 4; ++k) {
        if (mesh.positive(f.v[k]) != centre) {
          link(crossings, crossing_of_edge[f.e[(k + 3) % 4]], crossing_of_edge[f.e[k]]);
        }
      }
    } else {
      throw InvariantError("face with an odd number of sign changes");
    }
  }

  std::vector<NodalCurve> curves;
  std::vector<std::uint8_t> visited(crossings.size(), 0);
  auto walk = [&](int start, bool open) {
    std::vector<int> chain;
    int prev = -1;
    int cur = start;
    while (cur >= 0 && !visited[cur]) {
      visited[cur] = 1;
      chain.push_back(cur);
      const auto& nx = crossings[cur].next;
      const int step = nx[0] != prev ? nx[0] : nx[1];
      prev = cur;
      cur = step;
    }
    NodalCurve curve;
    curve.id = static_cast<int>(curves.size());
    curve.clipped = open;
    const auto& first = crossings[chain.front()];
    curve.positive_domain = labeling.component_id[first.plus_vertex];
    curve.negative_domain = labeling.component_id[first.minus_vertex];
    for (int c : chain) {
      if (labeling.component_id[crossings[c].plus_vertex] != curve.positive_domain ||
          labeling.component_id[crossings[c].minus_vertex] != curve.negative_domain) {
        throw InvariantError("nodal curve separates more than two domains");
      }
    }
    if (curve.positive_domain == curve.negative_domain) {
      throw InvariantError("nodal curve with the same domain on both sides");
    }
    if (mesh.planar) {
      curve.polyline.reserve(chain.size());
      for (int c : chain) curve.polyline.push_back({crossings[c].point[0], crossings[c].point[1]});
      finish_planar_geometry(curve, crossings, chain, mesh);
    } else {
      double length = 0.0;
      for (std::size_t i = 0; i < chain.size(); ++i) {
        const auto& a = crossings[chain[i]].point;
        const auto& b = crossings[chain[(i + 1) % chain.size()]].point;
        if (open && i + 1 == chain.size()) break;
        length += std::sqrt((a[0] - b[0]) * (a[0] - b[0]) + (a[1] - b[1]) * (a[1] - b[1]) +
                            (a[2] - b[2]) * (a[2] - b[2]));
      }
      curve.length = length;
      curve.inside = curve.positive_domain;
      curve.outside = curve.negative_domain;
    }
    curves.push_back(std::move(curve));
  };
  for (std::size_t c = 0; c < crossings.size(); ++c) {
    const auto& nx = crossings[c].next;
    const int degree = (nx[0] >= 0) + (nx[1] >= 0);
    if (degree == 0) throw InvariantError("isolated edge crossing");
    if (degree == 1 && !visited[c]) {
      if (!mesh.boundary_edge[crossings[c].edge]) throw InvariantError("open curve ends inside the mesh");
      walk(static_cast<int>(c), true);
    }
  }
  for (std::size_t c = 0; c < crossings.size(); ++c) {
    if (!visited[c]) walk(static_cast<int>(c), false);
  }
  return curves;
}

int NestingForest::other_side(int curve, int domain) const {
  const auto& c = curves[curve];
  return c.inside == domain ? c.outside : c.inside;
}

NestingForest build_forest(std::vector<NodalCurve> curves, const DomainLabeling& labeling) {
  NestingForest forest;
  forest.curves = std::move(curves);
  const auto n_domains = static_cast<std::size_t>(labeling.domain_count);
  forest.vertices.resize(n_domains);
  bool any_boundary = false;
  for (std::size_t d = 0; d < n_domains; ++d) {
    auto& v = forest.vertices[d];
    v.sign = labeling.domain_sign[d];
    v.touches_boundary = labeling.touches_boundary[d] != 0;
    v.area = labeling.domain_area[d];
    any_boundary = any_boundary || v.touches_boundary;
  }
  bool any_clipped = false;
  bool any_polyline = false;
  for (const auto& c : forest.curves) {
    forest.vertices[c.positive_domain].curves.push_back(c.id);
    forest.vertices[c.negative_domain].curves.push_back(c.id);
    any_clipped = any_clipped || c.clipped;
    any_polyline = any_polyline || !c.polyline.empty();
  }
  forest.boundary_free = !any_boundary && !any_clipped;
  forest.planar = any_polyline || any_boundary;

  UnionFind sets(n_domains);
  for (const auto& c : forest.curves) {
    if (c.clipped) continue;
    forest.edges.push_back(c.id);
    if (!sets.unite(c.positive_domain, c.negative_domain)) {
      throw InvariantError("cycle in the nesting graph");
    }
  }

  if (!forest.planar) {
    // Closed surface: the graph is a tree; orient each edge toward the side of
    // smaller area.
    if (n_domains > 0 && forest.edges.size() + 1 != n_domains) {
      throw InvariantError("nesting graph on a closed surface is not a tree");
    }
    std::vector<int> order{0}, parent_domain(n_domains, -1), parent_edge(n_domains, -1);
    std::vector<std::uint8_t> seen(n_domains, 0);
    if (n_domains > 0) seen[0] = 1;
    for (std::size_t i = 0; i < order.size(); ++i) {
      const int d = order[i];
      for (int c : forest.vertices[d].curves) {
        const int o = forest.curves[c].positive_domain == d ? forest.curves[c].negative_domain
                                                            : forest.curves[c].positive_domain;
        if (seen[o]) continue;
        seen[o] = 1;
        parent_domain[o] = d;
        parent_edge[o] = c;
        order.push_back(o);
      }
    }
    std::vector<double> subtree(n_domains, 0.0);
    double total = 0.0;
    for (std::size_t d = 0; d < n_domains; ++d) total += forest.vertices[d].area;
    for (std::size_t i = order.size(); i-- > 0;) {
      const int d = order[i];
      subtree[d] += forest.vertices[d].area;
      if (parent_domain[d] >= 0) subtree[parent_domain[d]] += subtree[d];
    }
    for (std::size_t d = 0; d < n_domains; ++d) {
      if (parent_edge[d] < 0) continue;
      auto& c = forest.curves[parent_edge[d]];
      const bool child_smaller = subtree[d] <= total - subtree[d];
      c.inside = child_smaller ? static_cast<int>(d) : parent_domain[d];
      c.outside = child_smaller ? parent_domain[d] : static_cast<int>(d);
    }
  }

  for (int id : forest.edges) {
    const auto& c = forest.curves[id];
    auto& inner = forest.vertices[c.inside];
    if (inner.parent_curve >= 0) throw InvariantError("domain lies inside two nodal curves");
    inner.parent_curve = id;
    forest.vertices[c.outside].child_curves.push_back(id);
  }
  for (std::size_t d = 0; d < n_domains; ++d) {
    auto& v = forest.vertices[d];
    v.connectivity = static_cast<int>(v.curves.size());
    v.interior = !v.touches_boundary;
    for (int c : v.curves) v.interior = v.interior && !forest.curves[c].clipped;
    if (v.parent_curve < 0) forest.roots.push_back(static_cast<int>(d));
    if (forest.planar && v.interior && v.parent_curve >= 0) {
      double area = forest.curves[v.parent_curve].enclosed_area;
      for (int c : v.child_curves) area -= forest.curves[c].enclosed_area;
      v.area = area;
    }
  }
  return forest;
}

NestingForest extract_forest(const SignMesh& mesh, const LabelOptions& options) {
  const DomainLabeling labeling = label_domains(mesh, options);
  return build_forest(trace_curves(mesh, labeling), labeling);
}

RootedTreeCode canonical_code(const RootedTree& tree) {
  const std::size_t n = tree.size();
  if (n == 0) throw PreconditionError("canonical_code of an empty tree");
  std::vector<std::string> code(n);
  // Iterative post-order.
  std::vector<std::pair<int, std::size_t>> stack{{tree.root, 0}};
  std::size_t visited = 0;
  while (!stack.empty()) {
    auto& [node, next_child] = stack.back();
    if (next_child < tree.children[node].size()) {
      const int child = tree.children[node][next_child++];
      stack.emplace_back(child, 0);
      continue;
    }
    std::vector<std::string> parts;
    for (int c : tree.children[node]) parts.push_back(std::move(code[c]));
    std::sort(parts.begin(), parts.end());
    std::string s = "(";
    for (auto& p : parts) s += p;
    s += ")";
    code[node] = std::move(s);
    ++visited;
    stack.pop_back();
  }
  return {std::move(code[tree.root]), static_cast<int>(visited)};
}

RootedTree parse_tree_code(const std::string& code) {
  RootedTree tree;
  std::vector<int> open;
  bool finished = false;
  for (char ch : code) {
    if (ch == ' ' || ch == '\n' || ch == '\t') continue;
    if (finished) throw ConfigError("tree code has trailing content: " + code);
    if (ch == '(') {
      const int id = static_cast<int>(tree.children.size());
      tree.children.emplace_back();
      if (!open.empty()) tree.children[open.back()].push_back(id);
      open.push_back(id);
    } else if (ch == ')') {
      if (open.empty()) throw ConfigError("unbalanced tree code: " + code);
      open.pop_back();
      finished = open.empty();
    } else {
      throw ConfigError("tree code may only contain parentheses: " + code);
    }
  }
  if (!finished) throw ConfigError("incomplete tree code: " + code);
  tree.root = 0;
  return tree;
}

bool is_countable(const NestingForest& forest, int curve_id) {
  const auto& c = forest.curves.at(curve_id);
  if (c.clipped) return false;
  std::vector<int> stack{c.inside};
  while (!stack.empty()) {
    const int d = stack.back();
    stack.pop_back();
    const auto& v = forest.vertices[d];
    if (!v.interior && forest.planar) return false;
    for (int child : v.child_curves) stack.push_back(forest.curves[child].inside);
  }
  return true;
}

std::vector<std::string> subtree_codes(const NestingForest& forest) {
  const std::size_t n = forest.domain_count();
  std::vector<int> order;
  order.reserve(n);
  for (int r : forest.roots) order.push_back(r);
  for (std::size_t i = 0; i < order.size(); ++i) {
    for (int c : forest.vertices[order[i]].child_curves) order.push_back(forest.curves[c].inside);
  }
  std::vector<std::string> code(n);
  for (std::size_t i = order.size(); i-- > 0;) {
    const int d = order[i];
    std::vector<const std::string*> parts;
    for (int c : forest.vertices[d].child_curves) parts.push_back(&code[forest.curves[c].inside]);
    std::sort(parts.begin(), parts.end(), [](const auto* a, const auto* b) { return *a < *b; });
    std::string s = "(";
    for (const auto* p : parts) s += *p;
    s += ")";
    code[d] = std::move(s);
  }
  return code;
}

RootedTreeCode tree_end(const NestingForest& forest, int curve_id) {
  if (curve_id < 0 || static_cast<std::size_t>(curve_id) >= forest.curves.size()) {
    throw PreconditionError("tree_end: curve id out of range");
  }
  if (!is_countable(forest, curve_id)) {
    throw NotCountableError("curve " + std::to_string(curve_id) + " is clipped or reaches the window boundary");
  }
  RootedTree tree;
  std::vector<std::pair<int, int>> stack{{forest.curves[curve_id].inside, -1}};
  while (!stack.empty()) {
    const auto [d, parent] = stack.back();
    stack.pop_back();
    const int id = static_cast<int>(tree.children.size());
    tree.children.emplace_back();
    if (parent >= 0) tree.children[parent].push_back(id);
    for (int c : forest.vertices[d].child_curves) stack.emplace_back(forest.curves[c].inside, id);
  }
  tree.root = 0;
  return canonical_code(tree);
}

std::string dump_forest(const NestingForest& forest) {
  std::string out;
  char line[256];
  for (std::size_t d = 0; d < forest.vertices.size(); ++d) {
    const auto& v = forest.vertices[d];
    std::snprintf(line, sizeof line, "v %zu m=%d interior=%d\n", d, v.connectivity, v.interior ? 1 : 0);
    out += line;
  }
  for (const auto& c : forest.curves) {
    std::snprintf(line, sizeof line, "e %d %d %d len=%.6f area=%.6f diam=%.6f clipped=%d\n", c.id, c.outside,
                  c.inside, c.length, c.enclosed_area, c.diameter, c.clipped ? 1 : 0);
    out += line;
  }
  return out;
}

}  // namespace nodal
