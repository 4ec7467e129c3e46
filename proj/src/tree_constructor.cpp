#include "nodal/tree_constructor.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "nodal/error.hpp"
#include "nodal/render.hpp"
#include "nodal/sign_mesh.hpp"

namespace nodal {

namespace {

Layout blank(int width, int height) {
  Layout l;
  l.width = width;
  l.height = height;
  l.open_right.assign(static_cast<std::size_t>(width * height), 0);
  l.open_up.assign(static_cast<std::size_t>(width * height), 0);
  return l;
}

void set_right(Layout& l, int x, int y) { l.open_right[static_cast<std::size_t>(y * l.width + x)] = 1; }
void set_up(Layout& l, int x, int y) { l.open_up[static_cast<std::size_t>(y * l.width + x)] = 1; }

// Copies src into dst at offset (dx, dy).
void blit(Layout& dst, const Layout& src, int dx, int dy) {
  for (int y = 0; y < src.height; ++y) {
    for (int x = 0; x < src.width; ++x) {
      if (src.right(x, y)) set_right(dst, x + dx, y + dy);
      if (src.up(x, y)) set_up(dst, x + dx, y + dy);
    }
  }
}

Layout leaf_layout() { return blank(1, 1); }

Layout pad(const Layout& l, int height) {
  if (height <= l.height) return l;
  Layout out = blank(l.width, height);
  blit(out, l, 0, 0);
  for (int x = 0; x < l.width; ++x) {
    for (int y = l.height - 1; y < height - 1; ++y) set_up(out, x, y);
  }
  return out;
}

Layout side(const Layout& a, const Layout& b, bool connect) {
  if (a.width == 0) return b;
  if (b.width == 0) return a;
  const int height = std::max(a.height, b.height);
  const Layout pa = pad(a, height);
  const Layout pb = pad(b, height);
  Layout out = blank(pa.width + pb.width, height);
  blit(out, pa, 0, 0);
  blit(out, pb, pa.width, 0);
  if (connect) set_right(out, pa.width - 1, 0);
  return out;
}

Layout hole(const Layout& inner) {
  const int w = inner.width + 2;
  const int h = inner.height + 2;
  Layout out = blank(w, h);
  if (inner.width > 0) blit(out, inner, 1, 1);
  for (int x = 0; x + 1 < w; ++x) {
    set_right(out, x, 0);
    set_right(out, x, h - 1);
  }
  for (int y = 0; y + 1 < h; ++y) {
    set_up(out, 0, y);
    set_up(out, w - 1, y);
  }
  return out;
}

std::vector<std::string> child_codes(const RootedTree& tree, int node) {
  std::vector<std::string> out;
  for (int c : tree.children[node]) {
    RootedTree sub;
    // Re-root a copy at c by walking the subtree.
    std::vector<std::pair<int, int>> stack{{c, -1}};
    while (!stack.empty()) {
      const auto [v, parent] = stack.back();
      stack.pop_back();
      const int id = static_cast<int>(sub.children.size());
      sub.children.emplace_back();
      if (parent >= 0) sub.children[parent].push_back(id);
      for (int g : tree.children[v]) stack.emplace_back(g, id);
    }
    out.push_back(canonical_code(sub).code);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::string> children_of(const std::string& code) {
  return child_codes(parse_tree_code(code), 0);
}

std::string wrap(std::vector<std::string> codes) {
  std::sort(codes.begin(), codes.end());
  std::string out = "(";
  for (const auto& c : codes) out += c;
  return out + ")";
}

Layout build(const std::string& code, int sign);

// Positive root: its negative children are rings joined into one domain.
Layout build_plus(const std::string& code) {
  const auto kids = children_of(code);
  if (kids.empty()) return leaf_layout();
  Layout out;
  for (const auto& c : kids) out = side(out, build(c, -1), true);
  return out;
}

// Negative root: a ring whose inside holds the positive children, disjoint.
Layout build_minus(const std::string& code) {
  Layout inner;
  for (const auto& g : children_of(code)) inner = side(inner, build_plus(g), false);
  return hole(inner);
}

Layout build(const std::string& code, int sign) { return sign > 0 ? build_plus(code) : build_minus(code); }

LatticeSignPattern from_layout(Layout layout, int root_sign, std::vector<std::string> roots) {
  std::map<LatticePoint, int> k;
  for (int v = 0; v < layout.height; ++v) {
    for (int u = 0; u < layout.width; ++u) {
      const int i = u - v;
      const int j = u + v;
      for (const LatticePoint c : {LatticePoint{i, j}, LatticePoint{i + 1, j}, LatticePoint{i, j + 1},
                                   LatticePoint{i + 1, j + 1}}) {
        k.emplace(c, -1);
      }
      if (u + 1 < layout.width && layout.right(u, v)) k[{i + 1, j + 1}] = 1;
      if (v + 1 < layout.height && layout.up(u, v)) k[{i, j + 1}] = 1;
    }
  }
  LatticeSignPattern p;
  p.bbox_min = k.begin()->first;
  p.bbox_max = k.begin()->first;
  for (const auto& [pt, e] : k) {
    p.points.push_back(pt);
    p.eta.push_back(e);
    p.bbox_min = {std::min(p.bbox_min[0], pt[0]), std::min(p.bbox_min[1], pt[1])};
    p.bbox_max = {std::max(p.bbox_max[0], pt[0]), std::max(p.bbox_max[1], pt[1])};
  }
  p.root_sign = root_sign;
  p.root_codes = std::move(roots);
  p.layout = std::move(layout);
  return p;
}

// Feature row of point x: cos and sin of k0 <x, theta_w>.
Eigen::MatrixXd features(const LatticeSignPattern& p, const std::vector<double>& theta) {
  const auto n = static_cast<Eigen::Index>(p.size());
  const auto w = static_cast<Eigen::Index>(theta.size());
  Eigen::MatrixXd f(n, 2 * w);
  for (Eigen::Index r = 0; r < n; ++r) {
    const double x = p.points[static_cast<std::size_t>(r)][0];
    const double y = p.points[static_cast<std::size_t>(r)][1];
    for (Eigen::Index k = 0; k < w; ++k) {
      const double t = theta[static_cast<std::size_t>(k)];
      const double a = kCheckerboardWavenumber * (x * std::cos(t) + y * std::sin(t));
      f(r, k) = std::cos(a);
      f(r, w + k) = std::sin(a);
    }
  }
  return f;
}

std::vector<double> equispaced(std::size_t count) {
  std::vector<double> theta(count);
  for (std::size_t k = 0; k < count; ++k) {
    theta[k] = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(count);
  }
  return theta;
}

MonochromaticFit fit_from_coefficients(const LatticeSignPattern& p, const std::vector<double>& theta,
                                       const Eigen::VectorXd& coef, const Eigen::MatrixXd& f) {
  MonochromaticFit fit;
  const std::size_t w = theta.size();
  fit.directions = theta;
  fit.amplitudes.resize(w);
  fit.phases.resize(w);
  for (std::size_t k = 0; k < w; ++k) {
    const double c = coef(static_cast<Eigen::Index>(k));
    const double s = coef(static_cast<Eigen::Index>(w + k));
    fit.amplitudes[k] = std::hypot(c, s);
    fit.phases[k] = -std::atan2(s, c);
  }
  const Eigen::VectorXd values = f * coef;
  fit.residual = 0.0;
  fit.margin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double v = values(static_cast<Eigen::Index>(i));
    fit.residual = std::max(fit.residual, std::abs(v - p.eta[i]));
    fit.margin = std::min(fit.margin, p.eta[i] * v);
  }
  fit.norm = coef.norm();
  return fit;
}

// min 1/2 l^T G l - 1^T l subject to l >= 0, by an active-set method.
Eigen::VectorXd nonnegative_qp(const Eigen::MatrixXd& g) {
  const Eigen::Index n = g.rows();
  Eigen::VectorXd lambda = Eigen::VectorXd::Zero(n);
  std::vector<char> active(static_cast<std::size_t>(n), 0);
  const double scale = g.diagonal().maxCoeff();
  const double tol = 1e-10;
  const double ridge = 1e-12 * scale;
  auto solve_passive = [&](Eigen::VectorXd& z) {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (active[static_cast<std::size_t>(i)]) idx.push_back(i);
    }
    const auto m = static_cast<Eigen::Index>(idx.size());
    Eigen::MatrixXd sub(m, m);
    for (Eigen::Index a = 0; a < m; ++a) {
      for (Eigen::Index b = 0; b < m; ++b) sub(a, b) = g(idx[a], idx[b]);
      sub(a, a) += ridge;
    }
    const Eigen::VectorXd sol = sub.ldlt().solve(Eigen::VectorXd::Ones(m));
    z.setZero(n);
    for (Eigen::Index a = 0; a < m; ++a) z(idx[a]) = sol(a);
  };
  for (int outer = 0; outer < 10 * n + 10; ++outer) {
    const Eigen::VectorXd grad = Eigen::VectorXd::Ones(n) - g * lambda;
    Eigen::Index best = -1;
    double best_value = tol;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!active[static_cast<std::size_t>(i)] && grad(i) > best_value) {
        best_value = grad(i);
        best = i;
      }
    }
    if (best < 0) return lambda;
    active[static_cast<std::size_t>(best)] = 1;
    for (int inner = 0; inner <= n; ++inner) {
      Eigen::VectorXd z;
      solve_passive(z);
      bool feasible = true;
      double step = 1.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (active[static_cast<std::size_t>(i)] && z(i) <= 0.0) {
          feasible = false;
          step = std::min(step, lambda(i) / (lambda(i) - z(i)));
        }
      }
      if (feasible) {
        lambda = z;
        break;
      }
      lambda += step * (z - lambda);
      for (Eigen::Index i = 0; i < n; ++i) {
        if (active[static_cast<std::size_t>(i)] && lambda(i) <= 1e-14) {
          active[static_cast<std::size_t>(i)] = 0;
          lambda(i) = 0.0;
        }
      }
    }
  }
  throw NumericalError("sign-margin fit did not converge");
}

std::string format_epsilon(double e) {
  std::ostringstream s;
  s << e;
  return s.str();
}

}  // namespace

LatticePoint LatticeSignPattern::root_square() const {
  if (root_codes.size() != 1) throw PreconditionError("root_square needs a single-root pattern");
  // Vertex (0,0) lies in the positive root; the negative root is the square
  // just inside the ring corner at (0,0).
  return root_sign > 0 ? LatticePoint{0, 0} : LatticePoint{0, 1};
}

LatticeSignPattern trivial_pattern() { return from_layout(leaf_layout(), 1, {"()"}); }

LatticeSignPattern grow_chain(int k) {
  if (k < 1) throw PreconditionError("grow_chain requires k >= 1");
  LatticeSignPattern p = trivial_pattern();
  for (int i = 1; i < k; ++i) p = engulf(p);
  return p;
}

LatticeSignPattern engulf(const LatticeSignPattern& pattern) {
  if (pattern.root_codes.empty() || pattern.layout.width == 0) {
    throw PreconditionError("engulf needs a nonempty pattern");
  }
  const std::string root = wrap(pattern.root_codes);
  if (pattern.root_sign > 0) return from_layout(hole(pattern.layout), -1, {root});
  return from_layout(pattern.layout, 1, {root});
}

LatticeSignPattern join(const LatticeSignPattern& a, const LatticeSignPattern& b) {
  Layout right = b.layout;
  if (b.root_sign != a.root_sign) {
    right = Layout{};
    for (const auto& code : b.root_codes) right = side(right, build(code, a.root_sign), a.root_sign < 0);
  }
  const Layout joined = side(a.layout, right, a.root_sign < 0);
  if (joined.width != a.layout.width + right.width) throw InvariantError("join placement overlaps");
  std::vector<std::string> roots = a.root_codes;
  roots.insert(roots.end(), b.root_codes.begin(), b.root_codes.end());
  return from_layout(joined, a.root_sign, std::move(roots));
}

LatticeSignPattern pattern_for_tree(const std::string& code) {
  const auto kids = children_of(code);
  if (kids.empty()) return trivial_pattern();
  LatticeSignPattern joined = pattern_for_tree(kids.front());
  for (std::size_t i = 1; i < kids.size(); ++i) joined = join(joined, pattern_for_tree(kids[i]));
  return engulf(joined);
}

LatticeSignPattern layout_tree(const std::string& code, int root_sign) {
  const std::string canonical = canonical_code(parse_tree_code(code)).code;
  return from_layout(build(canonical, root_sign), root_sign > 0 ? 1 : -1, {canonical});
}

double checkerboard(Vec2 x) {
  return std::sin(std::numbers::pi * x[0]) * std::sin(std::numbers::pi * x[1]);
}

double MonochromaticFit::evaluate(Vec2 x) const {
  double sum = 0.0;
  for (std::size_t k = 0; k < directions.size(); ++k) {
    const double t = directions[k];
    sum += amplitudes[k] * std::cos(wavenumber * (x[0] * std::cos(t) + x[1] * std::sin(t)) + phases[k]);
  }
  return sum;
}

PlaneWaveSet MonochromaticFit::as_waves() const {
  PlaneWaveSet w;
  w.dim = 2;
  w.amplitude = 1.0;
  for (std::size_t k = 0; k < directions.size(); ++k) {
    w.wavevectors.push_back({wavenumber * std::cos(directions[k]), wavenumber * std::sin(directions[k])});
    w.phases.push_back(phases[k]);
    w.weights.push_back(amplitudes[k]);
  }
  return w;
}

MonochromaticFit fit_monochromatic(const LatticeSignPattern& pattern, const FitOptions& options) {
  if (pattern.size() == 0) throw PreconditionError("fit_monochromatic needs at least one point");
  const std::size_t n = pattern.size();
  Eigen::VectorXd eta(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) eta(static_cast<Eigen::Index>(i)) = pattern.eta[i];
  double residual = 0.0, condition = 0.0;
  std::size_t directions = 0;
  for (int factor = std::max(1, options.direction_factor); factor <= options.max_direction_factor; factor *= 2) {
    directions = static_cast<std::size_t>(factor) * n;
    const auto theta = equispaced(directions);
    const Eigen::MatrixXd f = features(pattern, theta);
    Eigen::BDCSVD<Eigen::MatrixXd> svd(f, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    condition = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1) : std::numeric_limits<double>::infinity();
    // Minimal-norm solution using every nonzero singular value.
    Eigen::VectorXd ut = svd.matrixU().transpose() * eta;
    for (Eigen::Index i = 0; i < ut.size(); ++i) ut(i) = sv(i) > 0.0 ? ut(i) / sv(i) : 0.0;
    const Eigen::VectorXd coef = svd.matrixV() * ut;
    MonochromaticFit fit = fit_from_coefficients(pattern, theta, coef, f);
    fit.condition_number = condition;
    residual = fit.residual;
    if (residual < options.tolerance) return fit;
  }
  std::ostringstream msg;
  msg << "monochromatic interpolation of " << n << " points failed: residual " << residual << " with "
      << directions << " directions, condition number " << condition;
  throw NumericalError(msg.str());
}

MonochromaticFit fit_sign_margin(const LatticeSignPattern& pattern, int direction_factor) {
  if (pattern.size() == 0) throw PreconditionError("fit_sign_margin needs at least one point");
  const std::size_t n = pattern.size();
  const auto theta = equispaced(static_cast<std::size_t>(std::max(1, direction_factor)) * n);
  const Eigen::MatrixXd f = features(pattern, theta);
  Eigen::MatrixXd signed_f = f;
  for (std::size_t i = 0; i < n; ++i) signed_f.row(static_cast<Eigen::Index>(i)) *= pattern.eta[i];
  const Eigen::MatrixXd g = signed_f * signed_f.transpose();
  const Eigen::VectorXd lambda = nonnegative_qp(g);
  const Eigen::VectorXd coef = signed_f.transpose() * lambda;
  MonochromaticFit fit = fit_from_coefficients(pattern, theta, coef, f);
  if (fit.margin < 1.0 - 1e-6) {
    throw NumericalError("sign-margin fit violates the margin: " + std::to_string(fit.margin));
  }
  return fit;
}

Realization realize_pattern(const LatticeSignPattern& pattern, const std::string& target,
                            const RealizeOptions& options) {
  const LatticePoint root = pattern.root_square();
  for (double e : options.epsilons) {
    if (!(e > 0.0)) throw PreconditionError("epsilon must be positive; the unperturbed checkerboard is degenerate");
  }
  Realization out;
  out.target = canonical_code(parse_tree_code(target)).code;
  out.pattern = pattern;
  out.fit = fit_sign_margin(pattern);

  const double h = options.spacing;
  const double x0 = pattern.bbox_min[0] - options.margin;
  const double y0 = pattern.bbox_min[1] - options.margin;
  const double x1 = pattern.bbox_max[0] + options.margin;
  const double y1 = pattern.bbox_max[1] + options.margin;
  GridSpec spec;
  spec.spacing = h;
  // Samples at cell centres so lattice points are never sampled.
  spec.origin = {x0 + 0.5 * h, y0 + 0.5 * h};
  spec.dims = {static_cast<std::size_t>(std::floor((x1 - x0) / h)),
               static_cast<std::size_t>(std::floor((y1 - y0) / h))};
  const FieldGrid psi = eval_field(out.fit.as_waves(), spec, false);
  std::vector<double> phi(spec.size());
  for (std::size_t iy = 0; iy < spec.dims[1]; ++iy) {
    for (std::size_t ix = 0; ix < spec.dims[0]; ++ix) phi[psi.index(ix, iy)] = checkerboard(psi.position(ix, iy));
  }
  const auto root_ix = static_cast<std::size_t>(std::floor((root[0] + 0.5 - spec.origin[0]) / h));
  const auto root_iy = static_cast<std::size_t>(std::floor((root[1] + 0.5 - spec.origin[1]) / h));
  LabelOptions label;
  label.wavenumber = kCheckerboardWavenumber;

  for (double eps : options.epsilons) {
    RealizationStep step;
    step.epsilon = eps;
    FieldGrid grid = psi;
    for (std::size_t i = 0; i < grid.values.size(); ++i) grid.values[i] = phi[i] + eps * psi.values[i];
    step.signs_ok = true;
    for (std::size_t i = 0; i < pattern.size(); ++i) {
      const Vec2 k{static_cast<double>(pattern.points[i][0]), static_cast<double>(pattern.points[i][1])};
      const double v = checkerboard(k) + eps * out.fit.evaluate(k);
      step.signs_ok = step.signs_ok && (v > 0.0) == (pattern.eta[i] > 0);
    }
    try {
      const SignMesh mesh = mesh_from_grid(grid);
      const DomainLabeling labeling = label_domains(mesh, label);
      const NestingForest forest = build_forest(trace_curves(mesh, labeling), labeling);
      const int domain = labeling.component_id[grid.index(root_ix, root_iy)];
      const int parent = forest.vertices[domain].parent_curve;
      if (parent < 0) throw InvariantError("root domain has no enclosing curve");
      step.code = tree_end(forest, parent).code;
      step.match = step.code == out.target;
    } catch (const Error& e) {
      step.error = e.what();
    }
    if (!step.match && !options.dump_dir.empty()) {
      write_file(options.dump_dir + "/realize_" + format_epsilon(eps) + ".pgm", pgm_image(grid));
    }
    const bool first_match = step.match && !out.matched;
    if (first_match) {
      out.matched = true;
      out.epsilon = eps;
    }
    if (first_match || (!out.matched && eps == options.epsilons.back())) out.grid = std::move(grid);
    out.sweep.push_back(std::move(step));
  }
  return out;
}

Realization realize_and_verify(const std::string& code, const RealizeOptions& options) {
  return realize_pattern(pattern_for_tree(code), code, options);
}

std::vector<double> dyadic_epsilons(double start, int steps) {
  std::vector<double> out{start};
  for (int i = 0; i < steps; ++i) out.push_back(out.back() / 2.0);
  return out;
}

std::vector<std::string> all_rooted_trees(int n) {
  if (n < 1) return {};
  std::set<std::string> current{"()"};
  for (int size = 2; size <= n; ++size) {
    std::set<std::string> next;
    for (const auto& code : current) {
      const RootedTree tree = parse_tree_code(code);
      for (std::size_t v = 0; v < tree.size(); ++v) {
        RootedTree grown = tree;
        grown.children[v].push_back(static_cast<int>(grown.children.size()));
        grown.children.emplace_back();
        next.insert(canonical_code(grown).code);
      }
    }
    current = std::move(next);
  }
  return {current.begin(), current.end()};
}

}  // namespace nodal
