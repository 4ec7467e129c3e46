#pragma once

// Nodal domains, nodal curves and the nesting forest of a sampled field.
//
// Domains are connected components of same-sign mesh vertices under edge
// adjacency; in a quad whose corners alternate in sign the diagonal pair
// matching the sign of the bilinear centre value (the corner mean) is joined
// as well. Curves are marching-squares/triangles polylines through linearly
// interpolated edge crossings, paired within saddle quads consistently with
// the labeling, so every curve separates exactly two domains.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nodal/field_sampler.hpp"
#include "nodal/sign_mesh.hpp"

namespace nodal {

struct DomainLabeling {
  std::vector<int> component_id;  // per mesh vertex
  int domain_count = 0;
  std::vector<std::int8_t> domain_sign;           // +1 / -1
  std::vector<std::uint8_t> touches_boundary;     // per domain
  std::vector<double> domain_area;                // sum of vertex areas
  std::vector<std::size_t> domain_vertex_count;
};

struct LabelOptions {
  double wavenumber = 1.0;     // resolution check: spacing <= pi / (4 * wavenumber)
  bool allow_coarse = false;
};

/// Labels nodal domains. Throws PreconditionError when the spacing resolves
/// fewer than 8 samples per wavelength unless `allow_coarse` is set.
DomainLabeling label_domains(const SignMesh& mesh, const LabelOptions& options = {});

struct NodalCurve {
  int id = -1;
  std::vector<Vec2> polyline;  // planar meshes only; closed curves do not repeat the first point
  int outside = -1;            // for clipped curves: the negative-side domain
  int inside = -1;             // for clipped curves: the positive-side domain
  int positive_domain = -1;
  int negative_domain = -1;
  bool clipped = false;
  double length = 0.0;
  double enclosed_area = 0.0;  // planar, non-clipped only
  double diameter = 0.0;       // planar only
  Vec2 bbox_min{0.0, 0.0};
  Vec2 bbox_max{0.0, 0.0};
  std::vector<Vec2> hull;      // convex hull of the polyline (planar)
};

std::vector<NodalCurve> trace_curves(const SignMesh& mesh, const DomainLabeling& labeling);

struct ForestVertex {
  int sign = 0;
  int connectivity = 0;          // m(omega): number of adjacent curves, clipped or not
  bool touches_boundary = false;
  bool interior = false;         // all adjacent curves closed and no boundary contact
  double area = 0.0;
  int parent_curve = -1;         // curve with this domain inside
  std::vector<int> child_curves;
  std::vector<int> curves;       // every adjacent curve
};

struct NestingForest {
  std::vector<ForestVertex> vertices;
  std::vector<NodalCurve> curves;
  std::vector<int> edges;  // ids of non-clipped curves
  std::vector<int> roots;  // domains with no parent curve
  bool boundary_free = false;
  bool planar = true;

  std::size_t domain_count() const { return vertices.size(); }
  /// Domain at the far side of curve c from domain d.
  int other_side(int curve, int domain) const;
};

/// Builds the forest; verifies acyclicity and the curve/edge bijection. On
/// boundary-free (sphere) meshes the inside of each curve is the side of
/// smaller area.
NestingForest build_forest(std::vector<NodalCurve> curves, const DomainLabeling& labeling);

/// Convenience: label, trace, build.
NestingForest extract_forest(const SignMesh& mesh, const LabelOptions& options = {});

struct RootedTree {
  int root = 0;
  std::vector<std::vector<int>> children;

  std::size_t size() const { return children.size(); }
};

struct RootedTreeCode {
  std::string code;
  int vertex_count = 0;

  friend bool operator==(const RootedTreeCode&, const RootedTreeCode&) = default;
};

/// AHU canonical form: leaf -> "()", node -> "(" + sorted child codes + ")".
RootedTreeCode canonical_code(const RootedTree& tree);

/// Parses a parenthesis code back into a tree (children in code order).
RootedTree parse_tree_code(const std::string& code);

/// True when the curve is closed and everything inside it is interior.
bool is_countable(const NestingForest& forest, int curve_id);

/// Canonical code of the domains inside `curve_id`, rooted at the domain
/// immediately inside. Throws NotCountableError for clipped curves.
RootedTreeCode tree_end(const NestingForest& forest, int curve_id);

/// Canonical codes of every domain's subtree (children = domains inside its
/// child curves), computed bottom-up in one pass.
std::vector<std::string> subtree_codes(const NestingForest& forest);

/// Line-oriented text dump:
///   v <id> m=<conn> interior=<0|1>
///   e <curve_id> <out_id> <in_id> len=<..> area=<..> diam=<..> clipped=<0|1>
std::string dump_forest(const NestingForest& forest);

}  // namespace nodal
