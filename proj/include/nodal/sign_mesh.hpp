#pragma once

// A polygonal mesh (quads and triangles) carrying sampled field values. Both
// planar grids and latitude-longitude sphere grids are converted to this form
// so one labeling / tracing implementation serves both.

#include <array>
#include <cstdint>
#include <vector>

#include "nodal/field_sampler.hpp"
#include "nodal/sphere_ensemble.hpp"

namespace nodal {

using Vec3 = std::array<double, 3>;

struct MeshFace {
  std::array<int, 4> v{-1, -1, -1, -1};  // counter-clockwise for planar meshes
  std::array<int, 4> e{-1, -1, -1, -1};  // e[k] joins v[k] and v[(k+1) % size]
  int size = 0;
};

struct SignMesh {
  std::vector<double> value;
  std::vector<Vec3> position;
  std::vector<double> vertex_area;
  std::vector<std::array<int, 2>> edges;
  std::vector<MeshFace> faces;
  std::vector<std::uint8_t> boundary_edge;    // edge with a single incident face
  std::vector<std::uint8_t> boundary_vertex;  // endpoint of a boundary edge
  bool planar = true;
  double spacing = 0.0;  // nominal sample spacing
  double tie_epsilon = 0.0;  // value added to exact zeros

  std::size_t vertex_count() const { return value.size(); }
  bool positive(int v) const { return value[v] > 0.0; }
};

/// Planar 2-D grid to mesh. Exact zeros are replaced by 1e-12 * RMS.
SignMesh mesh_from_grid(const FieldGrid& grid);

/// Sphere grid to mesh: quads between rings, triangle fans at the poles,
/// longitude wraparound. The mesh has no boundary.
SignMesh mesh_from_sphere(const SphereGrid& grid);

}  // namespace nodal
