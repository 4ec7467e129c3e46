#include "nodal/sign_mesh.hpp"

#include <cmath>
#include <numbers>

#include "nodal/error.hpp"

namespace nodal {

namespace {

void break_ties(SignMesh& mesh) {
  double sum_sq = 0.0;
  for (double v : mesh.value) sum_sq += v * v;
  const double rms = mesh.value.empty() ? 0.0 : std::sqrt(sum_sq / static_cast<double>(mesh.value.size()));
  mesh.tie_epsilon = rms > 0.0 ? 1e-12 * rms : 1e-300;
  for (double& v : mesh.value) {
    if (v == 0.0) v = mesh.tie_epsilon;
  }
}

void mark_boundary(SignMesh& mesh) {
  std::vector<std::uint8_t> incidence(mesh.edges.size(), 0);
  for (const auto& f : mesh.faces) {
    for (int k = 0; k < f.size; ++k) ++incidence[f.e[k]];
  }
  mesh.boundary_edge.assign(mesh.edges.size(), 0);
  mesh.boundary_vertex.assign(mesh.vertex_count(), 0);
  for (std::size_t e = 0; e < mesh.edges.size(); ++e) {
    if (incidence[e] == 1) {
      mesh.boundary_edge[e] = 1;
      mesh.boundary_vertex[mesh.edges[e][0]] = 1;
      mesh.boundary_vertex[mesh.edges[e][1]] = 1;
    } else if (incidence[e] != 2) {
      throw InvariantError("mesh edge with incidence other than 1 or 2");
    }
  }
}

}  // namespace

SignMesh mesh_from_grid(const FieldGrid& grid) {
  const std::size_t nx = grid.spec.dims[0];
  const std::size_t ny = grid.spec.dims[1];
  if (nx < 2 || ny < 2) throw PreconditionError("planar mesh needs a 2-D grid of at least 2x2 samples");
  SignMesh mesh;
  mesh.planar = true;
  mesh.spacing = grid.spec.spacing;
  mesh.value = grid.values;
  mesh.position.resize(nx * ny);
  mesh.vertex_area.assign(nx * ny, grid.spec.spacing * grid.spec.spacing);
  for (std::size_t iy = 0; iy < ny; ++iy) {
    for (std::size_t ix = 0; ix < nx; ++ix) {
      const Vec2 p = grid.position(ix, iy);
      mesh.position[grid.index(ix, iy)] = {p[0], p[1], 0.0};
    }
  }
  // Horizontal edges first, then vertical ones.
  const std::size_t n_horizontal = (nx - 1) * ny;
  mesh.edges.resize(n_horizontal + nx * (ny - 1));
  for (std::size_t iy = 0; iy < ny; ++iy) {
    for (std::size_t ix = 0; ix + 1 < nx; ++ix) {
      mesh.edges[iy * (nx - 1) + ix] = {static_cast<int>(iy * nx + ix), static_cast<int>(iy * nx + ix + 1)};
    }
  }
  for (std::size_t iy = 0; iy + 1 < ny; ++iy) {
    for (std::size_t ix = 0; ix < nx; ++ix) {
      mesh.edges[n_horizontal + iy * nx + ix] = {static_cast<int>(iy * nx + ix),
                                                 static_cast<int>((iy + 1) * nx + ix)};
    }
  }
  mesh.faces.resize((nx - 1) * (ny - 1));
  for (std::size_t iy = 0; iy + 1 < ny; ++iy) {
    for (std::size_t ix = 0; ix + 1 < nx; ++ix) {
      MeshFace& f = mesh.faces[iy * (nx - 1) + ix];
      const int v00 = static_cast<int>(iy * nx + ix);
      const int v10 = v00 + 1;
      const int v11 = v10 + static_cast<int>(nx);
      const int v01 = v00 + static_cast<int>(nx);
      f.size = 4;
      f.v = {v00, v10, v11, v01};
      f.e = {static_cast<int>(iy * (nx - 1) + ix), static_cast<int>(n_horizontal + iy * nx + ix + 1),
             static_cast<int>((iy + 1) * (nx - 1) + ix), static_cast<int>(n_horizontal + iy * nx + ix)};
    }
  }
  break_ties(mesh);
  mark_boundary(mesh);
  return mesh;
}

SignMesh mesh_from_sphere(const SphereGrid& grid) {
  const std::size_t n_rings = grid.n_lat - 2;
  const std::size_t n_lon = grid.n_lon;
  SignMesh mesh;
  mesh.planar = false;
  const double dtheta = std::numbers::pi / static_cast<double>(grid.n_lat - 1);
  const double dphi = 2.0 * std::numbers::pi / static_cast<double>(n_lon);
  mesh.spacing = dtheta;
  // Vertex layout: ring vertices (r * n_lon + j), then north, then south.
  const int north = static_cast<int>(n_rings * n_lon);
  const int south = north + 1;
  mesh.value = grid.rings;
  mesh.value.push_back(grid.north);
  mesh.value.push_back(grid.south);
  mesh.position.resize(mesh.value.size());
  mesh.vertex_area.resize(mesh.value.size());
  for (std::size_t r = 0; r < n_rings; ++r) {
    const double theta = grid.theta(r + 1);
    const double band = 2.0 * std::sin(theta) * std::sin(0.5 * dtheta) * dphi;
    for (std::size_t j = 0; j < n_lon; ++j) {
      const double phi = grid.phi(j);
      mesh.position[r * n_lon + j] = {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi),
                                      std::cos(theta)};
      mesh.vertex_area[r * n_lon + j] = band;
    }
  }
  const double cap = 2.0 * std::numbers::pi * (1.0 - std::cos(0.5 * dtheta));
  mesh.position[north] = {0.0, 0.0, 1.0};
  mesh.position[south] = {0.0, 0.0, -1.0};
  mesh.vertex_area[north] = mesh.vertex_area[south] = cap;

  auto ring_vertex = [&](std::size_t r, std::size_t j) { return static_cast<int>(r * n_lon + (j % n_lon)); };
  // Edges: along rings, between rings, and pole spokes.
  auto along = [&](std::size_t r, std::size_t j) { return static_cast<int>(r * n_lon + j); };
  const std::size_t n_along = n_rings * n_lon;
  auto across = [&](std::size_t r, std::size_t j) { return static_cast<int>(n_along + r * n_lon + j); };
  const std::size_t n_across = (n_rings - 1) * n_lon;
  auto spoke_north = [&](std::size_t j) { return static_cast<int>(n_along + n_across + j); };
  auto spoke_south = [&](std::size_t j) { return static_cast<int>(n_along + n_across + n_lon + j); };
  mesh.edges.resize(n_along + n_across + 2 * n_lon);
  for (std::size_t r = 0; r < n_rings; ++r) {
    for (std::size_t j = 0; j < n_lon; ++j) {
      mesh.edges[along(r, j)] = {ring_vertex(r, j), ring_vertex(r, j + 1)};
      if (r + 1 < n_rings) mesh.edges[across(r, j)] = {ring_vertex(r, j), ring_vertex(r + 1, j)};
    }
  }
  for (std::size_t j = 0; j < n_lon; ++j) {
    mesh.edges[spoke_north(j)] = {north, ring_vertex(0, j)};
    mesh.edges[spoke_south(j)] = {south, ring_vertex(n_rings - 1, j)};
  }
  for (std::size_t j = 0; j < n_lon; ++j) {
    const std::size_t jn = (j + 1) % n_lon;
    MeshFace cap_n;
    cap_n.size = 3;
    cap_n.v = {north, ring_vertex(0, j), ring_vertex(0, jn), -1};
    cap_n.e = {spoke_north(j), along(0, j), spoke_north(jn), -1};
    mesh.faces.push_back(cap_n);
  }
  for (std::size_t r = 0; r + 1 < n_rings; ++r) {
    for (std::size_t j = 0; j < n_lon; ++j) {
      const std::size_t jn = (j + 1) % n_lon;
      MeshFace f;
      f.size = 4;
      f.v = {ring_vertex(r, j), ring_vertex(r + 1, j), ring_vertex(r + 1, jn), ring_vertex(r, jn)};
      f.e = {across(r, j), along(r + 1, j), across(r, jn), along(r, j)};
      mesh.faces.push_back(f);
    }
  }
  for (std::size_t j = 0; j < n_lon; ++j) {
    const std::size_t jn = (j + 1) % n_lon;
    MeshFace cap_s;
    cap_s.size = 3;
    cap_s.v = {south, ring_vertex(n_rings - 1, jn), ring_vertex(n_rings - 1, j), -1};
    cap_s.e = {spoke_south(jn), along(n_rings - 1, j), spoke_south(j), -1};
    mesh.faces.push_back(cap_s);
  }
  break_ties(mesh);
  mark_boundary(mesh);
  return mesh;
}

}  // namespace nodal
