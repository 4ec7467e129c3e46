#include "nodal/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "nodal/error.hpp"

namespace nodal {

namespace {

std::string pgm_from(std::size_t width, std::size_t height, const std::vector<double>& values, PgmMode mode,
                     auto&& index_of) {
  double scale = 0.0;
  for (double v : values) scale = std::max(scale, std::abs(v));
  std::string out = "P5\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
  out.reserve(out.size() + width * height);
  for (std::size_t row = 0; row < height; ++row) {
    for (std::size_t col = 0; col < width; ++col) {
      const double v = values[index_of(col, height - 1 - row)];
      unsigned char px;
      if (mode == PgmMode::kSign) {
        px = v > 0.0 ? 255 : 0;
      } else {
        const double t = scale > 0.0 ? 0.5 + 0.5 * v / scale : 0.5;
        px = static_cast<unsigned char>(std::lround(std::clamp(t, 0.0, 1.0) * 255.0));
      }
      out.push_back(static_cast<char>(px));
    }
  }
  return out;
}

}  // namespace

std::string pgm_image(const FieldGrid& grid, PgmMode mode) {
  const std::size_t nx = grid.spec.dims[0];
  const std::size_t ny = grid.spec.dims[1];
  return pgm_from(nx, ny, grid.values, mode, [&](std::size_t ix, std::size_t iy) { return grid.index(ix, iy); });
}

std::string pgm_image(const SphereGrid& grid, PgmMode mode) {
  // Equirectangular: row 0 is the north pole, the last row the south pole.
  std::vector<double> values(grid.n_lat * grid.n_lon);
  for (std::size_t i = 0; i < grid.n_lat; ++i) {
    for (std::size_t j = 0; j < grid.n_lon; ++j) values[(grid.n_lat - 1 - i) * grid.n_lon + j] = grid.at(i, j);
  }
  return pgm_from(grid.n_lon, grid.n_lat, values, mode,
                  [&](std::size_t col, std::size_t row) { return row * grid.n_lon + col; });
}

std::string svg_image(const NestingForest& forest, const GridSpec& spec) {
  static const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2"};
  std::vector<int> depth(forest.domain_count(), 0);
  std::vector<int> order(forest.roots.begin(), forest.roots.end());
  for (std::size_t i = 0; i < order.size(); ++i) {
    for (int c : forest.vertices[order[i]].child_curves) {
      const int inner = forest.curves[c].inside;
      depth[inner] = depth[order[i]] + 1;
      order.push_back(inner);
    }
  }
  const double width = spec.spacing * static_cast<double>(spec.dims[0] - 1);
  const double height = spec.spacing * static_cast<double>(spec.dims[1] - 1);
  const double scale = 800.0 / std::max(width, height);
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" viewBox=\"0 0 %.3f %.3f\">\n",
                width * scale, height * scale, width * scale, height * scale);
  std::string out = buf;
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (const auto& c : forest.curves) {
    if (c.polyline.empty()) continue;
    const int d = c.clipped ? 0 : depth[c.inside];
    std::snprintf(buf, sizeof buf, "<%s fill=\"none\" stroke=\"%s\" stroke-width=\"1\"%s points=\"",
                  c.clipped ? "polyline" : "polygon", kPalette[d % 7], c.clipped ? " stroke-dasharray=\"4 2\"" : "");
    out += buf;
    for (const auto& p : c.polyline) {
      std::snprintf(buf, sizeof buf, "%.2f,%.2f ", (p[0] - spec.origin[0]) * scale,
                    (height - (p[1] - spec.origin[1])) * scale);
      out += buf;
    }
    out += "\"/>\n";
  }
  out += "</svg>\n";
  return out;
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path + " for writing");
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw IoError("write failed: " + path);
}

}  // namespace nodal
