#pragma once

#include <string>

#include "nodal/field_sampler.hpp"
#include "nodal/nodal_topology.hpp"
#include "nodal/sphere_ensemble.hpp"

namespace nodal {

enum class PgmMode { kSign, kIntensity };

/// Binary PGM (P5, 8-bit). Sign mode: positive 255, negative 0. Intensity
/// mode: value scaled linearly so that -max|f| -> 0 and +max|f| -> 255. The
/// first image row is the largest y.
std::string pgm_image(const FieldGrid& grid, PgmMode mode = PgmMode::kSign);
std::string pgm_image(const SphereGrid& grid, PgmMode mode = PgmMode::kSign);

/// SVG of the traced curves of a planar forest, colored by nesting depth of
/// the inside domain; clipped curves are dashed.
std::string svg_image(const NestingForest& forest, const GridSpec& spec);

/// Writes bytes to path; throws IoError on failure.
void write_file(const std::string& path, const std::string& bytes);

}  // namespace nodal
