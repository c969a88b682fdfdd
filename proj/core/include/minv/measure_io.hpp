#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "minv/measures.hpp"

namespace minv {

// Grid text format:
//   grid d=<dim> shape=<k1,...,kd> box=<lo1,hi1;...;lod,hid>
// followed by one density value per line, row-major. Unmasked cells are
// written as 0; reading yields an all-masked grid.
void write_grid(std::ostream& os, const GridMeasure& m);
GridMeasure read_grid(std::istream& is);

// Particle CSV: optional header `x1,...,xd,w`, then one `x1,...,xd,w` row per point.
void write_particles(std::ostream& os, const ParticleMeasure& m);
ParticleMeasure read_particles(std::istream& is);

/// Writes `contents` to `path` through a temporary file and a rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

void save_grid(const std::filesystem::path& path, const GridMeasure& m);
GridMeasure load_grid(const std::filesystem::path& path);
void save_particles(const std::filesystem::path& path, const ParticleMeasure& m);
ParticleMeasure load_particles(const std::filesystem::path& path);

}  // namespace minv
