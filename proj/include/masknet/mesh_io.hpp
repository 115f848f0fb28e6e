#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "masknet/geom.hpp"
#include "masknet/rng.hpp"

namespace masknet {

struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> faces;
};

// ASCII OFF. Polygon faces are fan-triangulated. Throws ParseError with the
// offending line number; comments (#) and blank lines are allowed.
TriMesh load_off(const std::filesystem::path& path);

// ASCII PLY with x/y/z vertex properties and an optional face element.
// Binary PLY input is reported as UnsupportedFormat.
TriMesh load_ply_ascii(const std::filesystem::path& path);

// Whitespace-separated floats, three per line.
PointCloud load_xyz(const std::filesystem::path& path);

// Dispatch on extension (.off/.ply/.xyz). UnsupportedFormat otherwise.
PointCloud load_point_cloud(const std::filesystem::path& path, Rng& rng, int sample_n = 1024);

void save_xyz(const std::filesystem::path& path, const PointCloud& cloud);
void save_ply_ascii(const std::filesystem::path& path, const PointCloud& cloud);

// Area-weighted uniform surface samples, deterministic in the rng stream.
// Raw samples: no normalization applied here.
PointCloud sample_mesh_surface(const TriMesh& mesh, int n, Rng& rng);

}  // namespace masknet
