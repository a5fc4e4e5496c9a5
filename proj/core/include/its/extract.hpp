#pragma once

#include <functional>
#include <string>
#include <vector>

#include "its/field.hpp"
#include "its/mesh.hpp"

namespace its {

struct LevelSetMesh {
  TriangleMesh mesh;
  double level = 0.0;
  std::vector<std::string> warnings;
};

inline constexpr int kMinExtractResolution = 16;
inline constexpr int kMaxExtractResolution = 512;

/// Marching cubes over resolution^3 cells spanning `domain`. Vertices on a
/// shared cell edge are created once. Triangles face increasing f.
LevelSetMesh marching_cubes(const std::function<double(const Vec3&)>& f, double level, int resolution,
                            const Aabb& domain);

/// Level set of the field sampled over the unit box, returned in model
/// coordinates.
LevelSetMesh marching_cubes(const ImplicitField& field, double level, int resolution);

}  // namespace its
