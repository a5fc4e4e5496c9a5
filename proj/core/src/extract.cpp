#include "its/extract.hpp"

#include <map>
#include <unordered_map>

#include "its/parallel.hpp"

namespace its {
namespace {

#include "mc_tables.inc"

// Corner offsets in table order; z is up.
constexpr int kCorner[8][3] = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},
                               {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}};
constexpr int kEdgeCorners[12][2] = {{0, 1}, {1, 2}, {2, 3}, {3, 0}, {4, 5}, {5, 6},
                                     {6, 7}, {7, 4}, {0, 4}, {1, 5}, {2, 6}, {3, 7}};

}  // namespace

LevelSetMesh marching_cubes(const std::function<double(const Vec3&)>& f, double level, int resolution,
                            const Aabb& domain) {
  if (resolution < kMinExtractResolution || resolution > kMaxExtractResolution) {
    throw Error("extraction resolution must lie in [" + std::to_string(kMinExtractResolution) + ", " +
                std::to_string(kMaxExtractResolution) + "]");
  }
  LevelSetMesh out;
  out.level = level;
  const int r = resolution;
  const std::size_t side = static_cast<std::size_t>(r) + 1;
  const Vec3 step = domain.extent() / r;
  const auto point = [&](std::size_t i, std::size_t j, std::size_t k) {
    return Vec3(domain.lo.x() + static_cast<double>(i) * step.x(), domain.lo.y() + static_cast<double>(j) * step.y(),
                domain.lo.z() + static_cast<double>(k) * step.z());
  };
  const auto sample_layer = [&](std::size_t k, std::vector<double>& layer) {
    layer.resize(side * side);
    parallel_for(side, [&](std::size_t begin, std::size_t end) {
      for (std::size_t j = begin; j < end; ++j)
        for (std::size_t i = 0; i < side; ++i) layer[j * side + i] = f(point(i, j, k)) - level;
    });
  };

  std::vector<Vec3> vertices;
  std::vector<Face> faces;
  std::unordered_map<std::uint64_t, std::uint32_t> edge_vertex;
  std::vector<double> below;
  std::vector<double> above;
  sample_layer(0, below);
  for (std::size_t k = 0; k < static_cast<std::size_t>(r); ++k) {
    sample_layer(k + 1, above);
    for (std::size_t j = 0; j < static_cast<std::size_t>(r); ++j)
      for (std::size_t i = 0; i < static_cast<std::size_t>(r); ++i) {
        double v[8];
        int index = 0;
        for (int c = 0; c < 8; ++c) {
          const auto& layer = kCorner[c][2] ? above : below;
          v[c] = layer[(j + kCorner[c][1]) * side + i + kCorner[c][0]];
          if (v[c] < 0.0) index |= 1 << c;
        }
        if (kEdgeTable[index] == 0) continue;
        std::uint32_t ids[12];
        for (int e = 0; e < 12; ++e) {
          if (!(kEdgeTable[index] & (1 << e))) continue;
          const int a = kEdgeCorners[e][0];
          const int b = kEdgeCorners[e][1];
          // Key by the lower lattice endpoint and axis.
          std::size_t li = i + std::min(kCorner[a][0], kCorner[b][0]);
          std::size_t lj = j + std::min(kCorner[a][1], kCorner[b][1]);
          std::size_t lk = k + std::min(kCorner[a][2], kCorner[b][2]);
          const int axis = kCorner[a][0] != kCorner[b][0] ? 0 : (kCorner[a][1] != kCorner[b][1] ? 1 : 2);
          const std::uint64_t key = ((lk * side + lj) * side + li) * 3 + axis;
          auto [it, inserted] = edge_vertex.try_emplace(key, static_cast<std::uint32_t>(vertices.size()));
          if (inserted) {
            const Vec3 pa = point(i + kCorner[a][0], j + kCorner[a][1], k + kCorner[a][2]);
            const Vec3 pb = point(i + kCorner[b][0], j + kCorner[b][1], k + kCorner[b][2]);
            const double t = v[a] / (v[a] - v[b]);
            vertices.push_back(pa + t * (pb - pa));
          }
          ids[e] = it->second;
        }
        for (int t = 0; kTriTable[index][t] != -1; t += 3) {
          faces.push_back({ids[kTriTable[index][t]], ids[kTriTable[index][t + 2]], ids[kTriTable[index][t + 1]]});
        }
      }
    std::swap(below, above);
  }

  if (faces.empty()) {
    out.warnings.push_back("level set is empty at this resolution");
    return out;
  }
  // Corners sampled exactly at the level give coincident edge vertices.
  std::map<std::array<double, 3>, std::uint32_t> weld;
  std::vector<std::uint32_t> remap(vertices.size());
  std::vector<Vec3> welded;
  for (std::size_t v = 0; v < vertices.size(); ++v) {
    const std::array<double, 3> key{vertices[v].x(), vertices[v].y(), vertices[v].z()};
    auto [it, inserted] = weld.try_emplace(key, static_cast<std::uint32_t>(welded.size()));
    if (inserted) welded.push_back(vertices[v]);
    remap[v] = it->second;
  }
  std::vector<Face> kept;
  for (Face t : faces) {
    for (auto& x : t) x = remap[x];
    if (t[0] != t[1] && t[1] != t[2] && t[0] != t[2]) kept.push_back(t);
  }
  if (kept.empty()) {
    out.warnings.push_back("level set is empty at this resolution");
    return out;
  }
  out.mesh = TriangleMesh(std::move(welded), std::move(kept));
  return out;
}

LevelSetMesh marching_cubes(const ImplicitField& field, double level, int resolution) {
  Aabb unit;
  unit.lo = Vec3::Zero();
  unit.hi = Vec3::Ones();
  LevelSetMesh out = marching_cubes([&](const Vec3& p) { return field.evaluate(p); }, level, resolution, unit);
  if (!out.mesh.empty()) out.mesh = apply_to_model(out.mesh, field.transform());
  return out;
}

}  // namespace its
