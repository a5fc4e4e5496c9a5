#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "its/types.hpp"

namespace its {

using Face = std::array<std::uint32_t, 3>;
using Triangle = std::array<Vec3, 3>;

class Bvh;

/// Indexed triangle surface. Construction validates indices, drops faces of
/// zero area (their input positions are kept in dropped_faces()) and builds
/// the bounding-volume hierarchy used by the distance and winding queries.
/// Immutable afterwards; all queries are safe for concurrent callers.
class TriangleMesh {
 public:
  TriangleMesh();
  TriangleMesh(std::vector<Vec3> vertices, std::vector<Face> faces);

  [[nodiscard]] std::span<const Vec3> vertices() const { return vertices_; }
  [[nodiscard]] std::span<const Face> faces() const { return faces_; }
  [[nodiscard]] std::size_t vertex_count() const { return vertices_.size(); }
  [[nodiscard]] std::size_t face_count() const { return faces_.size(); }
  [[nodiscard]] bool empty() const { return faces_.empty(); }

  [[nodiscard]] Triangle triangle(std::size_t f) const {
    const Face& t = faces_[f];
    return {vertices_[t[0]], vertices_[t[1]], vertices_[t[2]]};
  }
  [[nodiscard]] double face_area(std::size_t f) const;
  [[nodiscard]] double surface_area() const;
  [[nodiscard]] const Aabb& bounds() const { return bounds_; }

  /// Indices (into the face list given to the constructor) of dropped faces.
  [[nodiscard]] std::span<const std::size_t> dropped_faces() const { return dropped_; }

  [[nodiscard]] const Bvh& bvh() const { return *bvh_; }

 private:
  std::vector<Vec3> vertices_;
  std::vector<Face> faces_;
  std::vector<std::size_t> dropped_;
  Aabb bounds_;
  std::shared_ptr<const Bvh> bvh_;
};

/// Uniform scale plus translation, unit = scale * model + translate.
struct UnitTransform {
  double scale = 1.0;
  Vec3 translate = Vec3::Zero();

  [[nodiscard]] Vec3 to_unit(const Vec3& x) const { return scale * x + translate; }
  [[nodiscard]] Vec3 to_model(const Vec3& u) const { return (u - translate) / scale; }
  bool operator==(const UnitTransform&) const = default;
};

inline constexpr double kDefaultMargin = 1.0 / 16.0;

/// Reads OBJ, STL (ASCII or binary) or ASCII PLY. Polygons with more than
/// three corners are fan-triangulated; a warning is appended for each file
/// that contained them, and for every dropped zero-area face.
TriangleMesh load_mesh(const std::filesystem::path& path,
                       std::vector<std::string>* warnings = nullptr);

void save_obj(const TriangleMesh& mesh, const std::filesystem::path& path);

/// Scales the longest bounding-box axis to 1 - 2*margin and centres the
/// mesh in [0,1]^3.
std::pair<TriangleMesh, UnitTransform> normalize_to_unit(const TriangleMesh& mesh,
                                                        double margin = kDefaultMargin);

TriangleMesh apply_to_unit(const TriangleMesh& mesh, const UnitTransform& transform);
TriangleMesh apply_to_model(const TriangleMesh& mesh, const UnitTransform& transform);

/// Generalized winding number. The hierarchical version uses far-field dipole
/// terms for BVH nodes far from p; winding_number_exact sums every triangle.
double winding_number(const TriangleMesh& mesh, const Vec3& p);
double winding_number_exact(const TriangleMesh& mesh, const Vec3& p);

/// Signed solid angle of triangle (a, b, c) seen from p.
double solid_angle(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& p);

struct ClosestPoint {
  double distance = 0.0;
  Vec3 point = Vec3::Zero();
  std::uint32_t face = 0;
};

ClosestPoint closest_point_distance(const TriangleMesh& mesh, const Vec3& p);

/// Closest point on triangle (a, b, c) to p.
Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

/// Unsigned: distance to the surface. Signed: negative where the winding
/// number exceeds 1/2.
double signed_distance(const TriangleMesh& mesh, const Vec3& p, DistanceMode mode);

struct SurfaceSample {
  std::uint32_t face = 0;
  double alpha = 0.0;  ///< weight of the face's first corner
  double beta = 0.0;   ///< weight of the second corner
  Vec3 position = Vec3::Zero();
};

/// Area-weighted uniform samples; deterministic for a given seed.
std::vector<SurfaceSample> sample_surface(const TriangleMesh& mesh, std::size_t n,
                                          std::uint64_t seed);

}  // namespace its
