#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "its/mesh.hpp"
#include "its/types.hpp"

namespace its {

/// Binary AABB hierarchy over mesh faces. Each node also stores the
/// area-weighted normal sum and centroid of its triangles, which is the
/// first-order far-field term of the winding number.
class Bvh {
 public:
  struct Node {
    Aabb box;
    Vec3 dipole_center = Vec3::Zero();
    Vec3 area_normal = Vec3::Zero();  ///< sum of (area * unit normal)
    double radius = 0.0;              ///< max distance from dipole_center to a corner
    std::uint32_t offset = 0;  ///< first face slot (leaf) or right child; the left child is the next node
    std::uint32_t count = 0;          ///< face count for leaves, 0 for inner nodes
    [[nodiscard]] bool leaf() const { return count != 0; }
  };

  static constexpr std::uint32_t kLeafSize = 4;

  Bvh() = default;
  Bvh(std::span<const Vec3> vertices, std::span<const Face> faces);

  [[nodiscard]] std::span<const Node> nodes() const { return nodes_; }
  /// Face ids in leaf order; leaves reference ranges of this array.
  [[nodiscard]] std::span<const std::uint32_t> face_order() const { return order_; }
  [[nodiscard]] bool empty() const { return nodes_.empty(); }

 private:
  std::uint32_t build(std::span<const Vec3> vertices, std::span<const Face> faces,
                      std::uint32_t begin, std::uint32_t end,
                      const std::vector<Vec3>& centroids);

  std::vector<Node> nodes_;
  std::vector<std::uint32_t> order_;
};

}  // namespace its
