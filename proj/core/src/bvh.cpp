#include "its/bvh.hpp"

#include <algorithm>
#include <numeric>

namespace its {

Bvh::Bvh(std::span<const Vec3> vertices, std::span<const Face> faces) {
  if (faces.empty()) return;
  order_.resize(faces.size());
  std::iota(order_.begin(), order_.end(), 0u);
  std::vector<Vec3> centroids(faces.size());
  for (std::size_t f = 0; f < faces.size(); ++f) {
    centroids[f] = (vertices[faces[f][0]] + vertices[faces[f][1]] + vertices[faces[f][2]]) / 3.0;
  }
  nodes_.reserve(2 * faces.size() / kLeafSize + 1);
  build(vertices, faces, 0, static_cast<std::uint32_t>(faces.size()), centroids);
}

std::uint32_t Bvh::build(std::span<const Vec3> vertices, std::span<const Face> faces,
                         std::uint32_t begin, std::uint32_t end,
                         const std::vector<Vec3>& centroids) {
  const auto index = static_cast<std::uint32_t>(nodes_.size());
  nodes_.emplace_back();

  Node node;
  double area_sum = 0.0;
  Vec3 weighted_center = Vec3::Zero();
  Aabb centroid_box;
  for (std::uint32_t i = begin; i < end; ++i) {
    const Face& t = faces[order_[i]];
    const Vec3& a = vertices[t[0]];
    const Vec3& b = vertices[t[1]];
    const Vec3& c = vertices[t[2]];
    node.box.extend(a);
    node.box.extend(b);
    node.box.extend(c);
    const Vec3 n2 = (b - a).cross(c - a);  // twice the area times the unit normal
    const double area = 0.5 * n2.norm();
    node.area_normal += 0.5 * n2;
    area_sum += area;
    weighted_center += area * centroids[order_[i]];
    centroid_box.extend(centroids[order_[i]]);
  }
  node.dipole_center = area_sum > 0.0 ? Vec3(weighted_center / area_sum) : node.box.center();
  for (std::uint32_t i = begin; i < end; ++i) {
    for (auto v : faces[order_[i]]) {
      node.radius = std::max(node.radius, (vertices[v] - node.dipole_center).norm());
    }
  }

  if (end - begin <= kLeafSize) {
    node.offset = begin;
    node.count = end - begin;
    nodes_[index] = node;
    return index;
  }

  int axis = 0;
  centroid_box.extent().maxCoeff(&axis);
  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t l, std::uint32_t r) {
                     if (centroids[l][axis] != centroids[r][axis]) {
                       return centroids[l][axis] < centroids[r][axis];
                     }
                     return l < r;
                   });
  build(vertices, faces, begin, mid, centroids);
  node.offset = build(vertices, faces, mid, end, centroids);
  node.count = 0;
  nodes_[index] = node;
  return index;
}

}  // namespace its
