#include "its/svo.hpp"

#include <algorithm>
#include <cmath>

namespace its {
namespace {

constexpr double kSatEpsilon = 1e-12;

std::uint64_t spread_bits(std::uint32_t v) {
  std::uint64_t x = v & 0x1fffffu;  // 21 bits per axis
  x = (x | (x << 32)) & 0x1f00000000ffffull;
  x = (x | (x << 16)) & 0x1f0000ff0000ffull;
  x = (x | (x << 8)) & 0x100f00f00f00f00full;
  x = (x | (x << 4)) & 0x10c30c30c30c30c3ull;
  x = (x | (x << 2)) & 0x1249249249249249ull;
  return x;
}

std::uint32_t compact_bits(std::uint64_t x) {
  x &= 0x1249249249249249ull;
  x = (x ^ (x >> 2)) & 0x10c30c30c30c30c3ull;
  x = (x ^ (x >> 4)) & 0x100f00f00f00f00full;
  x = (x ^ (x >> 8)) & 0x1f0000ff0000ffull;
  x = (x ^ (x >> 16)) & 0x1f00000000ffffull;
  x = (x ^ (x >> 32)) & 0x1fffffull;
  return static_cast<std::uint32_t>(x);
}

void check_height(int height, int min_height = kMinHeight) {
  if (height < min_height || height > kMaxHeight) {
    throw Error("octree height K=" + std::to_string(height) + " outside [" +
                std::to_string(min_height) + ", " + std::to_string(kMaxHeight) + "]");
  }
}

bool separated(double p0, double p1, double p2, double radius) {
  const double lo = std::min({p0, p1, p2});
  const double hi = std::max({p0, p1, p2});
  return lo > radius + kSatEpsilon || hi < -radius - kSatEpsilon;
}

std::vector<std::uint64_t> corners_of(std::span<const std::uint64_t> cells) {
  std::vector<std::uint64_t> corners;
  corners.reserve(cells.size() * 8);
  for (auto m : cells) {
    const Lattice c = morton_decode(m);
    for (std::uint32_t dz = 0; dz < 2; ++dz)
      for (std::uint32_t dy = 0; dy < 2; ++dy)
        for (std::uint32_t dx = 0; dx < 2; ++dx)
          corners.push_back(morton_encode(c[0] + dx, c[1] + dy, c[2] + dz));
  }
  std::sort(corners.begin(), corners.end());
  corners.erase(std::unique(corners.begin(), corners.end()), corners.end());
  return corners;
}

std::vector<std::uint64_t> children_of(std::span<const std::uint64_t> parents) {
  // Parents sorted ascending => children (parent << 3 | octant) sorted too.
  std::vector<std::uint64_t> children;
  children.reserve(parents.size() * 8);
  for (auto p : parents)
    for (std::uint64_t o = 0; o < 8; ++o) children.push_back((p << 3) | o);
  return children;
}

}  // namespace

std::uint64_t morton_encode(std::uint32_t i, std::uint32_t j, std::uint32_t k) {
  return spread_bits(i) | (spread_bits(j) << 1) | (spread_bits(k) << 2);
}

Lattice morton_decode(std::uint64_t code) {
  return {compact_bits(code), compact_bits(code >> 1), compact_bits(code >> 2)};
}

CellKey make_cell_key(std::uint32_t i, std::uint32_t j, std::uint32_t k, int depth, int height) {
  if (depth < 0 || depth > height) throw Error("cell depth outside [0, K]");
  const std::uint32_t n = 1u << (height - depth);
  if (i >= n || j >= n || k >= n) {
    throw Error("lattice coordinate out of range for depth " + std::to_string(depth));
  }
  return {depth, morton_encode(i, j, k)};
}

bool triangle_box_overlap(const Vec3& box_center, const Vec3& box_half, const Triangle& tri) {
  const Vec3 v0 = tri[0] - box_center;
  const Vec3 v1 = tri[1] - box_center;
  const Vec3 v2 = tri[2] - box_center;
  const Vec3 edges[3] = {v1 - v0, v2 - v1, v0 - v2};
  const Vec3& h = box_half;

  // Cross products of triangle edges with the box axes.
  for (const Vec3& e : edges) {
    const Vec3 axes[3] = {Vec3(0.0, -e.z(), e.y()), Vec3(e.z(), 0.0, -e.x()),
                          Vec3(-e.y(), e.x(), 0.0)};
    for (const Vec3& a : axes) {
      const double radius = h.x() * std::abs(a.x()) + h.y() * std::abs(a.y()) +
                            h.z() * std::abs(a.z());
      if (separated(a.dot(v0), a.dot(v1), a.dot(v2), radius)) return false;
    }
  }
  // Box face normals.
  for (int axis = 0; axis < 3; ++axis) {
    if (separated(v0[axis], v1[axis], v2[axis], h[axis])) return false;
  }
  // Triangle plane.
  const Vec3 n = edges[0].cross(edges[1]);
  const double radius = h.x() * std::abs(n.x()) + h.y() * std::abs(n.y()) + h.z() * std::abs(n.z());
  return std::abs(n.dot(v0)) <= radius + kSatEpsilon;
}

std::vector<CellKey> voxelize(const TriangleMesh& unit_mesh, int height) {
  check_height(height);
  const auto n = static_cast<std::int64_t>(1) << height;
  const double w = std::ldexp(1.0, -height);
  const Vec3 half = Vec3::Constant(0.5 * w);
  std::vector<std::uint64_t> codes;
  for (std::size_t f = 0; f < unit_mesh.face_count(); ++f) {
    const Triangle tri = unit_mesh.triangle(f);
    Aabb box;
    for (const Vec3& v : tri) box.extend(v);
    std::array<std::int64_t, 3> lo{};
    std::array<std::int64_t, 3> hi{};
    for (int a = 0; a < 3; ++a) {
      // Closed cells [i w, (i+1) w] touching [box.lo, box.hi].
      lo[a] = std::clamp<std::int64_t>(static_cast<std::int64_t>(std::ceil(box.lo[a] / w)) - 1, 0, n - 1);
      hi[a] = std::clamp<std::int64_t>(static_cast<std::int64_t>(std::floor(box.hi[a] / w)), 0, n - 1);
    }
    for (std::int64_t k = lo[2]; k <= hi[2]; ++k)
      for (std::int64_t j = lo[1]; j <= hi[1]; ++j)
        for (std::int64_t i = lo[0]; i <= hi[0]; ++i) {
          const Vec3 center((i + 0.5) * w, (j + 0.5) * w, (k + 0.5) * w);
          if (triangle_box_overlap(center, half, tri)) {
            codes.push_back(morton_encode(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j),
                                          static_cast<std::uint32_t>(k)));
          }
        }
  }
  std::sort(codes.begin(), codes.end());
  codes.erase(std::unique(codes.begin(), codes.end()), codes.end());
  std::vector<CellKey> keys;
  keys.reserve(codes.size());
  for (auto c : codes) keys.push_back({0, c});
  return keys;
}

SparseVoxelOctree SparseVoxelOctree::build(std::span<const CellKey> leaves, int height) {
  check_height(height, 1);
  if (leaves.empty()) throw Error("cannot build an octree from an empty leaf set");
  const std::uint64_t limit = std::uint64_t{1} << (3 * height);
  std::vector<std::uint64_t> current;
  current.reserve(leaves.size());
  for (const CellKey& key : leaves) {
    if (key.depth != 0) throw Error("octree leaves must be depth-0 cells");
    if (key.morton >= limit) throw Error("leaf Morton code out of range");
    current.push_back(key.morton);
  }
  std::sort(current.begin(), current.end());
  current.erase(std::unique(current.begin(), current.end()), current.end());

  SparseVoxelOctree svo;
  svo.height_ = height;
  svo.cells_.resize(height + 1);
  svo.grid_points_.resize(height + 1);
  for (int depth = 0; depth < height; ++depth) {
    std::vector<std::uint64_t> parents;
    parents.reserve(current.size());
    for (auto m : current) parents.push_back(m >> 3);
    parents.erase(std::unique(parents.begin(), parents.end()), parents.end());
    svo.cells_[depth] = children_of(parents);
    current = std::move(parents);
  }
  svo.cells_[height] = {0};
  for (int depth = 0; depth <= height; ++depth) svo.grid_points_[depth] = corners_of(svo.cells_[depth]);
  return svo;
}

SparseVoxelOctree SparseVoxelOctree::from_grid_points(
    std::vector<std::vector<std::uint64_t>> grid_points, int height) {
  check_height(height, 1);
  if (static_cast<int>(grid_points.size()) != height + 1) {
    throw Error("grid-point table does not have K+1 depths");
  }
  SparseVoxelOctree svo;
  svo.height_ = height;
  svo.cells_.resize(height + 1);
  svo.grid_points_.resize(height + 1);
  svo.cells_[height] = {0};
  for (int depth = height - 1; depth >= 0; --depth) {
    std::vector<std::uint64_t> parents;
    const auto& points = grid_points[depth];
    for (auto parent : svo.cells_[depth + 1]) {
      const Lattice c = morton_decode(parent);
      const std::uint64_t centre = morton_encode(2 * c[0] + 1, 2 * c[1] + 1, 2 * c[2] + 1);
      if (std::binary_search(points.begin(), points.end(), centre)) parents.push_back(parent);
    }
    svo.cells_[depth] = children_of(parents);
  }
  for (int depth = 0; depth <= height; ++depth) {
    svo.grid_points_[depth] = corners_of(svo.cells_[depth]);
    if (svo.grid_points_[depth] != grid_points[depth]) {
      throw Error("grid points at depth " + std::to_string(depth) +
                  " are not the corner set of any octree");
    }
  }
  return svo;
}

double SparseVoxelOctree::cell_width(int depth) const { return std::ldexp(1.0, depth - height_); }

bool SparseVoxelOctree::has_cell(int depth, std::uint64_t morton) const {
  const auto& c = cells_[depth];
  return std::binary_search(c.begin(), c.end(), morton);
}

std::size_t SparseVoxelOctree::cell_count() const {
  std::size_t total = 0;
  for (const auto& c : cells_) total += c.size();
  return total;
}

std::size_t SparseVoxelOctree::grid_point_count() const {
  std::size_t total = 0;
  for (const auto& g : grid_points_) total += g.size();
  return total;
}

Lattice SparseVoxelOctree::containing_lattice_cell(const Vec3& p, int depth) const {
  const std::uint32_t n = resolution(depth);
  Lattice cell{};
  for (int a = 0; a < 3; ++a) {
    const double t = std::floor(p[a] * n);
    cell[a] = static_cast<std::uint32_t>(std::clamp(t, 0.0, static_cast<double>(n - 1)));
  }
  return cell;
}

std::optional<std::vector<CellKey>> SparseVoxelOctree::locate_chain(const Vec3& p) const {
  if (!inside_unit_cube(p)) return std::nullopt;
  std::vector<CellKey> chain;
  chain.reserve(height_ + 1);
  for (int depth = 0; depth <= height_; ++depth) {
    const Lattice c = containing_lattice_cell(p, depth);
    const std::uint64_t m = morton_encode(c[0], c[1], c[2]);
    if (has_cell(depth, m)) chain.push_back({depth, m});
  }
  return chain;
}

std::vector<GridPoint> collect_grid_points(const SparseVoxelOctree& svo, int depth) {
  if (depth < 0 || depth > svo.height()) throw Error("depth outside [0, K]");
  const double w = svo.cell_width(depth);
  std::vector<GridPoint> out;
  out.reserve(svo.grid_points(depth).size());
  for (auto m : svo.grid_points(depth)) {
    GridPoint g;
    g.morton = m;
    g.lattice = morton_decode(m);
    g.position = Vec3(g.lattice[0] * w, g.lattice[1] * w, g.lattice[2] * w);
    out.push_back(g);
  }
  return out;
}

}  // namespace its
