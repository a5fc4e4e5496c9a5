#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "its/mesh.hpp"
#include "its/types.hpp"

namespace its {

inline constexpr int kMinHeight = 2;
inline constexpr int kMaxHeight = 12;

using Lattice = std::array<std::uint32_t, 3>;

/// Bit-interleaved lattice code, x in bit 0, y in bit 1, z in bit 2, and so on.
std::uint64_t morton_encode(std::uint32_t i, std::uint32_t j, std::uint32_t k);
Lattice morton_decode(std::uint64_t code);

/// A cell of the octree. Depth 0 is the finest level (width 2^-K); depth K
/// is the root cell [0,1]^3.
struct CellKey {
  int depth = 0;
  std::uint64_t morton = 0;
  auto operator<=>(const CellKey&) const = default;
};

/// Checked construction: each lattice coordinate must lie in [0, 2^(K-depth)).
CellKey make_cell_key(std::uint32_t i, std::uint32_t j, std::uint32_t k, int depth, int height);

/// Closed-box separating-axis test (Akenine-Moller). Touching counts as overlap.
bool triangle_box_overlap(const Vec3& box_center, const Vec3& box_half, const Triangle& tri);

/// Depth-0 cells whose closed cube overlaps some triangle of a unit-space
/// mesh, sorted by Morton code.
std::vector<CellKey> voxelize(const TriangleMesh& unit_mesh, int height);

struct GridPoint {
  Lattice lattice{};
  Vec3 position = Vec3::Zero();
  std::uint64_t morton = 0;
};

class SparseVoxelOctree {
 public:
  SparseVoxelOctree() = default;

  /// Bottom-up construction: at each depth every present cell gets its seven
  /// siblings, their parents form the next depth, up to the root.
  static SparseVoxelOctree build(std::span<const CellKey> leaves, int height);

  /// Rebuilds an octree from per-depth grid-point Morton codes produced by
  /// build(). A depth-(k+1) cell has children at depth k exactly when the
  /// grid point at its centre exists at depth k.
  static SparseVoxelOctree from_grid_points(std::vector<std::vector<std::uint64_t>> grid_points,
                                            int height);

  [[nodiscard]] int height() const { return height_; }
  [[nodiscard]] double cell_width(int depth) const;
  [[nodiscard]] std::uint32_t resolution(int depth) const { return 1u << (height_ - depth); }

  /// Sorted Morton codes of the cells / grid points present at a depth.
  [[nodiscard]] std::span<const std::uint64_t> cells(int depth) const { return cells_[depth]; }
  [[nodiscard]] std::span<const std::uint64_t> grid_points(int depth) const {
    return grid_points_[depth];
  }
  [[nodiscard]] bool has_cell(int depth, std::uint64_t morton) const;
  [[nodiscard]] std::size_t cell_count() const;
  [[nodiscard]] std::size_t grid_point_count() const;

  /// Lattice cell at a depth containing p under half-open membership, with
  /// the upper domain face assigned to the last cell. p must lie in [0,1]^3.
  [[nodiscard]] Lattice containing_lattice_cell(const Vec3& p, int depth) const;

  /// Present cells containing p, finest first; nullopt when p is outside [0,1]^3.
  [[nodiscard]] std::optional<std::vector<CellKey>> locate_chain(const Vec3& p) const;

  bool operator==(const SparseVoxelOctree&) const = default;

 private:
  int height_ = 0;
  std::vector<std::vector<std::uint64_t>> cells_;
  std::vector<std::vector<std::uint64_t>> grid_points_;
};

/// Distinct corner points of the depth's cells, ascending Morton order.
std::vector<GridPoint> collect_grid_points(const SparseVoxelOctree& svo, int depth);

inline bool inside_unit_cube(const Vec3& p) {
  return (p.array() >= 0.0).all() && (p.array() <= 1.0).all();
}

}  // namespace its
