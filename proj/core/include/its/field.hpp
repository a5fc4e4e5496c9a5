#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/SparseCore>

#include "its/mesh.hpp"
#include "its/svo.hpp"
#include "its/types.hpp"

namespace its {

/// First-degree B-spline (hat function) with support [-1, 1].
double basis_1d(double t);

/// Tensor-product hat centred at g with cell width w.
double basis_3d(const Vec3& v, const Vec3& g, double w);

/// Open-addressing map from Morton code to a dense index.
class MortonIndex {
 public:
  static constexpr std::uint32_t kMissing = 0xffffffffu;

  MortonIndex() = default;
  explicit MortonIndex(std::span<const std::uint64_t> keys);

  [[nodiscard]] std::uint32_t find(std::uint64_t key) const {
    if (slots_.empty()) return kMissing;
    std::size_t h = (key * 0x9E3779B97F4A7C15ull) >> shift_;
    for (;;) {
      const Slot& s = slots_[h];
      if (s.key == key) return s.value;
      if (s.key == kEmpty) return kMissing;
      h = (h + 1) & mask_;
    }
  }

 private:
  static constexpr std::uint64_t kEmpty = ~std::uint64_t{0};
  struct Slot {
    std::uint64_t key = kEmpty;
    std::uint32_t value = kMissing;
  };
  std::vector<Slot> slots_;
  std::size_t mask_ = 0;
  int shift_ = 64;
};

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Interpolation system A lambda = b over every grid point of every depth.
/// Rows and columns are ordered depth-major, then by Morton code;
/// A(p, q) = B_q(g_p) and b(p) is the distance from g_p to the mesh.
struct SparseSystem {
  SparseMatrix matrix;
  Eigen::VectorXd rhs;
  std::vector<std::size_t> depth_offsets;  ///< K+2 entries, row range of each depth
};

SparseMatrix assemble_matrix(const SparseVoxelOctree& svo);
SparseSystem assemble_system(const SparseVoxelOctree& svo, const TriangleMesh& unit_mesh,
                             DistanceMode mode);

struct SolveReport {
  Eigen::VectorXd solution;
  int iterations = 0;
  double normal_residual = 0.0;  ///< |A^T (A x - b)| / |A^T b|
  double residual = 0.0;         ///< |A x - b| / |b|
  bool converged = false;
};

inline constexpr double kDefaultSolverTolerance = 1e-8;

/// Jacobi-preconditioned conjugate gradient on the normal equations
/// A^T A x = A^T b (CGLS). max_iterations <= 0 selects 10 * N.
SolveReport solve_coefficients(const SparseMatrix& matrix, const Eigen::VectorXd& rhs,
                               double tolerance = kDefaultSolverTolerance,
                               int max_iterations = 0);

/// Coefficients t0..t7 of t0 + t1 x + t2 y + t3 z + t4 xy + t5 yz + t6 xz + t7 xyz
/// in cell-local coordinates.
using Trilinear = std::array<double, 8>;

/// Corner values are indexed dx + 2 dy + 4 dz.
Trilinear trilinear_from_corners(const std::array<double, 8>& corner);
/// Nested linear interpolation of corner values at a cell-local point.
double interpolate_corners(const std::array<double, 8>& corner, const Vec3& local);
double evaluate_trilinear(const Trilinear& t, const Vec3& local);

struct ShellBounds {
  double eps1 = 0.0;
  double eps2 = 0.0;
  bool operator==(const ShellBounds&) const = default;
};

/// f(v) = sum over depths k and grid points g of depth k of
/// lambda_g * B((v - g) / w_k), on the octree's grid points.
class ImplicitField {
 public:
  ImplicitField() = default;
  ImplicitField(SparseVoxelOctree svo, std::vector<double> coefficients, UnitTransform transform,
                DistanceMode mode);

  [[nodiscard]] int height() const { return svo_.height(); }
  [[nodiscard]] const SparseVoxelOctree& svo() const { return svo_; }
  [[nodiscard]] std::span<const double> coefficients() const { return coefficients_; }
  [[nodiscard]] std::optional<double> coefficient(int depth, std::uint64_t morton) const;
  [[nodiscard]] const UnitTransform& transform() const { return transform_; }
  [[nodiscard]] DistanceMode mode() const { return mode_; }

  [[nodiscard]] const std::optional<ShellBounds>& shell() const { return shell_; }
  void set_shell(ShellBounds bounds);
  void clear_shell() { shell_.reset(); }

  /// O(K): one cell lookup per depth. Zero outside [0,1]^3.
  [[nodiscard]] double evaluate(const Vec3& unit_point) const;
  [[nodiscard]] double evaluate_model(const Vec3& model_point) const {
    return evaluate(transform_.to_unit(model_point));
  }

  /// Field values at the corners of a depth-0 lattice cell, whether or not
  /// the cell is present in the octree.
  [[nodiscard]] std::array<double, 8> lattice_cell_corner_values(const Lattice& cell) const;

  /// Exact trilinear form of f inside a present depth-0 cell.
  [[nodiscard]] Trilinear cell_trilinear_coeffs(const CellKey& cell) const;

  bool operator==(const ImplicitField& other) const;

 private:
  [[nodiscard]] std::array<double, 8> corner_coefficients(int depth, const Lattice& cell) const;

  SparseVoxelOctree svo_;
  std::vector<double> coefficients_;
  UnitTransform transform_;
  DistanceMode mode_ = DistanceMode::Signed;
  std::optional<ShellBounds> shell_;

  std::vector<std::size_t> offsets_;
  std::vector<MortonIndex> grid_index_;
  // Per depth: every lattice cell with at least one grid point among its
  // corners, and those corners' coefficients. Cells not listed contribute 0.
  std::vector<MortonIndex> support_index_;
  std::vector<std::vector<std::array<double, 8>>> support_corners_;
};

/// Little-endian ITS container: "ITS1", version, K, mode, transform, shell,
/// then per depth the (Morton, coefficient) pairs in ascending Morton order.
void save_its(const ImplicitField& field, const std::filesystem::path& path);
ImplicitField load_its(const std::filesystem::path& path);

}  // namespace its
