#include "its/field.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include "its/parallel.hpp"

namespace its {

double basis_1d(double t) {
  if (t >= -1.0 && t <= 0.0) return 1.0 + t;
  if (t > 0.0 && t <= 1.0) return 1.0 - t;
  return 0.0;
}

double basis_3d(const Vec3& v, const Vec3& g, double w) {
  return basis_1d((v.x() - g.x()) / w) * basis_1d((v.y() - g.y()) / w) *
         basis_1d((v.z() - g.z()) / w);
}

MortonIndex::MortonIndex(std::span<const std::uint64_t> keys) {
  if (keys.empty()) return;
  const std::size_t capacity = std::bit_ceil(std::max<std::size_t>(16, keys.size() * 2));
  slots_.assign(capacity, Slot{});
  mask_ = capacity - 1;
  shift_ = 64 - std::countr_zero(capacity);
  for (std::size_t i = 0; i < keys.size(); ++i) {
    std::size_t h = (keys[i] * 0x9E3779B97F4A7C15ull) >> shift_;
    while (slots_[h].key != kEmpty) h = (h + 1) & mask_;
    slots_[h] = {keys[i], static_cast<std::uint32_t>(i)};
  }
}

SparseMatrix assemble_matrix(const SparseVoxelOctree& svo) {
  const int height = svo.height();
  std::vector<std::size_t> offsets(height + 2, 0);
  std::vector<MortonIndex> index;
  for (int d = 0; d <= height; ++d) {
    offsets[d + 1] = offsets[d] + svo.grid_points(d).size();
    index.emplace_back(svo.grid_points(d));
  }
  const std::size_t n = offsets[height + 1];

  // Visits the nonzeros of one row in arbitrary column order.
  const auto visit_row = [&](std::size_t row, auto&& emit) {
    const int dp = static_cast<int>(std::upper_bound(offsets.begin(), offsets.end(), row) - offsets.begin()) - 1;
    const Lattice lp = morton_decode(svo.grid_points(dp)[row - offsets[dp]]);
    const double wp = svo.cell_width(dp);
    const Vec3 gp(lp[0] * wp, lp[1] * wp, lp[2] * wp);
    emit(static_cast<std::uint32_t>(row), 1.0);
    // Finer depths: only a coincident grid point has a nonzero basis here.
    for (int dq = dp - 1; dq >= 0; --dq) {
      const std::uint32_t s = 1u << (dp - dq);
      const std::uint32_t hit = index[dq].find(morton_encode(lp[0] * s, lp[1] * s, lp[2] * s));
      if (hit != MortonIndex::kMissing) emit(static_cast<std::uint32_t>(offsets[dq] + hit), 1.0);
    }
    // Coarser depths: corners of the coarse cell(s) around g_p.
    for (int dq = dp + 1; dq <= height; ++dq) {
      const std::uint32_t s = 1u << (dq - dp);
      const double wq = svo.cell_width(dq);
      std::array<std::uint32_t, 3> lo{};
      std::array<std::uint32_t, 3> span{};
      for (int a = 0; a < 3; ++a) {
        lo[a] = lp[a] / s;
        span[a] = (lp[a] % s == 0) ? 1 : 2;
      }
      for (std::uint32_t dz = 0; dz < span[2]; ++dz)
        for (std::uint32_t dy = 0; dy < span[1]; ++dy)
          for (std::uint32_t dx = 0; dx < span[0]; ++dx) {
            const Lattice lq{lo[0] + dx, lo[1] + dy, lo[2] + dz};
            const std::uint32_t hit = index[dq].find(morton_encode(lq[0], lq[1], lq[2]));
            if (hit == MortonIndex::kMissing) continue;
            const double value = basis_3d(gp, Vec3(lq[0] * wq, lq[1] * wq, lq[2] * wq), wq);
            if (value != 0.0) emit(static_cast<std::uint32_t>(offsets[dq] + hit), value);
          }
    }
  };

  SparseMatrix matrix(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  matrix.makeCompressed();
  std::vector<std::size_t> counts(n + 1, 0);
  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    for (std::size_t row = begin; row < end; ++row) {
      std::size_t c = 0;
      visit_row(row, [&](std::uint32_t, double) { ++c; });
      counts[row + 1] = c;
    }
  });
  for (std::size_t r = 0; r < n; ++r) counts[r + 1] += counts[r];
  if (counts[n] > static_cast<std::size_t>(std::numeric_limits<SparseMatrix::StorageIndex>::max())) {
    throw Error("interpolation matrix too large");
  }
  matrix.resizeNonZeros(static_cast<Eigen::Index>(counts[n]));
  auto* outer = matrix.outerIndexPtr();
  auto* inner = matrix.innerIndexPtr();
  double* values = matrix.valuePtr();
  for (std::size_t r = 0; r <= n; ++r) outer[r] = static_cast<SparseMatrix::StorageIndex>(counts[r]);
  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    std::vector<std::pair<std::uint32_t, double>> buf;
    for (std::size_t row = begin; row < end; ++row) {
      buf.clear();
      visit_row(row, [&](std::uint32_t col, double v) { buf.emplace_back(col, v); });
      std::sort(buf.begin(), buf.end());
      std::size_t k = counts[row];
      for (const auto& [col, v] : buf) {
        inner[k] = static_cast<SparseMatrix::StorageIndex>(col);
        values[k++] = v;
      }
    }
  });
  return matrix;
}

SparseSystem assemble_system(const SparseVoxelOctree& svo, const TriangleMesh& unit_mesh,
                             DistanceMode mode) {
  SparseSystem system;
  SparseMatrix matrix = assemble_matrix(svo);
  system.matrix.swap(matrix);
  const int height = svo.height();
  system.depth_offsets.assign(height + 2, 0);
  for (int d = 0; d <= height; ++d) {
    system.depth_offsets[d + 1] = system.depth_offsets[d] + svo.grid_points(d).size();
  }
  const std::size_t n = system.depth_offsets.back();
  system.rhs.resize(static_cast<Eigen::Index>(n));
  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    for (std::size_t row = begin; row < end; ++row) {
      const int d = static_cast<int>(std::upper_bound(system.depth_offsets.begin(),
                                                      system.depth_offsets.end(), row) -
                                     system.depth_offsets.begin()) - 1;
      const Lattice l = morton_decode(svo.grid_points(d)[row - system.depth_offsets[d]]);
      const double w = svo.cell_width(d);
      system.rhs[static_cast<Eigen::Index>(row)] =
          signed_distance(unit_mesh, Vec3(l[0] * w, l[1] * w, l[2] * w), mode);
    }
  });
  return system;
}

Trilinear trilinear_from_corners(const std::array<double, 8>& c) {
  return {c[0],
          c[1] - c[0],
          c[2] - c[0],
          c[4] - c[0],
          c[3] - c[1] - c[2] + c[0],
          c[6] - c[2] - c[4] + c[0],
          c[5] - c[1] - c[4] + c[0],
          c[7] - c[3] - c[5] - c[6] + c[1] + c[2] + c[4] - c[0]};
}

double evaluate_trilinear(const Trilinear& t, const Vec3& l) {
  const double x = l.x();
  const double y = l.y();
  const double z = l.z();
  return t[0] + t[1] * x + t[2] * y + t[3] * z + t[4] * x * y + t[5] * y * z + t[6] * x * z +
         t[7] * x * y * z;
}

namespace {

inline double interpolate(const std::array<double, 8>& c, double x, double y, double z) {
  const double c00 = c[0] + (c[1] - c[0]) * x;
  const double c10 = c[2] + (c[3] - c[2]) * x;
  const double c01 = c[4] + (c[5] - c[4]) * x;
  const double c11 = c[6] + (c[7] - c[6]) * x;
  const double c0 = c00 + (c10 - c00) * y;
  const double c1 = c01 + (c11 - c01) * y;
  return c0 + (c1 - c0) * z;
}

}  // namespace

double interpolate_corners(const std::array<double, 8>& corner, const Vec3& local) {
  return interpolate(corner, local.x(), local.y(), local.z());
}

ImplicitField::ImplicitField(SparseVoxelOctree svo, std::vector<double> coefficients,
                             UnitTransform transform, DistanceMode mode)
    : svo_(std::move(svo)),
      coefficients_(std::move(coefficients)),
      transform_(transform),
      mode_(mode) {
  const int height = svo_.height();
  if (coefficients_.size() != svo_.grid_point_count()) {
    throw Error("coefficient count " + std::to_string(coefficients_.size()) +
                " does not match grid-point count " + std::to_string(svo_.grid_point_count()));
  }
  offsets_.assign(height + 2, 0);
  for (int d = 0; d <= height; ++d) {
    offsets_[d + 1] = offsets_[d] + svo_.grid_points(d).size();
    grid_index_.emplace_back(svo_.grid_points(d));
  }
  for (int d = 0; d <= height; ++d) {
    const std::uint32_t n = svo_.resolution(d);
    std::vector<std::uint64_t> support;
    support.reserve(8 * svo_.grid_points(d).size());
    for (auto g : svo_.grid_points(d)) {
      const Lattice l = morton_decode(g);
      for (int corner = 0; corner < 8; ++corner) {
        const std::uint32_t dx = corner & 1;
        const std::uint32_t dy = (corner >> 1) & 1;
        const std::uint32_t dz = corner >> 2;
        if (l[0] < dx || l[1] < dy || l[2] < dz) continue;
        if (l[0] - dx >= n || l[1] - dy >= n || l[2] - dz >= n) continue;
        support.push_back(morton_encode(l[0] - dx, l[1] - dy, l[2] - dz));
      }
    }
    std::sort(support.begin(), support.end());
    support.erase(std::unique(support.begin(), support.end()), support.end());
    support.shrink_to_fit();
    support_index_.emplace_back(support);
    auto& corners = support_corners_.emplace_back();
    corners.reserve(support.size());
    for (auto m : support) corners.push_back(corner_coefficients(d, morton_decode(m)));
  }
}

void ImplicitField::set_shell(ShellBounds bounds) {
  if (!(bounds.eps1 <= bounds.eps2)) throw Error("shell interval requires eps1 <= eps2");
  shell_ = bounds;
}

std::optional<double> ImplicitField::coefficient(int depth, std::uint64_t morton) const {
  if (depth < 0 || depth > height()) return std::nullopt;
  const std::uint32_t hit = grid_index_[depth].find(morton);
  if (hit == MortonIndex::kMissing) return std::nullopt;
  return coefficients_[offsets_[depth] + hit];
}

std::array<double, 8> ImplicitField::corner_coefficients(int depth, const Lattice& cell) const {
  std::array<double, 8> c{};
  for (int corner = 0; corner < 8; ++corner) {
    const std::uint32_t hit = grid_index_[depth].find(
        morton_encode(cell[0] + (corner & 1), cell[1] + ((corner >> 1) & 1), cell[2] + (corner >> 2)));
    c[corner] = hit == MortonIndex::kMissing ? 0.0 : coefficients_[offsets_[depth] + hit];
  }
  return c;
}

double ImplicitField::evaluate(const Vec3& p) const {
  if (!inside_unit_cube(p)) return 0.0;
  const int height = svo_.height();
  double sum = 0.0;
  for (int d = 0; d <= height; ++d) {
    const double n = static_cast<double>(svo_.resolution(d));
    Lattice cell{};
    double frac[3];
    for (int a = 0; a < 3; ++a) {
      const double t = p[a] * n;
      const double i = std::min(std::floor(t), n - 1.0);
      cell[a] = static_cast<std::uint32_t>(i);
      frac[a] = t - i;
    }
    const std::uint32_t hit = support_index_[d].find(morton_encode(cell[0], cell[1], cell[2]));
    if (hit != MortonIndex::kMissing) sum += interpolate(support_corners_[d][hit], frac[0], frac[1], frac[2]);
  }
  return sum;
}

std::array<double, 8> ImplicitField::lattice_cell_corner_values(const Lattice& cell) const {
  // Every depth contributes the trilinear of the coarse cell that contains
  // this depth-0 cell, evaluated at the corner in that coarse cell's frame.
  const int height = svo_.height();
  std::array<double, 8> values{};
  for (int d = 0; d <= height; ++d) {
    const std::uint32_t s = 1u << d;
    const Lattice coarse{cell[0] / s, cell[1] / s, cell[2] / s};
    const std::uint32_t hit = support_index_[d].find(morton_encode(coarse[0], coarse[1], coarse[2]));
    if (hit == MortonIndex::kMissing) continue;
    const std::array<double, 8>& c = support_corners_[d][hit];
    for (int corner = 0; corner < 8; ++corner) {
      const double fx = static_cast<double>(cell[0] - coarse[0] * s + (corner & 1)) / s;
      const double fy = static_cast<double>(cell[1] - coarse[1] * s + ((corner >> 1) & 1)) / s;
      const double fz = static_cast<double>(cell[2] - coarse[2] * s + (corner >> 2)) / s;
      values[corner] += interpolate(c, fx, fy, fz);
    }
  }
  return values;
}

Trilinear ImplicitField::cell_trilinear_coeffs(const CellKey& cell) const {
  if (cell.depth != 0) throw Error("trilinear coefficients are defined for depth-0 cells");
  if (svo_.height() == 0 || !svo_.has_cell(0, cell.morton)) {
    throw Error("cell is not present in the octree");
  }
  return trilinear_from_corners(lattice_cell_corner_values(morton_decode(cell.morton)));
}

bool ImplicitField::operator==(const ImplicitField& other) const {
  return svo_ == other.svo_ && coefficients_ == other.coefficients_ &&
         transform_ == other.transform_ && mode_ == other.mode_ && shell_ == other.shell_;
}

}  // namespace its
