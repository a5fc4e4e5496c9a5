#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "its/field.hpp"
#include "its/mesh.hpp"

namespace its {

/// Bivariate cubic sum c[i][j] alpha^i beta^j over i + j <= 3.
struct BivariateCubic {
  std::array<std::array<double, 4>, 4> c{};

  [[nodiscard]] double value(double alpha, double beta) const;
  /// (dH/dalpha, dH/dbeta)
  [[nodiscard]] std::array<double, 2> gradient(double alpha, double beta) const;
  /// Second derivatives (H_aa, H_ab, H_bb).
  [[nodiscard]] std::array<double, 3> hessian(double alpha, double beta) const;
};

/// H(alpha, beta) = f(alpha p1 + beta p2 + (1 - alpha - beta) p3) for a
/// trilinear f given in cell-local coordinates.
BivariateCubic restrict_to_triangle(const Trilinear& t, const Triangle& local);

/// Quadratic gradient coefficients a1..a6 and b1..b6 of
/// dH/da = a1 a^2 + a2 b^2 + a3 ab + a4 a + a5 b + a6, likewise dH/db.
struct GradientSystem {
  std::array<double, 6> a{};
  std::array<double, 6> b{};
};
GradientSystem gradient_system(const BivariateCubic& h);

struct SubTriangle {
  Triangle vertices;  ///< unit coordinates
  Lattice cell{};     ///< depth-0 lattice cell containing it
  double area = 0.0;
};

/// Clips a unit-space triangle against every depth-0 grid plane crossing its
/// bounding box and fans the pieces into triangles, each inside one cell.
std::vector<SubTriangle> split_triangle(const Triangle& tri, int height);

struct CriticalPointStats {
  std::size_t fallbacks = 0;
};

/// Interior zeros of grad H in the closed simplex alpha, beta >= 0,
/// alpha + beta <= 1. Closed form through a quartic in beta, with a Newton
/// grid fallback for degenerate coefficient regimes.
std::vector<std::array<double, 2>> interior_critical_points(const BivariateCubic& h,
                                                            CriticalPointStats* stats = nullptr);
std::vector<std::array<double, 2>> interior_critical_points(const Trilinear& t, const Triangle& local);

/// Zeros of the derivative of H restricted to alpha = 0, beta = 0 and
/// alpha + beta = 1.
std::vector<std::array<double, 2>> boundary_critical_points(const BivariateCubic& h);
std::vector<std::array<double, 2>> boundary_critical_points(const Trilinear& t, const Triangle& local);

enum class CandidateKind : std::uint8_t { Interior, Edge, Vertex };
std::string to_string(CandidateKind kind);

struct CandidatePoint {
  std::uint32_t face = 0;
  std::uint32_t sub_triangle = 0;
  double alpha = 0.0;  ///< sub-triangle barycentrics, v = a p1 + b p2 + (1-a-b) p3
  double beta = 0.0;
  Vec3 position = Vec3::Zero();  ///< unit coordinates
  CandidateKind kind = CandidateKind::Vertex;
  double value = 0.0;
};

struct ShellInterval {
  double eps1 = 0.0;
  double eps2 = 0.0;
  std::size_t interior_candidates = 0;
  std::size_t edge_candidates = 0;
  std::size_t vertex_candidates = 0;
  std::size_t sub_triangles = 0;
  std::size_t fallbacks = 0;

  [[nodiscard]] double thickness() const { return eps2 - eps1; }
  /// Both extremes on the same side of zero.
  [[nodiscard]] bool same_sign() const { return (eps1 > 0.0 && eps2 > 0.0) || (eps1 < 0.0 && eps2 < 0.0); }
  /// Interval used for unsigned fields: [0, max(|eps1|, |eps2|)].
  [[nodiscard]] double unsigned_bound() const { return std::max(std::abs(eps1), std::abs(eps2)); }
};

/// Roundoff guard added outward to both extremes.
inline constexpr double kShellPadding = 1e-12;

/// Minimum and maximum of f over every candidate of every face of a
/// unit-space mesh. Stores the padded interval in the field.
ShellInterval compute_shell_interval(ImplicitField& field, const TriangleMesh& unit_mesh,
                                     std::vector<CandidatePoint>* candidates = nullptr);

void write_candidates_csv(const std::vector<CandidatePoint>& candidates,
                          const std::filesystem::path& path);

}  // namespace its
