#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "its/field.hpp"
#include "its/mesh.hpp"

namespace its {

/// Homogeneous plane-distance form: error(v) = [v;1]^T Q [v;1].
struct Quadric {
  Eigen::Matrix4d q = Eigen::Matrix4d::Zero();

  /// Quadric of the plane n.x + d = 0 (n unit length).
  static Quadric plane(const Vec3& n, double d);
  [[nodiscard]] double error(const Vec3& v) const;
  Quadric& operator+=(const Quadric& o) {
    q += o.q;
    return *this;
  }
  friend Quadric operator+(Quadric a, const Quadric& b) { return a += b; }
  Quadric& operator*=(double s) {
    q *= s;
    return *this;
  }
};

/// Sum of incident face plane quadrics per vertex.
std::vector<Quadric> compute_quadrics(const TriangleMesh& mesh);

/// Minimizer of q when its 3x3 block has condition number below 1e8,
/// otherwise the best of a, b and their midpoint (ties go to the midpoint).
Vec3 optimal_contraction(const Quadric& q, const Vec3& a, const Vec3& b);

enum class SimplifyMode : std::uint8_t { Plain, Constrained, Global };
std::string to_string(SimplifyMode mode);
SimplifyMode parse_simplify_mode(const std::string& text);

struct SimplifyOptions {
  SimplifyMode mode = SimplifyMode::Constrained;
  std::size_t target_faces = 0;
  double gamma = 1.0;
};

struct CollapseRecord {
  std::uint32_t kept = 0;
  std::uint32_t removed = 0;
  Vec3 target = Vec3::Zero();  ///< unit coordinates
  double value = 0.0;          ///< f at the target
  double priority = 0.0;
  bool inside_shell = false;   ///< eps1 < f < eps2 at execution time
};

struct SimplifyReport {
  std::size_t initial_faces = 0;
  std::size_t final_faces = 0;
  std::size_t rejected = 0;          ///< candidates refused by the shell bound
  std::size_t topology_rejected = 0; ///< pops refused by link, flip or manifold checks
  std::size_t accepted = 0;
  double max_abs_f = 0.0;            ///< over accepted collapse targets
  SimplifyMode mode = SimplifyMode::Plain;
  double gamma = 0.0;
  bool exhausted = false;            ///< heap ran dry above the target
  std::vector<CollapseRecord> log;
};

struct SimplifyResult {
  TriangleMesh mesh;  ///< model coordinates
  SimplifyReport report;
};

/// QEM edge collapse on a model-space mesh, evaluated in the field's unit
/// space. Constrained mode admits only targets with eps1 < f < eps2; global
/// mode orders by error + gamma f^2; plain mode ignores the field for
/// ordering (it is still used for the report when given).
SimplifyResult simplify(const TriangleMesh& model_mesh, const ImplicitField* field,
                        const SimplifyOptions& options);

/// Largest |f| over a model-space mesh's vertices.
double max_abs_field_on_vertices(const ImplicitField& field, const TriangleMesh& model_mesh);

}  // namespace its
