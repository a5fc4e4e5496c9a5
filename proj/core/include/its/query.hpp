#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "its/field.hpp"
#include "its/mesh.hpp"

namespace its {

enum class Label : std::uint8_t { Inside, Outside, OnSurface, ResolvedInside, ResolvedOutside };
enum class FallbackPolicy : std::uint8_t { OnSurface, Exact };

std::string to_string(Label label);
FallbackPolicy parse_fallback_policy(const std::string& text);

struct Classification {
  Label label = Label::Outside;
  double value = 0.0;
  bool used_fallback = false;
};

/// Inside/outside test of a model-space point against the shell. Points in
/// the band [eps1, eps2] are OnSurface, or resolved by the winding number of
/// `model_mesh` under the exact policy.
Classification classify(const ImplicitField& field, const Vec3& model_point, FallbackPolicy policy,
                        const TriangleMesh* model_mesh = nullptr);

/// True if a label says "inside" (Inside or ResolvedInside).
inline bool is_inside(Label label) { return label == Label::Inside || label == Label::ResolvedInside; }

struct BatchSummary {
  std::size_t count = 0;
  double mean_micros = 0.0;
  double fallback_rate = 0.0;   ///< fraction of points whose f fell in the band
  double agreement = 0.0;       ///< vs the exact oracle, only when a mesh was given
  bool has_agreement = false;
};

struct BatchResult {
  std::vector<Classification> results;
  BatchSummary summary;
};

/// Oracle sign: winding number > 1/2 means inside.
bool oracle_inside(const TriangleMesh& model_mesh, const Vec3& model_point);

/// Scores a classification against the oracle. OnSurface is correct iff the
/// unit-space distance to the surface is within the shell thickness.
bool agrees_with_oracle(const ImplicitField& field, const Classification& c, const TriangleMesh& model_mesh,
                        const Vec3& model_point);

/// Classifies in parallel; timing covers classification only. When a mesh is
/// given the agreement ratio against the oracle is computed afterwards.
BatchResult classify_batch(const ImplicitField& field, const std::vector<Vec3>& model_points,
                           FallbackPolicy policy, const TriangleMesh* model_mesh = nullptr);

/// Uniform points in a box `box_size` times the model's bounding-box extent,
/// centred on it.
std::vector<Vec3> sample_box(const Aabb& bounds, double box_size, std::size_t n, std::uint64_t seed);

struct BenchRow {
  double box_size = 0.0;
  std::string backend;
  double mean_micros = 0.0;
  double fallback_rate = 0.0;
  double agreement = 0.0;
};

/// Per box size: exact oracle, shell only, shell with exact fallback.
std::vector<BenchRow> bench_compare(const ImplicitField& field, const TriangleMesh& model_mesh,
                                    const std::vector<double>& box_sizes, std::size_t n, std::uint64_t seed);

void write_bench_csv(const std::vector<BenchRow>& rows, const std::filesystem::path& path);

std::vector<Vec3> read_points(const std::filesystem::path& path);
void write_results_csv(const std::vector<Vec3>& points, const std::vector<Classification>& results,
                       const std::filesystem::path& path);

}  // namespace its
