#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "its/extremity.hpp"
#include "its/field.hpp"
#include "its/mesh.hpp"

namespace its {

struct BuildConfig {
  std::filesystem::path input;
  int height = 6;
  DistanceMode mode = DistanceMode::Signed;
  double tolerance = kDefaultSolverTolerance;
  int max_iterations = 0;  ///< 0 selects 10 N
  double margin = kDefaultMargin;
  std::filesystem::path output;
  int threads = 0;  ///< 0 keeps the current setting
  std::uint64_t seed = 0;
};

/// Throws Error on K outside [2, 12], tol <= 0 or margin outside [0, 0.25).
void validate_config(const BuildConfig& config);

struct StageTimes {
  double load = 0.0;
  double normalize = 0.0;
  double voxelize = 0.0;
  double octree = 0.0;
  double assemble = 0.0;
  double solve = 0.0;
  double shell = 0.0;
  double save = 0.0;
  [[nodiscard]] double total() const {
    return load + normalize + voxelize + octree + assemble + solve + shell + save;
  }
};

struct BuildReport {
  int height = 0;
  DistanceMode mode = DistanceMode::Signed;
  std::size_t faces = 0;
  std::vector<std::string> warnings;
  std::size_t leaf_cells = 0;
  std::vector<std::size_t> cells_per_depth;
  std::vector<std::size_t> grid_points_per_depth;
  std::size_t cell_count = 0;
  std::size_t grid_point_count = 0;
  std::size_t nonzeros = 0;
  int solver_iterations = 0;
  double residual = 0.0;
  double normal_residual = 0.0;
  bool converged = false;
  ShellInterval shell;
  StageTimes times;
};

struct BuildOutput {
  ImplicitField field;
  TriangleMesh unit_mesh;
  BuildReport report;
};

/// normalize -> voxelize -> octree -> assemble -> solve -> shell interval.
BuildOutput build_field(const TriangleMesh& model_mesh, int height, DistanceMode mode,
                        double tolerance = kDefaultSolverTolerance, int max_iterations = 0,
                        double margin = kDefaultMargin);

/// Full pipeline from a configuration, including load and save.
BuildOutput run_build(const BuildConfig& config);

struct ContainmentResult {
  std::size_t samples = 0;
  std::size_t inside = 0;
  double min_value = 0.0;
  double max_value = 0.0;
  [[nodiscard]] double ratio() const { return samples ? static_cast<double>(inside) / samples : 1.0; }
};

/// Area-weighted surface samples of the model mesh tested against the shell:
/// eps1 <= f <= eps2, or 0 <= f <= max(|eps1|, |eps2|) for unsigned fields.
ContainmentResult check_containment(const ImplicitField& field, const TriangleMesh& model_mesh,
                                    std::size_t samples, std::uint64_t seed);

}  // namespace its
