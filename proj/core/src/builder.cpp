#include "its/builder.hpp"

#include <chrono>

#include "its/parallel.hpp"
#include "its/svo.hpp"

namespace its {
namespace {

class Stopwatch {
 public:
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    return s;
  }

 private:
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

}  // namespace

void validate_config(const BuildConfig& config) {
  if (config.height < kMinHeight || config.height > kMaxHeight) {
    throw Error("K must lie in [" + std::to_string(kMinHeight) + ", " + std::to_string(kMaxHeight) + "]");
  }
  if (!(config.tolerance > 0.0)) throw Error("solver tolerance must be positive");
  if (!(config.margin >= 0.0 && config.margin < 0.25)) throw Error("margin must lie in [0, 0.25)");
  if (config.max_iterations < 0) throw Error("max iterations must be non-negative");
  if (config.threads < 0) throw Error("thread count must be non-negative");
}

BuildOutput build_field(const TriangleMesh& model_mesh, int height, DistanceMode mode, double tolerance,
                        int max_iterations, double margin) {
  BuildReport report;
  report.height = height;
  report.mode = mode;
  report.faces = model_mesh.face_count();
  Stopwatch clock;

  auto [unit_mesh, transform] = normalize_to_unit(model_mesh, margin);
  report.times.normalize = clock.lap();

  const auto leaves = voxelize(unit_mesh, height);
  report.leaf_cells = leaves.size();
  report.times.voxelize = clock.lap();

  SparseVoxelOctree svo = SparseVoxelOctree::build(leaves, height);
  for (int d = 0; d <= height; ++d) {
    report.cells_per_depth.push_back(svo.cells(d).size());
    report.grid_points_per_depth.push_back(svo.grid_points(d).size());
  }
  report.cell_count = svo.cell_count();
  report.grid_point_count = svo.grid_point_count();
  report.times.octree = clock.lap();

  SparseSystem system = assemble_system(svo, unit_mesh, mode);
  report.nonzeros = static_cast<std::size_t>(system.matrix.nonZeros());
  report.times.assemble = clock.lap();

  const SolveReport solved = solve_coefficients(system.matrix, system.rhs, tolerance, max_iterations);
  report.solver_iterations = solved.iterations;
  report.residual = solved.residual;
  report.normal_residual = solved.normal_residual;
  report.converged = solved.converged;
  if (!solved.converged) report.warnings.push_back("solver stopped before reaching the tolerance");
  std::vector<double> coefficients(solved.solution.data(), solved.solution.data() + solved.solution.size());
  SparseMatrix().swap(system.matrix);
  system.rhs.resize(0);
  report.times.solve = clock.lap();

  ImplicitField field(std::move(svo), std::move(coefficients), transform, mode);
  report.shell = compute_shell_interval(field, unit_mesh);
  if (report.shell.same_sign()) report.warnings.push_back("eps1 and eps2 have the same sign");
  report.times.shell = clock.lap();
  return {std::move(field), std::move(unit_mesh), std::move(report)};
}

BuildOutput run_build(const BuildConfig& config) {
  validate_config(config);
  if (config.threads > 0) set_thread_count(config.threads);
  Stopwatch clock;
  std::vector<std::string> warnings;
  const TriangleMesh mesh = load_mesh(config.input, &warnings);
  const double load = clock.lap();
  BuildOutput out = build_field(mesh, config.height, config.mode, config.tolerance, config.max_iterations,
                                config.margin);
  out.report.times.load = load;
  out.report.warnings.insert(out.report.warnings.begin(), warnings.begin(), warnings.end());
  clock.lap();
  if (!config.output.empty()) save_its(out.field, config.output);
  out.report.times.save = clock.lap();
  return out;
}

ContainmentResult check_containment(const ImplicitField& field, const TriangleMesh& model_mesh,
                                    std::size_t samples, std::uint64_t seed) {
  if (!field.shell()) throw Error("field has no shell interval");
  const ShellBounds& shell = *field.shell();
  const bool unsigned_field = field.mode() == DistanceMode::Unsigned;
  const double lo = unsigned_field ? 0.0 : shell.eps1;
  const double hi = unsigned_field ? std::max(std::abs(shell.eps1), std::abs(shell.eps2)) : shell.eps2;
  const auto points = sample_surface(model_mesh, samples, seed);
  ContainmentResult result;
  result.samples = points.size();
  result.min_value = std::numeric_limits<double>::infinity();
  result.max_value = -std::numeric_limits<double>::infinity();
  for (const auto& s : points) {
    const double f = field.evaluate_model(s.position);
    result.min_value = std::min(result.min_value, f);
    result.max_value = std::max(result.max_value, f);
    result.inside += lo <= f && f <= hi;
  }
  return result;
}

}  // namespace its
