#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "its/builder.hpp"
#include "its/extract.hpp"
#include "its/parallel.hpp"
#include "its/query.hpp"
#include "its/simplify.hpp"

namespace its::cli {

using nlohmann::json;

namespace {

void write_json(const json& doc, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << std::setw(2) << doc << '\n';
}

void require_file(const std::filesystem::path& path, const char* what) {
  if (!std::filesystem::is_regular_file(path)) throw Error(std::string(what) + " not found: " + path.string());
}

json build_report_json(const BuildReport& r, const BuildConfig& config) {
  const auto& s = r.shell;
  return {
      {"input", config.input.string()},
      {"k", r.height},
      {"mode", to_string(r.mode)},
      {"faces", r.faces},
      {"seed", config.seed},
      {"eps1", s.eps1},
      {"eps2", s.eps2},
      {"thickness", s.thickness()},
      {"sameSign", s.same_sign()},
      {"candidates",
       {{"interior", s.interior_candidates}, {"edge", s.edge_candidates}, {"vertex", s.vertex_candidates}}},
      {"subTriangles", s.sub_triangles},
      {"criticalPointFallbacks", s.fallbacks},
      {"leafCells", r.leaf_cells},
      {"cellCount", r.cell_count},
      {"gridPointCount", r.grid_point_count},
      {"cellsPerDepth", r.cells_per_depth},
      {"gridPointsPerDepth", r.grid_points_per_depth},
      {"nonzeros", r.nonzeros},
      {"solver",
       {{"iterations", r.solver_iterations},
        {"residual", r.residual},
        {"normalResidual", r.normal_residual},
        {"converged", r.converged},
        {"tolerance", config.tolerance}}},
      {"times",
       {{"load", r.times.load},
        {"normalize", r.times.normalize},
        {"voxelize", r.times.voxelize},
        {"octree", r.times.octree},
        {"assemble", r.times.assemble},
        {"solve", r.times.solve},
        {"shell", r.times.shell},
        {"save", r.times.save},
        {"total", r.times.total()}}},
      {"warnings", r.warnings},
  };
}

json simplify_report_json(const SimplifyReport& r) {
  std::size_t violations = 0;
  for (const auto& c : r.log) violations += !c.inside_shell;
  json doc = {
      {"initialFaces", r.initial_faces},
      {"finalFaces", r.final_faces},
      {"accepted", r.accepted},
      {"rejected", r.rejected},
      {"topologyRejected", r.topology_rejected},
      {"maxAbsF", r.max_abs_f},
      {"mode", to_string(r.mode)},
      {"gamma", r.gamma},
      {"exhausted", r.exhausted},
  };
  if (r.mode == SimplifyMode::Constrained) doc["shellViolations"] = violations;
  return doc;
}

void write_collapse_log(const SimplifyReport& r, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << std::setprecision(17) << "kept,removed,x,y,z,f,priority,insideShell\n";
  for (const auto& c : r.log) {
    out << c.kept << ',' << c.removed << ',' << c.target.x() << ',' << c.target.y() << ',' << c.target.z() << ','
        << c.value << ',' << c.priority << ',' << (c.inside_shell ? 1 : 0) << '\n';
  }
}

double resolve_level(const ImplicitField& field, const std::string& text) {
  if (text == "zero") return 0.0;
  if (text == "eps1" || text == "eps2") {
    if (!field.shell()) throw Error("field has no shell interval; use a numeric --level");
    return text == "eps1" ? field.shell()->eps1 : field.shell()->eps2;
  }
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || !std::isfinite(value)) {
    throw Error("--level expects eps1, zero, eps2 or a number, got '" + text + "'");
  }
  return value;
}

}  // namespace

std::vector<double> parse_box_sizes(const std::string& text) {
  std::vector<double> sizes;
  const auto dots = text.find("..");
  if (dots != std::string::npos) {
    int lo = 0;
    int hi = 0;
    try {
      lo = std::stoi(text.substr(0, dots));
      hi = std::stoi(text.substr(dots + 2));
    } catch (const std::exception&) {
      throw Error("--boxes range must look like 1..10");
    }
    if (lo <= 0 || hi < lo) throw Error("--boxes range must be positive and ascending");
    for (int i = lo; i <= hi; ++i) sizes.push_back(i);
    return sizes;
  }
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      sizes.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw Error("bad --boxes entry '" + item + "'");
    }
    if (!(sizes.back() > 0.0)) throw Error("--boxes entries must be positive");
  }
  if (sizes.empty()) throw Error("--boxes is empty");
  return sizes;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Build, query and inspect thin-shell implicit fields", "its"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "worker threads (default: ITS_THREADS or all cores)")
      ->check(CLI::NonNegativeNumber);

  // build
  BuildConfig build;
  std::string build_mode = "signed";
  std::filesystem::path build_report;
  std::filesystem::path build_candidates;
  auto* cmd_build = app.add_subcommand("build", "fit a field to a mesh and compute its shell");
  cmd_build->add_option("--in", build.input, "input mesh (obj, stl, ply)")->required();
  cmd_build->add_option("--k", build.height, "octree height K in [2, 12]")->required();
  cmd_build->add_option("--mode", build_mode, "signed or unsigned")->check(CLI::IsMember({"signed", "unsigned"}));
  cmd_build->add_option("--tol", build.tolerance, "solver tolerance");
  cmd_build->add_option("--max-iter", build.max_iterations, "solver iteration cap (0: 10 N)");
  cmd_build->add_option("--margin", build.margin, "normalization margin in [0, 0.25)");
  cmd_build->add_option("--out", build.output, "output .its file")->required();
  cmd_build->add_option("--report", build_report, "JSON report path");
  cmd_build->add_option("--candidates", build_candidates, "CSV dump of extremity candidates");
  cmd_build->add_option("--seed", build.seed, "recorded in the report");

  // query
  std::filesystem::path q_its;
  std::filesystem::path q_points;
  std::filesystem::path q_mesh;
  std::filesystem::path q_out;
  std::string q_policy = "on_surface";
  auto* cmd_query = app.add_subcommand("query", "classify points against the shell");
  cmd_query->add_option("--its", q_its)->required();
  cmd_query->add_option("--points", q_points, "text file, one 'x y z' per line")->required();
  cmd_query->add_option("--policy", q_policy)->check(CLI::IsMember({"on_surface", "exact"}));
  cmd_query->add_option("--mesh", q_mesh, "mesh for the exact fallback");
  cmd_query->add_option("--out", q_out, "results CSV")->required();

  // extract
  std::filesystem::path e_its;
  std::filesystem::path e_out;
  std::string e_level = "zero";
  int e_res = 128;
  auto* cmd_extract = app.add_subcommand("extract", "marching cubes of a level set");
  cmd_extract->add_option("--its", e_its)->required();
  cmd_extract->add_option("--level", e_level, "eps1, zero, eps2 or a number");
  cmd_extract->add_option("--res", e_res, "samples per axis")
      ->check(CLI::Range(kMinExtractResolution, kMaxExtractResolution));
  cmd_extract->add_option("--out", e_out, "output OBJ")->required();

  // simplify
  std::filesystem::path s_in;
  std::filesystem::path s_its;
  std::filesystem::path s_out;
  std::filesystem::path s_report;
  std::filesystem::path s_log;
  std::string s_mode = "constrained";
  std::size_t s_target = 0;
  double s_gamma = 1.0;
  auto* cmd_simplify = app.add_subcommand("simplify", "shell-aware edge collapse");
  cmd_simplify->add_option("--in", s_in)->required();
  cmd_simplify->add_option("--its", s_its, "field (not needed for plain mode)");
  cmd_simplify->add_option("--mode", s_mode)->check(CLI::IsMember({"constrained", "global", "global_term", "plain"}));
  cmd_simplify->add_option("--target", s_target, "target face count")->required();
  cmd_simplify->add_option("--gamma", s_gamma, "weight of the f^2 term in global mode");
  cmd_simplify->add_option("--out", s_out)->required();
  cmd_simplify->add_option("--report", s_report, "JSON report path");
  cmd_simplify->add_option("--log", s_log, "CSV audit log of executed collapses");

  // bench
  std::filesystem::path b_its;
  std::filesystem::path b_mesh;
  std::filesystem::path b_out;
  std::string b_boxes = "1..10";
  std::size_t b_n = 100000;
  std::uint64_t b_seed = 1;
  auto* cmd_bench = app.add_subcommand("bench", "compare shell and exact query times");
  cmd_bench->add_option("--its", b_its)->required();
  cmd_bench->add_option("--mesh", b_mesh)->required();
  cmd_bench->add_option("--boxes", b_boxes, "range a..b or list of box scales");
  cmd_bench->add_option("--n", b_n, "points per box");
  cmd_bench->add_option("--seed", b_seed);
  cmd_bench->add_option("--out", b_out, "CSV path")->required();

  // validate
  std::filesystem::path v_its;
  std::filesystem::path v_mesh;
  std::size_t v_samples = 10000;
  std::uint64_t v_seed = 1;
  auto* cmd_validate = app.add_subcommand("validate", "surface containment check");
  cmd_validate->add_option("--its", v_its)->required();
  cmd_validate->add_option("--mesh", v_mesh)->required();
  cmd_validate->add_option("--samples", v_samples);
  cmd_validate->add_option("--seed", v_seed);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (threads > 0) set_thread_count(static_cast<unsigned>(threads));

    if (*cmd_build) {
      build.mode = parse_distance_mode(build_mode);
      validate_config(build);
      require_file(build.input, "input mesh");
      BuildOutput result = run_build(build);
      for (const auto& w : result.report.warnings) err << "warning: " << w << '\n';
      if (!build_candidates.empty()) {
        std::vector<CandidatePoint> candidates;
        compute_shell_interval(result.field, result.unit_mesh, &candidates);
        write_candidates_csv(candidates, build_candidates);
      }
      const json doc = build_report_json(result.report, build);
      if (!build_report.empty()) write_json(doc, build_report);
      out << std::setprecision(6) << "eps1 " << result.report.shell.eps1 << " eps2 " << result.report.shell.eps2
          << " thickness " << result.report.shell.thickness() << '\n';
      return 0;
    }

    if (*cmd_query) {
      require_file(q_its, "field");
      require_file(q_points, "points file");
      const FallbackPolicy policy = parse_fallback_policy(q_policy);
      const ImplicitField field = load_its(q_its);
      TriangleMesh mesh;
      const bool have_mesh = !q_mesh.empty();
      if (have_mesh) {
        require_file(q_mesh, "mesh");
        mesh = load_mesh(q_mesh);
      }
      if (policy == FallbackPolicy::Exact && !have_mesh) throw Error("--policy exact requires --mesh");
      const auto points = read_points(q_points);
      const BatchResult batch = classify_batch(field, points, policy, have_mesh ? &mesh : nullptr);
      write_results_csv(points, batch.results, q_out);
      json summary = {{"count", batch.summary.count},
                      {"meanMicros", batch.summary.mean_micros},
                      {"fallbackRate", batch.summary.fallback_rate}};
      if (batch.summary.has_agreement) summary["agreement"] = batch.summary.agreement;
      out << summary.dump() << '\n';
      return 0;
    }

    if (*cmd_extract) {
      require_file(e_its, "field");
      const ImplicitField field = load_its(e_its);
      const double level = resolve_level(field, e_level);
      const LevelSetMesh result = marching_cubes(field, level, e_res);
      for (const auto& w : result.warnings) err << "warning: " << w << '\n';
      save_obj(result.mesh, e_out);
      out << "level " << std::setprecision(17) << level << " faces " << result.mesh.face_count() << '\n';
      return 0;
    }

    if (*cmd_simplify) {
      require_file(s_in, "input mesh");
      SimplifyOptions options;
      options.mode = parse_simplify_mode(s_mode);
      options.target_faces = s_target;
      options.gamma = s_gamma;
      const TriangleMesh mesh = load_mesh(s_in);
      ImplicitField field;
      const bool have_field = !s_its.empty();
      if (have_field) {
        require_file(s_its, "field");
        field = load_its(s_its);
      }
      const SimplifyResult result = simplify(mesh, have_field ? &field : nullptr, options);
      save_obj(result.mesh, s_out);
      const json doc = simplify_report_json(result.report);
      if (!s_report.empty()) write_json(doc, s_report);
      if (!s_log.empty()) write_collapse_log(result.report, s_log);
      if (result.report.exhausted) {
        err << "warning: no admissible collapse left at " << result.report.final_faces << " faces\n";
      }
      out << doc.dump() << '\n';
      return 0;
    }

    if (*cmd_bench) {
      require_file(b_its, "field");
      require_file(b_mesh, "mesh");
      const auto sizes = parse_box_sizes(b_boxes);
      const ImplicitField field = load_its(b_its);
      const TriangleMesh mesh = load_mesh(b_mesh);
      const auto rows = bench_compare(field, mesh, sizes, b_n, b_seed);
      write_bench_csv(rows, b_out);
      out << "rows " << rows.size() << '\n';
      return 0;
    }

    if (*cmd_validate) {
      require_file(v_its, "field");
      require_file(v_mesh, "mesh");
      const ImplicitField field = load_its(v_its);
      if (!field.shell()) throw Error("field has no shell interval");
      const TriangleMesh mesh = load_mesh(v_mesh);
      const ContainmentResult r = check_containment(field, mesh, v_samples, v_seed);
      const json doc = {{"samples", r.samples},   {"inside", r.inside},       {"ratio", r.ratio()},
                        {"minF", r.min_value},    {"maxF", r.max_value},      {"eps1", field.shell()->eps1},
                        {"eps2", field.shell()->eps2}};
      out << doc.dump() << '\n';
      err << "inside-shell ratio " << std::fixed << std::setprecision(1) << 100.0 * r.ratio() << "%\n";
      return 0;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace its::cli
