#include "its/query.hpp"

#include <atomic>
#include <chrono>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>

#include "its/parallel.hpp"

namespace its {

std::string to_string(Label label) {
  switch (label) {
    case Label::Inside:
      return "Inside";
    case Label::Outside:
      return "Outside";
    case Label::OnSurface:
      return "OnSurface";
    case Label::ResolvedInside:
      return "ResolvedInside";
    case Label::ResolvedOutside:
      return "ResolvedOutside";
  }
  return "Unknown";
}

FallbackPolicy parse_fallback_policy(const std::string& text) {
  if (text == "on_surface") return FallbackPolicy::OnSurface;
  if (text == "exact") return FallbackPolicy::Exact;
  throw Error("unknown fallback policy '" + text + "' (expected on_surface or exact)");
}

Classification classify(const ImplicitField& field, const Vec3& model_point, FallbackPolicy policy,
                        const TriangleMesh* model_mesh) {
  if (!field.shell()) throw Error("field has no shell interval");
  if (policy == FallbackPolicy::Exact && model_mesh == nullptr) {
    throw Error("exact fallback policy requires a mesh");
  }
  Classification c;
  const Vec3 u = field.transform().to_unit(model_point);
  if (!inside_unit_cube(u)) {
    c.label = Label::Outside;
    return c;
  }
  c.value = field.evaluate(u);
  const ShellBounds& shell = *field.shell();
  if (c.value < shell.eps1) {
    c.label = Label::Inside;
  } else if (c.value > shell.eps2) {
    c.label = Label::Outside;
  } else if (policy == FallbackPolicy::OnSurface) {
    c.label = Label::OnSurface;
  } else {
    c.used_fallback = true;
    c.label = oracle_inside(*model_mesh, model_point) ? Label::ResolvedInside : Label::ResolvedOutside;
  }
  return c;
}

bool oracle_inside(const TriangleMesh& model_mesh, const Vec3& model_point) {
  return winding_number(model_mesh, model_point) > 0.5;
}

bool agrees_with_oracle(const ImplicitField& field, const Classification& c, const TriangleMesh& model_mesh,
                        const Vec3& model_point) {
  if (c.label == Label::OnSurface) {
    const ShellBounds& shell = *field.shell();
    const double d = closest_point_distance(model_mesh, model_point).distance * field.transform().scale;
    return d <= shell.eps2 - shell.eps1;
  }
  return is_inside(c.label) == oracle_inside(model_mesh, model_point);
}

BatchResult classify_batch(const ImplicitField& field, const std::vector<Vec3>& model_points,
                           FallbackPolicy policy, const TriangleMesh* model_mesh) {
  BatchResult out;
  out.results.resize(model_points.size());
  out.summary.count = model_points.size();
  if (model_points.empty()) return out;
  std::atomic<std::int64_t> nanos{0};
  parallel_for(model_points.size(), [&](std::size_t begin, std::size_t end) {
    const auto t0 = std::chrono::steady_clock::now();
    for (std::size_t i = begin; i < end; ++i) out.results[i] = classify(field, model_points[i], policy, model_mesh);
    const auto t1 = std::chrono::steady_clock::now();
    nanos += std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count();
  });
  const double n = static_cast<double>(model_points.size());
  out.summary.mean_micros = static_cast<double>(nanos.load()) * 1e-3 / n;
  std::size_t band = 0;
  for (const auto& c : out.results) band += c.used_fallback || c.label == Label::OnSurface;
  out.summary.fallback_rate = static_cast<double>(band) / n;
  if (model_mesh) {
    std::vector<char> ok(model_points.size());
    parallel_for(model_points.size(), [&](std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i)
        ok[i] = agrees_with_oracle(field, out.results[i], *model_mesh, model_points[i]);
    });
    std::size_t good = 0;
    for (char v : ok) good += v;
    out.summary.agreement = static_cast<double>(good) / n;
    out.summary.has_agreement = true;
  }
  return out;
}

std::vector<Vec3> sample_box(const Aabb& bounds, double box_size, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-0.5, 0.5);
  const Vec3 c = bounds.center();
  const Vec3 e = bounds.extent() * box_size;
  std::vector<Vec3> points(n);
  for (auto& p : points) {
    const double x = unit(rng);
    const double y = unit(rng);
    const double z = unit(rng);
    p = c + Vec3(x * e.x(), y * e.y(), z * e.z());
  }
  return points;
}

namespace {

// Sequential timing of one backend over a point set.
template <typename F>
double time_per_query(const std::vector<Vec3>& points, F&& body) {
  if (points.empty()) return 0.0;
  const auto t0 = std::chrono::steady_clock::now();
  for (std::size_t i = 0; i < points.size(); ++i) body(i);
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::micro>(t1 - t0).count() / static_cast<double>(points.size());
}

}  // namespace

std::vector<BenchRow> bench_compare(const ImplicitField& field, const TriangleMesh& model_mesh,
                                    const std::vector<double>& box_sizes, std::size_t n, std::uint64_t seed) {
  std::vector<BenchRow> rows;
  if (n == 0) return rows;
  for (std::size_t b = 0; b < box_sizes.size(); ++b) {
    const double size = box_sizes[b];
    const auto points = sample_box(model_mesh.bounds(), size, n, seed + b);
    std::vector<char> truth(n);
    std::vector<Classification> shell(n);
    std::vector<Classification> exact(n);
    const double oracle_us =
        time_per_query(points, [&](std::size_t i) { truth[i] = oracle_inside(model_mesh, points[i]); });
    const double shell_us = time_per_query(
        points, [&](std::size_t i) { shell[i] = classify(field, points[i], FallbackPolicy::OnSurface); });
    const double exact_us = time_per_query(
        points, [&](std::size_t i) { exact[i] = classify(field, points[i], FallbackPolicy::Exact, &model_mesh); });

    std::vector<char> shell_ok(n);
    parallel_for(n, [&](std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i) shell_ok[i] = agrees_with_oracle(field, shell[i], model_mesh, points[i]);
    });
    std::size_t band = 0;
    std::size_t good_shell = 0;
    std::size_t good_exact = 0;
    for (std::size_t i = 0; i < n; ++i) {
      band += shell[i].label == Label::OnSurface;
      good_shell += shell_ok[i];
      good_exact += is_inside(exact[i].label) == static_cast<bool>(truth[i]);
    }
    const double dn = static_cast<double>(n);
    const double rate = static_cast<double>(band) / dn;
    rows.push_back({size, "exact", oracle_us, 1.0, 1.0});
    rows.push_back({size, "shell", shell_us, rate, static_cast<double>(good_shell) / dn});
    rows.push_back({size, "shell+exact", exact_us, rate, static_cast<double>(good_exact) / dn});
  }
  return rows;
}

void write_bench_csv(const std::vector<BenchRow>& rows, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << std::setprecision(10);
  out << "boxSize,backend,meanMicros,fallbackRate,agreement\n";
  for (const auto& r : rows) {
    out << r.box_size << ',' << r.backend << ',' << r.mean_micros << ',' << r.fallback_rate << ',' << r.agreement
        << '\n';
  }
}

std::vector<Vec3> read_points(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open points file " + path.string());
  std::vector<Vec3> points;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
    std::istringstream ss(line);
    Vec3 p;
    if (!(ss >> p.x() >> p.y() >> p.z())) {
      throw Error(path.string() + ":" + std::to_string(line_no) + ": expected 'x y z'");
    }
    points.push_back(p);
  }
  return points;
}

void write_results_csv(const std::vector<Vec3>& points, const std::vector<Classification>& results,
                       const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << std::setprecision(17);
  out << "x,y,z,f,label,usedFallback\n";
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& c = results[i];
    out << points[i].x() << ',' << points[i].y() << ',' << points[i].z() << ',' << c.value << ','
        << to_string(c.label) << ',' << (c.used_fallback ? 1 : 0) << '\n';
  }
}

}  // namespace its
