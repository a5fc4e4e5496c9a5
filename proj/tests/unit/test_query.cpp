#include <gtest/gtest.h>

#include <fstream>
#include <random>

#include "its/builder.hpp"
#include "its/query.hpp"
#include "oracles.hpp"
#include "shapes.hpp"

using namespace its;

namespace {

struct Fixture {
  TriangleMesh model;
  BuildOutput out;
};

const Fixture& torus_k5() {
  static const Fixture f = [] {
    Fixture x{its::testing::make_torus(1.0, 0.35, 48, 24), {}};
    x.out = build_field(x.model, 5, DistanceMode::Signed);
    return x;
  }();
  return f;
}

std::size_t count_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) ++n;
  return n;
}

}  // namespace

TEST(Classify, FarPointIsOutsideWithoutFallback) {
  const auto& f = torus_k5();
  const Vec3 far = f.model.bounds().center() + 10.0 * f.model.bounds().extent();
  for (auto policy : {FallbackPolicy::OnSurface, FallbackPolicy::Exact}) {
    const auto c = classify(f.out.field, far, policy, &f.model);
    EXPECT_EQ(c.label, Label::Outside);
    EXPECT_FALSE(c.used_fallback);
  }
}

TEST(Classify, CubeDeepInterior) {
  const auto cube = its::testing::make_cube();
  const auto out = build_field(cube, 5, DistanceMode::Signed);
  const auto c = classify(out.field, Vec3(0.5, 0.5, 0.5), FallbackPolicy::OnSurface);
  EXPECT_EQ(c.label, Label::Inside);
  EXPECT_LT(c.value, out.report.shell.eps1);
  EXPECT_TRUE(oracle_inside(cube, Vec3(0.5, 0.5, 0.5)));
}

TEST(Classify, ExactPolicyRequiresMeshAndShell) {
  const auto& f = torus_k5();
  EXPECT_THROW(classify(f.out.field, Vec3::Zero(), FallbackPolicy::Exact), Error);
  ImplicitField bare = f.out.field;
  bare.clear_shell();
  EXPECT_THROW(classify(bare, Vec3::Zero(), FallbackPolicy::OnSurface), Error);
  EXPECT_THROW(parse_fallback_policy("maybe"), Error);
  EXPECT_EQ(parse_fallback_policy("exact"), FallbackPolicy::Exact);
}

TEST(Classify, NearSurfaceExactAgreesWithOracle) {
  const auto& f = torus_k5();
  const double half = 0.5 * f.out.report.shell.thickness() / f.out.field.transform().scale;
  std::size_t resolved = 0;
  for (const auto& s : sample_surface(f.model, 2000, 5)) {
    const Triangle t = f.model.triangle(s.face);
    const Vec3 normal = (t[1] - t[0]).cross(t[2] - t[0]).normalized();
    for (double side : {-1.0, 1.0}) {
      const Vec3 p = s.position + side * 0.5 * half * normal;
      const auto c = classify(f.out.field, p, FallbackPolicy::Exact, &f.model);
      EXPECT_EQ(is_inside(c.label), oracle_inside(f.model, p));
      if (c.used_fallback) {
        ++resolved;
        EXPECT_TRUE(c.label == Label::ResolvedInside || c.label == Label::ResolvedOutside);
        EXPECT_GE(c.value, f.out.report.shell.eps1);
        EXPECT_LE(c.value, f.out.report.shell.eps2);
      }
    }
  }
  EXPECT_GT(resolved, 0u);
}

TEST(Classify, SoundOutsideTheBandAndPure) {
  const auto& f = torus_k5();
  const double thickness = f.out.report.shell.thickness() / f.out.field.transform().scale;
  const auto points = sample_box(f.model.bounds(), 1.5, 20000, 9);
  std::size_t clear = 0;
  for (const Vec3& p : points) {
    const auto c = classify(f.out.field, p, FallbackPolicy::OnSurface);
    const auto again = classify(f.out.field, p, FallbackPolicy::OnSurface);
    EXPECT_EQ(c.value, again.value);
    EXPECT_EQ(c.label, again.label);
    if (c.label == Label::OnSurface) continue;
    EXPECT_FALSE(c.used_fallback);
    if (closest_point_distance(f.model, p).distance <= thickness) continue;
    ++clear;
    EXPECT_EQ(is_inside(c.label), oracle_inside(f.model, p));
  }
  EXPECT_GT(clear, points.size() * 9 / 10);

  // The band's share depends on how much of the box hugs the surface; in a
  // box four times the model it is below 0.1%.
  std::size_t banded = 0;
  const auto wide = sample_box(f.model.bounds(), 4.0, 20000, 10);
  for (const Vec3& p : wide) banded += classify(f.out.field, p, FallbackPolicy::OnSurface).label == Label::OnSurface;
  EXPECT_LE(banded, wide.size() / 1000);
}

TEST(ClassifyBatch, EmptyAndExact) {
  const auto& f = torus_k5();
  const auto empty = classify_batch(f.out.field, {}, FallbackPolicy::OnSurface, &f.model);
  EXPECT_TRUE(empty.results.empty());
  EXPECT_EQ(empty.summary.count, 0u);
  EXPECT_EQ(empty.summary.mean_micros, 0.0);

  const auto points = sample_box(f.model.bounds(), 1.2, 5000, 3);
  const auto exact = classify_batch(f.out.field, points, FallbackPolicy::Exact, &f.model);
  ASSERT_TRUE(exact.summary.has_agreement);
  EXPECT_EQ(exact.summary.agreement, 1.0);
  const auto shell = classify_batch(f.out.field, points, FallbackPolicy::OnSurface, &f.model);
  EXPECT_GE(shell.summary.agreement, 0.99);
  EXPECT_EQ(shell.summary.fallback_rate, exact.summary.fallback_rate);
  for (std::size_t i = 0; i < points.size(); ++i) {
    EXPECT_EQ(shell.results[i].value, classify(f.out.field, points[i], FallbackPolicy::OnSurface).value);
  }
}

TEST(SampleBox, DeterministicAndBounded) {
  Aabb box;
  box.extend(Vec3(0, 0, 0));
  box.extend(Vec3(2, 1, 1));
  const auto a = sample_box(box, 3.0, 1000, 7);
  EXPECT_EQ(a, sample_box(box, 3.0, 1000, 7));
  for (const Vec3& p : a) {
    EXPECT_GE(p.x(), 1.0 - 3.0);
    EXPECT_LE(p.x(), 1.0 + 3.0);
    EXPECT_LE(std::abs(p.y() - 0.5), 1.5);
  }
}

TEST(Bench, FallbackRateFallsWithBoxSize) {
  const auto& f = torus_k5();
  const auto rows = bench_compare(f.out.field, f.model, {1, 1.5, 2, 3}, 20000, 1);
  ASSERT_EQ(rows.size(), 12u);
  std::vector<double> rate;
  for (const auto& r : rows) {
    if (r.backend == "shell") rate.push_back(r.fallback_rate);
    if (r.backend == "exact" || r.backend == "shell+exact") EXPECT_EQ(r.agreement, 1.0);
  }
  ASSERT_EQ(rate.size(), 4u);
  for (std::size_t i = 1; i < rate.size(); ++i) EXPECT_LT(rate[i], rate[i - 1]);

  const auto path = its::testing::scratch_dir() / "bench.csv";
  write_bench_csv(rows, path);
  EXPECT_EQ(count_lines(path), rows.size() + 1);
  write_bench_csv(bench_compare(f.out.field, f.model, {1, 2}, 0, 1), path);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "boxSize,backend,meanMicros,fallbackRate,agreement");
}

TEST(PointsIo, ReadAndWrite) {
  const auto path = its::testing::scratch_dir() / "points.txt";
  std::ofstream(path) << "0 0 0\n1.5 -2 3e-1\n\n";
  const auto pts = read_points(path);
  ASSERT_EQ(pts.size(), 2u);
  EXPECT_EQ(pts[1], Vec3(1.5, -2, 0.3));
  std::ofstream(path) << "1 2\n";
  EXPECT_THROW(read_points(path), Error);
  EXPECT_THROW(read_points(its::testing::scratch_dir() / "missing.txt"), Error);

  const auto& f = torus_k5();
  const auto batch = classify_batch(f.out.field, pts, FallbackPolicy::OnSurface);
  const auto csv = its::testing::scratch_dir() / "results.csv";
  write_results_csv(pts, batch.results, csv);
  EXPECT_EQ(count_lines(csv), 3u);
}
