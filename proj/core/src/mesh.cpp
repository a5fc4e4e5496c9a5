#include "its/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "its/bvh.hpp"

namespace its {
namespace {

// Far-field acceptance ratio for the hierarchical winding number: a node is
// replaced by its dipole term when |p - center| > kFarField * radius.
constexpr double kFarField = 2.0;

}  // namespace

TriangleMesh::TriangleMesh() : bvh_(std::make_shared<Bvh>()) {}

TriangleMesh::TriangleMesh(std::vector<Vec3> vertices, std::vector<Face> faces)
    : vertices_(std::move(vertices)) {
  for (const Vec3& v : vertices_) {
    if (!v.allFinite()) throw Error("mesh vertex has a non-finite coordinate");
    bounds_.extend(v);
  }
  const double scale = bounds_.empty() ? 0.0 : bounds_.extent().maxCoeff();
  // Relative cutoff so that exactly collinear input rounded to nearby doubles
  // still counts as zero area.
  const double area_floor = 1e-14 * scale * scale;

  faces_.reserve(faces.size());
  for (std::size_t f = 0; f < faces.size(); ++f) {
    const Face& t = faces[f];
    for (auto idx : t) {
      if (idx >= vertices_.size()) {
        throw Error("face " + std::to_string(f) + " references vertex " + std::to_string(idx) +
                    " but the mesh has " + std::to_string(vertices_.size()) + " vertices");
      }
    }
    const Vec3 n = (vertices_[t[1]] - vertices_[t[0]]).cross(vertices_[t[2]] - vertices_[t[0]]);
    if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2] || 0.5 * n.norm() <= area_floor) {
      dropped_.push_back(f);
      continue;
    }
    faces_.push_back(t);
  }
  bvh_ = std::make_shared<Bvh>(vertices_, faces_);
}

double TriangleMesh::face_area(std::size_t f) const {
  const Triangle t = triangle(f);
  return 0.5 * (t[1] - t[0]).cross(t[2] - t[0]).norm();
}

double TriangleMesh::surface_area() const {
  double total = 0.0;
  for (std::size_t f = 0; f < faces_.size(); ++f) total += face_area(f);
  return total;
}

std::pair<TriangleMesh, UnitTransform> normalize_to_unit(const TriangleMesh& mesh, double margin) {
  if (mesh.empty()) throw Error("cannot normalize an empty mesh");
  if (!(margin >= 0.0 && margin < 0.25)) throw Error("margin must lie in [0, 0.25)");
  const Aabb& box = mesh.bounds();
  const double longest = box.extent().maxCoeff();
  if (!(longest > 0.0)) throw Error("mesh bounding box has zero extent");
  UnitTransform transform;
  transform.scale = (1.0 - 2.0 * margin) / longest;
  transform.translate = Vec3::Constant(0.5) - transform.scale * box.center();
  return {apply_to_unit(mesh, transform), transform};
}

TriangleMesh apply_to_unit(const TriangleMesh& mesh, const UnitTransform& transform) {
  std::vector<Vec3> vertices;
  vertices.reserve(mesh.vertex_count());
  for (const Vec3& v : mesh.vertices()) vertices.push_back(transform.to_unit(v));
  return {std::move(vertices), {mesh.faces().begin(), mesh.faces().end()}};
}

TriangleMesh apply_to_model(const TriangleMesh& mesh, const UnitTransform& transform) {
  std::vector<Vec3> vertices;
  vertices.reserve(mesh.vertex_count());
  for (const Vec3& v : mesh.vertices()) vertices.push_back(transform.to_model(v));
  return {std::move(vertices), {mesh.faces().begin(), mesh.faces().end()}};
}

// Van Oosterom and Strackee.
double solid_angle(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& p) {
  const Vec3 x = a - p;
  const Vec3 y = b - p;
  const Vec3 z = c - p;
  const double lx = x.norm();
  const double ly = y.norm();
  const double lz = z.norm();
  const double numerator = x.dot(y.cross(z));
  const double denominator = lx * ly * lz + x.dot(y) * lz + y.dot(z) * lx + z.dot(x) * ly;
  return 2.0 * std::atan2(numerator, denominator);
}

double winding_number_exact(const TriangleMesh& mesh, const Vec3& p) {
  double total = 0.0;
  for (std::size_t f = 0; f < mesh.face_count(); ++f) {
    const Triangle t = mesh.triangle(f);
    total += solid_angle(t[0], t[1], t[2], p);
  }
  return total / (4.0 * std::numbers::pi);
}

double winding_number(const TriangleMesh& mesh, const Vec3& p) {
  const Bvh& bvh = mesh.bvh();
  if (bvh.empty()) return 0.0;
  const auto nodes = bvh.nodes();
  const auto order = bvh.face_order();
  double total = 0.0;
  std::uint32_t stack[128];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Bvh::Node& node = nodes[stack[--top]];
    const Vec3 r = node.dipole_center - p;
    const double dist = r.norm();
    if (dist > kFarField * node.radius && !node.box.contains(p)) {
      total += r.dot(node.area_normal) / (dist * dist * dist);
      continue;
    }
    if (node.leaf()) {
      for (std::uint32_t i = node.offset; i < node.offset + node.count; ++i) {
        const Triangle t = mesh.triangle(order[i]);
        total += solid_angle(t[0], t[1], t[2], p);
      }
      continue;
    }
    const auto self = static_cast<std::uint32_t>(&node - nodes.data());
    stack[top++] = node.offset;
    stack[top++] = self + 1;
  }
  return total / (4.0 * std::numbers::pi);
}

// Ericson, Real-Time Collision Detection, 5.1.5.
Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 ab = b - a;
  const Vec3 ac = c - a;
  const Vec3 ap = p - a;
  const double d1 = ab.dot(ap);
  const double d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return a;

  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp);
  const double d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return b;

  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) return a + (d1 / (d1 - d3)) * ab;

  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp);
  const double d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return c;

  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) return a + (d2 / (d2 - d6)) * ac;

  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    return b + ((d4 - d3) / ((d4 - d3) + (d5 - d6))) * (c - b);
  }
  const double denom = 1.0 / (va + vb + vc);
  return a + ab * (vb * denom) + ac * (vc * denom);
}

ClosestPoint closest_point_distance(const TriangleMesh& mesh, const Vec3& p) {
  const Bvh& bvh = mesh.bvh();
  if (bvh.empty()) throw Error("closest point query on an empty mesh");
  const auto nodes = bvh.nodes();
  const auto order = bvh.face_order();

  ClosestPoint best;
  double best_sq = std::numeric_limits<double>::infinity();
  struct Entry {
    std::uint32_t node;
    double bound;
  };
  Entry stack[128];
  int top = 0;
  stack[top++] = {0, nodes[0].box.squared_distance(p)};
  while (top > 0) {
    const Entry e = stack[--top];
    if (e.bound >= best_sq) continue;
    const Bvh::Node& node = nodes[e.node];
    if (node.leaf()) {
      for (std::uint32_t i = node.offset; i < node.offset + node.count; ++i) {
        const std::uint32_t f = order[i];
        const Triangle t = mesh.triangle(f);
        const Vec3 q = closest_point_on_triangle(p, t[0], t[1], t[2]);
        const double d = (q - p).squaredNorm();
        if (d < best_sq || (d == best_sq && f < best.face)) {
          best_sq = d;
          best.point = q;
          best.face = f;
        }
      }
      continue;
    }
    const std::uint32_t left = e.node + 1;
    const std::uint32_t right = node.offset;
    const double dl = nodes[left].box.squared_distance(p);
    const double dr = nodes[right].box.squared_distance(p);
    // Push the farther child first so the nearer one is visited next.
    if (dl < dr) {
      stack[top++] = {right, dr};
      stack[top++] = {left, dl};
    } else {
      stack[top++] = {left, dl};
      stack[top++] = {right, dr};
    }
  }
  best.distance = std::sqrt(best_sq);
  return best;
}

double signed_distance(const TriangleMesh& mesh, const Vec3& p, DistanceMode mode) {
  const double d = closest_point_distance(mesh, p).distance;
  if (mode == DistanceMode::Unsigned) return d;
  return winding_number(mesh, p) > 0.5 ? -d : d;
}

std::vector<SurfaceSample> sample_surface(const TriangleMesh& mesh, std::size_t n,
                                          std::uint64_t seed) {
  if (mesh.empty()) throw Error("cannot sample an empty mesh");
  std::vector<double> cumulative(mesh.face_count());
  double total = 0.0;
  for (std::size_t f = 0; f < mesh.face_count(); ++f) {
    total += mesh.face_area(f);
    cumulative[f] = total;
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<SurfaceSample> samples;
  samples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double pick = unit(rng) * total;
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), pick);
    const auto f = static_cast<std::uint32_t>(
        std::min<std::size_t>(it - cumulative.begin(), mesh.face_count() - 1));
    const double r1 = std::sqrt(unit(rng));
    const double r2 = unit(rng);
    SurfaceSample s;
    s.face = f;
    s.alpha = 1.0 - r1;
    s.beta = r1 * (1.0 - r2);
    const Triangle t = mesh.triangle(f);
    s.position = s.alpha * t[0] + s.beta * t[1] + (1.0 - s.alpha - s.beta) * t[2];
    samples.push_back(s);
  }
  return samples;
}

}  // namespace its
