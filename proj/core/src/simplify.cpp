#include "its/simplify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <queue>

#include <Eigen/Eigenvalues>

namespace its {

Quadric Quadric::plane(const Vec3& n, double d) {
  const Eigen::Vector4d p(n.x(), n.y(), n.z(), d);
  return {p * p.transpose()};
}

double Quadric::error(const Vec3& v) const {
  const Eigen::Vector4d h(v.x(), v.y(), v.z(), 1.0);
  return h.dot(q * h);
}

std::vector<Quadric> compute_quadrics(const TriangleMesh& mesh) {
  std::vector<Quadric> out(mesh.vertex_count());
  for (std::size_t f = 0; f < mesh.face_count(); ++f) {
    const Triangle t = mesh.triangle(f);
    const Vec3 n = (t[1] - t[0]).cross(t[2] - t[0]).normalized();
    const Quadric q = Quadric::plane(n, -n.dot(t[0]));
    for (auto v : mesh.faces()[f]) out[v] += q;
  }
  return out;
}

Vec3 optimal_contraction(const Quadric& q, const Vec3& a, const Vec3& b) {
  const Vec3 mid = 0.5 * (a + b);
  const double ea = q.error(a);
  const double eb = q.error(b);
  const double em = q.error(mid);
  Vec3 fallback = mid;
  double best = em;
  if (ea < best) {
    fallback = a;
    best = ea;
  }
  if (eb < best) {
    fallback = b;
    best = eb;
  }
  const Eigen::Matrix3d m = q.q.topLeftCorner<3, 3>();
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(m, Eigen::EigenvaluesOnly);
  const double lmin = eig.eigenvalues()(0);
  const double lmax = eig.eigenvalues()(2);
  if (lmin > 0.0 && lmax / lmin < 1e8) {
    const Vec3 x = m.ldlt().solve(-q.q.topRightCorner<3, 1>());
    if (x.allFinite() && q.error(x) <= best) return x;
  }
  return fallback;
}

std::string to_string(SimplifyMode mode) {
  switch (mode) {
    case SimplifyMode::Plain:
      return "plain";
    case SimplifyMode::Constrained:
      return "constrained";
    case SimplifyMode::Global:
      return "global";
  }
  return "unknown";
}

SimplifyMode parse_simplify_mode(const std::string& text) {
  if (text == "plain") return SimplifyMode::Plain;
  if (text == "constrained") return SimplifyMode::Constrained;
  if (text == "global" || text == "global_term") return SimplifyMode::Global;
  throw Error("unknown simplification mode '" + text + "' (expected constrained, global or plain)");
}

double max_abs_field_on_vertices(const ImplicitField& field, const TriangleMesh& model_mesh) {
  double m = 0.0;
  for (const Vec3& v : model_mesh.vertices()) m = std::max(m, std::abs(field.evaluate_model(v)));
  return m;
}

namespace {

constexpr double kBoundaryWeight = 1e3;

struct HeapEntry {
  double priority;
  std::uint64_t edge;
  std::uint32_t u;
  std::uint32_t v;
  std::uint32_t version_u;
  std::uint32_t version_v;
  Vec3 target;
  double value;
};

struct EntryGreater {
  bool operator()(const HeapEntry& a, const HeapEntry& b) const {
    if (a.priority != b.priority) return a.priority > b.priority;
    return a.edge > b.edge;
  }
};

std::uint64_t edge_key(std::uint32_t a, std::uint32_t b) {
  if (a > b) std::swap(a, b);
  return (std::uint64_t{a} << 32) | b;
}

class Collapser {
 public:
  Collapser(const TriangleMesh& mesh, const ImplicitField* field, const SimplifyOptions& options)
      : field_(field), options_(options) {
    const UnitTransform t = field ? field->transform() : UnitTransform{};
    transform_ = t;
    for (const Vec3& p : mesh.vertices()) pos_.push_back(t.to_unit(p));
    faces_.assign(mesh.faces().begin(), mesh.faces().end());
    face_alive_.assign(faces_.size(), 1);
    alive_faces_ = faces_.size();
    vertex_faces_.resize(pos_.size());
    for (std::uint32_t f = 0; f < faces_.size(); ++f)
      for (auto v : faces_[f]) vertex_faces_[v].push_back(f);
    vertex_alive_.assign(pos_.size(), 1);
    version_.assign(pos_.size(), 0);
    locked_.assign(pos_.size(), 0);
    boundary_.assign(pos_.size(), 0);

    const TriangleMesh unit(pos_, faces_);
    quadrics_ = compute_quadrics(unit);

    // Edge incidence: boundary constraints and non-manifold locks.
    std::map<std::uint64_t, std::vector<std::uint32_t>> edge_faces;
    for (std::uint32_t f = 0; f < faces_.size(); ++f)
      for (int k = 0; k < 3; ++k) edge_faces[edge_key(faces_[f][k], faces_[f][(k + 1) % 3])].push_back(f);
    double mean_area = 0.0;
    for (std::uint32_t f = 0; f < faces_.size(); ++f) mean_area += face_area(f);
    mean_area /= std::max<std::size_t>(1, faces_.size());
    for (const auto& [key, fs] : edge_faces) {
      const auto a = static_cast<std::uint32_t>(key >> 32);
      const auto b = static_cast<std::uint32_t>(key & 0xffffffffu);
      if (fs.size() > 2) {
        locked_[a] = locked_[b] = 1;
      } else if (fs.size() == 1) {
        boundary_[a] = boundary_[b] = 1;
        const Vec3 n = face_normal(fs[0]);
        const Vec3 m = (pos_[b] - pos_[a]).cross(n);
        if (n.norm() == 0.0 || m.norm() == 0.0) continue;
        const Vec3 mn = m.normalized();
        Quadric q = Quadric::plane(mn, -mn.dot(pos_[a]));
        q *= kBoundaryWeight * mean_area;
        quadrics_[a] += q;
        quadrics_[b] += q;
      }
    }
  }

  SimplifyResult run() {
    SimplifyReport& report = report_;
    report.initial_faces = alive_faces_;
    report.mode = options_.mode;
    report.gamma = options_.mode == SimplifyMode::Global ? options_.gamma : 0.0;

    std::vector<std::uint64_t> edges;
    for (const Face& t : faces_)
      for (int k = 0; k < 3; ++k) edges.push_back(edge_key(t[k], t[(k + 1) % 3]));
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    for (auto key : edges) push_candidate(static_cast<std::uint32_t>(key >> 32), static_cast<std::uint32_t>(key));

    while (alive_faces_ > options_.target_faces && !heap_.empty()) {
      const HeapEntry e = heap_.top();
      heap_.pop();
      if (!vertex_alive_[e.u] || !vertex_alive_[e.v]) continue;
      if (version_[e.u] != e.version_u || version_[e.v] != e.version_v) continue;
      const bool inside = inside_shell(e.value);
      if (options_.mode == SimplifyMode::Constrained && !inside) {
        ++report.rejected;
        continue;
      }
      if (!collapse_allowed(e.u, e.v, e.target)) {
        ++report.topology_rejected;
        continue;
      }
      apply(e.u, e.v, e.target);
      ++report.accepted;
      report.max_abs_f = std::max(report.max_abs_f, std::abs(e.value));
      report.log.push_back({e.u, e.v, e.target, e.value, e.priority, inside});
      for (auto w : neighbors(e.u)) push_candidate(e.u, w);
    }
    report.exhausted = alive_faces_ > options_.target_faces;
    report.final_faces = alive_faces_;
    return {build_output(), report_};
  }

 private:
  double face_area(std::uint32_t f) const { return 0.5 * face_normal(f).norm(); }
  Vec3 face_normal(std::uint32_t f) const {
    const auto& t = faces_[f];
    return (pos_[t[1]] - pos_[t[0]]).cross(pos_[t[2]] - pos_[t[0]]);
  }

  bool inside_shell(double value) const {
    if (!field_ || !field_->shell()) return false;
    return field_->shell()->eps1 < value && value < field_->shell()->eps2;
  }

  std::vector<std::uint32_t> neighbors(std::uint32_t v) const {
    std::vector<std::uint32_t> out;
    for (auto f : vertex_faces_[v]) {
      if (!face_alive_[f]) continue;
      for (auto w : faces_[f])
        if (w != v) out.push_back(w);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  void push_candidate(std::uint32_t a, std::uint32_t b) {
    if (locked_[a] || locked_[b]) return;
    const Quadric q = quadrics_[a] + quadrics_[b];
    const Vec3 target = optimal_contraction(q, pos_[a], pos_[b]);
    const double cost = q.error(target);
    const double value = field_ ? field_->evaluate(target) : 0.0;
    double priority = cost;
    if (options_.mode == SimplifyMode::Global) priority = cost + options_.gamma * value * value;
    if (options_.mode == SimplifyMode::Constrained && !inside_shell(value)) {
      ++report_.rejected;
      return;
    }
    heap_.push({priority, edge_key(a, b), a, b, version_[a], version_[b], target, value});
  }

  bool collapse_allowed(std::uint32_t u, std::uint32_t v, const Vec3& target) const {
    // Faces on the edge; more than two means a non-manifold edge.
    std::vector<std::uint32_t> opposite;
    for (auto f : vertex_faces_[u]) {
      if (!face_alive_[f]) continue;
      const auto& t = faces_[f];
      if (t[0] != v && t[1] != v && t[2] != v) continue;
      for (auto w : t)
        if (w != u && w != v) opposite.push_back(w);
    }
    if (opposite.empty() || opposite.size() > 2) return false;
    // Link condition: common neighbours are exactly the opposite vertices.
    const auto nu = neighbors(u);
    const auto nv = neighbors(v);
    std::vector<std::uint32_t> common;
    std::set_intersection(nu.begin(), nu.end(), nv.begin(), nv.end(), std::back_inserter(common));
    std::sort(opposite.begin(), opposite.end());
    if (common != opposite) return false;
    // An interior edge between two boundary vertices would pinch the boundary.
    if (opposite.size() == 2 && boundary_[u] && boundary_[v]) return false;
    // Keep at least a closed tetrahedron's worth of vertices in the link.
    if (opposite.size() == 2 && nu.size() <= 3 && nv.size() <= 3) return false;
    // No surviving face may flip or collapse to zero area.
    for (auto w : {u, v}) {
      for (auto f : vertex_faces_[w]) {
        if (!face_alive_[f]) continue;
        const auto& t = faces_[f];
        const bool has_u = t[0] == u || t[1] == u || t[2] == u;
        const bool has_v = t[0] == v || t[1] == v || t[2] == v;
        if (has_u && has_v) continue;
        const Vec3 before = face_normal(f);
        std::array<Vec3, 3> p{pos_[t[0]], pos_[t[1]], pos_[t[2]]};
        for (int k = 0; k < 3; ++k)
          if (t[k] == w) p[k] = target;
        const Vec3 after = (p[1] - p[0]).cross(p[2] - p[0]);
        if (after.dot(before) <= 0.0) return false;
        if (after.norm() <= 1e-12 * before.norm()) return false;
      }
    }
    return true;
  }

  void apply(std::uint32_t u, std::uint32_t v, const Vec3& target) {
    pos_[u] = target;
    quadrics_[u] += quadrics_[v];
    boundary_[u] = boundary_[u] || boundary_[v];
    for (auto f : vertex_faces_[v]) {
      if (!face_alive_[f]) continue;
      auto& t = faces_[f];
      const bool has_u = t[0] == u || t[1] == u || t[2] == u;
      if (has_u) {
        face_alive_[f] = 0;
        --alive_faces_;
        continue;
      }
      for (auto& w : t)
        if (w == v) w = u;
      vertex_faces_[u].push_back(f);
    }
    auto& fu = vertex_faces_[u];
    fu.erase(std::remove_if(fu.begin(), fu.end(), [&](std::uint32_t f) { return !face_alive_[f]; }), fu.end());
    std::sort(fu.begin(), fu.end());
    fu.erase(std::unique(fu.begin(), fu.end()), fu.end());
    vertex_faces_[v].clear();
    vertex_alive_[v] = 0;
    ++version_[u];
    ++version_[v];
  }

  TriangleMesh build_output() const {
    std::vector<std::uint32_t> remap(pos_.size(), std::numeric_limits<std::uint32_t>::max());
    std::vector<Vec3> vertices;
    std::vector<Face> faces;
    for (std::uint32_t f = 0; f < faces_.size(); ++f) {
      if (!face_alive_[f]) continue;
      Face out{};
      for (int k = 0; k < 3; ++k) {
        const auto v = faces_[f][k];
        if (remap[v] == std::numeric_limits<std::uint32_t>::max()) {
          remap[v] = static_cast<std::uint32_t>(vertices.size());
          vertices.push_back(transform_.to_model(pos_[v]));
        }
        out[k] = remap[v];
      }
      faces.push_back(out);
    }
    return TriangleMesh(std::move(vertices), std::move(faces));
  }

  const ImplicitField* field_;
  SimplifyOptions options_;
  UnitTransform transform_;
  std::vector<Vec3> pos_;
  std::vector<Face> faces_;
  std::vector<char> face_alive_;
  std::size_t alive_faces_ = 0;
  std::vector<std::vector<std::uint32_t>> vertex_faces_;
  std::vector<char> vertex_alive_;
  std::vector<std::uint32_t> version_;
  std::vector<char> locked_;
  std::vector<char> boundary_;
  std::vector<Quadric> quadrics_;
  std::priority_queue<HeapEntry, std::vector<HeapEntry>, EntryGreater> heap_;
  SimplifyReport report_;
};

}  // namespace

SimplifyResult simplify(const TriangleMesh& model_mesh, const ImplicitField* field,
                        const SimplifyOptions& options) {
  if (options.target_faces < 4) throw Error("target face count must be at least 4");
  if (options.mode != SimplifyMode::Plain && field == nullptr) {
    throw Error(to_string(options.mode) + " simplification requires an implicit field");
  }
  if (options.mode == SimplifyMode::Constrained && !field->shell()) {
    throw Error("constrained simplification requires a shell interval");
  }
  if (field) {
    const Aabb& b = model_mesh.bounds();
    const Vec3 lo = field->transform().to_unit(b.lo);
    const Vec3 hi = field->transform().to_unit(b.hi);
    constexpr double tol = 1e-9;
    if ((lo.array() < -tol).any() || (hi.array() > 1.0 + tol).any()) {
      throw Error("mesh does not lie inside the field's unit box; was the field built from this model?");
    }
  }
  Collapser c(model_mesh, field, options);
  return c.run();
}

}  // namespace its
