#include "its/extremity.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>

#include "its/parallel.hpp"
#include "its/polynomial.hpp"

namespace its {
namespace {

using Poly2 = std::array<std::array<double, 4>, 4>;  // [i][j] alpha^i beta^j

Poly2 affine(double constant, double da, double db) {
  Poly2 p{};
  p[0][0] = constant;
  p[1][0] = da;
  p[0][1] = db;
  return p;
}

Poly2 multiply(const Poly2& x, const Poly2& y) {
  Poly2 out{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; i + j < 4; ++j) {
      if (x[i][j] == 0.0) continue;
      for (int k = 0; i + k < 4; ++k)
        for (int l = 0; i + j + k + l < 4 && j + l < 4; ++l) out[i + k][j + l] += x[i][j] * y[k][l];
    }
  return out;
}

void add_scaled(Poly2& out, const Poly2& x, double s) {
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) out[i][j] += s * x[i][j];
}

constexpr double kCubicNegligible = 1e-14;
constexpr double kDenominatorNegligible = 1e-12;
constexpr double kLeadingNegligible = 1e-12;
constexpr double kSimplexTolerance = 1e-10;
constexpr double kMergeDistance = 1e-9;
constexpr double kGradientTolerance = 1e-9;
constexpr int kFallbackGrid = 64;

// Ascending-power polynomial helpers for the elimination step.
using Poly1 = std::vector<double>;

Poly1 mul(const Poly1& x, const Poly1& y) {
  Poly1 out(x.size() + y.size() - 1, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < y.size(); ++j) out[i + j] += x[i] * y[j];
  return out;
}

void accumulate(Poly1& out, const Poly1& x, double s) {
  if (out.size() < x.size()) out.resize(x.size(), 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) out[i] += s * x[i];
}

bool in_simplex(double a, double b) {
  return a >= -kSimplexTolerance && b >= -kSimplexTolerance && a + b <= 1.0 + kSimplexTolerance;
}

std::array<double, 2> clamp_to_simplex(double a, double b) {
  a = std::max(a, 0.0);
  b = std::max(b, 0.0);
  const double s = a + b;
  if (s > 1.0) {
    a /= s;
    b /= s;
  }
  return {a, b};
}

void push_unique(std::vector<std::array<double, 2>>& points, std::array<double, 2> p) {
  for (const auto& q : points) {
    if (std::hypot(q[0] - p[0], q[1] - p[1]) <= kMergeDistance) return;
  }
  points.push_back(p);
}

// Newton on grad H = 0. Returns false if it fails to settle.
bool newton_2d(const BivariateCubic& h, double& a, double& b, int max_iterations) {
  for (int it = 0; it < max_iterations; ++it) {
    const auto g = h.gradient(a, b);
    const double gn = std::hypot(g[0], g[1]);
    if (gn <= 1e-15) return true;
    const auto hs = h.hessian(a, b);
    double j00 = hs[0];
    double j01 = hs[1];
    double j11 = hs[2];
    double det = j00 * j11 - j01 * j01;
    const double scale = j00 * j00 + 2.0 * j01 * j01 + j11 * j11;
    double da = 0.0;
    double db = 0.0;
    if (std::abs(det) > 1e-12 * scale) {
      da = (j11 * g[0] - j01 * g[1]) / det;
      db = (j00 * g[1] - j01 * g[0]) / det;
    } else {
      // Damped normal equations for a singular Hessian.
      const double mu = 1e-12 * (scale + 1e-300);
      const double m00 = j00 * j00 + j01 * j01 + mu;
      const double m01 = j00 * j01 + j01 * j11;
      const double m11 = j01 * j01 + j11 * j11 + mu;
      const double r0 = j00 * g[0] + j01 * g[1];
      const double r1 = j01 * g[0] + j11 * g[1];
      det = m00 * m11 - m01 * m01;
      if (det == 0.0) return false;
      da = (m11 * r0 - m01 * r1) / det;
      db = (m00 * r1 - m01 * r0) / det;
    }
    a -= da;
    b -= db;
    if (!std::isfinite(a) || !std::isfinite(b) || std::abs(a) > 4.0 || std::abs(b) > 4.0) return false;
    if (std::hypot(da, db) <= 1e-15) break;
  }
  const auto g = h.gradient(a, b);
  return std::hypot(g[0], g[1]) <= kGradientTolerance;
}

std::vector<std::array<double, 2>> grid_newton(const BivariateCubic& h) {
  std::vector<std::array<double, 2>> out;
  for (int i = 0; i < kFallbackGrid; ++i)
    for (int j = 0; i + j < kFallbackGrid; ++j) {
      double a = (i + 0.5) / kFallbackGrid;
      double b = (j + 0.5) / kFallbackGrid;
      if (a + b > 1.0) continue;
      if (!newton_2d(h, a, b, 50)) continue;
      if (in_simplex(a, b)) push_unique(out, clamp_to_simplex(a, b));
    }
  return out;
}

BivariateCubic transpose(const BivariateCubic& h) {
  BivariateCubic t;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) t.c[i][j] = h.c[j][i];
  return t;
}

// Closed form with alpha eliminated. Returns false when a degenerate regime
// requires the fallback.
bool closed_form(const BivariateCubic& h, std::vector<std::array<double, 2>>& out) {
  const GradientSystem gs = gradient_system(h);
  const auto& a = gs.a;
  const auto& b = gs.b;
  const bool use_alpha_eq = std::abs(a[0]) >= std::abs(b[0]);
  if (a[0] == 0.0 && b[0] == 0.0) return false;

  // alpha = N(beta) / D(beta)
  const Poly1 n{a[0] * b[5] - a[5] * b[0], a[0] * b[4] - a[4] * b[0], a[0] * b[1] - a[1] * b[0]};
  const Poly1 d{a[3] * b[0] - a[0] * b[3], a[2] * b[0] - a[0] * b[2]};
  const auto& g = use_alpha_eq ? a : b;
  const Poly1 beta{0.0, 1.0};
  const Poly1 dd = mul(d, d);
  const Poly1 nd = mul(n, d);
  Poly1 q;
  accumulate(q, mul(n, n), g[0]);
  accumulate(q, mul(mul(beta, beta), dd), g[1]);
  accumulate(q, mul(beta, nd), g[2]);
  accumulate(q, nd, g[3]);
  accumulate(q, mul(beta, dd), g[4]);
  accumulate(q, dd, g[5]);
  q.resize(5, 0.0);

  double qscale = 0.0;
  for (double v : q) qscale = std::max(qscale, std::abs(v));
  double nscale = 0.0;
  for (double v : n) nscale = std::max(nscale, std::abs(v));
  const double dscale = std::abs(d[0]) + std::abs(d[1]);
  const double ref = std::max(nscale, dscale);
  double gscale = 0.0;
  for (double v : g) gscale = std::max(gscale, std::abs(v));
  if (qscale <= kLeadingNegligible * ref * ref * gscale) return false;  // resultant vanishes

  const QuarticResult roots = solve_quartic_ex(q[4], q[3], q[2], q[1], q[0]);
  if (!roots.resolvent_converged) return false;
  for (double bt : roots.roots) {
    if (bt < -1e-6 || bt > 1.0 + 1e-6) continue;
    const double den = d[0] + d[1] * bt;
    if (std::abs(den) <= kDenominatorNegligible * std::max(dscale, 1e-300)) return false;
    double al = (n[0] + n[1] * bt + n[2] * bt * bt) / den;
    double be = bt;
    if (!std::isfinite(al)) return false;
    if (al < -1e-6 || al + be > 1.0 + 1e-6) continue;
    if (!newton_2d(h, al, be, 4)) return false;
    if (in_simplex(al, be)) push_unique(out, clamp_to_simplex(al, be));
  }
  return true;
}

BivariateCubic normalized(const BivariateCubic& h, double* scale_out) {
  double scale = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; i + j < 4; ++j)
      if (i + j > 0) scale = std::max(scale, std::abs(h.c[i][j]));
  *scale_out = scale;
  BivariateCubic out = h;
  if (scale > 0.0) {
    for (auto& row : out.c)
      for (double& v : row) v /= scale;
  }
  return out;
}

}  // namespace

double BivariateCubic::value(double a, double b) const {
  double acc = 0.0;
  double ai = 1.0;
  for (int i = 0; i < 4; ++i) {
    double bj = 1.0;
    for (int j = 0; i + j < 4; ++j) {
      acc += c[i][j] * ai * bj;
      bj *= b;
    }
    ai *= a;
  }
  return acc;
}

std::array<double, 2> BivariateCubic::gradient(double a, double b) const {
  return {3 * c[3][0] * a * a + c[1][2] * b * b + 2 * c[2][1] * a * b + 2 * c[2][0] * a + c[1][1] * b + c[1][0],
          c[2][1] * a * a + 3 * c[0][3] * b * b + 2 * c[1][2] * a * b + c[1][1] * a + 2 * c[0][2] * b + c[0][1]};
}

std::array<double, 3> BivariateCubic::hessian(double a, double b) const {
  return {6 * c[3][0] * a + 2 * c[2][1] * b + 2 * c[2][0], 2 * c[2][1] * a + 2 * c[1][2] * b + c[1][1],
          2 * c[1][2] * a + 6 * c[0][3] * b + 2 * c[0][2]};
}

BivariateCubic restrict_to_triangle(const Trilinear& t, const Triangle& local) {
  const Vec3& p1 = local[0];
  const Vec3& p2 = local[1];
  const Vec3& p3 = local[2];
  const Poly2 x = affine(p3.x(), p1.x() - p3.x(), p2.x() - p3.x());
  const Poly2 y = affine(p3.y(), p1.y() - p3.y(), p2.y() - p3.y());
  const Poly2 z = affine(p3.z(), p1.z() - p3.z(), p2.z() - p3.z());
  const Poly2 xy = multiply(x, y);
  Poly2 h{};
  h[0][0] = t[0];
  add_scaled(h, x, t[1]);
  add_scaled(h, y, t[2]);
  add_scaled(h, z, t[3]);
  add_scaled(h, xy, t[4]);
  add_scaled(h, multiply(y, z), t[5]);
  add_scaled(h, multiply(x, z), t[6]);
  add_scaled(h, multiply(xy, z), t[7]);
  return {h};
}

GradientSystem gradient_system(const BivariateCubic& h) {
  const auto& c = h.c;
  GradientSystem g;
  g.a = {3 * c[3][0], c[1][2], 2 * c[2][1], 2 * c[2][0], c[1][1], c[1][0]};
  g.b = {c[2][1], 3 * c[0][3], 2 * c[1][2], c[1][1], 2 * c[0][2], c[0][1]};
  return g;
}

std::vector<std::array<double, 2>> interior_critical_points(const BivariateCubic& raw,
                                                            CriticalPointStats* stats) {
  double scale = 0.0;
  const BivariateCubic h = normalized(raw, &scale);
  std::vector<std::array<double, 2>> out;
  if (scale == 0.0) return out;  // constant

  const auto& c = h.c;
  const double cubic = std::max({std::abs(c[3][0]), std::abs(c[2][1]), std::abs(c[1][2]), std::abs(c[0][3])});
  if (cubic <= kCubicNegligible) {
    // Linear gradient: [2c20 c11; c11 2c02] x = -[c10; c01].
    const double m00 = 2 * c[2][0];
    const double m01 = c[1][1];
    const double m11 = 2 * c[0][2];
    const double det = m00 * m11 - m01 * m01;
    if (std::abs(det) <= 1e-14) return out;  // no isolated critical point
    const double a = (-c[1][0] * m11 + c[0][1] * m01) / det;
    const double b = (-c[0][1] * m00 + c[1][0] * m01) / det;
    if (in_simplex(a, b)) out.push_back(clamp_to_simplex(a, b));
    return out;
  }

  // Eliminate the variable whose square carries the larger coefficients.
  const GradientSystem gs = gradient_system(h);
  const bool swap = std::max(std::abs(gs.a[1]), std::abs(gs.b[1])) > std::max(std::abs(gs.a[0]), std::abs(gs.b[0]));
  const BivariateCubic hh = swap ? transpose(h) : h;
  std::vector<std::array<double, 2>> found;
  if (closed_form(hh, found)) {
    for (auto p : found) out.push_back(swap ? std::array<double, 2>{p[1], p[0]} : p);
    return out;
  }
  if (stats) ++stats->fallbacks;
  return grid_newton(h);
}

std::vector<std::array<double, 2>> interior_critical_points(const Trilinear& t, const Triangle& local) {
  return interior_critical_points(restrict_to_triangle(t, local));
}

std::vector<std::array<double, 2>> boundary_critical_points(const BivariateCubic& raw) {
  double scale = 0.0;
  const BivariateCubic h = normalized(raw, &scale);
  std::vector<std::array<double, 2>> out;
  if (scale == 0.0) return out;
  const auto& c = h.c;
  const auto accept = [](double t) { return t >= -kSimplexTolerance && t <= 1.0 + kSimplexTolerance; };
  // beta = 0
  for (double t : solve_quadratic(3 * c[3][0], 2 * c[2][0], c[1][0]))
    if (accept(t)) push_unique(out, clamp_to_simplex(t, 0.0));
  // alpha = 0
  for (double t : solve_quadratic(3 * c[0][3], 2 * c[0][2], c[0][1]))
    if (accept(t)) push_unique(out, clamp_to_simplex(0.0, t));
  // alpha = 1 - t, beta = t
  Poly1 g(4, 0.0);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; i + j < 4; ++j) {
      if (c[i][j] == 0.0) continue;
      Poly1 term{c[i][j]};
      for (int k = 0; k < i; ++k) term = mul(term, {1.0, -1.0});
      for (int k = 0; k < j; ++k) term = mul(term, {0.0, 1.0});
      accumulate(g, term, 1.0);
    }
  for (double t : solve_quadratic(3 * g[3], 2 * g[2], g[1]))
    if (accept(t)) push_unique(out, clamp_to_simplex(1.0 - t, t));
  return out;
}

std::vector<std::array<double, 2>> boundary_critical_points(const Trilinear& t, const Triangle& local) {
  return boundary_critical_points(restrict_to_triangle(t, local));
}

namespace {

using Polygon = std::vector<Vec3>;

void split_polygon(const Polygon& poly, int axis, double plane, Polygon& left, Polygon& right) {
  left.clear();
  right.clear();
  bool any_below = false;
  bool any_above = false;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3& p = poly[i];
    const Vec3& q = poly[(i + 1) % n];
    const double sp = p[axis] - plane;
    const double sq = q[axis] - plane;
    any_below |= sp < 0.0;
    any_above |= sp > 0.0;
    if (sp <= 0.0) left.push_back(p);
    if (sp >= 0.0) right.push_back(p);
    if ((sp < 0.0 && sq > 0.0) || (sp > 0.0 && sq < 0.0)) {
      Vec3 x = p + (q - p) * (sp / (sp - sq));
      x[axis] = plane;
      left.push_back(x);
      right.push_back(x);
    }
  }
  if (!any_below) left.clear();
  if (!any_above) right.clear();
}

}  // namespace

std::vector<SubTriangle> split_triangle(const Triangle& tri, int height) {
  const double w = std::ldexp(1.0, -height);
  const double n = std::ldexp(1.0, height);
  std::vector<Polygon> pieces{Polygon{tri[0], tri[1], tri[2]}};
  Polygon left;
  Polygon right;
  for (int axis = 0; axis < 3; ++axis) {
    const double lo = std::min({tri[0][axis], tri[1][axis], tri[2][axis]});
    const double hi = std::max({tri[0][axis], tri[1][axis], tri[2][axis]});
    std::vector<Polygon> next;
    for (Polygon& piece : pieces) {
      Polygon current = std::move(piece);
      for (double i = std::floor(lo / w) + 1.0; i * w < hi; i += 1.0) {
        if (i * w <= lo) continue;
        split_polygon(current, axis, i * w, left, right);
        if (left.size() >= 3) next.push_back(left);
        current = right;
        if (current.size() < 3) break;
      }
      if (current.size() >= 3) next.push_back(std::move(current));
    }
    pieces = std::move(next);
  }

  std::vector<SubTriangle> out;
  for (const Polygon& poly : pieces) {
    Vec3 centroid = Vec3::Zero();
    for (const Vec3& p : poly) centroid += p;
    centroid /= static_cast<double>(poly.size());
    Lattice cell{};
    for (int a = 0; a < 3; ++a) {
      cell[a] = static_cast<std::uint32_t>(std::clamp(std::floor(centroid[a] / w), 0.0, n - 1.0));
    }
    for (std::size_t i = 1; i + 1 < poly.size(); ++i) {
      SubTriangle s;
      s.vertices = {poly[0], poly[i], poly[i + 1]};
      s.cell = cell;
      s.area = 0.5 * (poly[i] - poly[0]).cross(poly[i + 1] - poly[0]).norm();
      out.push_back(s);
    }
  }
  return out;
}

std::string to_string(CandidateKind kind) {
  switch (kind) {
    case CandidateKind::Interior:
      return "interior";
    case CandidateKind::Edge:
      return "edge";
    case CandidateKind::Vertex:
      return "vertex";
  }
  return "unknown";
}

namespace {

constexpr double kSliverArea = 1e-16;

struct FaceResult {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  std::size_t interior = 0;
  std::size_t edge = 0;
  std::size_t vertex = 0;
  std::size_t subs = 0;
  std::size_t fallbacks = 0;
  std::vector<CandidatePoint> candidates;
};

}  // namespace

ShellInterval compute_shell_interval(ImplicitField& field, const TriangleMesh& unit_mesh,
                                     std::vector<CandidatePoint>* candidates) {
  const int height = field.height();
  const double w = field.svo().cell_width(0);
  std::vector<FaceResult> results(unit_mesh.face_count());
  const bool collect = candidates != nullptr;

  parallel_for(unit_mesh.face_count(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t f = begin; f < end; ++f) {
      FaceResult& r = results[f];
      const auto subs = split_triangle(unit_mesh.triangle(f), height);
      r.subs = subs.size();
      for (std::size_t s = 0; s < subs.size(); ++s) {
        const SubTriangle& sub = subs[s];
        const std::array<double, 8> corners = field.lattice_cell_corner_values(sub.cell);
        const Vec3 origin(sub.cell[0] * w, sub.cell[1] * w, sub.cell[2] * w);
        Triangle local;
        for (int v = 0; v < 3; ++v) local[v] = (sub.vertices[v] - origin) / w;

        const auto emit = [&](double a, double b, CandidateKind kind) {
          const Vec3 l = a * local[0] + b * local[1] + (1.0 - a - b) * local[2];
          const double value = interpolate_corners(corners, l);
          r.lo = std::min(r.lo, value);
          r.hi = std::max(r.hi, value);
          if (collect) {
            CandidatePoint c;
            c.face = static_cast<std::uint32_t>(f);
            c.sub_triangle = static_cast<std::uint32_t>(s);
            c.alpha = a;
            c.beta = b;
            c.position = origin + w * l;
            c.kind = kind;
            c.value = value;
            r.candidates.push_back(c);
          }
        };
        emit(1.0, 0.0, CandidateKind::Vertex);
        emit(0.0, 1.0, CandidateKind::Vertex);
        emit(0.0, 0.0, CandidateKind::Vertex);
        r.vertex += 3;
        if (sub.area < kSliverArea) continue;

        const BivariateCubic h = restrict_to_triangle(trilinear_from_corners(corners), local);
        for (const auto& p : boundary_critical_points(h)) {
          emit(p[0], p[1], CandidateKind::Edge);
          ++r.edge;
        }
        CriticalPointStats stats;
        for (const auto& p : interior_critical_points(h, &stats)) {
          emit(p[0], p[1], CandidateKind::Interior);
          ++r.interior;
        }
        r.fallbacks += stats.fallbacks;
      }
    }
  });

  ShellInterval shell;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (FaceResult& r : results) {
    lo = std::min(lo, r.lo);
    hi = std::max(hi, r.hi);
    shell.interior_candidates += r.interior;
    shell.edge_candidates += r.edge;
    shell.vertex_candidates += r.vertex;
    shell.sub_triangles += r.subs;
    shell.fallbacks += r.fallbacks;
    if (collect) {
      candidates->insert(candidates->end(), r.candidates.begin(), r.candidates.end());
      std::vector<CandidatePoint>().swap(r.candidates);
    }
  }
  if (!std::isfinite(lo)) lo = hi = 0.0;
  shell.eps1 = lo - kShellPadding;
  shell.eps2 = hi + kShellPadding;
  field.set_shell({shell.eps1, shell.eps2});
  return shell;
}

void write_candidates_csv(const std::vector<CandidatePoint>& candidates,
                          const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << std::setprecision(17);
  out << "faceId,kind,alpha,beta,x,y,z,f\n";
  for (const auto& c : candidates) {
    out << c.face << ',' << to_string(c.kind) << ',' << c.alpha << ',' << c.beta << ',' << c.position.x()
        << ',' << c.position.y() << ',' << c.position.z() << ',' << c.value << '\n';
  }
}

}  // namespace its
