#include "shapes.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <set>

#include "its/extract.hpp"

namespace its::testing {

TriangleMesh make_box(const Vec3& lo, const Vec3& hi) {
  std::vector<Vec3> v;
  for (int i = 0; i < 8; ++i) {
    v.emplace_back(i & 1 ? hi.x() : lo.x(), i & 2 ? hi.y() : lo.y(), i & 4 ? hi.z() : lo.z());
  }
  std::vector<Face> f = {{0, 2, 1}, {1, 2, 3}, {4, 5, 6}, {5, 7, 6}, {0, 1, 4}, {1, 5, 4},
                         {2, 6, 3}, {3, 6, 7}, {0, 4, 2}, {2, 4, 6}, {1, 3, 5}, {3, 7, 5}};
  return TriangleMesh(std::move(v), std::move(f));
}

TriangleMesh make_icosphere(int level, double radius, const Vec3& center) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> v = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                         {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  for (auto& p : v) p.normalize();
  std::vector<Face> f = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
                         {11, 10, 2}, {10, 7, 6}, {7, 1, 8},   {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
                         {3, 8, 9},  {4, 9, 5},  {2, 4, 11},  {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
  for (int l = 0; l < level; ++l) {
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> mid;
    const auto midpoint = [&](std::uint32_t a, std::uint32_t b) {
      const auto key = std::minmax(a, b);
      auto [it, inserted] = mid.try_emplace({key.first, key.second}, static_cast<std::uint32_t>(v.size()));
      if (inserted) v.push_back((v[a] + v[b]).normalized());
      return it->second;
    };
    std::vector<Face> next;
    for (const Face& t3 : f) {
      const auto a = midpoint(t3[0], t3[1]);
      const auto b = midpoint(t3[1], t3[2]);
      const auto c = midpoint(t3[2], t3[0]);
      next.push_back({t3[0], a, c});
      next.push_back({t3[1], b, a});
      next.push_back({t3[2], c, b});
      next.push_back({a, b, c});
    }
    f = std::move(next);
  }
  for (auto& p : v) p = center + radius * p;
  return TriangleMesh(std::move(v), std::move(f));
}

TriangleMesh make_bumpy_sphere(int level, double amplitude, double frequency) {
  const TriangleMesh sphere = make_icosphere(level);
  std::vector<Vec3> v(sphere.vertices().begin(), sphere.vertices().end());
  for (auto& p : v) {
    p *= 1.0 + amplitude * std::sin(frequency * p.x()) * std::sin(frequency * p.y()) * std::sin(frequency * p.z());
  }
  return TriangleMesh(std::move(v), std::vector<Face>(sphere.faces().begin(), sphere.faces().end()));
}

TriangleMesh make_torus(double major, double minor, int nu, int nv) {
  std::vector<Vec3> v;
  std::vector<Face> f;
  const double two_pi = 2.0 * std::numbers::pi;
  for (int i = 0; i < nu; ++i) {
    const double u = two_pi * i / nu;
    for (int j = 0; j < nv; ++j) {
      const double w = two_pi * j / nv;
      const double r = major + minor * std::cos(w);
      v.emplace_back(r * std::cos(u), r * std::sin(u), minor * std::sin(w));
    }
  }
  const auto id = [&](int i, int j) { return static_cast<std::uint32_t>(((i + nu) % nu) * nv + (j + nv) % nv); };
  for (int i = 0; i < nu; ++i)
    for (int j = 0; j < nv; ++j) {
      f.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      f.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  return TriangleMesh(std::move(v), std::move(f));
}

TriangleMesh make_genus2(int resolution) {
  const auto torus = [](const Vec3& p, const Vec3& c) {
    const Vec3 q = p - c;
    const double ring = std::hypot(q.x(), q.y()) - 0.5;
    return std::hypot(ring, q.z()) - 0.2;
  };
  const Vec3 c1(-0.45, 0.0, 0.0);
  const Vec3 c2(0.45, 0.0, 0.0);
  Aabb box;
  box.lo = Vec3(-1.3, -0.8, -0.4);
  box.hi = Vec3(1.3, 0.8, 0.4);
  const auto field = [&](const Vec3& p) { return std::min(torus(p, c1), torus(p, c2)); };
  return marching_cubes(field, 0.0, resolution, box).mesh;
}

TriangleMesh make_cad_block() {
  // Occupancy on a 4 x 4 x 3 lattice.
  constexpr int nx = 4;
  constexpr int ny = 4;
  constexpr int nz = 3;
  const auto occupied = [](int i, int j, int k) {
    if (i < 0 || j < 0 || k < 0 || i >= nx || j >= ny || k >= nz) return false;
    if (k < 2) return !(i >= 1 && i <= 2 && j >= 1 && j <= 2);  // slab with a hole
    return i >= 2 && j >= 2 && !(i == 2 && j == 2);              // raised L on one corner
  };
  std::map<std::array<int, 3>, std::uint32_t> index;
  std::vector<Vec3> v;
  std::vector<Face> f;
  const auto vid = [&](int x, int y, int z) {
    auto [it, inserted] = index.try_emplace({x, y, z}, static_cast<std::uint32_t>(v.size()));
    if (inserted) v.emplace_back(x, y, z);
    return it->second;
  };
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j)
      for (int k = 0; k < nz; ++k) {
        if (!occupied(i, j, k)) continue;
        for (int axis = 0; axis < 3; ++axis)
          for (int side = 0; side < 2; ++side) {
            std::array<int, 3> n{i, j, k};
            n[axis] += side ? 1 : -1;
            if (occupied(n[0], n[1], n[2])) continue;
            // Quad on the face, ordered counter-clockwise seen from outside.
            const int a1 = (axis + 1) % 3;
            const int a2 = (axis + 2) % 3;
            std::array<std::array<int, 3>, 4> q;
            for (int c = 0; c < 4; ++c) {
              std::array<int, 3> p{i, j, k};
              p[axis] += side;
              const int u = (c == 1 || c == 2) ? 1 : 0;
              const int w = (c >= 2) ? 1 : 0;
              p[a1] += u;
              p[a2] += w;
              q[c] = p;
            }
            std::array<std::uint32_t, 4> id{};
            for (int c = 0; c < 4; ++c) id[c] = vid(q[c][0], q[c][1], q[c][2]);
            if (side) {
              f.push_back({id[0], id[1], id[2]});
              f.push_back({id[0], id[2], id[3]});
            } else {
              f.push_back({id[0], id[2], id[1]});
              f.push_back({id[0], id[3], id[2]});
            }
          }
      }
  return TriangleMesh(std::move(v), std::move(f));
}

TriangleMesh make_soup(int level, double detach_fraction, std::uint64_t seed) {
  const TriangleMesh sphere = make_icosphere(level);
  std::vector<Vec3> v(sphere.vertices().begin(), sphere.vertices().end());
  std::vector<Face> f(sphere.faces().begin(), sphere.faces().end());
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (Face& t : f) {
    if (u(rng) < 0.5) std::swap(t[1], t[2]);
    if (u(rng) < detach_fraction) {
      for (auto& idx : t) {
        v.push_back(v[idx]);
        idx = static_cast<std::uint32_t>(v.size() - 1);
      }
    }
  }
  return TriangleMesh(std::move(v), std::move(f));
}

TriangleMesh make_plane_grid(int n) {
  std::vector<Vec3> v;
  std::vector<Face> f;
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) v.emplace_back(static_cast<double>(i) / n, static_cast<double>(j) / n, 0.0);
  const auto id = [&](int i, int j) { return static_cast<std::uint32_t>(j * (n + 1) + i); };
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      f.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      f.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  return TriangleMesh(std::move(v), std::move(f));
}

std::filesystem::path scratch_dir() {
  const auto dir = std::filesystem::temp_directory_path() / "its_tests";
  std::filesystem::create_directories(dir);
  return dir;
}

std::filesystem::path write_temp_obj(const TriangleMesh& mesh, const std::string& name) {
  const auto path = scratch_dir() / name;
  save_obj(mesh, path);
  return path;
}

}  // namespace its::testing
