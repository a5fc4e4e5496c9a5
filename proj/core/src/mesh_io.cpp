#include <algorithm>
#include <charconv>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <string_view>

#include "its/mesh.hpp"

namespace its {
namespace {

std::string lower_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

struct RawMesh {
  std::vector<Vec3> vertices;
  std::vector<Face> faces;
  std::size_t polygons_split = 0;
};

void add_polygon(RawMesh& raw, const std::vector<std::int64_t>& poly, std::size_t line) {
  if (poly.size() < 3) {
    throw Error("line " + std::to_string(line) + ": face with fewer than 3 corners");
  }
  for (auto idx : poly) {
    if (idx < 0 || static_cast<std::size_t>(idx) >= raw.vertices.size()) {
      throw Error("line " + std::to_string(line) + ": vertex index out of range");
    }
  }
  if (poly.size() > 3) ++raw.polygons_split;
  for (std::size_t i = 1; i + 1 < poly.size(); ++i) {
    raw.faces.push_back({static_cast<std::uint32_t>(poly[0]), static_cast<std::uint32_t>(poly[i]),
                         static_cast<std::uint32_t>(poly[i + 1])});
  }
}

RawMesh read_obj(std::istream& in) {
  RawMesh raw;
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::int64_t> poly;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ss(line);
    std::string tag;
    if (!(ss >> tag)) continue;
    if (tag == "v") {
      Vec3 v;
      if (!(ss >> v.x() >> v.y() >> v.z())) {
        throw Error("line " + std::to_string(line_no) + ": malformed vertex");
      }
      raw.vertices.push_back(v);
    } else if (tag == "f") {
      poly.clear();
      std::string token;
      while (ss >> token) {
        // v, v/vt, v//vn or v/vt/vn; only the position index matters.
        const std::string_view head(token.data(), token.find('/') == std::string::npos
                                                      ? token.size()
                                                      : token.find('/'));
        std::int64_t idx = 0;
        const auto [ptr, ec] = std::from_chars(head.data(), head.data() + head.size(), idx);
        if (ec != std::errc() || ptr != head.data() + head.size() || idx == 0) {
          throw Error("line " + std::to_string(line_no) + ": malformed face index '" + token + "'");
        }
        idx = idx > 0 ? idx - 1 : static_cast<std::int64_t>(raw.vertices.size()) + idx;
        poly.push_back(idx);
      }
      add_polygon(raw, poly, line_no);
    }
  }
  return raw;
}

// STL stores unshared corners; identical positions are welded.
struct Welder {
  std::map<std::array<double, 3>, std::uint32_t> index;
  RawMesh* raw;
  std::uint32_t operator()(const Vec3& p) {
    const std::array<double, 3> key{p.x(), p.y(), p.z()};
    auto [it, inserted] = index.try_emplace(key, static_cast<std::uint32_t>(raw->vertices.size()));
    if (inserted) raw->vertices.push_back(p);
    return it->second;
  }
};

RawMesh read_stl_binary(const std::string& bytes) {
  RawMesh raw;
  std::uint32_t count = 0;
  std::memcpy(&count, bytes.data() + 80, 4);
  if (bytes.size() < 84 + std::size_t{count} * 50) throw Error("truncated binary STL");
  Welder weld{{}, &raw};
  for (std::uint32_t i = 0; i < count; ++i) {
    const char* rec = bytes.data() + 84 + std::size_t{i} * 50 + 12;
    Face face{};
    for (int c = 0; c < 3; ++c) {
      float xyz[3];
      std::memcpy(xyz, rec + 12 * c, 12);
      face[c] = weld(Vec3(xyz[0], xyz[1], xyz[2]));
    }
    raw.faces.push_back(face);
  }
  return raw;
}

RawMesh read_stl_ascii(std::istream& in) {
  RawMesh raw;
  Welder weld{{}, &raw};
  std::string token;
  std::vector<std::uint32_t> corners;
  while (in >> token) {
    if (token == "vertex") {
      Vec3 v;
      if (!(in >> v.x() >> v.y() >> v.z())) throw Error("malformed ASCII STL vertex");
      corners.push_back(weld(v));
    } else if (token == "endfacet") {
      if (corners.size() != 3) throw Error("ASCII STL facet without exactly 3 vertices");
      raw.faces.push_back({corners[0], corners[1], corners[2]});
      corners.clear();
    }
  }
  return raw;
}

RawMesh read_ply_ascii(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("ply", 0) != 0) throw Error("missing PLY magic");
  std::size_t n_vertices = 0;
  std::size_t n_faces = 0;
  std::size_t vertex_props = 0;
  bool ascii = false;
  std::string current;
  std::vector<std::string> vertex_prop_names;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::string tag;
    ss >> tag;
    if (tag == "format") {
      std::string fmt;
      ss >> fmt;
      ascii = fmt == "ascii";
    } else if (tag == "element") {
      std::size_t n = 0;
      ss >> current >> n;
      if (current == "vertex") n_vertices = n;
      if (current == "face") n_faces = n;
    } else if (tag == "property" && current == "vertex") {
      std::string type;
      std::string name;
      ss >> type >> name;
      vertex_prop_names.push_back(name);
      ++vertex_props;
    } else if (tag == "end_header") {
      break;
    }
  }
  if (!ascii) throw Error("only ASCII PLY is supported");
  const auto find_prop = [&](const char* name) {
    const auto it = std::find(vertex_prop_names.begin(), vertex_prop_names.end(), name);
    if (it == vertex_prop_names.end()) throw Error(std::string("PLY vertex lacks property ") + name);
    return static_cast<std::size_t>(it - vertex_prop_names.begin());
  };
  const std::size_t ix = find_prop("x");
  const std::size_t iy = find_prop("y");
  const std::size_t iz = find_prop("z");

  RawMesh raw;
  std::vector<double> values(vertex_props);
  for (std::size_t i = 0; i < n_vertices; ++i) {
    for (auto& v : values) {
      if (!(in >> v)) throw Error("truncated PLY vertex list");
    }
    raw.vertices.emplace_back(values[ix], values[iy], values[iz]);
  }
  std::vector<std::int64_t> poly;
  for (std::size_t i = 0; i < n_faces; ++i) {
    std::size_t k = 0;
    if (!(in >> k)) throw Error("truncated PLY face list");
    poly.resize(k);
    for (auto& idx : poly) {
      if (!(in >> idx)) throw Error("truncated PLY face list");
    }
    add_polygon(raw, poly, i + 1);
  }
  return raw;
}

}  // namespace

TriangleMesh load_mesh(const std::filesystem::path& path, std::vector<std::string>* warnings) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open mesh file " + path.string());
  const std::string ext = lower_extension(path);

  RawMesh raw;
  if (ext == ".obj") {
    raw = read_obj(in);
  } else if (ext == ".stl") {
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::uint32_t count = 0;
    if (bytes.size() >= 84) std::memcpy(&count, bytes.data() + 80, 4);
    const bool binary = bytes.size() >= 84 && bytes.size() == 84 + std::size_t{count} * 50;
    if (binary) {
      raw = read_stl_binary(bytes);
    } else {
      std::istringstream text(bytes);
      raw = read_stl_ascii(text);
    }
  } else if (ext == ".ply") {
    raw = read_ply_ascii(in);
  } else {
    throw Error("unsupported mesh format '" + ext + "' (expected .obj, .stl or .ply)");
  }

  if (raw.faces.empty()) throw Error("mesh file " + path.string() + " contains no faces");
  if (warnings && raw.polygons_split > 0) {
    warnings->push_back(std::to_string(raw.polygons_split) +
                        " polygon(s) with more than 3 corners were fan-triangulated");
  }
  TriangleMesh mesh(std::move(raw.vertices), std::move(raw.faces));
  if (warnings) {
    for (auto f : mesh.dropped_faces()) {
      warnings->push_back("dropped zero-area face " + std::to_string(f));
    }
  }
  if (mesh.empty()) throw Error("mesh file " + path.string() + " has no face with positive area");
  return mesh;
}

void save_obj(const TriangleMesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << std::setprecision(17);
  for (const Vec3& v : mesh.vertices()) out << "v " << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
  for (const Face& f : mesh.faces()) {
    out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
  }
  if (!out) throw Error("failed while writing " + path.string());
}

}  // namespace its
