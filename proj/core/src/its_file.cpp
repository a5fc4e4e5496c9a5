#include <cstring>
#include <fstream>

#include "its/field.hpp"

namespace its {
namespace {

constexpr char kMagic[4] = {'I', 'T', 'S', '1'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T value{};
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) throw Error("truncated ITS file");
  return value;
}

}  // namespace

void save_its(const ImplicitField& field, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out.write(kMagic, 4);
  put<std::uint32_t>(out, kVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(field.height()));
  put<std::uint8_t>(out, static_cast<std::uint8_t>(field.mode()));
  const UnitTransform& t = field.transform();
  put<double>(out, t.scale);
  for (int a = 0; a < 3; ++a) put<double>(out, t.translate[a]);
  const auto& shell = field.shell();
  put<std::uint8_t>(out, shell ? 1 : 0);
  put<double>(out, shell ? shell->eps1 : 0.0);
  put<double>(out, shell ? shell->eps2 : 0.0);
  std::size_t offset = 0;
  const auto coeffs = field.coefficients();
  for (int d = 0; d <= field.height(); ++d) {
    const auto points = field.svo().grid_points(d);
    put<std::uint64_t>(out, points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
      put<std::uint64_t>(out, points[i]);
      put<double>(out, coeffs[offset + i]);
    }
    offset += points.size();
  }
  if (!out) throw Error("failed while writing " + path.string());
}

ImplicitField load_its(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    throw Error(path.string() + " is not an ITS file");
  }
  const auto version = get<std::uint32_t>(in);
  if (version != kVersion) throw Error("unsupported ITS version " + std::to_string(version));
  const auto height = static_cast<int>(get<std::uint32_t>(in));
  if (height < kMinHeight || height > kMaxHeight) throw Error("ITS file has invalid height");
  const auto mode_byte = get<std::uint8_t>(in);
  if (mode_byte > 1) throw Error("ITS file has invalid distance mode");
  UnitTransform t;
  t.scale = get<double>(in);
  for (int a = 0; a < 3; ++a) t.translate[a] = get<double>(in);
  const bool has_shell = get<std::uint8_t>(in) != 0;
  const double eps1 = get<double>(in);
  const double eps2 = get<double>(in);

  std::vector<std::vector<std::uint64_t>> points(height + 1);
  std::vector<double> coeffs;
  for (int d = 0; d <= height; ++d) {
    const auto count = get<std::uint64_t>(in);
    const std::uint64_t limit = std::uint64_t{1} << (height - d);
    if (count > (limit + 1) * (limit + 1) * (limit + 1)) throw Error("ITS depth count is implausible");
    points[d].reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
      const auto m = get<std::uint64_t>(in);
      if (!points[d].empty() && m <= points[d].back()) throw Error("ITS grid points are not ascending");
      points[d].push_back(m);
      coeffs.push_back(get<double>(in));
    }
  }
  if (in.peek() != std::char_traits<char>::eof()) throw Error("trailing bytes in ITS file");
  ImplicitField field(SparseVoxelOctree::from_grid_points(std::move(points), height), std::move(coeffs),
                      t, static_cast<DistanceMode>(mode_byte));
  if (has_shell) field.set_shell({eps1, eps2});
  return field;
}

}  // namespace its
