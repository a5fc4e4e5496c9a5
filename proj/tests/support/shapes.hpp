#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "its/mesh.hpp"

namespace its::testing {

/// Axis-aligned box [lo, hi] with 12 outward-facing triangles.
TriangleMesh make_box(const Vec3& lo, const Vec3& hi);
inline TriangleMesh make_cube() { return make_box(Vec3::Zero(), Vec3::Ones()); }

/// Subdivided icosahedron projected to a sphere; 20 * 4^level faces.
TriangleMesh make_icosphere(int level, double radius = 1.0, const Vec3& center = Vec3::Zero());

/// Icosphere with a smooth radial displacement
/// 1 + amplitude * sin(k x) sin(k y) sin(k z) on the unit directions.
TriangleMesh make_bumpy_sphere(int level, double amplitude, double frequency);

/// Torus around the z axis; 2 * nu * nv faces.
TriangleMesh make_torus(double major, double minor, int nu, int nv);

/// Watertight genus-2 surface: marching cubes of the union of two torus
/// distance fields.
TriangleMesh make_genus2(int resolution = 44);

/// Union of unit voxels with axis-aligned faces: a slab with a square hole
/// and a raised block.
TriangleMesh make_cad_block();

/// Icosphere whose faces are randomly flipped, with a fraction of faces
/// detached onto private vertices.
TriangleMesh make_soup(int level, double detach_fraction, std::uint64_t seed);

/// n x n grid of squares on z = 0 spanning [0,1]^2, two triangles each.
TriangleMesh make_plane_grid(int n);

/// Writes an OBJ under the test scratch directory and returns its path.
std::filesystem::path write_temp_obj(const TriangleMesh& mesh, const std::string& name);
std::filesystem::path scratch_dir();

}  // namespace its::testing
