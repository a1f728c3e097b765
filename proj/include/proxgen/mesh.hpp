#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "proxgen/errors.hpp"

namespace proxgen {

using Vec3 = Eigen::Vector3d;

Vec3 rotate_z(double angle, const Vec3& p);

struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> faces;
  std::vector<double> quality;  // optional per-vertex scalar; empty if absent

  // Throws ValidationError on out-of-range face indices or a quality channel
  // whose length does not match the vertex count.
  void validate() const;
};

enum class MeshFormat { Obj, Ply };

MeshFormat format_from_path(const std::string& path);
TriMesh load_mesh(const std::string& path);
TriMesh load_mesh(const std::string& path, MeshFormat format);
void save_mesh(const TriMesh& mesh, const std::string& path);
void save_mesh(const TriMesh& mesh, const std::string& path, MeshFormat format);

// Maps between three frames:
//   world  - scene coordinates in meters
//   cage   - world translated so the cage center is the origin, then scaled
//            so the cage corners land on the unit sphere
//   sphere - cage frame plus an optional isometry (z-rotation then shift)
//            applied as training-time augmentation
// Distances are preserved between the cage and sphere frames, so features
// measured in one are valid in the other.
struct CageTransform {
  Vec3 cage_center = Vec3::Zero();
  double cage_edge = 2.0;
  double scale = 0.0;     // world -> cage: 2 / (edge * sqrt(3))
  double rotation = 0.0;  // sphere-frame yaw, radians
  Vec3 shift = Vec3::Zero();

  static CageTransform make(const Vec3& center, double edge, double rotation = 0.0,
                            const Vec3& shift = Vec3::Zero());

  Vec3 world_to_cage(const Vec3& p) const;
  Vec3 cage_to_world(const Vec3& p) const;
  Vec3 cage_to_sphere(const Vec3& p) const;
  Vec3 sphere_to_cage(const Vec3& p) const;
  Vec3 world_to_sphere(const Vec3& p) const;
  Vec3 sphere_to_world(const Vec3& p) const;
};

// A scene crop around one cage placement. Everything is still in world
// coordinates here; cage_points lie exactly on the ceiling and the four
// side walls of the cage box (never the floor face).
struct LocalScene {
  TriMesh cropped;
  std::vector<Vec3> cage_points;
  CageTransform transform;
};

LocalScene crop_local_scene(const TriMesh& scene, const Vec3& cage_center, double cage_edge,
                            double wall_spacing);

// Crop mapped into the unit sphere. Scene vertices come first, cage points
// after them; is_cage flags the latter.
struct NormalizedScene {
  std::vector<Vec3> points;
  std::vector<std::uint8_t> is_cage;
  CageTransform transform;
};

NormalizedScene to_unit_sphere(const LocalScene& local);

}  // namespace proxgen
