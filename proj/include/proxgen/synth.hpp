#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "proxgen/body.hpp"
#include "proxgen/bps.hpp"
#include "proxgen/mesh.hpp"
#include "proxgen/spatial.hpp"

namespace proxgen {

// Procedurally generated room: floor plane at z = 0 plus non-overlapping box
// furniture. Mesh and SDF describe the same geometry; seat_boxes indexes the
// boxes low enough to sit on.
struct SynthScene {
  std::uint64_t seed = 0;
  double room_extent = 0.0;
  std::vector<BoxSpec> boxes;
  std::vector<int> seat_boxes;
  TriMesh mesh;
  SdfField sdf;
};

// Deterministic per seed. Furniture alternates seats (0.40-0.50 m tall) and
// tables (0.70-0.80 m); throws PlacementError when boxes cannot be placed
// without overlap within the retry budget.
SynthScene generate_scene(std::uint64_t seed, double room_extent, int furniture_count);

// Ground-truth body placement: standing/lying on free floor, sitting on a
// seat top. The returned body satisfies the support-contact and collision
// bounds checked by placement_valid. Throws PlacementError after 100 failed
// attempts or when the category has no compatible surface.
BodyParams place_body(const SynthScene& scene, PoseCategory category, std::uint64_t seed);

// Collision below 1e-4 mean penetration, category-specific support contact
// within 0.02 m, and the whole body inside the room.
bool placement_valid(const SynthScene& scene, const BodyMesh& body, PoseCategory category,
                     std::string* why);

// One training record. Coordinates in scene_bps / body_vertices are cage
// frame, features are sphere frame; all four are stored in f32 and the body
// feature is computed from the rounded values, so re-encoding the stored
// arrays reproduces body_feature to f32 precision.
struct TrainSample {
  std::uint64_t scene_seed = 0;
  PoseCategory category = PoseCategory::Standing;
  double world_rot = 0.0;  // scene+body rotation about world z at extraction
  CageTransform transform;
  Eigen::VectorXf scene_bps;      // 3n, interleaved xyz
  Eigen::VectorXf scene_feature;  // n
  Eigen::VectorXf body_vertices;  // 3v, interleaved xyz
  Eigen::VectorXf body_feature;   // n
};

// Augmentation pipeline for one placement: rotate scene+body about world z,
// center the cage on the body with a bounded random x/y shift (z fixed 1 m
// above ground), crop, normalize, rotate/shift inside the unit sphere, then
// encode. The cage shift is drawn from the part of [-r/3, r/3] that keeps
// the body fully inside the cage.
TrainSample extract_sample(const SynthScene& scene, const BodyParams& params,
                           const BasisPointSet& basis, std::uint64_t aug_seed,
                           double cage_edge, double wall_spacing);

struct Dataset {
  std::uint32_t n = 0;  // basis size
  std::uint32_t v = 0;  // body vertex count
  std::uint64_t basis_seed = 0;
  double room_extent = 0.0;  // scene rebuild parameters for loss evaluation
  std::uint32_t furniture_count = 0;
  std::vector<TrainSample> samples;

  void save(const std::string& path) const;
  static Dataset load(const std::string& path);
};

struct DataGenConfig {
  int n_basis = 1024;
  std::uint64_t basis_seed = 7;
  double room_extent = 4.0;
  int furniture_count = 3;
  int train_scenes = 25;
  int test_scenes = 5;
  int placements_per_scene = 20;
  int test_placements_per_scene = 10;
  int augmentations = 4;
  std::uint64_t data_seed = 101;
  double cage_edge = 2.0;
  double wall_spacing = 0.25;
};

// Writes <out_dir>/train.pgds and <out_dir>/test.pgds with disjoint scene
// seeds. Placement categories cycle standing, sitting, lying.
void build_dataset(const DataGenConfig& cfg, const std::string& out_dir);

// Scenes rebuilt on demand from their seed, with a nearest-neighbour index
// over the scene mesh vertices (contact queries during training).
class SceneCache {
public:
  SceneCache(double room_extent, int furniture_count)
      : extent_(room_extent), furniture_(furniture_count) {}

  struct Entry {
    SynthScene scene;
    PointIndex index;
  };

  const Entry& get(std::uint64_t scene_seed);

private:
  double extent_;
  int furniture_;
  std::map<std::uint64_t, Entry> entries_;
};

}  // namespace proxgen
