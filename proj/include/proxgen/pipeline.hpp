#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "proxgen/body.hpp"
#include "proxgen/bps.hpp"
#include "proxgen/config.hpp"
#include "proxgen/fit.hpp"
#include "proxgen/mesh.hpp"
#include "proxgen/metrics.hpp"
#include "proxgen/networks.hpp"
#include "proxgen/spatial.hpp"

namespace proxgen {

// A scene ready for sampling: mesh for contact queries, field for collision
// queries, bounds for cage placement. `source` records how to rebuild it.
struct SceneBundle {
  std::string source;  // "synth:SEED" or a mesh path
  TriMesh mesh;
  SdfField sdf;
  PointIndex index;  // over mesh.vertices
  double ground_z = 0.0;
  Vec3 lo = Vec3::Zero(), hi = Vec3::Zero();  // mesh bounding box
};

// "synth:SEED" builds the procedural room from cfg; any other string loads a
// mesh file and pairs it with a floor-only field at the lowest vertex, since
// no exact field exists for arbitrary meshes.
SceneBundle load_scene_source(const std::string& source, const RunConfig& cfg);

// What to do with the regressed vertices: keep them, or fit the body model
// with or without the scene-aware terms.
enum class GenVariant { Raw, SimOptim, AdvOptim };

const char* to_string(GenVariant v);
GenVariant gen_variant_from_string(const std::string& s);

// One generated placement, self-contained enough to re-score, re-optimize,
// and visualize later. Vertices and selected scene points are cage frame;
// the transform maps them back to the world.
struct GeneratedSample {
  std::string scene_source;
  GenVariant variant = GenVariant::Raw;
  CageTransform transform;
  Eigen::VectorXf scene_bps;      // 3n
  Eigen::VectorXf body_feature;   // n, generated
  Eigen::VectorXf raw_vertices;   // 3v, regressor output
  bool has_params = false;
  BodyParams params;  // fit result, when has_params

  void save(const std::string& path) const;
  static GeneratedSample load(const std::string& path);

  std::vector<Vec3> raw_world() const;
  // params-based vertices when fitted, otherwise raw_world
  std::vector<Vec3> final_world(const std::shared_ptr<const BodyTemplate>& tmpl) const;
};

struct GenerateSummary {
  int requested = 0;
  int succeeded = 0;
  double mean_non_collision = 0.0;
  double mean_contact = 0.0;
};

// Drops `count` cages at random free positions, encodes each crop, decodes a
// body feature from a fresh latent, regresses vertices, and optionally fits
// the body model to them. Writes sample_###.obj / sample_###.pgsm plus
// manifest.csv (and params.csv for fitted variants) into out_dir. Individual
// failures are reported on stderr and skipped; throws when nothing succeeds.
GenerateSummary generate_samples(Networks<float>& nets, const BasisPointSet& basis,
                                 const SceneBundle& bundle, const RunConfig& cfg,
                                 GenVariant variant, int count, std::uint64_t seed,
                                 const std::string& out_dir);

// Re-runs the body fit on a stored sample against its scene; updates params
// and variant in place.
OptimResult optimize_sample(GeneratedSample* sample, const SceneBundle& bundle,
                            const RunConfig& cfg, OptimVariant variant);

struct EvalSummary {
  int samples = 0;
  double mean_non_collision = 0.0;
  double mean_contact = 0.0;
  bool has_diversity = false;  // needs at least kmeans_k fitted samples
  DiversityResult div;
};

// Re-scores every sample_*.pgsm in a directory against its recorded scene
// (or `scene_override` when non-empty) and clusters the fitted parameters.
EvalSummary evaluate_outputs(const std::string& dir, const RunConfig& cfg,
                             const std::string& scene_override);

// Writes <out_prefix>_bps.ply (selected scene points, quality = body feature
// scaled to [0,1]) and <out_prefix>_body.ply, both in world coordinates.
void export_viz(const GeneratedSample& sample, const std::string& out_prefix);

}  // namespace proxgen
