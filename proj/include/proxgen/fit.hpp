#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "proxgen/body.hpp"
#include "proxgen/bps.hpp"
#include "proxgen/losses.hpp"
#include "proxgen/mesh.hpp"
#include "proxgen/spatial.hpp"

namespace proxgen {

// SimOptim fits vertices, feature, and priors only; AdvOptim adds the
// collision and contact terms.
enum class OptimVariant { SimOptim, AdvOptim };

const char* to_string(OptimVariant v);

struct OptimConfig {
  OptimVariant variant = OptimVariant::AdvOptim;
  double lambda1 = 8.0;   // collision
  double lambda2 = 0.5;   // contact
  double lambda3 = 0.02;  // pose prior
  double lambda4 = 0.01;  // distal (ankle/elbow) prior
  double lambda5 = 0.01;  // shape prior
  int steps = 300;
  double step_size = 0.01;
  double contact_sigma = kContactSigma;
};

struct FitLosses {
  double vertex = 0, feature = 0, collision = 0, contact = 0, prior = 0, total = 0;
};

struct OptimResult {
  BodyParams params;       // best iterate by total loss
  FitLosses final_losses;  // at that iterate
  std::vector<double> trajectory;  // total per iteration, including the init
};

// Rough parametric start: translation from centroids, yaw from the shoulder
// axis, joints at the rest pose, height scale from the bounding box. Throws
// ValidationError on degenerate targets.
BodyParams init_from_vertices(const std::vector<Vec3>& target_world,
                              const std::shared_ptr<const BodyTemplate>& tmpl);

// Adam descent over body parameters matching the regressed vertices and body
// feature:
//   L = |V(theta) - pi(V_target)| + |x_b_target - f(pi^-1(V(theta)))|
//     + lambda1 * collision + lambda2 * contact + priors
// Vertex/feature terms are mean-reduced with weight 1; gradients flow through
// forward kinematics and the nearest-neighbour feature subgradient. The
// feature is recomputed each step against the fixed scene_bps in `enc`.
OptimResult fit_body(const std::vector<Vec3>& target_cage_vertices,
                     const Eigen::VectorXd& target_feature, const SceneEncoding& enc,
                     const CageTransform& transform, const SdfField& sdf,
                     const PointIndex& scene_index, const OptimConfig& cfg,
                     const BodyParams& init);

}  // namespace proxgen
