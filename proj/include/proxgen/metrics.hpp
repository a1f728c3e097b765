#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "proxgen/body.hpp"
#include "proxgen/spatial.hpp"

namespace proxgen {

// Fraction of body vertices at or above the scene surface (sdf >= 0).
double non_collision_score(const std::vector<Vec3>& verts, const SdfField& sdf);

// 1 when at least one vertex touches or penetrates the scene, else 0.
double contact_score(const std::vector<Vec3>& verts, const SdfField& sdf);

struct DiversityResult {
  double entropy = 0.0;       // of the cluster-id histogram, natural log
  double cluster_size = 0.0;  // mean distance of samples to their centroid
};

// Pose-space spread of a sample set: k-means over the parameter vectors
// (yaw + joints + scales; translation only when asked for), then the
// histogram entropy of cluster assignments plus the mean intra-cluster
// distance. Deterministic given the seed. Throws ValidationError when
// there are fewer samples than clusters.
DiversityResult diversity(const std::vector<BodyParams>& samples, int k, std::uint64_t seed,
                          bool include_translation = false);

// Shared k-means core (greedy seeding by squared distance, then Lloyd
// iterations capped at `max_iters`). Returns assignments per row.
std::vector<int> kmeans(const Eigen::MatrixXd& rows, int k, std::uint64_t seed, int max_iters,
                        Eigen::MatrixXd* centroids_out);

}  // namespace proxgen
