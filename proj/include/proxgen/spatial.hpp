#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "proxgen/mesh.hpp"

namespace proxgen {

// Exact nearest-neighbour index over a fixed point set. Query results match
// nearest_brute_force bit-for-bit: both paths share the same squared-distance
// arithmetic and the same tie rule (lowest index wins at equal distance).
class PointIndex {
public:
  explicit PointIndex(std::vector<Vec3> points);

  // Returns (point index, Euclidean distance).
  std::pair<int, double> nearest(const Vec3& query) const;

  static std::pair<int, double> nearest_brute_force(const std::vector<Vec3>& points,
                                                    const Vec3& query);

  int size() const { return int(points_.size()); }
  const std::vector<Vec3>& points() const { return points_; }

private:
  struct Node {
    int axis = -1;      // -1 marks a leaf
    double split = 0.0;
    int left = -1, right = -1;
    int begin = 0, end = 0;  // leaf range into order_
  };

  int build(int begin, int end);
  void search(int node, const Vec3& q, int& best, double& best_d2) const;

  std::vector<Vec3> points_;
  std::vector<int> order_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

// One rigid axis-aligned box primitive: yaw about z, then translation.
struct BoxSpec {
  Vec3 center = Vec3::Zero();
  Vec3 half_extents = Vec3::Ones();
  double yaw = 0.0;
};

// Signed distance field over a scene: either the exact union of box
// primitives and an optional floor half-space, or a trilinearly interpolated
// sample grid baked from such a union. Negative inside, positive outside.
class SdfField {
public:
  static SdfField analytic(std::vector<BoxSpec> boxes, std::optional<double> floor_z);
  static SdfField grid(const Vec3& origin, const Vec3& cell, const Eigen::Vector3i& res,
                       std::vector<float> values);

  double eval(const Vec3& p) const;
  // Unit-length almost everywhere; ties resolved by the first primitive (and
  // first axis) achieving the minimum, so the result is deterministic.
  Vec3 grad(const Vec3& p) const;

  bool is_grid() const { return is_grid_; }
  const Vec3& grid_origin() const { return origin_; }
  const Vec3& grid_cell() const { return cell_; }
  const Eigen::Vector3i& grid_res() const { return res_; }

  void save(const std::string& path) const;  // grid fields only
  static SdfField load(const std::string& path);

private:
  SdfField() = default;
  void locate(const Vec3& p, int i0[3], double t[3]) const;
  double node(int x, int y, int z) const;

  bool is_grid_ = false;
  // analytic
  std::vector<BoxSpec> boxes_;
  std::optional<double> floor_z_;
  // grid
  Vec3 origin_ = Vec3::Zero();
  Vec3 cell_ = Vec3::Ones();
  Eigen::Vector3i res_ = Eigen::Vector3i::Zero();
  std::vector<float> values_;
};

// Samples `field` on a res[0] x res[1] x res[2] node lattice spanning
// [lo, hi] inclusive. Needs at least 2 nodes per axis.
SdfField bake_grid(const SdfField& field, const Vec3& lo, const Vec3& hi,
                   const Eigen::Vector3i& res);

}  // namespace proxgen
