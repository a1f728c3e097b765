#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "proxgen/mesh.hpp"

namespace proxgen {

inline constexpr int kJointCount = 16;
inline constexpr int kShapeCount = 3;
// translation (3) + yaw (1) + joints (16) + shape scales (3)
inline constexpr int kParamCount = 3 + 1 + kJointCount + kShapeCount;

enum class PoseCategory { Standing, Sitting, Lying };

const char* to_string(PoseCategory c);
PoseCategory pose_category_from_string(const std::string& s);

// Full body state. Zero joint angles with unit scales is the canonical
// T-pose; the pelvis root sits exactly at `translation`.
struct BodyParams {
  Vec3 translation = Vec3::Zero();
  double yaw = 0.0;
  Eigen::Matrix<double, kJointCount, 1> joint_angles =
      Eigen::Matrix<double, kJointCount, 1>::Zero();
  Vec3 shape_scale = Vec3::Ones();  // height, girth, limb length

  Eigen::Matrix<double, kParamCount, 1> to_vector() const;
  static BodyParams from_vector(const Eigen::Matrix<double, kParamCount, 1>& v);
};

// Procedural articulated body: 14 ellipsoid segments rigidly skinned to a
// kinematic tree. The topology (642 vertices, fixed faces, foot-sole mask)
// never changes with parameters, so per-vertex features keep their meaning
// across poses.
class BodyTemplate {
public:
  static std::shared_ptr<const BodyTemplate> standard();

  int vertex_count() const { return int(local_coords_.size()); }
  const std::vector<std::array<int, 3>>& faces() const { return faces_; }
  const std::vector<std::uint8_t>& feet_mask() const { return feet_mask_; }
  const std::vector<int>& feet_vertices() const { return feet_vertices_; }
  const std::vector<int>& vertex_segment() const { return vertex_segment_; }
  const std::vector<std::string>& segment_names() const { return segment_names_; }
  const Eigen::Matrix<double, kJointCount, 1>& joint_lo() const { return joint_lo_; }
  const Eigen::Matrix<double, kJointCount, 1>& joint_hi() const { return joint_hi_; }
  // Natural arms-down pose the pose prior is anchored to (not the T-pose).
  const Eigen::Matrix<double, kJointCount, 1>& rest_pose() const { return rest_pose_; }
  const char* joint_name(int j) const;

  // Canonical T-pose mesh plus a sidecar listing segment vertex ranges and
  // the foot-sole vertex ids.
  void save(const std::string& obj_path, const std::string& sidecar_path) const;

  struct Dof {
    int index;    // slot in joint_angles
    int axis;     // 0=x 1=y 2=z
    double sign;  // mirrored joints flip the axis
  };
  struct Segment {
    std::string name;
    int parent;        // segment index, -1 for the root
    Vec3 joint_offset; // in the parent segment frame, unit scale
    std::vector<Dof> dofs;
    int scale_class;   // 0 core, 1 leg, 2 arm, 3 foot
    int first_vertex = 0, vertex_count = 0;
  };
  const std::vector<Segment>& segments() const { return segments_; }
  const std::vector<Vec3>& local_coords() const { return local_coords_; }

private:
  BodyTemplate();

  std::vector<Segment> segments_;
  std::vector<std::string> segment_names_;
  std::vector<Vec3> local_coords_;  // per vertex, segment frame at unit scale
  std::vector<int> vertex_segment_;
  std::vector<std::array<int, 3>> faces_;
  std::vector<std::uint8_t> feet_mask_;
  std::vector<int> feet_vertices_;
  Eigen::Matrix<double, kJointCount, 1> joint_lo_, joint_hi_, rest_pose_;
};

struct BodyMesh {
  std::vector<Vec3> vertices;
  std::shared_ptr<const BodyTemplate> tmpl;
  bool clamped = false;  // some joint angle or scale hit its limit

  const std::vector<std::array<int, 3>>& faces() const { return tmpl->faces(); }
  const std::vector<std::uint8_t>& feet_mask() const { return tmpl->feet_mask(); }
  TriMesh to_mesh() const;
};

BodyMesh forward(const std::shared_ptr<const BodyTemplate>& tmpl, const BodyParams& params);

// Vertices plus the exact Jacobian d vertex / d param; row 3k+c is vertex k,
// coordinate c. Computed with forward-mode duals, so it matches `forward`
// including the clamping behaviour at joint limits.
void forward_with_jacobian(const BodyTemplate& tmpl, const BodyParams& params,
                           std::vector<Vec3>* vertices, Eigen::MatrixXd* jacobian,
                           bool* clamped);

// Quadratic naturalness priors. pose: squared deviation of all joints from
// the rest pose. distal: same, restricted to ankles and elbows. shape:
// squared log scales. param_prior is pose + shape with unit weights.
double pose_prior(const BodyParams& p, const BodyTemplate& tmpl);
double distal_prior(const BodyParams& p, const BodyTemplate& tmpl);
double shape_prior(const BodyParams& p);
double param_prior(const BodyParams& p, const BodyTemplate& tmpl);
// d prior / d param for the weighted combination used during optimization.
Eigen::Matrix<double, kParamCount, 1> prior_gradient(const BodyParams& p,
                                                     const BodyTemplate& tmpl, double w_pose,
                                                     double w_distal, double w_shape);

// Deterministic pose draw per category. Translation x, y stay zero; z is
// solved so the body rests on the ground (standing/lying) or on a nominal
// 0.45 m seat (sitting).
BodyParams sample_pose(PoseCategory category, std::uint64_t seed,
                       const std::shared_ptr<const BodyTemplate>& tmpl);

// Sitting legs for an arbitrary hip height: picks thigh/shin/ankle angles
// that put both soles exactly on the ground with flat feet. The extra-tilt
// arguments push each knee up and its foot forward (magnitude is used), for
// per-side variety. Used by pose sampling and placement.
void solve_sitting_legs(const BodyTemplate& tmpl, double hip_z, double phi_extra_left,
                        double phi_extra_right, BodyParams* p);

// Height of the hip joints implied by the root translation and height scale;
// the input solve_sitting_legs expects.
double hip_joint_height(const BodyParams& p);

}  // namespace proxgen
