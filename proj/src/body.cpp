#include "proxgen/body.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "proxgen/binio.hpp"
#include "proxgen/jet.hpp"
#include "proxgen/rng.hpp"

namespace proxgen {

namespace {

enum JointId {
  kSpinePitch = 0,
  kSpineYaw,
  kHipLPitch,
  kHipLAbd,
  kKneeL,
  kAnkleL,
  kHipRPitch,
  kHipRAbd,
  kKneeR,
  kAnkleR,
  kShoulderLPitch,
  kShoulderLAbd,
  kShoulderRPitch,
  kShoulderRAbd,
  kElbowL,
  kElbowR,
};

const char* kJointNames[kJointCount] = {
    "spine_pitch",      "spine_yaw",        "hipL_pitch", "hipL_abd",
    "kneeL",            "ankleL",           "hipR_pitch", "hipR_abd",
    "kneeR",            "ankleR",           "shoulderL_pitch", "shoulderL_abd",
    "shoulderR_pitch",  "shoulderR_abd",    "elbowL",     "elbowR",
};

// Skeleton dimensions at unit scale (meters).
constexpr double kHipDrop = 0.05;
constexpr double kHipWidth = 0.09;
constexpr double kThighLen = 0.42;
constexpr double kShinLen = 0.40;
constexpr double kAnkleHeight = 0.08;  // sole sits this far below the ankle
constexpr double kTorsoJoint = 0.10;   // pelvis root to spine joint
constexpr double kNeckOffset = 0.45;   // spine joint to neck
constexpr double kHeadOffset = 0.10;
constexpr double kShoulderWidth = 0.19;
constexpr double kShoulderHeight = 0.40;
constexpr double kUpperArmLen = 0.28;

enum ScaleClass { kCore = 0, kLeg = 1, kArm = 2, kFoot = 3 };

struct EllipsoidSpec {
  Vec3 center;
  Vec3 semi;
  int rings, sectors, pole_axis;
};

void add_ellipsoid(const EllipsoidSpec& e, std::vector<Vec3>* local,
                   std::vector<std::array<int, 3>>* faces) {
  const int base = int(local->size());
  const int R = e.rings, S = e.sectors;
  auto emit = [&](double ux, double uy, double uz) {
    Vec3 u;
    if (e.pole_axis == 2)
      u = Vec3(ux, uy, uz);
    else if (e.pole_axis == 0)
      u = Vec3(uz, ux, uy);
    else
      u = Vec3(uy, uz, ux);
    local->push_back(e.center + e.semi.cwiseProduct(u));
  };
  emit(0, 0, 1);
  for (int k = 1; k <= R; ++k) {
    const double theta = M_PI * k / (R + 1);
    for (int j = 0; j < S; ++j) {
      const double phi = 2.0 * M_PI * j / S;
      emit(std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta));
    }
  }
  emit(0, 0, -1);

  for (int j = 0; j < S; ++j)
    faces->push_back({base, base + 1 + j, base + 1 + (j + 1) % S});
  for (int k = 0; k + 1 < R; ++k)
    for (int j = 0; j < S; ++j) {
      const int a = base + 1 + k * S + j;
      const int b = base + 1 + k * S + (j + 1) % S;
      faces->push_back({a, a + S, b + S});
      faces->push_back({a, b + S, b});
    }
  const int last = base + 1 + R * S;
  const int ring = base + 1 + (R - 1) * S;
  for (int j = 0; j < S; ++j)
    faces->push_back({last, ring + (j + 1) % S, ring + j});
}

// Minimal fixed-size linear algebra that tolerates dual-number scalars.
template <class S>
struct V3S {
  S x, y, z;
};

template <class S>
struct M3S {
  S m[9];
  static M3S identity() {
    M3S r;
    for (int i = 0; i < 9; ++i) r.m[i] = S(0.0);
    r.m[0] = r.m[4] = r.m[8] = S(1.0);
    return r;
  }
  M3S operator*(const M3S& o) const {
    M3S r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        r.m[3 * i + j] =
            m[3 * i] * o.m[j] + m[3 * i + 1] * o.m[3 + j] + m[3 * i + 2] * o.m[6 + j];
    return r;
  }
  V3S<S> operator*(const V3S<S>& v) const {
    return {m[0] * v.x + m[1] * v.y + m[2] * v.z, m[3] * v.x + m[4] * v.y + m[5] * v.z,
            m[6] * v.x + m[7] * v.y + m[8] * v.z};
  }
};

// Rotation by sign*angle about coordinate axis `axis`.
template <class S>
M3S<S> axis_rotation(int axis, double sign, const S& angle) {
  using std::cos;
  using std::sin;
  const S c = cos(angle);
  const S s = sign > 0 ? sin(angle) : S(-1.0) * sin(angle);
  M3S<S> r = M3S<S>::identity();
  const int a1 = (axis + 1) % 3, a2 = (axis + 2) % 3;
  r.m[3 * a1 + a1] = c;
  r.m[3 * a1 + a2] = S(-1.0) * s;
  r.m[3 * a2 + a1] = s;
  r.m[3 * a2 + a2] = c;
  return r;
}

}  // namespace

const char* to_string(PoseCategory c) {
  switch (c) {
    case PoseCategory::Standing: return "standing";
    case PoseCategory::Sitting: return "sitting";
    case PoseCategory::Lying: return "lying";
  }
  return "unknown";
}

PoseCategory pose_category_from_string(const std::string& s) {
  if (s == "standing") return PoseCategory::Standing;
  if (s == "sitting") return PoseCategory::Sitting;
  if (s == "lying") return PoseCategory::Lying;
  throw ValidationError("unknown pose category '" + s + "'");
}

Eigen::Matrix<double, kParamCount, 1> BodyParams::to_vector() const {
  Eigen::Matrix<double, kParamCount, 1> v;
  v.segment<3>(0) = translation;
  v[3] = yaw;
  v.segment<kJointCount>(4) = joint_angles;
  v.segment<3>(4 + kJointCount) = shape_scale;
  return v;
}

BodyParams BodyParams::from_vector(const Eigen::Matrix<double, kParamCount, 1>& v) {
  BodyParams p;
  p.translation = v.segment<3>(0);
  p.yaw = v[3];
  p.joint_angles = v.segment<kJointCount>(4);
  p.shape_scale = v.segment<3>(4 + kJointCount);
  return p;
}

BodyTemplate::BodyTemplate() {
  auto seg = [&](const std::string& name, int parent, const Vec3& joint_offset,
                 std::vector<Dof> dofs, int scale_class, const EllipsoidSpec& e) {
    Segment s;
    s.name = name;
    s.parent = parent;
    s.joint_offset = joint_offset;
    s.dofs = std::move(dofs);
    s.scale_class = scale_class;
    s.first_vertex = int(local_coords_.size());
    add_ellipsoid(e, &local_coords_, &faces_);
    s.vertex_count = int(local_coords_.size()) - s.first_vertex;
    segment_names_.push_back(name);
    segments_.push_back(std::move(s));
    for (int i = 0; i < segments_.back().vertex_count; ++i)
      vertex_segment_.push_back(int(segments_.size()) - 1);
  };

  // 0 pelvis (root)
  seg("pelvis", -1, Vec3::Zero(), {}, kCore,
      {Vec3(0, 0, 0.02), Vec3(0.13, 0.16, 0.11), 5, 10, 2});
  // 1 torso
  seg("torso", 0, Vec3(0, 0, kTorsoJoint),
      {{kSpinePitch, 1, 1.0}, {kSpineYaw, 2, 1.0}}, kCore,
      {Vec3(0, 0, 0.22), Vec3(0.115, 0.17, 0.27), 7, 12, 2});
  // 2 neck (rigid with torso)
  seg("neck", 1, Vec3(0, 0, kNeckOffset), {}, kCore,
      {Vec3(0, 0, 0.045), Vec3(0.048, 0.048, 0.075), 4, 8, 2});
  // 3 head
  seg("head", 2, Vec3(0, 0, kHeadOffset), {}, kCore,
      {Vec3(0, 0, 0.07), Vec3(0.085, 0.095, 0.115), 6, 11, 2});
  // 4-6 left leg
  seg("thighL", 0, Vec3(0, kHipWidth, -kHipDrop),
      {{kHipLPitch, 1, 1.0}, {kHipLAbd, 0, 1.0}}, kLeg,
      {Vec3(0, 0, -0.21), Vec3(0.075, 0.08, 0.245), 5, 10, 2});
  seg("shinL", 4, Vec3(0, 0, -kThighLen), {{kKneeL, 1, 1.0}}, kLeg,
      {Vec3(0, 0, -0.195), Vec3(0.055, 0.058, 0.225), 5, 9, 2});
  seg("footL", 5, Vec3(0, 0, -kShinLen), {{kAnkleL, 1, 1.0}}, kFoot,
      {Vec3(0.055, 0, -0.040), Vec3(0.115, 0.048, 0.040), 4, 8, 2});
  // 7-9 right leg (mirrored abduction axis)
  seg("thighR", 0, Vec3(0, -kHipWidth, -kHipDrop),
      {{kHipRPitch, 1, 1.0}, {kHipRAbd, 0, -1.0}}, kLeg,
      {Vec3(0, 0, -0.21), Vec3(0.075, 0.08, 0.245), 5, 10, 2});
  seg("shinR", 7, Vec3(0, 0, -kThighLen), {{kKneeR, 1, 1.0}}, kLeg,
      {Vec3(0, 0, -0.195), Vec3(0.055, 0.058, 0.225), 5, 9, 2});
  seg("footR", 8, Vec3(0, 0, -kShinLen), {{kAnkleR, 1, 1.0}}, kFoot,
      {Vec3(0.055, 0, -0.040), Vec3(0.115, 0.048, 0.040), 4, 8, 2});
  // 10-11 left arm: at rest the arm runs along +y; pitch swings it forward,
  // abduction raises it. Right side mirrors the axes.
  seg("upperArmL", 1, Vec3(0, kShoulderWidth, kShoulderHeight),
      {{kShoulderLPitch, 2, -1.0}, {kShoulderLAbd, 0, 1.0}}, kArm,
      {Vec3(0, 0.14, 0), Vec3(0.045, 0.155, 0.045), 4, 8, 1});
  seg("forearmL", 10, Vec3(0, kUpperArmLen, 0), {{kElbowL, 2, -1.0}}, kArm,
      {Vec3(0, 0.13, 0), Vec3(0.040, 0.145, 0.040), 4, 8, 1});
  // 12-13 right arm
  seg("upperArmR", 1, Vec3(0, -kShoulderWidth, kShoulderHeight),
      {{kShoulderRPitch, 2, 1.0}, {kShoulderRAbd, 0, -1.0}}, kArm,
      {Vec3(0, -0.14, 0), Vec3(0.045, 0.155, 0.045), 4, 8, 1});
  seg("forearmR", 12, Vec3(0, -kUpperArmLen, 0), {{kElbowR, 2, 1.0}}, kArm,
      {Vec3(0, -0.13, 0), Vec3(0.040, 0.145, 0.040), 4, 8, 1});

  joint_lo_.setZero();
  joint_hi_.setZero();
  auto lim = [&](int j, double lo, double hi) {
    joint_lo_[j] = lo;
    joint_hi_[j] = hi;
  };
  lim(kSpinePitch, -1.75, 0.8);
  lim(kSpineYaw, -0.9, 0.9);
  for (int side = 0; side < 2; ++side) {
    const int o = side * 4;
    lim(kHipLPitch + o, -2.2, 0.5);
    lim(kHipLAbd + o, -0.4, 1.0);
    lim(kKneeL + o, 0.0, 2.4);
    lim(kAnkleL + o, -0.9, 0.9);
  }
  lim(kShoulderLPitch, -2.9, 1.2);
  lim(kShoulderLAbd, -1.5, 1.6);
  lim(kShoulderRPitch, -2.9, 1.2);
  lim(kShoulderRAbd, -1.5, 1.6);
  lim(kElbowL, 0.0, 2.7);
  lim(kElbowR, 0.0, 2.7);

  rest_pose_.setZero();
  rest_pose_[kShoulderLAbd] = -1.35;  // arms hang by the sides
  rest_pose_[kShoulderRAbd] = -1.35;

  // Foot-sole mask: foot-segment vertices within 18 mm of the lowest point
  // of the canonical T-pose.
  BodyParams canon;
  std::vector<Vec3> verts;
  forward_with_jacobian(*this, canon, &verts, nullptr, nullptr);
  feet_mask_.assign(verts.size(), 0);
  double sole = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < verts.size(); ++i) {
    const std::string& n = segment_names_[vertex_segment_[i]];
    if (n == "footL" || n == "footR") sole = std::min(sole, verts[i].z());
  }
  for (size_t i = 0; i < verts.size(); ++i) {
    const std::string& n = segment_names_[vertex_segment_[i]];
    if ((n == "footL" || n == "footR") && verts[i].z() <= sole + 0.018) {
      feet_mask_[i] = 1;
      feet_vertices_.push_back(int(i));
    }
  }
}

std::shared_ptr<const BodyTemplate> BodyTemplate::standard() {
  static const std::shared_ptr<const BodyTemplate> t(new BodyTemplate());
  return t;
}

const char* BodyTemplate::joint_name(int j) const { return kJointNames[j]; }

namespace {

template <class S>
void forward_generic(const BodyTemplate& tmpl, const S params[kParamCount],
                     std::vector<V3S<S>>* out, bool* clamped) {
  const auto& limits_lo = tmpl.joint_lo();
  const auto& limits_hi = tmpl.joint_hi();
  S angles[kJointCount];
  for (int j = 0; j < kJointCount; ++j)
    angles[j] = clamp(params[4 + j], limits_lo[j], limits_hi[j], clamped);
  const S sh = clamp(params[4 + kJointCount + 0], 0.2, 5.0, clamped);
  const S sg = clamp(params[4 + kJointCount + 1], 0.2, 5.0, clamped);
  const S sl = clamp(params[4 + kJointCount + 2], 0.2, 5.0, clamped);

  V3S<S> class_scale[4];
  class_scale[kCore] = {sh * sg, sh * sg, sh};
  class_scale[kLeg] = {sh * sg, sh * sg, sh * sl};
  class_scale[kArm] = {sh * sg, sh * sl, sh * sg};
  class_scale[kFoot] = {sh * sl, sh * sg, sh * sg};

  const auto& segments = tmpl.segments();
  std::vector<M3S<S>> seg_rot(segments.size());
  std::vector<V3S<S>> seg_pos(segments.size());
  for (size_t i = 0; i < segments.size(); ++i) {
    const auto& seg = segments[i];
    M3S<S> rot;
    V3S<S> pos;
    if (seg.parent < 0) {
      rot = axis_rotation<S>(2, 1.0, params[3]);
      pos = {params[0], params[1], params[2]};
    } else {
      const auto& ps = class_scale[segments[seg.parent].scale_class];
      const V3S<S> off = {ps.x * seg.joint_offset.x(), ps.y * seg.joint_offset.y(),
                          ps.z * seg.joint_offset.z()};
      const V3S<S> world = seg_rot[seg.parent] * off;
      pos = {seg_pos[seg.parent].x + world.x, seg_pos[seg.parent].y + world.y,
             seg_pos[seg.parent].z + world.z};
      rot = seg_rot[seg.parent];
      for (const auto& dof : seg.dofs)
        rot = rot * axis_rotation<S>(dof.axis, dof.sign, angles[dof.index]);
    }
    seg_rot[i] = rot;
    seg_pos[i] = pos;

    const auto& sc = class_scale[seg.scale_class];
    for (int k = 0; k < seg.vertex_count; ++k) {
      const Vec3& l = tmpl.local_coords()[seg.first_vertex + k];
      const V3S<S> scaled = {sc.x * l.x(), sc.y * l.y(), sc.z * l.z()};
      const V3S<S> w = rot * scaled;
      (*out)[seg.first_vertex + k] = {pos.x + w.x, pos.y + w.y, pos.z + w.z};
    }
  }
}

}  // namespace

BodyMesh forward(const std::shared_ptr<const BodyTemplate>& tmpl, const BodyParams& params) {
  BodyMesh mesh;
  mesh.tmpl = tmpl;
  const auto pv = params.to_vector();
  std::vector<V3S<double>> out(tmpl->vertex_count());
  bool clamped = false;
  forward_generic<double>(*tmpl, pv.data(), &out, &clamped);
  mesh.clamped = clamped;
  mesh.vertices.resize(out.size());
  for (size_t i = 0; i < out.size(); ++i) mesh.vertices[i] = Vec3(out[i].x, out[i].y, out[i].z);
  return mesh;
}

void forward_with_jacobian(const BodyTemplate& tmpl, const BodyParams& params,
                           std::vector<Vec3>* vertices, Eigen::MatrixXd* jacobian,
                           bool* clamped) {
  if (clamped) *clamped = false;
  const auto pv = params.to_vector();
  if (!jacobian) {  // plain evaluation
    std::vector<V3S<double>> out(tmpl.vertex_count());
    forward_generic<double>(tmpl, pv.data(), &out, clamped);
    if (vertices) {
      vertices->resize(out.size());
      for (size_t i = 0; i < out.size(); ++i)
        (*vertices)[i] = Vec3(out[i].x, out[i].y, out[i].z);
    }
    return;
  }
  using J = Jet<kParamCount>;
  J jp[kParamCount];
  for (int i = 0; i < kParamCount; ++i) jp[i] = J::variable(pv[i], i);
  std::vector<V3S<J>> out(tmpl.vertex_count());
  forward_generic<J>(tmpl, jp, &out, clamped);
  if (vertices) vertices->resize(out.size());
  jacobian->resize(3 * tmpl.vertex_count(), kParamCount);
  for (int i = 0; i < tmpl.vertex_count(); ++i) {
    if (vertices) (*vertices)[i] = Vec3(out[i].x.v, out[i].y.v, out[i].z.v);
    jacobian->row(3 * i + 0) = out[i].x.d.transpose();
    jacobian->row(3 * i + 1) = out[i].y.d.transpose();
    jacobian->row(3 * i + 2) = out[i].z.d.transpose();
  }
}

TriMesh BodyMesh::to_mesh() const {
  TriMesh m;
  m.vertices = vertices;
  m.faces = tmpl->faces();
  return m;
}

double pose_prior(const BodyParams& p, const BodyTemplate& tmpl) {
  return (p.joint_angles - tmpl.rest_pose()).squaredNorm();
}

double distal_prior(const BodyParams& p, const BodyTemplate& tmpl) {
  const auto d = p.joint_angles - tmpl.rest_pose();
  double s = 0.0;
  for (int j : {int(kAnkleL), int(kAnkleR), int(kElbowL), int(kElbowR)}) s += d[j] * d[j];
  return s;
}

double shape_prior(const BodyParams& p) {
  double s = 0.0;
  for (int k = 0; k < 3; ++k) {
    const double l = std::log(p.shape_scale[k]);
    s += l * l;
  }
  return s;
}

double param_prior(const BodyParams& p, const BodyTemplate& tmpl) {
  return pose_prior(p, tmpl) + shape_prior(p);
}

Eigen::Matrix<double, kParamCount, 1> prior_gradient(const BodyParams& p,
                                                     const BodyTemplate& tmpl, double w_pose,
                                                     double w_distal, double w_shape) {
  Eigen::Matrix<double, kParamCount, 1> g = Eigen::Matrix<double, kParamCount, 1>::Zero();
  const auto d = p.joint_angles - tmpl.rest_pose();
  for (int j = 0; j < kJointCount; ++j) g[4 + j] = 2.0 * w_pose * d[j];
  for (int j : {int(kAnkleL), int(kAnkleR), int(kElbowL), int(kElbowR)})
    g[4 + j] += 2.0 * w_distal * d[j];
  for (int k = 0; k < 3; ++k)
    g[4 + kJointCount + k] = 2.0 * w_shape * std::log(p.shape_scale[k]) / p.shape_scale[k];
  return g;
}

double hip_joint_height(const BodyParams& p) {
  return p.translation.z() - kHipDrop * p.shape_scale[0];
}

void solve_sitting_legs(const BodyTemplate& tmpl, double hip_z, double phi_extra_left,
                        double phi_extra_right, BodyParams* p) {
  (void)tmpl;
  const double sh = p->shape_scale[0], sg = p->shape_scale[1], sl = p->shape_scale[2];
  const double thigh = kThighLen * sh * sl;
  const double shin = kShinLen * sh * sl;
  const double ankle_h = kAnkleHeight * sh * sg;
  // Baseline thigh tilt phi0 gives a vertical shin; any extra tilt pushes the
  // foot forward and the shin angle psi absorbs it so the sole stays exactly
  // at ground height, with the ankle keeping the foot flat.
  double s0 = (hip_z - shin - ankle_h) / thigh;
  s0 = std::min(std::max(s0, -0.45), 0.45);
  const double phi0 = std::asin(s0);
  const double extra[2] = {std::abs(phi_extra_left), std::abs(phi_extra_right)};
  for (int side = 0; side < 2; ++side) {
    const int o = side * 4;
    const double phi = phi0 + extra[side];
    double c = (hip_z - thigh * std::sin(phi) - ankle_h) / shin;
    c = std::min(std::max(c, -1.0), 1.0);
    const double psi = std::acos(c);  // shin tilt forward of vertical
    p->joint_angles[kHipLPitch + o] = -M_PI / 2 + phi;
    p->joint_angles[kHipLAbd + o] = 0.0;
    p->joint_angles[kKneeL + o] = M_PI / 2 - phi - psi;
    p->joint_angles[kAnkleL + o] = psi;
  }
}

namespace {

double min_z(const std::vector<Vec3>& verts) {
  double z = std::numeric_limits<double>::infinity();
  for (const Vec3& v : verts) z = std::min(z, v.z());
  return z;
}

double min_z_segment(const BodyTemplate& tmpl, const std::vector<Vec3>& verts,
                     const std::string& name) {
  double z = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < verts.size(); ++i)
    if (tmpl.segment_names()[tmpl.vertex_segment()[i]] == name) z = std::min(z, verts[i].z());
  return z;
}

}  // namespace

BodyParams sample_pose(PoseCategory category, std::uint64_t seed,
                       const std::shared_ptr<const BodyTemplate>& tmpl) {
  Rng rng(seed);
  BodyParams p;
  // log-normal shape scales, clipped to +-10% so category height guarantees
  // (seat clearance, pelvis-height band) hold for every seed
  auto shape_draw = [&](double sigma) {
    return std::exp(std::min(std::max(rng.normal(0.0, sigma), -0.095), 0.095));
  };
  p.shape_scale = Vec3(shape_draw(0.04), shape_draw(0.05), shape_draw(0.03));
  auto& a = p.joint_angles;
  a = tmpl->rest_pose();

  switch (category) {
    case PoseCategory::Standing: {
      a[kSpinePitch] += rng.normal(0.03, 0.05);
      a[kSpineYaw] += rng.normal(0.0, 0.05);
      // legs share one draw plus small asymmetry, so neither foot lifts far
      // off the ground; the ankle cancels hip+knee to keep each sole level
      const double hip_shared = rng.normal(-0.03, 0.05);
      const double knee_shared = rng.normal(0.06, 0.05);
      for (int side = 0; side < 2; ++side) {
        const int o = side * 4;
        a[kHipLPitch + o] += hip_shared + rng.normal(0.0, 0.01);
        a[kHipLAbd + o] += rng.normal(0.03, 0.02);
        a[kKneeL + o] = std::max(0.0, a[kKneeL + o] + knee_shared + rng.normal(0.0, 0.01));
        a[kAnkleL + o] = rng.normal(0.0, 0.015) - a[kHipLPitch + o] - a[kKneeL + o];
      }
      a[kShoulderLPitch] += rng.normal(0.08, 0.10);
      a[kShoulderLAbd] += rng.normal(0.0, 0.08);
      a[kShoulderRPitch] += rng.normal(0.08, 0.10);
      a[kShoulderRAbd] += rng.normal(0.0, 0.08);
      a[kElbowL] += rng.normal(0.15, 0.10);
      a[kElbowR] += rng.normal(0.15, 0.10);
      break;
    }
    case PoseCategory::Sitting: {
      a[kSpinePitch] += rng.normal(0.08, 0.06);
      a[kSpineYaw] += rng.normal(0.0, 0.05);
      a[kShoulderLPitch] += rng.normal(0.15, 0.10);
      a[kShoulderLAbd] += rng.normal(0.05, 0.07);
      a[kShoulderRPitch] += rng.normal(0.15, 0.10);
      a[kShoulderRAbd] += rng.normal(0.05, 0.07);
      a[kElbowL] += rng.normal(0.40, 0.15);
      a[kElbowR] += rng.normal(0.40, 0.15);
      break;
    }
    case PoseCategory::Lying: {
      a[kSpinePitch] = -M_PI / 2 + rng.normal(0.0, 0.04);
      a[kSpineYaw] += rng.normal(0.0, 0.04);
      for (int side = 0; side < 2; ++side) {
        const int o = side * 4;
        a[kHipLPitch + o] = -M_PI / 2 + rng.normal(0.0, 0.05);
        a[kHipLAbd + o] += rng.normal(0.05, 0.04);
        a[kKneeL + o] = std::max(0.0, rng.normal(0.15, 0.08));
        a[kAnkleL + o] += rng.normal(0.30, 0.10);
      }
      a[kShoulderLPitch] += rng.normal(0.05, 0.06);
      a[kShoulderLAbd] += rng.normal(0.10, 0.08);
      a[kShoulderRPitch] += rng.normal(0.05, 0.06);
      a[kShoulderRAbd] += rng.normal(0.10, 0.08);
      a[kElbowL] = std::max(0.0, rng.normal(0.20, 0.10));
      a[kElbowR] = std::max(0.0, rng.normal(0.20, 0.10));
      break;
    }
  }
  for (int j = 0; j < kJointCount; ++j)
    a[j] = std::min(std::max(a[j], tmpl->joint_lo()[j]), tmpl->joint_hi()[j]);

  if (category == PoseCategory::Sitting) {
    // Pelvis bottom exactly on a nominal 0.45 m seat; legs solved so both
    // soles land exactly on the ground, with per-side thigh-tilt noise.
    const BodyMesh zero = forward(tmpl, p);
    const double pelvis_bottom = min_z_segment(*tmpl, zero.vertices, "pelvis");
    p.translation.z() = 0.45 - pelvis_bottom;
    const double hip_z = p.translation.z() - kHipDrop * p.shape_scale[0];
    solve_sitting_legs(*tmpl, hip_z, rng.normal(0.0, 0.05), rng.normal(0.0, 0.05), &p);
  } else {
    const BodyMesh zero = forward(tmpl, p);
    p.translation.z() = -min_z(zero.vertices);
  }
  return p;
}

void BodyTemplate::save(const std::string& obj_path, const std::string& sidecar_path) const {
  BodyParams canon;
  std::vector<Vec3> verts;
  forward_with_jacobian(*this, canon, &verts, nullptr, nullptr);
  TriMesh mesh;
  mesh.vertices = verts;
  mesh.faces = faces_;
  save_mesh(mesh, obj_path, MeshFormat::Obj);

  std::ofstream side(sidecar_path);
  if (!side) throw IoError("cannot open for writing: " + sidecar_path);
  for (const Segment& s : segments_)
    side << "segment " << s.name << " " << s.first_vertex << " "
         << s.first_vertex + s.vertex_count << "\n";
  side << "feet";
  for (int i : feet_vertices_) side << " " << i;
  side << "\n";
  side.close();
  if (!side) throw IoError("write failed: " + sidecar_path);
}

}  // namespace proxgen
