#include "proxgen/fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "proxgen/errors.hpp"
#include "proxgen/optim.hpp"

namespace proxgen {
namespace {

Vec3 segment_centroid(const BodyTemplate& tmpl, const std::vector<Vec3>& verts,
                      const std::string& name) {
  Vec3 c = Vec3::Zero();
  int count = 0;
  for (const auto& seg : tmpl.segments())
    if (seg.name == name) {
      for (int i = 0; i < seg.vertex_count; ++i) c += verts[size_t(seg.first_vertex + i)];
      count += seg.vertex_count;
    }
  if (count == 0) throw ValidationError("unknown segment " + name);
  return c / double(count);
}

double sign_of(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

}  // namespace

const char* to_string(OptimVariant v) {
  return v == OptimVariant::SimOptim ? "simoptim" : "advoptim";
}

BodyParams init_from_vertices(const std::vector<Vec3>& target_world,
                              const std::shared_ptr<const BodyTemplate>& tmpl) {
  const int v = tmpl->vertex_count();
  if (int(target_world.size()) != v)
    throw ValidationError("init_from_vertices: vertex count mismatch");
  Vec3 lo = target_world[0], hi = target_world[0], centroid = Vec3::Zero();
  for (const Vec3& p : target_world) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
    centroid += p;
  }
  centroid /= double(v);
  if ((hi - lo).minCoeff() < 1e-9)
    throw ValidationError("init_from_vertices: degenerate target extent");

  // reference body in the same pose the initialization returns
  BodyParams rest;
  rest.joint_angles = tmpl->rest_pose();
  const BodyMesh canon = forward(tmpl, rest);
  Vec3 clo = canon.vertices[0], chi = canon.vertices[0], c0 = Vec3::Zero();
  for (const Vec3& p : canon.vertices) {
    clo = clo.cwiseMin(p);
    chi = chi.cwiseMax(p);
    c0 += p;
  }
  c0 /= double(v);

  BodyParams p;
  p.joint_angles = tmpl->rest_pose();

  Vec3 axis = segment_centroid(*tmpl, target_world, "upperArmL") -
              segment_centroid(*tmpl, target_world, "upperArmR");
  axis.z() = 0.0;
  if (axis.norm() > 1e-9) p.yaw = std::atan2(-axis.x(), axis.y());

  const double sh =
      std::clamp((hi.z() - lo.z()) / (chi.z() - clo.z()), std::exp(-0.095), std::exp(0.095));
  p.shape_scale = Vec3(sh, 1.0, 1.0);

  p.translation = centroid - rotate_z(p.yaw, Vec3(c0.x(), c0.y(), sh * c0.z()));
  return p;
}

OptimResult fit_body(const std::vector<Vec3>& target_cage_vertices,
                     const Eigen::VectorXd& target_feature, const SceneEncoding& enc,
                     const CageTransform& transform, const SdfField& sdf,
                     const PointIndex& scene_index, const OptimConfig& cfg,
                     const BodyParams& init) {
  auto tmpl = BodyTemplate::standard();
  const int v = tmpl->vertex_count();
  const int n = int(enc.scene_bps.size());
  if (int(target_cage_vertices.size()) != v)
    throw ValidationError("fit_body: target vertex count mismatch");
  if (target_feature.size() != n) throw ValidationError("fit_body: feature length mismatch");
  if (cfg.steps < 0 || !(cfg.step_size > 0.0)) throw ValidationError("fit_body: bad config");

  Eigen::Matrix<double, kParamCount, 1> theta = init.to_vector();
  if (!theta.allFinite()) throw ValidationError("fit_body: non-finite init");

  std::vector<Vec3> target_world(static_cast<size_t>(v));
  for (int k = 0; k < v; ++k)
    target_world[size_t(k)] = transform.cage_to_world(target_cage_vertices[size_t(k)]);

  const bool adv = cfg.variant == OptimVariant::AdvOptim;
  const std::vector<int>& feet = tmpl->feet_vertices();
  Adam<Eigen::Matrix<double, kParamCount, 1>> adam(cfg.step_size);

  OptimResult res;
  double best = std::numeric_limits<double>::infinity();
  std::vector<Vec3> verts;
  Eigen::MatrixXd jac;
  std::vector<Vec3> cage(static_cast<size_t>(v));
  const double inv_3v = 1.0 / double(3 * v);
  const double inv_n = 1.0 / double(n);

  for (int it = 0; it <= cfg.steps; ++it) {
    const BodyParams p = BodyParams::from_vector(theta);
    bool clamped = false;
    forward_with_jacobian(*tmpl, p, &verts, &jac, &clamped);

    Eigen::VectorXd g_verts = Eigen::VectorXd::Zero(3 * v);
    FitLosses L;

    for (int k = 0; k < v; ++k)
      for (int c = 0; c < 3; ++c) {
        const double diff = verts[size_t(k)][c] - target_world[size_t(k)][c];
        L.vertex += std::abs(diff) * inv_3v;
        g_verts[3 * k + c] += sign_of(diff) * inv_3v;
      }

    for (int k = 0; k < v; ++k) cage[size_t(k)] = transform.world_to_cage(verts[size_t(k)]);
    const BodyFeatureGrad fg = feature_from_body(cage, enc);
    for (int i = 0; i < n; ++i) {
      const double diff = fg.values[i] - target_feature[i];
      L.feature += std::abs(diff) * inv_n;
      // chain through the achieving vertex and the cage scale
      const Vec3 g = sign_of(diff) * inv_n * transform.scale * fg.direction[size_t(i)];
      for (int c = 0; c < 3; ++c) g_verts[3 * fg.source[size_t(i)] + c] += g[c];
    }

    if (adv) {
      const auto cr = collision_penalty(verts, sdf, true);
      const auto ct = contact_penalty(verts, feet, scene_index, cfg.contact_sigma, true);
      L.collision = cr.value;
      L.contact = ct.value;
      for (int k = 0; k < v; ++k) {
        const Vec3 g = cfg.lambda1 * cr.d_verts[size_t(k)] + cfg.lambda2 * ct.d_verts[size_t(k)];
        for (int c = 0; c < 3; ++c) g_verts[3 * k + c] += g[c];
      }
    }

    L.prior = cfg.lambda3 * pose_prior(p, *tmpl) + cfg.lambda4 * distal_prior(p, *tmpl) +
              cfg.lambda5 * shape_prior(p);
    L.total = L.vertex + L.feature + cfg.lambda1 * L.collision + cfg.lambda2 * L.contact + L.prior;
    if (!std::isfinite(L.total))
      throw ValidationError("fit_body: non-finite loss at step " + std::to_string(it));
    res.trajectory.push_back(L.total);
    if (L.total < best) {
      best = L.total;
      res.params = p;
      res.final_losses = L;
    }
    if (it == cfg.steps) break;

    Eigen::Matrix<double, kParamCount, 1> g_theta = jac.transpose() * g_verts;
    g_theta += prior_gradient(p, *tmpl, cfg.lambda3, cfg.lambda4, cfg.lambda5);
    adam.step(&theta, g_theta);
  }
  return res;
}

}  // namespace proxgen
