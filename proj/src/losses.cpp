#include "proxgen/losses.hpp"

#include <algorithm>

#include "proxgen/errors.hpp"
#include "proxgen/robust.hpp"

namespace proxgen {
namespace {

// Clamp a query into the grid's node box; axes that were clamped carry no
// gradient. Analytic fields pass through untouched.
Vec3 clamp_to_field(const SdfField& sdf, const Vec3& p, bool live_axis[3]) {
  live_axis[0] = live_axis[1] = live_axis[2] = true;
  if (!sdf.is_grid()) return p;
  Vec3 q = p;
  for (int a = 0; a < 3; ++a) {
    const double lo = sdf.grid_origin()[a];
    const double hi = lo + sdf.grid_cell()[a] * (sdf.grid_res()[a] - 1);
    if (q[a] < lo) {
      q[a] = lo;
      live_axis[a] = false;
    } else if (q[a] > hi) {
      q[a] = hi;
      live_axis[a] = false;
    }
  }
  return q;
}

}  // namespace

PenaltyResult collision_penalty(const std::vector<Vec3>& verts, const SdfField& sdf,
                                bool with_grad) {
  if (verts.empty()) throw ValidationError("collision_penalty: no vertices");
  PenaltyResult out;
  if (with_grad) out.d_verts.assign(verts.size(), Vec3::Zero());
  const double inv = 1.0 / double(verts.size());
  for (size_t i = 0; i < verts.size(); ++i) {
    bool live[3];
    const Vec3 q = clamp_to_field(sdf, verts[i], live);
    const double d = sdf.eval(q);
    if (d >= 0.0) continue;
    out.value += -d * inv;
    if (with_grad) {
      Vec3 g = -inv * sdf.grad(q);
      for (int a = 0; a < 3; ++a)
        if (!live[a]) g[a] = 0.0;
      out.d_verts[i] = g;
    }
  }
  return out;
}

PenaltyResult contact_penalty(const std::vector<Vec3>& verts, const std::vector<int>& subset,
                              const PointIndex& scene, double sigma, bool with_grad) {
  PenaltyResult out;
  if (with_grad) out.d_verts.assign(verts.size(), Vec3::Zero());
  for (int vi : subset) {
    if (vi < 0 || vi >= int(verts.size()))
      throw ValidationError("contact_penalty: vertex index out of range");
    const auto [pi, dist] = scene.nearest(verts[vi]);
    out.value += geman_mcclure(dist, sigma);
    if (with_grad && dist > 0.0) {
      const Vec3 dir = (verts[vi] - scene.points()[pi]) / dist;
      out.d_verts[vi] += geman_mcclure_grad(dist, sigma) * dir;
    }
  }
  return out;
}

}  // namespace proxgen
