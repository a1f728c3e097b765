#include "proxgen/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "proxgen/binio.hpp"

namespace proxgen {

namespace {

// Shared by the tree search and the brute-force oracle so both produce the
// same floating-point values (the build disables FP contraction to keep this
// expression identical across inlining contexts).
inline double squared_distance(const Vec3& a, const Vec3& b) {
  const double dx = a.x() - b.x();
  const double dy = a.y() - b.y();
  const double dz = a.z() - b.z();
  return dx * dx + dy * dy + dz * dz;
}

constexpr int kLeafSize = 16;

}  // namespace

PointIndex::PointIndex(std::vector<Vec3> points) : points_(std::move(points)) {
  if (points_.empty()) throw ValidationError("cannot index an empty point set");
  order_.resize(points_.size());
  for (size_t i = 0; i < points_.size(); ++i) order_[i] = int(i);
  nodes_.reserve(2 * points_.size() / kLeafSize + 2);
  root_ = build(0, int(points_.size()));
}

int PointIndex::build(int begin, int end) {
  const int id = int(nodes_.size());
  nodes_.emplace_back();
  if (end - begin <= kLeafSize) {
    nodes_[id].begin = begin;
    nodes_[id].end = end;
    return id;
  }
  Vec3 lo = points_[order_[begin]], hi = lo;
  for (int i = begin + 1; i < end; ++i) {
    lo = lo.cwiseMin(points_[order_[i]]);
    hi = hi.cwiseMax(points_[order_[i]]);
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);
  const int mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](int a, int b) {
                     const double ca = points_[a][axis], cb = points_[b][axis];
                     return ca < cb || (ca == cb && a < b);
                   });
  const double split = points_[order_[mid]][axis];
  // fill after recursion: vector may reallocate
  const int left = build(begin, mid);
  const int right = build(mid, end);
  nodes_[id].axis = axis;
  nodes_[id].split = split;
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

void PointIndex::search(int node, const Vec3& q, int& best, double& best_d2) const {
  const Node& n = nodes_[node];
  if (n.axis < 0) {
    for (int i = n.begin; i < n.end; ++i) {
      const int idx = order_[i];
      const double d2 = squared_distance(points_[idx], q);
      if (d2 < best_d2 || (d2 == best_d2 && idx < best)) {
        best = idx;
        best_d2 = d2;
      }
    }
    return;
  }
  const double diff = q[n.axis] - n.split;
  const int near = diff < 0.0 ? n.left : n.right;
  const int far = diff < 0.0 ? n.right : n.left;
  search(near, q, best, best_d2);
  // visit the far side on exact ties too: it may hold an equal-distance
  // point with a lower index
  if (diff * diff <= best_d2) search(far, q, best, best_d2);
}

std::pair<int, double> PointIndex::nearest(const Vec3& query) const {
  int best = std::numeric_limits<int>::max();
  double best_d2 = std::numeric_limits<double>::infinity();
  search(root_, query, best, best_d2);
  return {best, std::sqrt(best_d2)};
}

std::pair<int, double> PointIndex::nearest_brute_force(const std::vector<Vec3>& points,
                                                       const Vec3& query) {
  if (points.empty()) throw ValidationError("cannot query an empty point set");
  int best = std::numeric_limits<int>::max();
  double best_d2 = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < points.size(); ++i) {
    const double d2 = squared_distance(points[i], query);
    if (d2 < best_d2 || (d2 == best_d2 && int(i) < best)) {
      best = int(i);
      best_d2 = d2;
    }
  }
  return {best, std::sqrt(best_d2)};
}

namespace {

inline double sign_of(double x) { return x >= 0.0 ? 1.0 : -1.0; }

// Exact signed distance of an axis-aligned box evaluated in its local frame.
inline double box_sdf_local(const Vec3& q, const Vec3& h) {
  const Vec3 d(std::abs(q.x()) - h.x(), std::abs(q.y()) - h.y(), std::abs(q.z()) - h.z());
  const Vec3 m = d.cwiseMax(0.0);
  const double outside = std::sqrt(m.x() * m.x() + m.y() * m.y() + m.z() * m.z());
  const double inside = std::min(std::max({d.x(), d.y(), d.z()}), 0.0);
  return outside + inside;
}

inline Vec3 box_grad_local(const Vec3& q, const Vec3& h) {
  const Vec3 d(std::abs(q.x()) - h.x(), std::abs(q.y()) - h.y(), std::abs(q.z()) - h.z());
  const Vec3 m = d.cwiseMax(0.0);
  const double outside = std::sqrt(m.x() * m.x() + m.y() * m.y() + m.z() * m.z());
  if (outside > 0.0)
    return Vec3(sign_of(q.x()) * m.x(), sign_of(q.y()) * m.y(), sign_of(q.z()) * m.z()) / outside;
  // inside: move along the first axis closest to a face
  const double maxc = std::max({d.x(), d.y(), d.z()});
  for (int k = 0; k < 3; ++k)
    if (d[k] == maxc) {
      Vec3 g = Vec3::Zero();
      g[k] = sign_of(q[k]);
      return g;
    }
  return Vec3::UnitZ();  // unreachable
}

inline Vec3 rotate_z(const Vec3& p, double c, double s) {
  return Vec3(c * p.x() - s * p.y(), s * p.x() + c * p.y(), p.z());
}

}  // namespace

SdfField SdfField::analytic(std::vector<BoxSpec> boxes, std::optional<double> floor_z) {
  if (boxes.empty() && !floor_z) throw ValidationError("analytic field needs at least one primitive");
  for (const BoxSpec& b : boxes)
    if (!(b.half_extents.minCoeff() > 0.0))
      throw ValidationError("box half extents must be positive");
  SdfField f;
  f.is_grid_ = false;
  f.boxes_ = std::move(boxes);
  f.floor_z_ = floor_z;
  return f;
}

SdfField SdfField::grid(const Vec3& origin, const Vec3& cell, const Eigen::Vector3i& res,
                        std::vector<float> values) {
  if (res.minCoeff() < 2) throw ValidationError("grid needs at least 2 nodes per axis");
  if (!(cell.minCoeff() > 0.0)) throw ValidationError("grid cell size must be positive");
  if (values.size() != size_t(res.x()) * res.y() * res.z())
    throw ValidationError("grid value count does not match resolution");
  SdfField f;
  f.is_grid_ = true;
  f.origin_ = origin;
  f.cell_ = cell;
  f.res_ = res;
  f.values_ = std::move(values);
  return f;
}

void SdfField::locate(const Vec3& p, int i0[3], double t[3]) const {
  // Snap nearly-integral lattice coordinates to the node, so lattice nodes
  // reproduce stored values exactly despite division rounding.
  for (int a = 0; a < 3; ++a) {
    const double u = (p[a] - origin_[a]) / cell_[a];
    if (u < -1e-9 || u > double(res_[a] - 1) + 1e-9)
      throw ValidationError("grid SDF query outside bounds");
    double fl = std::floor(u);
    double frac = u - fl;
    if (frac < 1e-9) frac = 0.0;
    if (frac > 1.0 - 1e-9) {
      fl += 1.0;
      frac = 0.0;
    }
    int i = std::min(std::max(int(fl), 0), res_[a] - 1);
    if (i == res_[a] - 1) {  // last node: interpolate from the previous cell
      i -= 1;
      frac = 1.0;
    }
    i0[a] = i;
    t[a] = frac;
  }
}

double SdfField::node(int x, int y, int z) const {
  return values_[size_t(x) + size_t(res_[0]) * (size_t(y) + size_t(res_[1]) * size_t(z))];
}

double SdfField::eval(const Vec3& p) const {
  if (!is_grid_) {
    double best = std::numeric_limits<double>::infinity();
    if (floor_z_) best = p.z() - *floor_z_;
    for (const BoxSpec& b : boxes_) {
      const double c = std::cos(b.yaw), s = std::sin(b.yaw);
      const Vec3 q = rotate_z(p - b.center, c, -s);
      const double d = box_sdf_local(q, b.half_extents);
      if (d < best) best = d;
    }
    return best;
  }
  int i0[3];
  double t[3];
  locate(p, i0, t);
  double acc = 0.0;
  for (int dz = 0; dz < 2; ++dz)
    for (int dy = 0; dy < 2; ++dy)
      for (int dx = 0; dx < 2; ++dx) {
        const double w = (dx ? t[0] : 1.0 - t[0]) * (dy ? t[1] : 1.0 - t[1]) *
                         (dz ? t[2] : 1.0 - t[2]);
        acc += w * node(i0[0] + dx, i0[1] + dy, i0[2] + dz);
      }
  return acc;
}

Vec3 SdfField::grad(const Vec3& p) const {
  if (!is_grid_) {
    // first primitive achieving the minimum wins (floor first, then boxes)
    double best = std::numeric_limits<double>::infinity();
    int best_box = -1;
    bool best_is_floor = false;
    if (floor_z_) {
      best = p.z() - *floor_z_;
      best_is_floor = true;
    }
    for (size_t i = 0; i < boxes_.size(); ++i) {
      const BoxSpec& b = boxes_[i];
      const double c = std::cos(b.yaw), s = std::sin(b.yaw);
      const Vec3 q = rotate_z(p - b.center, c, -s);
      const double d = box_sdf_local(q, b.half_extents);
      if (d < best) {
        best = d;
        best_box = int(i);
        best_is_floor = false;
      }
    }
    if (best_is_floor) return Vec3(0, 0, 1);
    const BoxSpec& b = boxes_[best_box];
    const double c = std::cos(b.yaw), s = std::sin(b.yaw);
    const Vec3 q = rotate_z(p - b.center, c, -s);
    return rotate_z(box_grad_local(q, b.half_extents), c, s);
  }
  // Exact gradient of the trilinear interpolant within the containing cell.
  int i0[3];
  double t[3];
  locate(p, i0, t);
  Vec3 g = Vec3::Zero();
  for (int dz = 0; dz < 2; ++dz)
    for (int dy = 0; dy < 2; ++dy)
      for (int dx = 0; dx < 2; ++dx) {
        const double v = node(i0[0] + dx, i0[1] + dy, i0[2] + dz);
        const double wx = dx ? t[0] : 1.0 - t[0];
        const double wy = dy ? t[1] : 1.0 - t[1];
        const double wz = dz ? t[2] : 1.0 - t[2];
        g.x() += (dx ? 1.0 : -1.0) / cell_.x() * wy * wz * v;
        g.y() += (dy ? 1.0 : -1.0) / cell_.y() * wx * wz * v;
        g.z() += (dz ? 1.0 : -1.0) / cell_.z() * wx * wy * v;
      }
  return g;
}

void SdfField::save(const std::string& path) const {
  if (!is_grid_) throw ValidationError("only grid SDF fields can be saved");
  BinWriter w(path);
  w.write_magic("PGSD");
  w.write<std::uint32_t>(1);  // version
  for (int a = 0; a < 3; ++a) w.write<double>(origin_[a]);
  for (int a = 0; a < 3; ++a) w.write<double>(cell_[a]);
  for (int a = 0; a < 3; ++a) w.write<std::uint32_t>(std::uint32_t(res_[a]));
  w.write_array(values_.data(), values_.size());
  w.close();
}

SdfField SdfField::load(const std::string& path) {
  BinReader r(path);
  r.expect_magic("PGSD", "grid SDF");
  const auto version = r.read<std::uint32_t>();
  if (version != 1) throw IoError("unsupported grid SDF version " + std::to_string(version));
  Vec3 origin, cell;
  for (int a = 0; a < 3; ++a) origin[a] = r.read<double>();
  for (int a = 0; a < 3; ++a) cell[a] = r.read<double>();
  Eigen::Vector3i res;
  for (int a = 0; a < 3; ++a) res[a] = int(r.read<std::uint32_t>());
  if (res.minCoeff() < 2) throw IoError("corrupt grid SDF resolution in " + path);
  std::vector<float> values(size_t(res.x()) * res.y() * res.z());
  r.read_array(values.data(), values.size());
  return grid(origin, cell, res, std::move(values));
}

SdfField bake_grid(const SdfField& field, const Vec3& lo, const Vec3& hi,
                   const Eigen::Vector3i& res) {
  if (res.minCoeff() < 2) throw ValidationError("bake_grid needs at least 2 nodes per axis");
  if (!((hi - lo).minCoeff() > 0.0)) throw ValidationError("bake_grid bounds are degenerate");
  const Vec3 cell((hi.x() - lo.x()) / (res.x() - 1), (hi.y() - lo.y()) / (res.y() - 1),
                  (hi.z() - lo.z()) / (res.z() - 1));
  std::vector<float> values(size_t(res.x()) * res.y() * res.z());
  size_t k = 0;
  for (int iz = 0; iz < res.z(); ++iz)
    for (int iy = 0; iy < res.y(); ++iy)
      for (int ix = 0; ix < res.x(); ++ix)
        values[k++] = float(field.eval(Vec3(lo.x() + cell.x() * ix, lo.y() + cell.y() * iy,
                                            lo.z() + cell.z() * iz)));
  return SdfField::grid(lo, cell, res, std::move(values));
}

}  // namespace proxgen
