#include "proxgen/bps.hpp"

#include "proxgen/binio.hpp"
#include "proxgen/rng.hpp"
#include "proxgen/spatial.hpp"

namespace proxgen {

BasisPointSet make_basis(int n, std::uint64_t seed) {
  if (n < 1) throw ValidationError("basis needs at least one point");
  BasisPointSet basis;
  basis.seed = seed;
  basis.points.reserve(n);
  Rng rng(seed);
  while (int(basis.points.size()) < n) {
    const double x = rng.uniform(-1.0, 1.0);
    const double y = rng.uniform(-1.0, 1.0);
    const double z = rng.uniform(-1.0, 1.0);
    if (x * x + y * y + z * z < 1.0) basis.points.emplace_back(x, y, z);
  }
  return basis;
}

SceneEncoding encode_scene(const BasisPointSet& basis, const NormalizedScene& local) {
  if (local.points.empty()) throw ValidationError("cannot encode an empty scene");
  const PointIndex index(local.points);
  SceneEncoding enc;
  const int n = basis.n();
  enc.scene_bps.resize(n);
  enc.scene_feature.resize(n);
  enc.source_flags.resize(n);
  for (int i = 0; i < n; ++i) {
    const auto [idx, dist] = index.nearest(basis.points[i]);
    enc.scene_feature[i] = dist;
    enc.scene_bps[i] = local.transform.sphere_to_cage(local.points[idx]);
    enc.source_flags[i] = local.is_cage[idx];
  }
  return enc;
}

BodyFeature encode_body(const SceneEncoding& enc, const std::vector<Vec3>& body_vertices) {
  if (body_vertices.empty()) throw ValidationError("cannot encode an empty body");
  const PointIndex index(body_vertices);
  BodyFeature feat;
  const int n = int(enc.scene_bps.size());
  feat.values.resize(n);
  for (int i = 0; i < n; ++i) feat.values[i] = index.nearest(enc.scene_bps[i]).second;
  return feat;
}

BodyFeatureGrad feature_from_body(const std::vector<Vec3>& body_vertices,
                                  const SceneEncoding& enc) {
  if (body_vertices.empty()) throw ValidationError("cannot encode an empty body");
  const PointIndex index(body_vertices);
  BodyFeatureGrad out;
  const int n = int(enc.scene_bps.size());
  out.values.resize(n);
  out.source.resize(n);
  out.direction.resize(n);
  for (int i = 0; i < n; ++i) {
    const auto [idx, dist] = index.nearest(enc.scene_bps[i]);
    out.values[i] = dist;
    out.source[i] = idx;
    // d|v - s| / dv; zero subgradient at coincidence
    out.direction[i] =
        dist > 0.0 ? Vec3((body_vertices[idx] - enc.scene_bps[i]) / dist) : Vec3::Zero();
  }
  return out;
}

void save_feature(const Eigen::VectorXd& values, const std::string& path) {
  BinWriter w(path);
  w.write<std::uint32_t>(std::uint32_t(values.size()));
  for (Eigen::Index i = 0; i < values.size(); ++i) w.write<float>(float(values[i]));
  w.close();
}

Eigen::VectorXd load_feature(const std::string& path) {
  BinReader r(path);
  const auto n = r.read<std::uint32_t>();
  Eigen::VectorXd values(n);
  for (std::uint32_t i = 0; i < n; ++i) values[i] = r.read<float>();
  return values;
}

}  // namespace proxgen
