#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "proxgen/mesh.hpp"

namespace proxgen {

// Fixed random basis: N points uniform in the unit ball. Generated once per
// model from a recorded seed and reused verbatim for train and test.
struct BasisPointSet {
  std::vector<Vec3> points;
  std::uint64_t seed = 0;

  int n() const { return int(points.size()); }
};

BasisPointSet make_basis(int n, std::uint64_t seed);

// Stage 1: for each basis point, its nearest neighbour among the normalized
// scene vertices and cage points. Distances (scene_feature) live in the
// unit-sphere frame; the selected points (scene_bps) are stored back in the
// cage frame. Index i of every array refers to basis point i.
struct SceneEncoding {
  std::vector<Vec3> scene_bps;
  Eigen::VectorXd scene_feature;
  std::vector<std::uint8_t> source_flags;  // 1 where a cage point was selected
};

SceneEncoding encode_scene(const BasisPointSet& basis, const NormalizedScene& local);

// Stage 2: distance from each selected scene point to the nearest body
// vertex, same frame for both sides. Zero entries mean body-scene contact.
struct BodyFeature {
  Eigen::VectorXd values;
};

BodyFeature encode_body(const SceneEncoding& enc, const std::vector<Vec3>& body_vertices);

// encode_body plus the subgradient wiring needed inside optimization: each
// feature entry pulls on exactly one body vertex (the achieving one, lowest
// index on ties), along direction[i] = d values[i] / d body_vertices[source[i]].
struct BodyFeatureGrad {
  Eigen::VectorXd values;
  std::vector<int> source;
  std::vector<Vec3> direction;
};

BodyFeatureGrad feature_from_body(const std::vector<Vec3>& body_vertices,
                                  const SceneEncoding& enc);

// Little-endian f32 array with a count header; used for features and other
// flat vectors.
void save_feature(const Eigen::VectorXd& values, const std::string& path);
Eigen::VectorXd load_feature(const std::string& path);

}  // namespace proxgen
