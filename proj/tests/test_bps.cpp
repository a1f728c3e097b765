#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>

#include "proxgen/bps.hpp"
#include "proxgen/rng.hpp"

using namespace proxgen;

namespace {

// random already-normalized scene: points in the unit ball, identity-ish transform
NormalizedScene random_scene(Rng* rng, int count, double cage_edge = 2.0) {
  NormalizedScene s;
  s.transform = CageTransform::make(Vec3(0.3, -0.2, 1.0), cage_edge, rng->uniform(0, 6.28),
                                    Vec3(0.01, -0.02, 0.03));
  for (int i = 0; i < count; ++i) {
    Vec3 p;
    do {
      p = Vec3(rng->uniform(-1, 1), rng->uniform(-1, 1), rng->uniform(-1, 1));
    } while (p.norm() >= 1.0);
    s.points.push_back(p);
    s.is_cage.push_back(rng->uniform() < 0.3 ? 1 : 0);
  }
  return s;
}

}  // namespace

TEST_CASE("basis points are deterministic per seed and inside the unit ball") {
  const BasisPointSet a = make_basis(256, 7);
  const BasisPointSet b = make_basis(256, 7);
  const BasisPointSet c = make_basis(256, 8);
  CHECK(a.n() == 256);
  CHECK(a.seed == 7);
  bool same = true, differs = false;
  for (int i = 0; i < 256; ++i) {
    same = same && a.points[i] == b.points[i];
    differs = differs || a.points[i] != c.points[i];
    CHECK(a.points[i].norm() < 1.0);
  }
  CHECK(same);
  CHECK(differs);
  CHECK_THROWS_AS(make_basis(0, 1), ValidationError);
}

TEST_CASE("scene encoding matches the exhaustive double loop") {
  Rng rng(41);
  for (int inst = 0; inst < 5; ++inst) {
    const BasisPointSet basis = make_basis(128, 100 + inst);
    const NormalizedScene scene = random_scene(&rng, 50 + int(rng.uniform_index(300)));
    const SceneEncoding enc = encode_scene(basis, scene);
    for (int i = 0; i < basis.n(); ++i) {
      double best = std::numeric_limits<double>::infinity();
      int best_idx = -1;
      for (size_t j = 0; j < scene.points.size(); ++j) {
        const double d = (scene.points[j] - basis.points[i]).norm();
        if (d < best) {
          best = d;
          best_idx = int(j);
        }
      }
      CHECK(enc.scene_feature[i] == best);
      CHECK(enc.scene_bps[i] == scene.transform.sphere_to_cage(scene.points[best_idx]));
      CHECK(enc.source_flags[i] == scene.is_cage[best_idx]);
    }
  }
}

TEST_CASE("body encoding matches the exhaustive double loop and zeroes at contact") {
  Rng rng(43);
  const BasisPointSet basis = make_basis(128, 5);
  const NormalizedScene scene = random_scene(&rng, 200);
  const SceneEncoding enc = encode_scene(basis, scene);
  std::vector<Vec3> body;
  for (int i = 0; i < 40; ++i)
    body.emplace_back(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
  // place one body vertex exactly on a selected scene point
  body[7] = enc.scene_bps[3];

  const BodyFeature feat = encode_body(enc, body);
  CHECK(feat.values[3] == 0.0);
  for (int i = 0; i < basis.n(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (const Vec3& v : body) best = std::min(best, (v - enc.scene_bps[i]).norm());
    CHECK(feat.values[i] == best);
  }
}

TEST_CASE("feature gradient wiring: source index and unit direction") {
  Rng rng(44);
  const BasisPointSet basis = make_basis(64, 6);
  const NormalizedScene scene = random_scene(&rng, 150);
  const SceneEncoding enc = encode_scene(basis, scene);
  std::vector<Vec3> body;
  for (int i = 0; i < 25; ++i)
    body.emplace_back(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
  body[4] = enc.scene_bps[9];  // exact contact -> zero subgradient

  const BodyFeatureGrad g = feature_from_body(body, enc);
  const BodyFeature plain = encode_body(enc, body);
  for (int i = 0; i < basis.n(); ++i) {
    CHECK(g.values[i] == plain.values[i]);
    CHECK(g.values[i] == (body[g.source[i]] - enc.scene_bps[i]).norm());
    if (g.values[i] > 0.0) {
      CHECK(g.direction[i].norm() == doctest::Approx(1.0).epsilon(1e-12));
      // moving the achieving vertex along the direction grows the distance linearly
      const double h = 1e-7;
      std::vector<Vec3> moved = body;
      moved[g.source[i]] += h * g.direction[i];
      const double d2 = (moved[g.source[i]] - enc.scene_bps[i]).norm();
      CHECK(d2 - g.values[i] == doctest::Approx(h).epsilon(1e-6));
    }
  }
  CHECK(g.values[9] == 0.0);
  CHECK(g.direction[9] == Vec3::Zero());
}

TEST_CASE("feature files round-trip at f32 precision") {
  Rng rng(45);
  Eigen::VectorXd v(100);
  for (int i = 0; i < 100; ++i) v[i] = rng.uniform(0, 3);
  const std::string path =
      (std::filesystem::temp_directory_path() / "proxgen_test_feat.pgf").string();
  save_feature(v, path);
  const Eigen::VectorXd back = load_feature(path);
  REQUIRE(back.size() == v.size());
  for (int i = 0; i < 100; ++i) CHECK(back[i] == float(v[i]));
  std::filesystem::remove(path);
}

TEST_CASE("empty inputs are rejected") {
  const BasisPointSet basis = make_basis(8, 1);
  NormalizedScene empty;
  empty.transform = CageTransform::make(Vec3::Zero(), 2.0, 0.0, Vec3::Zero());
  CHECK_THROWS_AS(encode_scene(basis, empty), ValidationError);
  Rng rng(46);
  const NormalizedScene scene = random_scene(&rng, 30);
  const SceneEncoding enc = encode_scene(basis, scene);
  CHECK_THROWS_AS(encode_body(enc, {}), ValidationError);
  CHECK_THROWS_AS(feature_from_body({}, enc), ValidationError);
}
