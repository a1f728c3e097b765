#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <set>

#include "proxgen/rng.hpp"
#include "proxgen/synth.hpp"

using namespace proxgen;

TEST_CASE("scene generation is deterministic and keeps furniture apart") {
  const SynthScene a = generate_scene(42, 4.0, 3);
  const SynthScene b = generate_scene(42, 4.0, 3);
  CHECK(a.boxes.size() == 3);
  CHECK(a.mesh.vertices.size() == b.mesh.vertices.size());
  for (size_t i = 0; i < a.mesh.vertices.size(); ++i)
    CHECK(a.mesh.vertices[i] == b.mesh.vertices[i]);
  REQUIRE(a.boxes.size() == b.boxes.size());
  for (size_t i = 0; i < a.boxes.size(); ++i) {
    CHECK(a.boxes[i].center == b.boxes[i].center);
    CHECK(a.boxes[i].half_extents == b.boxes[i].half_extents);
    CHECK(a.boxes[i].yaw == b.boxes[i].yaw);
  }
  const SynthScene c = generate_scene(43, 4.0, 3);
  bool differs = false;
  for (size_t i = 0; i < c.boxes.size(); ++i) differs = differs || c.boxes[i].center != a.boxes[i].center;
  CHECK(differs);

  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const SynthScene s = generate_scene(seed, 4.0, 3);
    // inside the room, on the floor
    for (const BoxSpec& box : s.boxes) {
      const double rad = box.half_extents.head<2>().norm();
      CHECK(box.center.x() - rad > -2.0);
      CHECK(box.center.x() + rad < 2.0);
      CHECK(box.center.y() - rad > -2.0);
      CHECK(box.center.y() + rad < 2.0);
      CHECK(box.center.z() == doctest::Approx(box.half_extents.z()).epsilon(1e-12));
    }
    // pairwise separated: center distance beats the sum of xy circumradii
    for (size_t i = 0; i < s.boxes.size(); ++i)
      for (size_t j = i + 1; j < s.boxes.size(); ++j) {
        const double d =
            (s.boxes[i].center.head<2>() - s.boxes[j].center.head<2>()).norm();
        CHECK(d > 0.0);
        // the sdf of one box evaluated at the other's center stays positive
        const SdfField one = SdfField::analytic({s.boxes[i]}, std::nullopt);
        CHECK(one.eval(s.boxes[j].center) > 0.0);
      }
    // seat list only contains low boxes
    std::set<int> seats(s.seat_boxes.begin(), s.seat_boxes.end());
    for (size_t i = 0; i < s.boxes.size(); ++i) {
      const double top = 2.0 * s.boxes[i].half_extents.z();
      if (seats.count(int(i)))
        CHECK(top < 0.55);
      else
        CHECK(top > 0.55);
    }
  }
  CHECK_THROWS_AS(generate_scene(1, 2.5, 3), ValidationError);
}

TEST_CASE("scene mesh and sdf describe the same geometry") {
  const SynthScene s = generate_scene(7, 4.0, 3);
  // every mesh vertex sits on the surface (floor or a box): |sdf| tiny
  for (const Vec3& v : s.mesh.vertices) CHECK(std::abs(s.sdf.eval(v)) < 1e-9);
}

TEST_CASE("body placement is valid per category and deterministic") {
  const SynthScene scene = generate_scene(11, 4.0, 3);
  auto tmpl = BodyTemplate::standard();
  for (auto category : {PoseCategory::Standing, PoseCategory::Sitting, PoseCategory::Lying}) {
    const BodyParams a = place_body(scene, category, 99);
    const BodyParams b = place_body(scene, category, 99);
    CHECK(a.to_vector() == b.to_vector());
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const BodyParams p = place_body(scene, category, seed);
      const BodyMesh mesh = forward(tmpl, p);
      std::string why;
      CHECK(placement_valid(scene, mesh, category, &why));
      INFO(why);
      // inside the room
      for (const Vec3& v : mesh.vertices) {
        CHECK(std::abs(v.x()) < 2.0);
        CHECK(std::abs(v.y()) < 2.0);
      }
      if (category == PoseCategory::Sitting) {
        // pelvis rests near a seat top, not on the floor
        double pelvis_lo = 1e9;
        for (size_t i = 0; i < mesh.vertices.size(); ++i)
          if (tmpl->segment_names()[tmpl->vertex_segment()[i]] == "pelvis")
            pelvis_lo = std::min(pelvis_lo, mesh.vertices[i].z());
        CHECK(pelvis_lo > 0.3);
      }
    }
  }
}

TEST_CASE("placement_valid rejects obvious violations") {
  const SynthScene scene = generate_scene(11, 4.0, 3);
  auto tmpl = BodyTemplate::standard();
  std::string why;

  BodyParams floating;
  floating.joint_angles = tmpl->rest_pose();
  floating.translation = Vec3(0, 0, 1.4);
  CHECK(!placement_valid(scene, forward(tmpl, floating), PoseCategory::Standing, &why));

  BodyParams buried;
  buried.joint_angles = tmpl->rest_pose();
  buried.translation = Vec3(0, 0, 0.3);  // deep in the floor
  CHECK(!placement_valid(scene, forward(tmpl, buried), PoseCategory::Standing, &why));

  BodyParams outside;
  outside.joint_angles = tmpl->rest_pose();
  outside.translation = Vec3(5.0, 0, 1.0);
  CHECK(!placement_valid(scene, forward(tmpl, outside), PoseCategory::Standing, &why));
}

TEST_CASE("extracted samples keep every invariant the trainer relies on") {
  const SynthScene scene = generate_scene(11, 4.0, 3);
  const BasisPointSet basis = make_basis(64, 7);
  const BodyParams placed = place_body(scene, PoseCategory::Standing, 3);
  const TrainSample s = extract_sample(scene, placed, basis, 555, 2.0, 0.25);

  const int n = basis.n();
  REQUIRE(s.scene_bps.size() == 3 * n);
  REQUIRE(s.scene_feature.size() == n);
  REQUIRE(s.body_feature.size() == n);
  REQUIRE(s.body_vertices.size() == 3 * 642);
  CHECK(s.scene_seed == scene.seed);
  CHECK(s.transform.cage_edge == 2.0);

  // distances are non-negative; selected points and the body stay in the cage
  CHECK(s.scene_feature.minCoeff() >= 0.0f);
  CHECK(s.body_feature.minCoeff() >= 0.0f);
  for (int i = 0; i < 3 * n; ++i) CHECK(std::abs(s.scene_bps[i]) <= 1.0f + 1e-6f);
  for (int i = 0; i < 3 * 642; ++i) CHECK(std::abs(s.body_vertices[i]) <= 1.0f + 1e-6f);

  // determinism in the augmentation seed
  const TrainSample t = extract_sample(scene, placed, basis, 555, 2.0, 0.25);
  CHECK(t.world_rot == s.world_rot);
  CHECK(t.scene_bps == s.scene_bps);
  CHECK(t.body_feature == s.body_feature);
  const TrainSample u = extract_sample(scene, placed, basis, 556, 2.0, 0.25);
  CHECK(u.world_rot != s.world_rot);

  // re-encoding the stored f32 arrays reproduces the stored body feature
  SceneEncoding enc;
  enc.scene_bps.resize(n);
  for (int i = 0; i < n; ++i)
    enc.scene_bps[i] = Vec3(s.scene_bps[3 * i], s.scene_bps[3 * i + 1], s.scene_bps[3 * i + 2]);
  std::vector<Vec3> body(642);
  for (int k = 0; k < 642; ++k)
    body[k] =
        Vec3(s.body_vertices[3 * k], s.body_vertices[3 * k + 1], s.body_vertices[3 * k + 2]);
  const BodyFeature re = encode_body(enc, body);
  for (int i = 0; i < n; ++i) CHECK(float(re.values[i]) == s.body_feature[i]);
}

TEST_CASE("dataset files round-trip") {
  const SynthScene scene = generate_scene(11, 4.0, 3);
  const BasisPointSet basis = make_basis(32, 7);
  Dataset d;
  d.n = 32;
  d.v = 642;
  d.basis_seed = 7;
  d.room_extent = 4.0;
  d.furniture_count = 3;
  for (std::uint64_t k = 0; k < 3; ++k) {
    const BodyParams placed = place_body(scene, PoseCategory(k % 3), k + 1);
    TrainSample s = extract_sample(scene, placed, basis, 700 + k, 2.0, 0.25);
    s.category = PoseCategory(k % 3);
    d.samples.push_back(std::move(s));
  }
  const std::string path =
      (std::filesystem::temp_directory_path() / "proxgen_test_ds.pgds").string();
  d.save(path);
  const Dataset back = Dataset::load(path);
  CHECK(back.n == d.n);
  CHECK(back.v == d.v);
  CHECK(back.basis_seed == d.basis_seed);
  CHECK(back.room_extent == d.room_extent);
  CHECK(back.furniture_count == d.furniture_count);
  REQUIRE(back.samples.size() == d.samples.size());
  for (size_t i = 0; i < d.samples.size(); ++i) {
    const TrainSample& x = d.samples[i];
    const TrainSample& y = back.samples[i];
    CHECK(y.scene_seed == x.scene_seed);
    CHECK(y.category == x.category);
    CHECK(y.world_rot == x.world_rot);
    CHECK(y.transform.cage_center == x.transform.cage_center);
    CHECK(y.transform.cage_edge == x.transform.cage_edge);
    CHECK(y.transform.scale == x.transform.scale);
    CHECK(y.transform.rotation == x.transform.rotation);
    CHECK(y.transform.shift == x.transform.shift);
    CHECK(y.scene_bps == x.scene_bps);
    CHECK(y.scene_feature == x.scene_feature);
    CHECK(y.body_vertices == x.body_vertices);
    CHECK(y.body_feature == x.body_feature);
  }
  std::filesystem::remove(path);
}

TEST_CASE("dataset build: counts, category cycling, split separation") {
  DataGenConfig cfg;
  cfg.n_basis = 32;
  cfg.train_scenes = 2;
  cfg.test_scenes = 1;
  cfg.placements_per_scene = 3;
  cfg.test_placements_per_scene = 2;
  cfg.augmentations = 2;
  const auto dir = std::filesystem::temp_directory_path() / "proxgen_test_build";
  std::filesystem::remove_all(dir);
  build_dataset(cfg, dir.string());

  const Dataset train = Dataset::load((dir / "train.pgds").string());
  const Dataset test = Dataset::load((dir / "test.pgds").string());
  CHECK(train.samples.size() == size_t(2 * 3 * 2));
  CHECK(test.samples.size() == size_t(1 * 2 * 2));
  CHECK(train.n == 32);

  std::set<std::uint64_t> train_seeds, test_seeds;
  for (const auto& s : train.samples) train_seeds.insert(s.scene_seed);
  for (const auto& s : test.samples) test_seeds.insert(s.scene_seed);
  CHECK(train_seeds.size() == 2);
  CHECK(test_seeds.size() == 1);
  for (std::uint64_t s : test_seeds) CHECK(!train_seeds.count(s));

  // categories cycle per placement; each placement contributes `augmentations`
  // consecutive samples
  for (size_t i = 0; i < train.samples.size(); ++i) {
    const int placement = int(i) / cfg.augmentations;
    CHECK(train.samples[i].category == PoseCategory(placement % 3));
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("scene cache rebuilds identical scenes once") {
  SceneCache cache(4.0, 3);
  const auto& e1 = cache.get(11);
  const auto& e2 = cache.get(11);
  CHECK(&e1 == &e2);  // cached entry, not a rebuild
  const SynthScene fresh = generate_scene(11, 4.0, 3);
  REQUIRE(e1.scene.mesh.vertices.size() == fresh.mesh.vertices.size());
  for (size_t i = 0; i < fresh.mesh.vertices.size(); ++i)
    CHECK(e1.scene.mesh.vertices[i] == fresh.mesh.vertices[i]);
  CHECK(e1.index.size() == int(fresh.mesh.vertices.size()));
}
