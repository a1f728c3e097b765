#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "proxgen/metrics.hpp"
#include "proxgen/rng.hpp"

using namespace proxgen;

TEST_CASE("scores on constructed bodies against a flat floor") {
  const SdfField floor = SdfField::analytic({}, 0.0);

  // fully above: all vertices positive
  const std::vector<Vec3> above = {{0, 0, 0.5}, {0.1, 0, 0.7}, {0, 0.1, 1.2}, {0, 0, 2.0}};
  CHECK(non_collision_score(above, floor) == 1.0);
  CHECK(contact_score(above, floor) == 0.0);

  // straddling: half the vertices below the floor
  const std::vector<Vec3> straddle = {{0, 0, -0.3}, {0, 0, -0.1}, {0, 0, 0.2}, {0, 0, 0.4}};
  CHECK(non_collision_score(straddle, floor) == 0.5);
  CHECK(contact_score(straddle, floor) == 1.0);

  // touching: one vertex exactly on the surface counts as contact, not collision
  const std::vector<Vec3> touching = {{0, 0, 0.0}, {0, 0, 0.6}, {0, 0, 1.1}};
  CHECK(non_collision_score(touching, floor) == 1.0);
  CHECK(contact_score(touching, floor) == 1.0);

  // penetrating: a single buried vertex flips 1/5 of the score
  const std::vector<Vec3> penetrating = {
      {0, 0, -0.2}, {0, 0, 0.3}, {0, 0, 0.5}, {0, 0, 0.9}, {0, 0, 1.4}};
  CHECK(non_collision_score(penetrating, floor) == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(contact_score(penetrating, floor) == 1.0);

  // floating far away: no contact
  const std::vector<Vec3> floating = {{0, 0, 0.4}, {0, 0, 0.5}};
  CHECK(contact_score(floating, floor) == 0.0);

  CHECK_THROWS_AS(non_collision_score({}, floor), ValidationError);
  CHECK_THROWS_AS(contact_score({}, floor), ValidationError);
}

TEST_CASE("scores also work against box obstacles") {
  BoxSpec b;
  b.center = Vec3(0, 0, 0.5);
  b.half_extents = Vec3(0.5, 0.5, 0.5);
  const SdfField field = SdfField::analytic({b}, 0.0);
  // one vertex inside the box, three outside above the floor
  const std::vector<Vec3> verts = {{0, 0, 0.5}, {1, 1, 0.5}, {0, 1.2, 0.9}, {1.5, 0, 0.2}};
  CHECK(non_collision_score(verts, field) == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(contact_score(verts, field) == 1.0);
}

TEST_CASE("grid-backed fields clamp out-of-range queries instead of throwing") {
  BoxSpec b;
  b.center = Vec3(0, 0, 0.5);
  b.half_extents = Vec3(0.5, 0.5, 0.5);
  const SdfField grid = bake_grid(SdfField::analytic({b}, 0.0), Vec3(-1, -1, -0.25),
                                  Vec3(1, 1, 1.75), Eigen::Vector3i(9, 9, 9));
  // vertex far outside the baked region: clamped to the boundary, still scored
  const std::vector<Vec3> verts = {{8.0, 0, 0.5}, {0, 0, 1.5}};
  CHECK(non_collision_score(verts, grid) == 1.0);
  CHECK(contact_score(verts, grid) == 0.0);
}

TEST_CASE("kmeans recovers well-separated clusters and stays deterministic") {
  Rng rng(77);
  Eigen::MatrixXd rows(30, 2);
  for (int i = 0; i < 30; ++i) {
    const int c = i % 3;
    rows(i, 0) = 10.0 * c + rng.uniform(-0.1, 0.1);
    rows(i, 1) = -5.0 * c + rng.uniform(-0.1, 0.1);
  }
  Eigen::MatrixXd cents;
  const std::vector<int> assign = kmeans(rows, 3, 17, 300, &cents);
  REQUIRE(assign.size() == 30);
  CHECK(cents.rows() == 3);
  // same true cluster -> same label
  for (int i = 0; i < 30; ++i) CHECK(assign[size_t(i)] == assign[size_t(i % 3)]);
  // all three labels used
  std::set<int> used(assign.begin(), assign.end());
  CHECK(used.size() == 3);
  const std::vector<int> again = kmeans(rows, 3, 17, 300, nullptr);
  CHECK(again == assign);

  CHECK_THROWS_AS(kmeans(rows, 0, 1, 10, nullptr), ValidationError);
  CHECK_THROWS_AS(kmeans(rows.topRows(2), 3, 1, 10, nullptr), ValidationError);
}

TEST_CASE("diversity entropy equals ln k on a balanced construction") {
  // 20 pairs of near-identical poses, pair c at yaw 100*c: k-means with k=20
  // must isolate each pair, giving a uniform histogram and exactly ln 20
  // entropy; each member sits 0.01 from its pair centroid in yaw.
  const int k = 20;
  std::vector<BodyParams> samples;
  for (int c = 0; c < k; ++c)
    for (double off : {-0.01, 0.01}) {
      BodyParams p;
      p.yaw = 100.0 * c + off;
      p.translation = Vec3(999, 999, 999);  // must be ignored by default
      samples.push_back(p);
    }
  const DiversityResult r = diversity(samples, k, 17);
  CHECK(r.entropy == doctest::Approx(std::log(double(k))).epsilon(1e-12));
  CHECK(r.cluster_size == doctest::Approx(0.01).epsilon(1e-9));

  // one dominant cluster drops the entropy below ln k
  std::vector<BodyParams> lopsided = samples;
  for (size_t i = 0; i < lopsided.size(); ++i) {
    BodyParams p;
    p.yaw = (i < 30) ? 0.0 : 100.0;  // 30 in one spot, 10 in another
    lopsided[i] = p;
  }
  const DiversityResult r2 = diversity(lopsided, 2, 17);
  const double p0 = 30.0 / 40.0, p1 = 10.0 / 40.0;
  CHECK(r2.entropy == doctest::Approx(-(p0 * std::log(p0) + p1 * std::log(p1))).epsilon(1e-9));
  CHECK(r2.cluster_size == doctest::Approx(0.0).epsilon(1e-12));

  // translation participates only on request
  std::vector<BodyParams> translated;
  for (int c = 0; c < 2; ++c)
    for (int m = 0; m < 2; ++m) {
      BodyParams p;
      p.translation = Vec3(50.0 * c, 0, 0);
      translated.push_back(p);
    }
  const DiversityResult ignore_t = diversity(translated, 2, 17, false);
  CHECK(ignore_t.cluster_size == 0.0);  // identical once translation is dropped
  const DiversityResult use_t = diversity(translated, 2, 17, true);
  CHECK(use_t.entropy == doctest::Approx(std::log(2.0)).epsilon(1e-12));

  CHECK_THROWS_AS(diversity(samples, int(samples.size()) + 1, 17), ValidationError);
}
