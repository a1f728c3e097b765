#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <map>
#include <set>

#include "proxgen/networks.hpp"

using namespace proxgen;

namespace {

NetArch tiny_arch() {
  NetArch a;
  a.n = 16;
  a.h1 = 12;
  a.h2 = 8;
  a.dz = 3;
  a.v = 10;
  return a;
}

Eigen::MatrixXf random_batch(Rng* rng, int rows, int cols, double lo = 0.0, double hi = 1.5) {
  Eigen::MatrixXf m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = float(rng->uniform(lo, hi));
  return m;
}

}  // namespace

TEST_CASE("weight init is deterministic per seed") {
  Networks<float> a, b, c;
  a.init(tiny_arch(), 11, 7);
  b.init(tiny_arch(), 11, 7);
  c.init(tiny_arch(), 12, 7);
  auto pa = a.params(), pb = b.params(), pc = c.params();
  REQUIRE(pa.size() == pb.size());
  bool same = true, differ = false;
  for (size_t i = 0; i < pa.size(); ++i) {
    same = same && pa[i].second->value() == pb[i].second->value();
    differ = differ || pa[i].second->value() != pc[i].second->value();
  }
  CHECK(same);
  CHECK(differ);
  CHECK(a.basis_seed == 7);
}

TEST_CASE("parameter census: names unique, shapes match the declared widths") {
  Networks<float> nets;
  const NetArch a = tiny_arch();
  nets.init(a, 11, 7);
  auto params = nets.params();
  std::set<std::string> names;
  for (auto& [name, t] : params) {
    CHECK(names.insert(name).second);  // unique
    CHECK(t->requires_grad());
  }
  // spot-check the widths that pin the wiring
  std::map<std::string, std::pair<int, int>> shapes;
  for (auto& [name, t] : params) shapes[name] = {int(t->rows()), int(t->cols())};
  CHECK(shapes.at("E.enc_in.w") == std::make_pair(a.n, a.h1));
  CHECK(shapes.at("E.dec_out.w") == std::make_pair(a.h1, a.n));
  CHECK(shapes.at("F.enc_in.w") == std::make_pair(3 * a.n, a.h1));
  CHECK(shapes.at("G.enc_in.w") == std::make_pair(a.n + a.h2, a.h1));
  CHECK(shapes.at("G.mu.w") == std::make_pair(a.h2, a.dz));
  CHECK(shapes.at("G.lv.w") == std::make_pair(a.h2, a.dz));
  CHECK(shapes.at("G.dec_in.w") == std::make_pair(a.dz + a.h2, a.h2));
  CHECK(shapes.at("G.dec_mid.w") == std::make_pair(a.h2 + a.h2, a.h1));
  CHECK(shapes.at("G.dec_out.w") == std::make_pair(a.h1 + a.h1, a.n));
  CHECK(shapes.at("H.in.w") == std::make_pair(a.h2 + a.h1 + a.n, a.h1));
  CHECK(shapes.at("H.verts.w") == std::make_pair(a.h1, 3 * a.v));
  CHECK(shapes.at("H.delta.w") == std::make_pair(a.h1, 3));
  // every bias is a zero row
  for (auto& [name, t] : params)
    if (name.ends_with(".b")) {
      CHECK(t->rows() == 1);
      CHECK(t->value().cwiseAbs().maxCoeff() == 0.0f);
    }
}

TEST_CASE("forward passes produce the documented shapes and positive features") {
  Rng rng(55);
  Networks<float> nets;
  const NetArch a = tiny_arch();
  nets.init(a, 11, 7);
  const int B = 4;
  const Tensor xs = Tensor::constant(random_batch(&rng, B, a.n));
  const Tensor vs = Tensor::constant(random_batch(&rng, B, 3 * a.n, -1.0, 1.0));
  const Tensor xb = Tensor::constant(random_batch(&rng, B, a.n));

  auto [xs_rec, skips] = nets.e.encode_decode(xs);
  CHECK(xs_rec.rows() == B);
  CHECK(xs_rec.cols() == a.n);
  CHECK(skips.e.cols() == a.h2);
  CHECK(skips.d1.cols() == a.h1);

  auto [mu, lv] = nets.g.encode(xb, skips.e);
  CHECK(mu.cols() == a.dz);
  CHECK(lv.cols() == a.dz);
  auto [xb_rec, lat] = nets.g.forward(xb, skips, Eigen::MatrixXf::Zero(B, a.dz));
  CHECK(xb_rec.rows() == B);
  CHECK(xb_rec.cols() == a.n);
  // distances leave the decoder through softplus, so strictly positive
  CHECK(xb_rec.value().minCoeff() > 0.0f);
  // with zero noise, z equals mu
  CHECK(lat.z.value() == lat.mu.value());

  auto [f_lat, f_d1] = nets.f.forward(vs);
  CHECK(f_lat.cols() == a.h2);
  CHECK(f_d1.cols() == a.h1);
  auto [verts, delta] = nets.h.forward(f_lat, f_d1, xb_rec);
  CHECK(verts.rows() == B);
  CHECK(verts.cols() == 3 * a.v);
  CHECK(delta.cols() == 3);

  // same inputs, same outputs (pure functions of the weights)
  auto [verts2, delta2] = nets.h.forward(f_lat, f_d1, xb_rec);
  CHECK(verts2.value() == verts.value());
}

TEST_CASE("reparameterization uses the recorded noise") {
  Rng rng(56);
  Networks<float> nets;
  const NetArch a = tiny_arch();
  nets.init(a, 11, 7);
  const int B = 3;
  const Tensor xs = Tensor::constant(random_batch(&rng, B, a.n));
  const Tensor xb = Tensor::constant(random_batch(&rng, B, a.n));
  auto [xs_rec, skips] = nets.e.encode_decode(xs);
  Eigen::MatrixXf eps = random_batch(&rng, B, a.dz, -2.0, 2.0);
  auto [xb_rec, lat] = nets.g.forward(xb, skips, eps);
  const Eigen::MatrixXf expected =
      lat.mu.value().array() + (0.5f * lat.log_var.value().array()).exp() * eps.array();
  CHECK((lat.z.value() - expected).cwiseAbs().maxCoeff() < 1e-6f);
}

TEST_CASE("checkpoints round-trip bit-exactly and reject mismatches") {
  Networks<float> nets;
  nets.init(tiny_arch(), 11, 7);
  const auto dir = std::filesystem::temp_directory_path();
  const std::string path = (dir / "proxgen_test_ckpt.pgck").string();
  save_checkpoint(nets, path);

  Networks<float> back = load_checkpoint(path);
  CHECK(back.arch == nets.arch);
  CHECK(back.basis_seed == nets.basis_seed);
  auto pa = nets.params(), pb = back.params();
  REQUIRE(pa.size() == pb.size());
  for (size_t i = 0; i < pa.size(); ++i) {
    CHECK(pa[i].first == pb[i].first);
    CHECK(pa[i].second->value() == pb[i].second->value());
  }

  // corrupt the magic -> rejected
  {
    std::FILE* f = std::fopen(path.c_str(), "r+b");
    REQUIRE(f);
    std::fputc('X', f);
    std::fclose(f);
  }
  CHECK_THROWS(load_checkpoint(path));
  std::filesystem::remove(path);
}

TEST_CASE("architecture hash separates different widths") {
  NetArch a = tiny_arch();
  NetArch b = a;
  b.h2 = a.h2 + 1;
  NetArch c = a;
  c.v = a.v + 1;
  CHECK(arch_hash(a) == arch_hash(tiny_arch()));
  CHECK(arch_hash(a) != arch_hash(b));
  CHECK(arch_hash(a) != arch_hash(c));
}
