#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>

#include "proxgen/rng.hpp"
#include "proxgen/tensor.hpp"

using namespace proxgen;
using T = TensorT<double>;
using Mat = T::Mat;
namespace ops = tensor_ops;

namespace {

Mat random_mat(Rng* rng, int r, int c, double lo = -1.5, double hi = 1.5) {
  Mat m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = rng->uniform(lo, hi);
  return m;
}

// central-difference check of d scalar / d every entry of every input
void check_grads(std::vector<Mat> inputs, const std::function<T(std::vector<T>&)>& build,
                 double tol = 1e-7) {
  std::vector<T> params;
  for (const Mat& m : inputs) params.push_back(T::param(m));
  T y = build(params);
  REQUIRE(y.rows() == 1);
  REQUIRE(y.cols() == 1);
  for (auto& p : params) p.zero_grad();
  y.backward();

  const double h = 1e-6;
  for (size_t pi = 0; pi < inputs.size(); ++pi) {
    for (int i = 0; i < inputs[pi].rows(); ++i)
      for (int j = 0; j < inputs[pi].cols(); ++j) {
        auto eval = [&](double delta) {
          std::vector<Mat> shifted = inputs;
          shifted[pi](i, j) += delta;
          std::vector<T> q;
          for (const Mat& m : shifted) q.push_back(T::param(m));
          return build(q).value()(0, 0);
        };
        const double fd = (eval(h) - eval(-h)) / (2 * h);
        CHECK(params[pi].grad()(i, j) == doctest::Approx(fd).epsilon(1e-4).scale(1.0));
        (void)tol;
      }
  }
}

// reduce any tensor to a scalar with fixed random weights, so every entry
// contributes to the checked gradient
T pool(const T& x, Rng* rng) {
  if (x.rows() == 1 && x.cols() == 1) return x;
  const Mat m = random_mat(rng, int(x.cols()), 1);
  // (1 x rows) * (rows x cols) -> 1 x cols, then (1 x cols) * (cols x 1) -> 1 x 1
  T rowsum = ops::linear(T::constant(Mat::Ones(1, x.rows())), x,
                         T::constant(Mat::Zero(1, x.cols())));
  return ops::linear(rowsum, T::constant(m), T::constant(Mat::Zero(1, 1)));
}

}  // namespace

TEST_CASE("linear layer gradients") {
  Rng rng(31);
  const Mat x = random_mat(&rng, 4, 3), w = random_mat(&rng, 3, 5), b = random_mat(&rng, 1, 5);
  check_grads({x, w, b}, [&](std::vector<T>& p) {
    Rng pool_rng(1);
    return pool(ops::linear(p[0], p[1], p[2]), &pool_rng);
  });
  CHECK_THROWS_AS(ops::linear(T::param(x), T::param(random_mat(&rng, 4, 5)), T::param(b)),
                  ValidationError);
}

TEST_CASE("activation gradients away from the kink") {
  Rng rng(32);
  Mat x = random_mat(&rng, 3, 4);
  for (int i = 0; i < x.size(); ++i)
    if (std::abs(x.data()[i]) < 0.05) x.data()[i] = 0.1;  // keep clear of |v| = 0
  check_grads({x}, [&](std::vector<T>& p) {
    Rng pool_rng(2);
    return pool(ops::leaky_relu(p[0], 0.2), &pool_rng);
  });
  check_grads({x}, [&](std::vector<T>& p) {
    Rng pool_rng(3);
    return pool(ops::softplus(p[0]), &pool_rng);
  });
  // leaky slope is applied on the negative side
  T neg = T::constant(Mat::Constant(1, 1, -2.0));
  CHECK(ops::leaky_relu(neg, 0.2).value()(0, 0) == doctest::Approx(-0.4));
  // softplus stays exact in the linear tail
  T big = T::constant(Mat::Constant(1, 1, 25.0));
  CHECK(ops::softplus(big).value()(0, 0) == 25.0);
}

TEST_CASE("elementwise and structural op gradients") {
  Rng rng(33);
  const Mat a = random_mat(&rng, 3, 4), b = random_mat(&rng, 3, 4);
  const Mat c = random_mat(&rng, 3, 2);
  check_grads({a, b}, [&](std::vector<T>& p) {
    Rng pool_rng(4);
    return pool(ops::add(p[0], p[1]), &pool_rng);
  });
  check_grads({a, b}, [&](std::vector<T>& p) {
    Rng pool_rng(5);
    return pool(ops::mul(p[0], p[1]), &pool_rng);
  });
  check_grads({a}, [&](std::vector<T>& p) {
    Rng pool_rng(6);
    return pool(ops::scale(p[0], -2.7), &pool_rng);
  });
  check_grads({a}, [&](std::vector<T>& p) {
    Rng pool_rng(7);
    return pool(ops::exp(p[0]), &pool_rng);
  });
  check_grads({a, c}, [&](std::vector<T>& p) {
    Rng pool_rng(8);
    return pool(ops::concat_cols(p[0], p[1]), &pool_rng);
  });
  const Mat verts = random_mat(&rng, 2, 9), delta = random_mat(&rng, 2, 3);
  check_grads({verts, delta}, [&](std::vector<T>& p) {
    Rng pool_rng(9);
    return pool(ops::add_global_translation(p[0], p[1]), &pool_rng);
  });
  // translation really lands on every vertex triple
  T moved = ops::add_global_translation(T::constant(verts), T::constant(delta));
  for (int k = 0; k < 3; ++k)
    for (int cc = 0; cc < 3; ++cc)
      CHECK(moved.value()(1, 3 * k + cc) == verts(1, 3 * k + cc) + delta(1, cc));
}

TEST_CASE("loss op values and gradients") {
  Rng rng(34);
  Mat a = random_mat(&rng, 3, 5), b = random_mat(&rng, 3, 5);
  // keep |a-b| away from the absolute-value kink
  for (int i = 0; i < a.size(); ++i)
    if (std::abs(a.data()[i] - b.data()[i]) < 0.05) a.data()[i] += 0.1;
  check_grads({a, b}, [&](std::vector<T>& p) { return ops::mean_abs_diff(p[0], p[1]); });
  T mad = ops::mean_abs_diff(T::constant(a), T::constant(b));
  CHECK(mad.value()(0, 0) == doctest::Approx((a - b).array().abs().mean()).epsilon(1e-12));

  const Mat mu = random_mat(&rng, 4, 3), lv = random_mat(&rng, 4, 3);
  check_grads({mu, lv}, [&](std::vector<T>& p) { return ops::kl_gaussian(p[0], p[1]); });
  // hand formula: mean over batch of 0.5 * sum(exp(lv) + mu^2 - 1 - lv)
  double kl = 0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 3; ++j)
      kl += 0.5 * (std::exp(lv(i, j)) + mu(i, j) * mu(i, j) - 1.0 - lv(i, j));
  kl /= 4.0;
  CHECK(ops::kl_gaussian(T::constant(mu), T::constant(lv)).value()(0, 0) ==
        doctest::Approx(kl).epsilon(1e-12));
  // KL of a standard normal is zero
  CHECK(ops::kl_gaussian(T::constant(Mat::Zero(2, 3)), T::constant(Mat::Zero(2, 3)))
            .value()(0, 0) == 0.0);

  const Mat s = Mat::Constant(1, 1, 0.7);
  check_grads({s}, [&](std::vector<T>& p) { return ops::charbonnier(p[0]); });
  CHECK(ops::charbonnier(T::constant(s)).value()(0, 0) ==
        doctest::Approx(std::sqrt(1.49) - 1.0).epsilon(1e-12));

  const Mat t1 = Mat::Constant(1, 1, 0.3), t2 = Mat::Constant(1, 1, -1.1);
  check_grads({t1, t2}, [&](std::vector<T>& p) {
    return ops::weighted_sum(std::vector<T>{p[0], p[1]}, {2.0, 0.5});
  });
  CHECK(ops::weighted_sum(std::vector<T>{T::constant(t1), T::constant(t2)}, {2.0, 0.5})
            .value()(0, 0) == doctest::Approx(2.0 * 0.3 + 0.5 * -1.1).epsilon(1e-12));
}

TEST_CASE("external penalty injects a fixed gradient") {
  Rng rng(35);
  const Mat x = random_mat(&rng, 2, 6);
  const Mat g = random_mat(&rng, 2, 6);
  T input = T::param(x);
  input.zero_grad();
  T pen = ops::external_penalty(3.25, input, g);
  CHECK(pen.value()(0, 0) == 3.25);
  T total = ops::weighted_sum(std::vector<T>{pen}, {2.0});
  total.backward();
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 6; ++j)
      CHECK(input.grad()(i, j) == doctest::Approx(2.0 * g(i, j)).epsilon(1e-12));
  CHECK_THROWS_AS(ops::external_penalty(1.0, input, random_mat(&rng, 3, 6)), ValidationError);
}

TEST_CASE("graphs with shared nodes accumulate gradients once per path") {
  // y = mean |x - 0| * 1 + mean |x - 0| * 2 through two branches of the same node
  Mat x = Mat::Constant(1, 2, 0.5);
  T p = T::param(x);
  p.zero_grad();
  T branch = ops::mean_abs_diff(p, T::constant(Mat::Zero(1, 2)));
  T y = ops::weighted_sum(std::vector<T>{branch, branch}, {1.0, 2.0});
  y.backward();
  // d/dx of 3 * mean|x| = 3 * sign / 2
  CHECK(p.grad()(0, 0) == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(p.grad()(0, 1) == doctest::Approx(1.5).epsilon(1e-12));
  CHECK_THROWS_AS(ops::concat_cols(p, T::constant(Mat::Zero(2, 2))), ValidationError);
}

TEST_CASE("backward demands a scalar") {
  T m = T::param(Mat::Zero(2, 2));
  CHECK_THROWS_AS(m.backward(), ValidationError);
}
