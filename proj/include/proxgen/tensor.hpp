#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <unordered_set>
#include <utility>
#include <vector>

#include "proxgen/errors.hpp"

namespace proxgen {

// Reverse-mode autodiff over dense matrices, just enough for the feature
// networks. Templated on the scalar so training runs in f32 while gradient
// checks can use f64. Nodes record closures; backward() replays them in
// reverse creation order. A batch lives in rows, features in columns.
template <class S>
class TensorT {
public:
  using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;

  TensorT() = default;

  static TensorT constant(Mat m) { return TensorT(std::move(m), false); }
  static TensorT param(Mat m) { return TensorT(std::move(m), true); }

  bool defined() const { return bool(n_); }
  const Mat& value() const { return n_->value; }
  Mat& mutable_value() { return n_->value; }
  void set_value(Mat m) { n_->value = std::move(m); }
  Eigen::Index rows() const { return n_->value.rows(); }
  Eigen::Index cols() const { return n_->value.cols(); }
  bool requires_grad() const { return n_->requires_grad; }

  const Mat& grad() const { return n_->grad; }
  void zero_grad() { n_->grad.setZero(n_->value.rows(), n_->value.cols()); }

  // Backpropagate from a 1x1 scalar result.
  void backward() {
    if (rows() != 1 || cols() != 1)
      throw ValidationError("backward() needs a scalar result");
    std::vector<Node*> order;
    std::unordered_set<Node*> seen;
    collect(n_.get(), &seen, &order);
    std::sort(order.begin(), order.end(),
              [](const Node* a, const Node* b) { return a->id > b->id; });
    for (Node* n : order)
      if (n->grad.size() == 0) n->grad.setZero(n->value.rows(), n->value.cols());
    n_->grad(0, 0) += S(1);
    for (Node* n : order)
      if (n->backward_fn) n->backward_fn();
  }

  struct Node {
    Mat value;
    Mat grad;
    bool requires_grad = false;
    long id = 0;
    std::vector<std::shared_ptr<Node>> parents;
    std::function<void()> backward_fn;
  };

  std::shared_ptr<Node> node() const { return n_; }

  static TensorT from_node(std::shared_ptr<Node> n) {
    TensorT t;
    t.n_ = std::move(n);
    return t;
  }

  static std::shared_ptr<Node> make_node(Mat value, bool requires_grad,
                                         std::vector<std::shared_ptr<Node>> parents) {
    auto n = std::make_shared<Node>();
    n->value = std::move(value);
    n->requires_grad = requires_grad;
    n->id = next_id();
    n->parents = std::move(parents);
    return n;
  }

private:
  TensorT(Mat m, bool requires_grad) {
    n_ = make_node(std::move(m), requires_grad, {});
  }

  static long next_id() {
    static long counter = 0;
    return ++counter;
  }

  static void collect(Node* n, std::unordered_set<Node*>* seen, std::vector<Node*>* order) {
    if (!n || seen->count(n)) return;
    seen->insert(n);
    for (const auto& p : n->parents) collect(p.get(), seen, order);
    order->push_back(n);
  }

  std::shared_ptr<Node> n_;
};

namespace tensor_ops {

template <class S>
using Mat = typename TensorT<S>::Mat;

template <class S>
bool any_grad(const std::initializer_list<TensorT<S>>& ts) {
  for (const auto& t : ts)
    if (t.requires_grad()) return true;
  return false;
}

// y = x * w + b (b is 1 x out, broadcast over rows)
template <class S>
TensorT<S> linear(const TensorT<S>& x, const TensorT<S>& w, const TensorT<S>& b) {
  if (x.cols() != w.rows() || w.cols() != b.cols() || b.rows() != 1)
    throw ValidationError("linear: dimension mismatch");
  Mat<S> y = x.value() * w.value();
  y.rowwise() += b.value().row(0);
  auto n = TensorT<S>::make_node(std::move(y), any_grad<S>({x, w, b}),
                                 {x.node(), w.node(), b.node()});
  auto xn = x.node(), wn = w.node(), bn = b.node();
  auto out = n.get();
  n->backward_fn = [xn, wn, bn, out]() {
    if (xn->requires_grad) xn->grad.noalias() += out->grad * wn->value.transpose();
    if (wn->requires_grad) wn->grad.noalias() += xn->value.transpose() * out->grad;
    if (bn->requires_grad) bn->grad.row(0) += out->grad.colwise().sum();
  };
  return TensorT<S>::from_node(std::move(n));
}

template <class S>
TensorT<S> leaky_relu(const TensorT<S>& x, double slope) {
  Mat<S> y = x.value().unaryExpr([&](S v) { return v > S(0) ? v : S(slope) * v; });
  auto n = TensorT<S>::make_node(std::move(y), x.requires_grad(), {x.node()});
  auto xn = x.node();
  auto out = n.get();
  n->backward_fn = [xn, out, slope]() {
    if (!xn->requires_grad) return;
    xn->grad.array() +=
        out->grad.array() *
        xn->value.unaryExpr([&](S v) { return v > S(0) ? S(1) : S(slope); }).array();
  };
  return TensorT<S>::from_node(std::move(n));
}

template <class S>
TensorT<S> softplus(const TensorT<S>& x) {
  auto sp = [](S v) -> S {
    if (v > S(20)) return v;  // avoids overflow; exact to f32 precision
    return S(std::log1p(std::exp(double(v))));
  };
  Mat<S> y = x.value().unaryExpr(sp);
  auto n = TensorT<S>::make_node(std::move(y), x.requires_grad(), {x.node()});
  auto xn = x.node();
  auto out = n.get();
  n->backward_fn = [xn, out]() {
    if (!xn->requires_grad) return;
    xn->grad.array() += out->grad.array() * xn->value.unaryExpr([](S v) -> S {
                                                return S(1.0 / (1.0 + std::exp(-double(v))));
                                              }).array();
  };
  return TensorT<S>::from_node(std::move(n));
}

template <class S>
TensorT<S> concat_cols(const TensorT<S>& a, const TensorT<S>& b) {
  if (a.rows() != b.rows()) throw ValidationError("concat_cols: row mismatch");
  Mat<S> y(a.rows(), a.cols() + b.cols());
  y.leftCols(a.cols()) = a.value();
  y.rightCols(b.cols()) = b.value();
  auto n = TensorT<S>::make_node(std::move(y), any_grad<S>({a, b}), {a.node(), b.node()});
  auto an = a.node(), bn = b.node();
  auto out = n.get();
  n->backward_fn = [an, bn, out]() {
    if (an->requires_grad) an->grad += out->grad.leftCols(an->value.cols());
    if (bn->requires_grad) bn->grad += out->grad.rightCols(bn->value.cols());
  };
  return TensorT<S>::from_node(std::move(n));
}

template <class S>
TensorT<S> add(const TensorT<S>& a, const TensorT<S>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ValidationError("add: shape mismatch");
  auto n = TensorT<S>::make_node(a.value() + b.value(), any_grad<S>({a, b}),
                                 {a.node(), b.node()});
  auto an = a.node(), bn = b.node();
  auto out = n.get();
  n->backward_fn = [an, bn, out]() {
    if (an->requires_grad) an->grad += out->grad;
    if (bn->requires_grad) bn->grad += out->grad;
  };
  return TensorT<S>::from_node(std::move(n));
}

template <class S>
TensorT<S> mul(const TensorT<S>& a, const TensorT<S>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ValidationError("mul: shape mismatch");
  auto n = TensorT<S>::make_node(Mat<S>(a.value().cwiseProduct(b.value())),
                                 any_grad<S>({a, b}), {a.node(), b.node()});
  auto an = a.node(), bn = b.node();
  auto out = n.get();
  n->backward_fn = [an, bn, out]() {
    if (an->requires_grad) an->grad.array() += out->grad.array() * bn->value.array();
    if (bn->requires_grad) bn->grad.array() += out->grad.array() * an->value.array();
  };
  return TensorT<S>::from_node(std::move(n));
}

template <class S>
TensorT<S> scale(const TensorT<S>& x, double c) {
  auto n = TensorT<S>::make_node(Mat<S>(x.value() * S(c)), x.requires_grad(), {x.node()});
  auto xn = x.node();
  auto out = n.get();
  n->backward_fn = [xn, out, c]() {
    if (xn->requires_grad) xn->grad += out->grad * S(c);
  };
  return TensorT<S>::from_node(std::move(n));
}

template <class S>
TensorT<S> exp(const TensorT<S>& x) {
  Mat<S> y = x.value().array().exp();
  auto n = TensorT<S>::make_node(std::move(y), x.requires_grad(), {x.node()});
  auto xn = x.node();
  auto out = n.get();
  n->backward_fn = [xn, out]() {
    if (xn->requires_grad) xn->grad.array() += out->grad.array() * out->value.array();
  };
  return TensorT<S>::from_node(std::move(n));
}

// verts: B x 3V, delta: B x 3; adds delta to every vertex triple
template <class S>
TensorT<S> add_global_translation(const TensorT<S>& verts, const TensorT<S>& delta) {
  if (delta.cols() != 3 || verts.cols() % 3 != 0 || verts.rows() != delta.rows())
    throw ValidationError("add_global_translation: shape mismatch");
  Mat<S> y = verts.value();
  const Eigen::Index v = verts.cols() / 3;
  for (Eigen::Index k = 0; k < v; ++k) y.middleCols(3 * k, 3) += delta.value();
  auto n = TensorT<S>::make_node(std::move(y), any_grad<S>({verts, delta}),
                                 {verts.node(), delta.node()});
  auto vn = verts.node(), dn = delta.node();
  auto out = n.get();
  n->backward_fn = [vn, dn, out, v]() {
    if (vn->requires_grad) vn->grad += out->grad;
    if (dn->requires_grad)
      for (Eigen::Index k = 0; k < v; ++k) dn->grad += out->grad.middleCols(3 * k, 3);
  };
  return TensorT<S>::from_node(std::move(n));
}

// mean over all entries of |a - b|; zero subgradient at exact equality
template <class S>
TensorT<S> mean_abs_diff(const TensorT<S>& a, const TensorT<S>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ValidationError("mean_abs_diff: shape mismatch");
  const S inv = S(1.0 / double(a.rows() * a.cols()));
  Mat<S> r(1, 1);
  r(0, 0) = (a.value() - b.value()).array().abs().sum() * inv;
  auto n = TensorT<S>::make_node(std::move(r), any_grad<S>({a, b}), {a.node(), b.node()});
  auto an = a.node(), bn = b.node();
  auto out = n.get();
  n->backward_fn = [an, bn, out, inv]() {
    const S g = out->grad(0, 0) * inv;
    const Mat<S> sgn = (an->value - bn->value).unaryExpr([](S v) {
      return v > S(0) ? S(1) : (v < S(0) ? S(-1) : S(0));
    });
    if (an->requires_grad) an->grad += g * sgn;
    if (bn->requires_grad) bn->grad -= g * sgn;
  };
  return TensorT<S>::from_node(std::move(n));
}

// Batch-mean analytic KL(q(z|x) || N(0, I)), summed over latent dimensions.
template <class S>
TensorT<S> kl_gaussian(const TensorT<S>& mu, const TensorT<S>& log_var) {
  if (mu.rows() != log_var.rows() || mu.cols() != log_var.cols())
    throw ValidationError("kl_gaussian: shape mismatch");
  const S inv_b = S(1.0 / double(mu.rows()));
  Mat<S> r(1, 1);
  r(0, 0) = S(0.5) * inv_b *
            (log_var.value().array().exp() + mu.value().array().square() - S(1) -
             log_var.value().array())
                .sum();
  auto n = TensorT<S>::make_node(std::move(r), any_grad<S>({mu, log_var}),
                                 {mu.node(), log_var.node()});
  auto mn = mu.node(), ln = log_var.node();
  auto out = n.get();
  n->backward_fn = [mn, ln, out, inv_b]() {
    const S g = out->grad(0, 0) * S(0.5) * inv_b;
    if (mn->requires_grad) mn->grad.array() += g * S(2) * mn->value.array();
    if (ln->requires_grad)
      ln->grad.array() += g * (ln->value.array().exp() - S(1));
  };
  return TensorT<S>::from_node(std::move(n));
}

// psi(s) = sqrt(s^2 + 1) - 1, applied to a 1x1 tensor
template <class S>
TensorT<S> charbonnier(const TensorT<S>& s) {
  if (s.rows() != 1 || s.cols() != 1) throw ValidationError("charbonnier: scalar expected");
  const S v = s.value()(0, 0);
  Mat<S> r(1, 1);
  r(0, 0) = S(std::sqrt(double(v) * double(v) + 1.0) - 1.0);
  auto n = TensorT<S>::make_node(std::move(r), s.requires_grad(), {s.node()});
  auto sn = s.node();
  auto out = n.get();
  n->backward_fn = [sn, out]() {
    if (!sn->requires_grad) return;
    const double v = double(sn->value(0, 0));
    sn->grad(0, 0) += out->grad(0, 0) * S(v / std::sqrt(v * v + 1.0));
  };
  return TensorT<S>::from_node(std::move(n));
}

template <class S>
TensorT<S> weighted_sum(const std::vector<TensorT<S>>& terms,
                        const std::vector<double>& weights) {
  if (terms.empty() || terms.size() != weights.size())
    throw ValidationError("weighted_sum: bad arguments");
  Mat<S> r(1, 1);
  r(0, 0) = S(0);
  bool rg = false;
  std::vector<std::shared_ptr<typename TensorT<S>::Node>> parents;
  for (size_t i = 0; i < terms.size(); ++i) {
    if (terms[i].rows() != 1 || terms[i].cols() != 1)
      throw ValidationError("weighted_sum: scalar terms expected");
    r(0, 0) += S(weights[i]) * terms[i].value()(0, 0);
    rg = rg || terms[i].requires_grad();
    parents.push_back(terms[i].node());
  }
  auto n = TensorT<S>::make_node(std::move(r), rg, parents);
  auto out = n.get();
  std::vector<double> w = weights;
  n->backward_fn = [parents, out, w]() {
    for (size_t i = 0; i < parents.size(); ++i)
      if (parents[i]->requires_grad) parents[i]->grad(0, 0) += out->grad(0, 0) * S(w[i]);
  };
  return TensorT<S>::from_node(std::move(n));
}

// Externally computed scalar penalty with a precomputed gradient against one
// upstream tensor (used for the geometric losses, which run in f64 against
// SDFs and point indexes outside the tape).
template <class S>
TensorT<S> external_penalty(double value, const TensorT<S>& input, Mat<S> d_input) {
  if (d_input.rows() != input.rows() || d_input.cols() != input.cols())
    throw ValidationError("external_penalty: gradient shape mismatch");
  Mat<S> r(1, 1);
  r(0, 0) = S(value);
  auto n = TensorT<S>::make_node(std::move(r), input.requires_grad(), {input.node()});
  auto in = input.node();
  auto out = n.get();
  auto grad = std::make_shared<Mat<S>>(std::move(d_input));
  n->backward_fn = [in, out, grad]() {
    if (in->requires_grad) in->grad += out->grad(0, 0) * (*grad);
  };
  return TensorT<S>::from_node(std::move(n));
}

}  // namespace tensor_ops

using Tensor = TensorT<float>;

}  // namespace proxgen
