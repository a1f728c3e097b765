#pragma once

#include <Eigen/Core>
#include <cmath>

namespace proxgen {

// Adam with bias correction over one parameter block. Moment buffers match
// the parameter's scalar type so updates are reproducible bit-for-bit.
template <class MatT>
class Adam {
public:
  Adam(double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : lr_(lr), b1_(beta1), b2_(beta2), eps_(eps) {}

  void step(MatT* param, const MatT& grad) {
    using S = typename MatT::Scalar;
    if (t_ == 0) {  // fixed-size MatT never reports size 0, so key off the step count
      m_ = MatT::Zero(param->rows(), param->cols());
      v_ = MatT::Zero(param->rows(), param->cols());
    }
    ++t_;
    m_ = S(b1_) * m_ + S(1.0 - b1_) * grad;
    v_ = (S(b2_) * v_.array() + S(1.0 - b2_) * grad.array().square()).matrix();
    const S c1 = S(1.0 / (1.0 - std::pow(b1_, t_)));
    const S c2 = S(1.0 / (1.0 - std::pow(b2_, t_)));
    param->array() -= S(lr_) * (c1 * m_.array()) / ((c2 * v_.array()).sqrt() + S(eps_));
  }

private:
  double lr_, b1_, b2_, eps_;
  int t_ = 0;
  MatT m_, v_;
};

}  // namespace proxgen
