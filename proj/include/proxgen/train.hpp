#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "proxgen/losses.hpp"
#include "proxgen/networks.hpp"
#include "proxgen/synth.hpp"
#include "proxgen/tensor.hpp"

namespace proxgen {

struct LossWeights {
  double alpha1 = 0.5;   // robustified KL
  double alpha2 = 1e-3;  // collision
  double alpha3 = 1e-3;  // contact
  double contact_sigma = kContactSigma;
  bool geometric_on = false;  // collision/contact terms active
};

// Scene context for the geometric terms, one item per batch row. Vertices
// live in the cage frame; each row maps through its transform and the
// inverse of its world rotation to query the unrotated scene.
struct GeometricBatch {
  struct Item {
    CageTransform transform;
    double world_rot = 0.0;
    const SdfField* sdf = nullptr;
    const PointIndex* index = nullptr;
  };
  std::vector<Item> items;
  const std::vector<int>* feet = nullptr;
};

// Batch-mean collision and contact over cage-frame vertex rows (B x 3V),
// evaluated in f64, with gradients in cage coordinates.
void geometric_penalties(const Eigen::MatrixXd& verts_cage, const GeometricBatch& geom,
                         double sigma, double* collision, double* contact,
                         Eigen::MatrixXd* d_collision, Eigen::MatrixXd* d_contact);

template <class S>
struct LossBreakdown {
  TensorT<S> total;
  double rec_xs = 0, rec_xb = 0, rec_vb = 0;
  double kl_raw = 0, kl_psi = 0;
  double collision = 0, contact = 0;
};

// One full forward pass and the training objective:
//   total = |x_s - x_s_rec| + |x_b - x_b_rec| + |V_b - V_b_rec|
//         + alpha1 * psi(KL) + alpha2 * collision + alpha3 * contact
// with every |.| mean-reduced. The regressor consumes the generated body
// feature, so reconstruction gradients reach all four networks.
template <class S>
LossBreakdown<S> compose_loss(Networks<S>* nets, const typename TensorT<S>::Mat& xs,
                              const typename TensorT<S>::Mat& xb,
                              const typename TensorT<S>::Mat& vs,
                              const typename TensorT<S>::Mat& vb,
                              const typename TensorT<S>::Mat& eps, const GeometricBatch* geom,
                              const LossWeights& w) {
  using namespace tensor_ops;
  using T = TensorT<S>;
  T xs_t = T::constant(xs), xb_t = T::constant(xb), vs_t = T::constant(vs);
  auto [xs_rec, skips] = nets->e.encode_decode(xs_t);
  auto [xb_rec, lat] = nets->g.forward(xb_t, skips, eps);
  auto [f_lat, f_d1] = nets->f.forward(vs_t);
  auto [verts, delta] = nets->h.forward(f_lat, f_d1, xb_rec);

  T t_xs = mean_abs_diff(xs_rec, xs_t);
  T t_xb = mean_abs_diff(xb_rec, xb_t);
  T t_vb = mean_abs_diff(verts, T::constant(vb));
  T kl = kl_gaussian(lat.mu, lat.log_var);
  T psi = charbonnier(kl);

  LossBreakdown<S> out;
  out.rec_xs = double(t_xs.value()(0, 0));
  out.rec_xb = double(t_xb.value()(0, 0));
  out.rec_vb = double(t_vb.value()(0, 0));
  out.kl_raw = double(kl.value()(0, 0));
  out.kl_psi = double(psi.value()(0, 0));

  std::vector<T> terms{t_xs, t_xb, t_vb, psi};
  std::vector<double> weights{1.0, 1.0, 1.0, w.alpha1};
  if (w.geometric_on && geom) {
    const Eigen::MatrixXd vc = verts.value().template cast<double>();
    double cv = 0, ct = 0;
    Eigen::MatrixXd dcv, dct;
    geometric_penalties(vc, *geom, w.contact_sigma, &cv, &ct, &dcv, &dct);
    out.collision = cv;
    out.contact = ct;
    terms.push_back(external_penalty(cv, verts, typename T::Mat(dcv.cast<S>())));
    weights.push_back(w.alpha2);
    terms.push_back(external_penalty(ct, verts, typename T::Mat(dct.cast<S>())));
    weights.push_back(w.alpha3);
  }
  out.total = weighted_sum(terms, weights);
  return out;
}

struct TrainConfig {
  NetArch arch;  // n and v are overridden from the dataset
  int epochs = 50;
  int batch_size = 32;
  double lr = 1e-4, beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;
  LossWeights weights;
  double gate_fraction = 0.75;  // geometric terms on once epoch/epochs reaches this
  std::uint64_t weight_seed = 11;
  std::uint64_t shuffle_seed = 13;
};

struct EpochStats {
  int epoch = 0;  // 1-based
  double rec_xs = 0, rec_xb = 0, rec_vb = 0, kl_raw = 0, kl_psi = 0;
  double collision = 0, contact = 0, total = 0;
  double wall_s = 0;
};

struct TrainResult {
  Networks<float> nets;
  std::vector<EpochStats> curve;
};

// Single-threaded, deterministic given seeds. Writes <out_dir>/metrics.csv
// (per-epoch means; the wall_s column is the one non-deterministic output)
// unless out_dir is empty. A non-finite loss aborts after writing a
// diagnostic snapshot next to the metrics.
TrainResult train(const Dataset& data, SceneCache* cache, const TrainConfig& cfg,
                  const std::string& out_dir);

}  // namespace proxgen
