#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "proxgen/rng.hpp"
#include "proxgen/tensor.hpp"

namespace proxgen {

// Widths of the feature networks. n is the basis size, v the body vertex
// count; h1/h2/dz are free hyperparameters.
struct NetArch {
  int n = 1024;
  int h1 = 512;
  int h2 = 256;
  int dz = 32;
  int v = 642;

  bool operator==(const NetArch&) const = default;
};

template <class S>
struct LinearLayer {
  TensorT<S> w, b;

  void init(Rng* rng, int in, int out) {
    typename TensorT<S>::Mat wm(in, out);
    const double limit = std::sqrt(6.0 / in);
    for (int r = 0; r < in; ++r)
      for (int c = 0; c < out; ++c) wm(r, c) = S(rng->uniform(-limit, limit));
    w = TensorT<S>::param(std::move(wm));
    typename TensorT<S>::Mat bm(1, out);
    bm.setZero();
    b = TensorT<S>::param(std::move(bm));
  }

  TensorT<S> operator()(const TensorT<S>& x) const { return tensor_ops::linear(x, w, b); }

  void collect(const std::string& prefix,
               std::vector<std::pair<std::string, TensorT<S>*>>* out) {
    out->emplace_back(prefix + ".w", &w);
    out->emplace_back(prefix + ".b", &b);
  }
};

inline constexpr double kLeakySlope = 0.2;

template <class S>
struct ResidualBlock {
  LinearLayer<S> l1, l2;

  void init(Rng* rng, int width) {
    l1.init(rng, width, width);
    l2.init(rng, width, width);
  }

  TensorT<S> operator()(const TensorT<S>& x) const {
    using namespace tensor_ops;
    return leaky_relu(add(x, l2(leaky_relu(l1(x), kLeakySlope))), kLeakySlope);
  }

  void collect(const std::string& prefix,
               std::vector<std::pair<std::string, TensorT<S>*>>* out) {
    l1.collect(prefix + ".l1", out);
    l2.collect(prefix + ".l2", out);
  }
};

template <class S>
struct SceneSkips {
  TensorT<S> e;   // encoder latent, width h2
  TensorT<S> d1;  // first decoder activation, width h1
};

// Scene feature autoencoder E. Its decoder's intermediate activations (the
// latent plus the first decoder layer) condition G's decoder.
template <class S>
struct SceneFeatureNet {
  LinearLayer<S> enc_in, enc_out, dec_in, dec_out;
  ResidualBlock<S> enc_res;

  void init(Rng* rng, const NetArch& a) {
    enc_in.init(rng, a.n, a.h1);
    enc_res.init(rng, a.h1);
    enc_out.init(rng, a.h1, a.h2);
    dec_in.init(rng, a.h2, a.h1);
    dec_out.init(rng, a.h1, a.n);
  }

  TensorT<S> encode(const TensorT<S>& x_s) const {
    using namespace tensor_ops;
    return leaky_relu(enc_out(enc_res(leaky_relu(enc_in(x_s), kLeakySlope))), kLeakySlope);
  }

  // (reconstruction, skip features)
  std::pair<TensorT<S>, SceneSkips<S>> encode_decode(const TensorT<S>& x_s) const {
    using namespace tensor_ops;
    SceneSkips<S> skips;
    skips.e = encode(x_s);
    skips.d1 = leaky_relu(dec_in(skips.e), kLeakySlope);
    return {dec_out(skips.d1), skips};
  }

  void collect(std::vector<std::pair<std::string, TensorT<S>*>>* out) {
    enc_in.collect("E.enc_in", out);
    enc_res.collect("E.enc_res", out);
    enc_out.collect("E.enc_out", out);
    dec_in.collect("E.dec_in", out);
    dec_out.collect("E.dec_out", out);
  }
};

template <class S>
struct LatentSampleT {
  typename TensorT<S>::Mat eps;
  TensorT<S> mu, log_var, z;
};

// Scene-conditioned cVAE G over body features. The scene enters three times:
// next to the body feature in the encoder, next to z at the decoder input,
// and as skip features at the two later decoder layers.
template <class S>
struct CvaeNet {
  LinearLayer<S> enc_in, enc_mid, mu_head, lv_head;
  ResidualBlock<S> enc_res;
  LinearLayer<S> dec_in, dec_mid, dec_out;
  ResidualBlock<S> dec_res, dec_res2;

  void init(Rng* rng, const NetArch& a) {
    enc_in.init(rng, a.n + a.h2, a.h1);
    enc_res.init(rng, a.h1);
    enc_mid.init(rng, a.h1, a.h2);
    mu_head.init(rng, a.h2, a.dz);
    lv_head.init(rng, a.h2, a.dz);
    dec_in.init(rng, a.dz + a.h2, a.h2);
    dec_res.init(rng, a.h2);
    dec_mid.init(rng, a.h2 + a.h2, a.h1);
    dec_res2.init(rng, a.h1);
    dec_out.init(rng, a.h1 + a.h1, a.n);
  }

  std::pair<TensorT<S>, TensorT<S>> encode(const TensorT<S>& x_b, const TensorT<S>& e) const {
    using namespace tensor_ops;
    auto h = leaky_relu(enc_in(concat_cols(x_b, e)), kLeakySlope);
    h = leaky_relu(enc_mid(enc_res(h)), kLeakySlope);
    return {mu_head(h), lv_head(h)};
  }

  TensorT<S> decode(const TensorT<S>& z, const SceneSkips<S>& skips) const {
    using namespace tensor_ops;
    auto h = leaky_relu(dec_in(concat_cols(z, skips.e)), kLeakySlope);
    h = dec_res(h);
    h = leaky_relu(dec_mid(concat_cols(h, skips.e)), kLeakySlope);
    h = dec_res2(h);
    return softplus(dec_out(concat_cols(h, skips.d1)));
  }

  // Full pass with recorded noise; z = mu + exp(0.5 log_var) * eps.
  std::pair<TensorT<S>, LatentSampleT<S>> forward(const TensorT<S>& x_b,
                                                  const SceneSkips<S>& skips,
                                                  typename TensorT<S>::Mat eps) const {
    using namespace tensor_ops;
    LatentSampleT<S> lat;
    lat.eps = std::move(eps);
    auto [mu, lv] = encode(x_b, skips.e);
    lat.mu = mu;
    lat.log_var = lv;
    auto std = exp(scale(lv, 0.5));
    lat.z = add(mu, mul(std, TensorT<S>::constant(lat.eps)));
    return {decode(lat.z, skips), lat};
  }

  void collect(std::vector<std::pair<std::string, TensorT<S>*>>* out) {
    enc_in.collect("G.enc_in", out);
    enc_res.collect("G.enc_res", out);
    enc_mid.collect("G.enc_mid", out);
    mu_head.collect("G.mu", out);
    lv_head.collect("G.lv", out);
    dec_in.collect("G.dec_in", out);
    dec_res.collect("G.dec_res", out);
    dec_mid.collect("G.dec_mid", out);
    dec_res2.collect("G.dec_res2", out);
    dec_out.collect("G.dec_out", out);
  }
};

// Scene BPS encoder F: compresses the selected scene points V_s. Both the
// latent and the expanded decoder activation feed the regressor, so every
// layer receives gradient through H.
template <class S>
struct SceneBpsNet {
  LinearLayer<S> enc_in, enc_out, dec_in;
  ResidualBlock<S> enc_res;

  void init(Rng* rng, const NetArch& a) {
    enc_in.init(rng, 3 * a.n, a.h1);
    enc_res.init(rng, a.h1);
    enc_out.init(rng, a.h1, a.h2);
    dec_in.init(rng, a.h2, a.h1);
  }

  // (latent h2, decoder activation h1)
  std::pair<TensorT<S>, TensorT<S>> forward(const TensorT<S>& v_s) const {
    using namespace tensor_ops;
    auto lat = leaky_relu(enc_out(enc_res(leaky_relu(enc_in(v_s), kLeakySlope))), kLeakySlope);
    return {lat, leaky_relu(dec_in(lat), kLeakySlope)};
  }

  void collect(std::vector<std::pair<std::string, TensorT<S>*>>* out) {
    enc_in.collect("F.enc_in", out);
    enc_res.collect("F.enc_res", out);
    enc_out.collect("F.enc_out", out);
    dec_in.collect("F.dec_in", out);
  }
};

// Body vertex regressor H: from F's scene encoding and a body feature to
// cage-frame vertices plus one global translation applied to all of them.
template <class S>
struct RegressorNet {
  LinearLayer<S> in, verts_head, delta_head;
  ResidualBlock<S> res;

  void init(Rng* rng, const NetArch& a) {
    in.init(rng, a.h2 + a.h1 + a.n, a.h1);
    res.init(rng, a.h1);
    verts_head.init(rng, a.h1, 3 * a.v);
    delta_head.init(rng, a.h1, 3);
  }

  // (vertices B x 3V, delta B x 3)
  std::pair<TensorT<S>, TensorT<S>> forward(const TensorT<S>& f_lat, const TensorT<S>& f_d1,
                                            const TensorT<S>& x_b) const {
    using namespace tensor_ops;
    auto h = res(leaky_relu(in(concat_cols(concat_cols(f_lat, f_d1), x_b)), kLeakySlope));
    auto delta = delta_head(h);
    return {add_global_translation(verts_head(h), delta), delta};
  }

  void collect(std::vector<std::pair<std::string, TensorT<S>*>>* out) {
    in.collect("H.in", out);
    res.collect("H.res", out);
    verts_head.collect("H.verts", out);
    delta_head.collect("H.delta", out);
  }
};

template <class S>
struct Networks {
  NetArch arch;
  std::uint64_t basis_seed = 0;
  SceneFeatureNet<S> e;
  SceneBpsNet<S> f;
  CvaeNet<S> g;
  RegressorNet<S> h;

  void init(const NetArch& a, std::uint64_t weight_seed, std::uint64_t basis) {
    arch = a;
    basis_seed = basis;
    Rng rng(weight_seed);
    e.init(&rng, a);
    f.init(&rng, a);
    g.init(&rng, a);
    h.init(&rng, a);
  }

  std::vector<std::pair<std::string, TensorT<S>*>> params() {
    std::vector<std::pair<std::string, TensorT<S>*>> out;
    e.collect(&out);
    f.collect(&out);
    g.collect(&out);
    h.collect(&out);
    return out;
  }
};

std::uint64_t arch_hash(const NetArch& a);
void save_checkpoint(Networks<float>& nets, const std::string& path);
Networks<float> load_checkpoint(const std::string& path);

}  // namespace proxgen
