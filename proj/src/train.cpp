#include "proxgen/train.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "proxgen/binio.hpp"
#include "proxgen/body.hpp"
#include "proxgen/errors.hpp"
#include "proxgen/optim.hpp"
#include "proxgen/rng.hpp"

namespace proxgen {

void geometric_penalties(const Eigen::MatrixXd& verts_cage, const GeometricBatch& geom,
                         double sigma, double* collision, double* contact,
                         Eigen::MatrixXd* d_collision, Eigen::MatrixXd* d_contact) {
  const int rows = int(verts_cage.rows());
  const int v = int(verts_cage.cols()) / 3;
  if (int(geom.items.size()) != rows)
    throw ValidationError("geometric_penalties: item/row mismatch");
  if (!geom.feet) throw ValidationError("geometric_penalties: missing feet subset");
  d_collision->setZero(rows, verts_cage.cols());
  d_contact->setZero(rows, verts_cage.cols());
  double coll_sum = 0.0, contact_sum = 0.0;
  std::vector<Vec3> q(v);
  const double inv_b = 1.0 / double(rows);
  for (int b = 0; b < rows; ++b) {
    const auto& item = geom.items[b];
    for (int k = 0; k < v; ++k) {
      const Vec3 vc(verts_cage(b, 3 * k), verts_cage(b, 3 * k + 1), verts_cage(b, 3 * k + 2));
      q[k] = rotate_z(-item.world_rot, item.transform.cage_to_world(vc));
    }
    const auto cr = collision_penalty(q, *item.sdf, true);
    const auto ct = contact_penalty(q, *geom.feet, *item.index, sigma, true);
    coll_sum += cr.value;
    contact_sum += ct.value;
    const double inv_scale = 1.0 / item.transform.scale;
    for (int k = 0; k < v; ++k) {
      if (!cr.d_verts[k].isZero(0.0)) {
        const Vec3 g = rotate_z(item.world_rot, cr.d_verts[k]) * inv_scale * inv_b;
        for (int c = 0; c < 3; ++c) (*d_collision)(b, 3 * k + c) = g[c];
      }
      if (!ct.d_verts[k].isZero(0.0)) {
        const Vec3 g = rotate_z(item.world_rot, ct.d_verts[k]) * inv_scale * inv_b;
        for (int c = 0; c < 3; ++c) (*d_contact)(b, 3 * k + c) = g[c];
      }
    }
  }
  *collision = coll_sum * inv_b;
  *contact = contact_sum * inv_b;
}

namespace {

void write_csv_header(std::ofstream& csv) {
  csv << "epoch,rec_xs,rec_xb,rec_vb,kl_raw,kl_psi,collision,contact,total,wall_s\n";
}

void write_csv_row(std::ofstream& csv, const EpochStats& s) {
  csv << s.epoch << ',' << s.rec_xs << ',' << s.rec_xb << ',' << s.rec_vb << ',' << s.kl_raw
      << ',' << s.kl_psi << ',' << s.collision << ',' << s.contact << ',' << s.total << ','
      << s.wall_s << '\n';
}

}  // namespace

TrainResult train(const Dataset& data, SceneCache* cache, const TrainConfig& cfg,
                  const std::string& out_dir) {
  if (data.samples.empty()) throw ValidationError("train: empty dataset");
  if (cfg.batch_size <= 0 || cfg.epochs <= 0) throw ValidationError("train: bad config");

  NetArch arch = cfg.arch;
  arch.n = int(data.n);
  arch.v = int(data.v);
  TrainResult res;
  res.nets.init(arch, cfg.weight_seed, data.basis_seed);
  auto params = res.nets.params();
  std::vector<Adam<Tensor::Mat>> opt(
      params.size(), Adam<Tensor::Mat>(cfg.lr, cfg.beta1, cfg.beta2, cfg.adam_eps));

  auto tmpl = BodyTemplate::standard();
  const std::vector<int>& feet = tmpl->feet_vertices();
  Rng run(cfg.shuffle_seed);
  const int count = int(data.samples.size());
  std::vector<int> perm(count);
  std::iota(perm.begin(), perm.end(), 0);

  std::ofstream csv;
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    csv.open(std::filesystem::path(out_dir) / "metrics.csv");
    if (!csv) throw IoError("cannot open metrics file in " + out_dir);
    write_csv_header(csv);
  }

  const int n = arch.n, v = arch.v, dz = arch.dz;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    for (int i = count - 1; i > 0; --i)
      std::swap(perm[i], perm[size_t(run.uniform_index(std::uint64_t(i + 1)))]);
    const bool geo_on = double(epoch) / double(cfg.epochs) >= cfg.gate_fraction;

    EpochStats st;
    st.epoch = epoch + 1;
    for (int start = 0; start < count; start += cfg.batch_size) {
      const int bs = std::min(cfg.batch_size, count - start);
      Tensor::Mat xs(bs, n), xb(bs, n), vs(bs, 3 * n), vb(bs, 3 * v), eps(bs, dz);
      GeometricBatch geom;
      geom.feet = &feet;
      for (int b = 0; b < bs; ++b) {
        const TrainSample& s = data.samples[size_t(perm[size_t(start + b)])];
        xs.row(b) = s.scene_feature.transpose();
        xb.row(b) = s.body_feature.transpose();
        vs.row(b) = s.scene_bps.transpose();
        vb.row(b) = s.body_vertices.transpose();
        if (geo_on) {
          const auto& entry = cache->get(s.scene_seed);
          geom.items.push_back({s.transform, s.world_rot, &entry.scene.sdf, &entry.index});
        }
      }
      for (int b = 0; b < bs; ++b)
        for (int k = 0; k < dz; ++k) eps(b, k) = float(run.normal());

      LossWeights w = cfg.weights;
      w.geometric_on = geo_on;
      auto lb = compose_loss<float>(&res.nets, xs, xb, vs, vb, eps, geo_on ? &geom : nullptr, w);
      const double total = double(lb.total.value()(0, 0));
      if (!std::isfinite(total)) {
        if (!out_dir.empty()) {
          std::ofstream diag(std::filesystem::path(out_dir) / "nan_diagnostic.txt");
          diag << "non-finite loss at epoch " << epoch + 1 << " batch " << start / cfg.batch_size
               << "\nrec_xs " << lb.rec_xs << "\nrec_xb " << lb.rec_xb << "\nrec_vb " << lb.rec_vb
               << "\nkl_raw " << lb.kl_raw << "\ncollision " << lb.collision << "\ncontact "
               << lb.contact << "\n";
          save_checkpoint(res.nets,
                          (std::filesystem::path(out_dir) / "nan_snapshot.pgck").string());
        }
        throw ValidationError("train: non-finite loss at epoch " + std::to_string(epoch + 1));
      }

      for (auto& [name, t] : params) t->zero_grad();
      lb.total.backward();
      for (size_t i = 0; i < params.size(); ++i)
        opt[i].step(&params[i].second->mutable_value(), params[i].second->grad());

      const double f = double(bs) / double(count);
      st.rec_xs += lb.rec_xs * f;
      st.rec_xb += lb.rec_xb * f;
      st.rec_vb += lb.rec_vb * f;
      st.kl_raw += lb.kl_raw * f;
      st.kl_psi += lb.kl_psi * f;
      st.collision += lb.collision * f;
      st.contact += lb.contact * f;
      st.total += total * f;
    }
    st.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    res.curve.push_back(st);
    if (csv.is_open()) {
      write_csv_row(csv, st);
      csv.flush();
    }
  }
  return res;
}

}  // namespace proxgen
