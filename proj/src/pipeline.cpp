#include "proxgen/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>

#include "proxgen/binio.hpp"
#include "proxgen/errors.hpp"
#include "proxgen/rng.hpp"
#include "proxgen/synth.hpp"

namespace proxgen {
namespace {

constexpr char kSampleMagic[4] = {'P', 'G', 'S', 'M'};
constexpr std::uint32_t kSampleVersion = 1;

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

std::string sample_stem(int id) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "sample_%03d", id);
  return buf;
}

void write_transform(BinWriter* w, const CageTransform& t) {
  for (int c = 0; c < 3; ++c) w->write<double>(t.cage_center[c]);
  w->write<double>(t.cage_edge);
  w->write<double>(t.scale);
  w->write<double>(t.rotation);
  for (int c = 0; c < 3; ++c) w->write<double>(t.shift[c]);
}

CageTransform read_transform(BinReader* r) {
  CageTransform t;
  for (int c = 0; c < 3; ++c) t.cage_center[c] = r->read<double>();
  t.cage_edge = r->read<double>();
  t.scale = r->read<double>();
  t.rotation = r->read<double>();
  for (int c = 0; c < 3; ++c) t.shift[c] = r->read<double>();
  return t;
}

std::vector<Vec3> unpack_rows(const Eigen::VectorXf& flat) {
  if (flat.size() % 3 != 0) throw ValidationError("flat vertex array not divisible by 3");
  std::vector<Vec3> out(size_t(flat.size() / 3));
  for (size_t k = 0; k < out.size(); ++k)
    out[k] = Vec3(flat[int(3 * k)], flat[int(3 * k + 1)], flat[int(3 * k + 2)]);
  return out;
}

}  // namespace

SceneBundle load_scene_source(const std::string& source, const RunConfig& cfg) {
  if (source.rfind("synth:", 0) == 0) {
    std::uint64_t seed = 0;
    std::size_t used = 0;
    const std::string digits = source.substr(6);
    try {
      seed = std::stoull(digits, &used);
    } catch (const std::exception&) {
      throw ValidationError("bad scene source (expected synth:SEED): " + source);
    }
    if (used != digits.size() || digits.empty())
      throw ValidationError("bad scene source (expected synth:SEED): " + source);
    SynthScene scene = generate_scene(seed, cfg.room_extent, cfg.furniture_count);
    const double half = scene.room_extent / 2.0;
    PointIndex index(scene.mesh.vertices);
    return SceneBundle{source,
                       std::move(scene.mesh),
                       std::move(scene.sdf),
                       std::move(index),
                       0.0,
                       Vec3(-half, -half, 0.0),
                       Vec3(half, half, 2.0)};
  }
  TriMesh mesh = load_mesh(source);
  if (mesh.vertices.empty()) throw ValidationError("scene mesh has no vertices: " + source);
  Vec3 lo = mesh.vertices[0], hi = mesh.vertices[0];
  for (const Vec3& p : mesh.vertices) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  // no exact field for an arbitrary mesh: collision is checked against the
  // ground plane only, contact still sees the full mesh through the index
  SdfField sdf = SdfField::analytic({}, lo.z());
  PointIndex index(mesh.vertices);
  return SceneBundle{source, std::move(mesh), std::move(sdf), std::move(index), lo.z(), lo, hi};
}

const char* to_string(GenVariant v) {
  switch (v) {
    case GenVariant::Raw:
      return "raw";
    case GenVariant::SimOptim:
      return "simoptim";
    default:
      return "advoptim";
  }
}

GenVariant gen_variant_from_string(const std::string& s) {
  if (s == "raw") return GenVariant::Raw;
  if (s == "simoptim") return GenVariant::SimOptim;
  if (s == "advoptim") return GenVariant::AdvOptim;
  throw ValidationError("unknown variant: " + s + " (expected raw|simoptim|advoptim)");
}

void GeneratedSample::save(const std::string& path) const {
  BinWriter w(path);
  w.write_magic(kSampleMagic);
  w.write<std::uint32_t>(kSampleVersion);
  w.write<std::uint8_t>(std::uint8_t(variant));
  w.write<std::uint32_t>(std::uint32_t(scene_source.size()));
  w.write_bytes(scene_source.data(), scene_source.size());
  w.write<std::uint32_t>(std::uint32_t(body_feature.size()));
  w.write<std::uint32_t>(std::uint32_t(raw_vertices.size() / 3));
  write_transform(&w, transform);
  w.write_array(scene_bps.data(), size_t(scene_bps.size()));
  w.write_array(body_feature.data(), size_t(body_feature.size()));
  w.write_array(raw_vertices.data(), size_t(raw_vertices.size()));
  w.write<std::uint8_t>(has_params ? 1 : 0);
  if (has_params) {
    const auto vec = params.to_vector();
    w.write_array(vec.data(), size_t(vec.size()));
  }
  w.close();
}

GeneratedSample GeneratedSample::load(const std::string& path) {
  BinReader r(path);
  r.expect_magic(kSampleMagic, "generated sample");
  if (r.read<std::uint32_t>() != kSampleVersion)
    throw IoError(path + ": unsupported sample version");
  GeneratedSample s;
  const auto variant_raw = r.read<std::uint8_t>();
  if (variant_raw > 2) throw IoError(path + ": bad variant value");
  s.variant = GenVariant(variant_raw);
  const auto src_len = r.read<std::uint32_t>();
  s.scene_source.resize(src_len);
  if (src_len > 0) r.read_bytes(s.scene_source.data(), src_len);
  const auto n = r.read<std::uint32_t>();
  const auto v = r.read<std::uint32_t>();
  if (n == 0 || v == 0) throw IoError(path + ": empty sample dimensions");
  s.transform = read_transform(&r);
  s.scene_bps.resize(3 * n);
  r.read_array(s.scene_bps.data(), size_t(3 * n));
  s.body_feature.resize(n);
  r.read_array(s.body_feature.data(), size_t(n));
  s.raw_vertices.resize(3 * v);
  r.read_array(s.raw_vertices.data(), size_t(3 * v));
  s.has_params = r.read<std::uint8_t>() != 0;
  if (s.has_params) {
    Eigen::Matrix<double, kParamCount, 1> vec;
    r.read_array(vec.data(), size_t(kParamCount));
    s.params = BodyParams::from_vector(vec);
  }
  return s;
}

std::vector<Vec3> GeneratedSample::raw_world() const {
  std::vector<Vec3> cage = unpack_rows(raw_vertices);
  for (Vec3& p : cage) p = transform.cage_to_world(p);
  return cage;
}

std::vector<Vec3> GeneratedSample::final_world(
    const std::shared_ptr<const BodyTemplate>& tmpl) const {
  if (!has_params) return raw_world();
  return forward(tmpl, params).vertices;
}

OptimResult optimize_sample(GeneratedSample* sample, const SceneBundle& bundle,
                            const RunConfig& cfg, OptimVariant variant) {
  auto tmpl = BodyTemplate::standard();
  const int n = int(sample->body_feature.size());

  // rebuild the encoding the feature term measures against
  SceneEncoding enc;
  enc.scene_bps = unpack_rows(sample->scene_bps);
  enc.scene_feature = Eigen::VectorXd::Zero(n);  // unused by the fit
  enc.source_flags.assign(size_t(n), 0);

  const std::vector<Vec3> target_cage = unpack_rows(sample->raw_vertices);
  const Eigen::VectorXd target_feature = sample->body_feature.cast<double>();
  const BodyParams init = init_from_vertices(sample->raw_world(), tmpl);

  OptimResult res = fit_body(target_cage, target_feature, enc, sample->transform, bundle.sdf,
                             bundle.index, cfg.optim_config(variant), init);
  sample->has_params = true;
  sample->params = res.params;
  sample->variant =
      variant == OptimVariant::SimOptim ? GenVariant::SimOptim : GenVariant::AdvOptim;
  return res;
}

GenerateSummary generate_samples(Networks<float>& nets, const BasisPointSet& basis,
                                 const SceneBundle& bundle, const RunConfig& cfg,
                                 GenVariant variant, int count, std::uint64_t seed,
                                 const std::string& out_dir) {
  if (count <= 0) throw ValidationError("generate_samples: count must be positive");
  if (basis.n() != nets.arch.n)
    throw ValidationError("generate_samples: basis size does not match the networks");
  if (basis.seed != nets.basis_seed)
    throw ValidationError("generate_samples: basis seed does not match the checkpoint");
  auto tmpl = BodyTemplate::standard();
  if (nets.arch.v != tmpl->vertex_count())
    throw ValidationError("generate_samples: network vertex count does not match the body");

  std::filesystem::create_directories(out_dir);
  const std::filesystem::path dir(out_dir);
  std::ofstream manifest(dir / "manifest.csv");
  if (!manifest) throw IoError("cannot open for writing: " + (dir / "manifest.csv").string());
  manifest << "id,variant,cage_x,cage_y,cage_z,loss_vertex,loss_feature,loss_collision,"
              "loss_contact,loss_prior,loss_total,non_collision,contact\n";
  std::ofstream params_csv;
  if (variant != GenVariant::Raw) {
    params_csv.open(dir / "params.csv");
    if (!params_csv) throw IoError("cannot open for writing: " + (dir / "params.csv").string());
    params_csv << "id,tx,ty,tz,yaw";
    for (int j = 0; j < kJointCount; ++j) params_csv << ",j" << j;
    params_csv << ",scale_h,scale_g,scale_l\n";
  }

  const double r = cfg.cage_edge / 2.0;
  const int n = nets.arch.n, v = nets.arch.v, dz = nets.arch.dz;
  GenerateSummary summary;
  summary.requested = count;
  double nc_sum = 0.0, ct_sum = 0.0;

  for (int i = 0; i < count; ++i) {
    try {
      Rng rng(Rng::derive(seed, std::uint64_t(i)));
      if (bundle.hi.x() - bundle.lo.x() < cfg.cage_edge ||
          bundle.hi.y() - bundle.lo.y() < cfg.cage_edge)
        throw ValidationError("scene too small for the cage");
      Vec3 center(rng.uniform(bundle.lo.x() + r, bundle.hi.x() - r),
                  rng.uniform(bundle.lo.y() + r, bundle.hi.y() - r), bundle.ground_z + r);

      const LocalScene local = crop_local_scene(bundle.mesh, center, cfg.cage_edge,
                                                cfg.wall_spacing);
      const NormalizedScene norm = to_unit_sphere(local);
      const SceneEncoding enc = encode_scene(basis, norm);

      Tensor::Mat xs(1, n), vs(1, 3 * n), z(1, dz);
      for (int k = 0; k < n; ++k) xs(0, k) = float(enc.scene_feature[k]);
      for (int k = 0; k < n; ++k)
        for (int c = 0; c < 3; ++c) vs(0, 3 * k + c) = float(enc.scene_bps[size_t(k)][c]);
      for (int k = 0; k < dz; ++k) z(0, k) = float(rng.normal());

      auto [xs_rec, skips] = nets.e.encode_decode(Tensor::constant(xs));
      (void)xs_rec;
      const Tensor xb_rec = nets.g.decode(Tensor::constant(z), skips);
      auto [f_lat, f_d1] = nets.f.forward(Tensor::constant(vs));
      auto [verts_t, delta] = nets.h.forward(f_lat, f_d1, xb_rec);
      (void)delta;

      GeneratedSample sample;
      sample.scene_source = bundle.source;
      sample.variant = variant;
      sample.transform = local.transform;
      sample.scene_bps.resize(3 * n);
      for (int k = 0; k < n; ++k)
        for (int c = 0; c < 3; ++c) sample.scene_bps[3 * k + c] = float(enc.scene_bps[size_t(k)][c]);
      sample.body_feature = xb_rec.value().row(0).transpose();
      sample.raw_vertices = verts_t.value().row(0).transpose();

      FitLosses losses;
      if (variant != GenVariant::Raw) {
        const OptimResult res = optimize_sample(
            &sample, bundle, cfg,
            variant == GenVariant::SimOptim ? OptimVariant::SimOptim : OptimVariant::AdvOptim);
        losses = res.final_losses;
      }

      const std::vector<Vec3> world = sample.final_world(tmpl);
      const double nc = non_collision_score(world, bundle.sdf);
      const double ct = contact_score(world, bundle.sdf);

      TriMesh out_mesh;
      out_mesh.vertices = world;
      out_mesh.faces = tmpl->faces();
      const std::string stem = sample_stem(i);
      save_mesh(out_mesh, (dir / (stem + ".obj")).string());
      sample.save((dir / (stem + ".pgsm")).string());

      manifest << i << ',' << to_string(variant) << ',' << fmt(center.x()) << ','
               << fmt(center.y()) << ',' << fmt(center.z()) << ',' << fmt(losses.vertex) << ','
               << fmt(losses.feature) << ',' << fmt(losses.collision) << ','
               << fmt(losses.contact) << ',' << fmt(losses.prior) << ',' << fmt(losses.total)
               << ',' << fmt(nc) << ',' << fmt(ct) << '\n';
      if (variant != GenVariant::Raw) {
        const auto vec = sample.params.to_vector();
        params_csv << i;
        for (int k = 0; k < kParamCount; ++k) params_csv << ',' << fmt(vec[k]);
        params_csv << '\n';
      }

      nc_sum += nc;
      ct_sum += ct;
      summary.succeeded += 1;
    } catch (const std::runtime_error& e) {
      std::cerr << "sample " << i << " failed: " << e.what() << "\n";
    }
  }

  if (summary.succeeded == 0) throw ValidationError("generate_samples: no sample succeeded");
  if (!manifest.flush()) throw IoError("write failed: " + (dir / "manifest.csv").string());
  if (params_csv.is_open() && !params_csv.flush())
    throw IoError("write failed: " + (dir / "params.csv").string());
  summary.mean_non_collision = nc_sum / double(summary.succeeded);
  summary.mean_contact = ct_sum / double(summary.succeeded);
  return summary;
}

EvalSummary evaluate_outputs(const std::string& dir, const RunConfig& cfg,
                             const std::string& scene_override) {
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("sample_", 0) == 0 && entry.path().extension() == ".pgsm")
      files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw ValidationError("no sample_*.pgsm files in " + dir);

  auto tmpl = BodyTemplate::standard();
  std::map<std::string, SceneBundle> bundles;
  auto bundle_for = [&](const std::string& source) -> const SceneBundle& {
    const std::string key = scene_override.empty() ? source : scene_override;
    auto it = bundles.find(key);
    if (it == bundles.end()) it = bundles.emplace(key, load_scene_source(key, cfg)).first;
    return it->second;
  };

  EvalSummary out;
  std::vector<BodyParams> fitted;
  for (const auto& path : files) {
    const GeneratedSample s = GeneratedSample::load(path.string());
    const SceneBundle& bundle = bundle_for(s.scene_source);
    const std::vector<Vec3> world = s.final_world(tmpl);
    out.mean_non_collision += non_collision_score(world, bundle.sdf);
    out.mean_contact += contact_score(world, bundle.sdf);
    out.samples += 1;
    if (s.has_params) fitted.push_back(s.params);
  }
  out.mean_non_collision /= double(out.samples);
  out.mean_contact /= double(out.samples);
  if (int(fitted.size()) >= cfg.kmeans_k) {
    out.div = diversity(fitted, cfg.kmeans_k, cfg.kmeans_seed, cfg.diversity_include_translation);
    out.has_diversity = true;
  }
  return out;
}

void export_viz(const GeneratedSample& sample, const std::string& out_prefix) {
  const int n = int(sample.body_feature.size());

  TriMesh points;
  points.vertices = unpack_rows(sample.scene_bps);
  for (Vec3& p : points.vertices) p = sample.transform.cage_to_world(p);
  float lo = sample.body_feature.minCoeff(), hi = sample.body_feature.maxCoeff();
  points.quality.resize(size_t(n), 0.0);
  if (hi > lo)
    for (int k = 0; k < n; ++k)
      points.quality[size_t(k)] = double((sample.body_feature[k] - lo) / (hi - lo));
  save_mesh(points, out_prefix + "_bps.ply", MeshFormat::Ply);

  auto tmpl = BodyTemplate::standard();
  TriMesh body;
  body.vertices = sample.final_world(tmpl);
  body.faces = tmpl->faces();
  save_mesh(body, out_prefix + "_body.ply", MeshFormat::Ply);
}

}  // namespace proxgen
