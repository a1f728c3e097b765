#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "proxgen/config.hpp"
#include "proxgen/pipeline.hpp"
#include "proxgen/synth.hpp"
#include "proxgen/train.hpp"

namespace fs = std::filesystem;
using namespace proxgen;

namespace {

RunConfig config_or_default(const std::string& path) {
  if (path.empty()) return RunConfig{};
  return load_config(path);
}

void write_sidecar(const RunConfig& cfg, const std::string& out_dir) {
  fs::create_directories(out_dir);
  save_resolved_config(cfg, (fs::path(out_dir) / "resolved.cfg").string());
}

int cmd_gen_data(const std::string& config_path, const std::string& out_dir) {
  const RunConfig cfg = config_or_default(config_path);
  write_sidecar(cfg, out_dir);
  build_dataset(cfg.data_config(), out_dir);
  const Dataset train_set = Dataset::load((fs::path(out_dir) / "train.pgds").string());
  const Dataset test_set = Dataset::load((fs::path(out_dir) / "test.pgds").string());
  std::printf("wrote %s/train.pgds (%zu samples) and test.pgds (%zu samples)\n", out_dir.c_str(),
              train_set.samples.size(), test_set.samples.size());
  return 0;
}

int cmd_train(const std::string& data_path, const std::string& config_path,
              const std::string& out_dir) {
  const RunConfig cfg = config_or_default(config_path);
  fs::path data(data_path);
  if (fs::is_directory(data)) data /= "train.pgds";
  const Dataset ds = Dataset::load(data.string());
  write_sidecar(cfg, out_dir);
  SceneCache cache(ds.room_extent, int(ds.furniture_count));
  TrainResult res = train(ds, &cache, cfg.train_config(), out_dir);
  const std::string ckpt = (fs::path(out_dir) / "checkpoint.pgck").string();
  save_checkpoint(res.nets, ckpt);
  std::printf("trained %d epochs on %zu samples; final loss %.6f\n", int(res.curve.size()),
              ds.samples.size(), res.curve.empty() ? 0.0 : res.curve.back().total);
  std::printf("wrote %s and %s/metrics.csv\n", ckpt.c_str(), out_dir.c_str());
  return 0;
}

int cmd_generate(const std::string& ckpt_path, const std::string& scene,
                 const std::string& config_path, const std::string& out_dir, int count,
                 std::uint64_t seed, const std::string& variant_name) {
  const RunConfig cfg = config_or_default(config_path);
  const GenVariant variant = gen_variant_from_string(variant_name);
  Networks<float> nets = load_checkpoint(ckpt_path);
  const BasisPointSet basis = make_basis(nets.arch.n, nets.basis_seed);
  const SceneBundle bundle = load_scene_source(scene, cfg);
  write_sidecar(cfg, out_dir);
  const GenerateSummary s =
      generate_samples(nets, basis, bundle, cfg, variant, count, seed, out_dir);
  std::printf("generated %d/%d samples (%s) in %s\n", s.succeeded, s.requested,
              to_string(variant), out_dir.c_str());
  std::printf("mean non_collision %.4f, mean contact %.4f\n", s.mean_non_collision,
              s.mean_contact);
  return 0;
}

int cmd_optimize(const std::string& sample_path, const std::string& scene_override,
                 const std::string& config_path, const std::string& out_dir,
                 const std::string& variant_name) {
  const RunConfig cfg = config_or_default(config_path);
  const GenVariant gv = gen_variant_from_string(variant_name);
  if (gv == GenVariant::Raw) throw ValidationError("optimize: variant must not be raw");
  const OptimVariant ov =
      gv == GenVariant::SimOptim ? OptimVariant::SimOptim : OptimVariant::AdvOptim;

  GeneratedSample sample = GeneratedSample::load(sample_path);
  const SceneBundle bundle =
      load_scene_source(scene_override.empty() ? sample.scene_source : scene_override, cfg);
  write_sidecar(cfg, out_dir);
  const OptimResult res = optimize_sample(&sample, bundle, cfg, ov);

  const std::string stem = fs::path(sample_path).stem().string();
  const fs::path dir(out_dir);
  sample.save((dir / (stem + ".pgsm")).string());
  auto tmpl = BodyTemplate::standard();
  TriMesh mesh;
  mesh.vertices = sample.final_world(tmpl);
  mesh.faces = tmpl->faces();
  save_mesh(mesh, (dir / (stem + ".obj")).string());
  std::ofstream traj(dir / (stem + "_trajectory.csv"));
  traj << "step,total\n";
  for (size_t i = 0; i < res.trajectory.size(); ++i)
    traj << i << ',' << res.trajectory[i] << '\n';

  const FitLosses& L = res.final_losses;
  std::printf("%s: vertex %.6f feature %.6f collision %.6f contact %.6f prior %.6f total %.6f\n",
              to_string(ov), L.vertex, L.feature, L.collision, L.contact, L.prior, L.total);
  std::printf("wrote %s/%s.{obj,pgsm}\n", out_dir.c_str(), stem.c_str());
  return 0;
}

int cmd_eval(const std::string& dir, const std::string& config_path,
             const std::string& scene_override) {
  const RunConfig cfg = config_or_default(config_path);
  const EvalSummary s = evaluate_outputs(dir, cfg, scene_override);
  std::printf("samples %d\n", s.samples);
  std::printf("mean non_collision %.4f\n", s.mean_non_collision);
  std::printf("mean contact %.4f\n", s.mean_contact);
  if (s.has_diversity)
    std::printf("diversity entropy %.4f, cluster size %.4f\n", s.div.entropy, s.div.cluster_size);
  else
    std::printf("diversity n/a (needs %d fitted samples)\n", cfg.kmeans_k);
  return 0;
}

int cmd_export_viz(const std::string& sample_path, const std::string& out_dir) {
  const GeneratedSample sample = GeneratedSample::load(sample_path);
  fs::create_directories(out_dir);
  const std::string prefix =
      (fs::path(out_dir) / fs::path(sample_path).stem()).string();
  export_viz(sample, prefix);
  std::printf("wrote %s_bps.ply and %s_body.ply\n", prefix.c_str(), prefix.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"scene-conditioned body placement: data generation, training, sampling"};
  app.require_subcommand(1);

  std::string config_path, out_dir, data_path, ckpt_path, scene, sample_path, eval_dir;
  std::string variant = "advoptim";
  int count = 50;
  std::uint64_t seed = 1;

  auto* gen_data = app.add_subcommand("gen-data", "build train/test datasets of encoded placements");
  gen_data->add_option("--config", config_path, "key=value settings file");
  gen_data->add_option("--out", out_dir, "output directory")->required();

  auto* train_cmd = app.add_subcommand("train", "train the networks on a dataset");
  train_cmd->add_option("data", data_path, "dataset file or directory with train.pgds")
      ->required();
  train_cmd->add_option("--config", config_path, "key=value settings file");
  train_cmd->add_option("--out", out_dir, "output directory")->required();

  auto* generate = app.add_subcommand("generate", "sample body placements in a scene");
  generate->add_option("checkpoint", ckpt_path, "trained checkpoint (.pgck)")->required();
  generate->add_option("--scene", scene, "synth:SEED or a mesh file")->required();
  generate->add_option("--config", config_path, "key=value settings file");
  generate->add_option("--out", out_dir, "output directory")->required();
  generate->add_option("--count", count, "samples to generate");
  generate->add_option("--seed", seed, "sampling seed");
  generate->add_option("--variant", variant, "raw | simoptim | advoptim");

  auto* optimize = app.add_subcommand("optimize", "re-fit the body model to a stored sample");
  optimize->add_option("sample", sample_path, "stored sample (.pgsm)")->required();
  optimize->add_option("--scene", scene, "override the recorded scene source");
  optimize->add_option("--config", config_path, "key=value settings file");
  optimize->add_option("--out", out_dir, "output directory")->required();
  optimize->add_option("--variant", variant, "simoptim | advoptim");

  auto* eval_cmd = app.add_subcommand("eval", "re-score a directory of generated samples");
  eval_cmd->add_option("dir", eval_dir, "directory with sample_*.pgsm")->required();
  eval_cmd->add_option("--config", config_path, "key=value settings file");
  eval_cmd->add_option("--scene", scene, "override the recorded scene source");

  auto* viz = app.add_subcommand("export-viz", "write colored point cloud and body meshes");
  viz->add_option("sample", sample_path, "stored sample (.pgsm)")->required();
  viz->add_option("--out", out_dir, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (gen_data->parsed()) return cmd_gen_data(config_path, out_dir);
    if (train_cmd->parsed()) return cmd_train(data_path, config_path, out_dir);
    if (generate->parsed())
      return cmd_generate(ckpt_path, scene, config_path, out_dir, count, seed, variant);
    if (optimize->parsed())
      return cmd_optimize(sample_path, scene, config_path, out_dir, variant);
    if (eval_cmd->parsed()) return cmd_eval(eval_dir, config_path, scene);
    if (viz->parsed()) return cmd_export_viz(sample_path, out_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
