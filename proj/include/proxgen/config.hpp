#pragma once

#include <cstdint>
#include <string>

#include "proxgen/fit.hpp"
#include "proxgen/networks.hpp"
#include "proxgen/synth.hpp"
#include "proxgen/train.hpp"

namespace proxgen {

// Every knob of the pipeline in one flat key=value file. Defaults are the
// desk-scale run; configs/reference.cfg scales the training schedule up.
struct RunConfig {
  // data generation
  int n_basis = 1024;
  std::uint64_t basis_seed = 7;
  double room_extent = 4.0;
  int furniture_count = 3;
  int train_scenes = 25;
  int test_scenes = 5;
  int placements_per_scene = 20;
  int test_placements_per_scene = 10;
  int augmentations = 4;
  std::uint64_t data_seed = 101;
  double cage_edge = 2.0;
  double wall_spacing = 0.25;
  // network widths
  int h1 = 512;
  int h2 = 256;
  int dz = 32;
  // training
  int epochs = 50;
  int batch_size = 32;
  double lr = 1e-4;
  double alpha1 = 0.5;
  double alpha2 = 1e-3;
  double alpha3 = 1e-3;
  double gate_fraction = 0.75;
  std::uint64_t weight_seed = 11;
  std::uint64_t shuffle_seed = 13;
  double contact_sigma = kContactSigma;
  // per-sample optimization
  double lambda1 = 8.0;
  double lambda2 = 0.5;
  double lambda3 = 0.02;
  double lambda4 = 0.01;
  double lambda5 = 0.01;
  int opt_steps = 300;
  double opt_step_size = 0.01;
  // evaluation
  int kmeans_k = 20;
  std::uint64_t kmeans_seed = 17;
  bool diversity_include_translation = false;

  DataGenConfig data_config() const;
  NetArch net_arch() const;  // n from n_basis; v stays at the body default
  TrainConfig train_config() const;
  OptimConfig optim_config(OptimVariant variant) const;
};

// key = value lines; '#' starts a comment; unknown keys are errors so typos
// do not silently fall back to defaults.
RunConfig load_config(const std::string& path);
RunConfig parse_config_text(const std::string& text, const std::string& origin);

// Writes every key (sorted) so a run directory records the exact settings.
void save_resolved_config(const RunConfig& cfg, const std::string& path);

}  // namespace proxgen
