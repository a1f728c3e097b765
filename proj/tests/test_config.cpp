#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "proxgen/binio.hpp"
#include "proxgen/config.hpp"

using namespace proxgen;

TEST_CASE("defaults survive an empty config") {
  const RunConfig cfg = parse_config_text("", "mem");
  CHECK(cfg.n_basis == 1024);
  CHECK(cfg.basis_seed == 7);
  CHECK(cfg.epochs == 50);
  CHECK(cfg.batch_size == 32);
  CHECK(cfg.lr == 1e-4);
  CHECK(cfg.lambda1 == 8.0);
  CHECK(cfg.opt_steps == 300);
  CHECK(cfg.kmeans_k == 20);
  CHECK(cfg.diversity_include_translation == false);
}

TEST_CASE("overrides, comments, whitespace, and every value type") {
  const std::string text =
      "# schedule\n"
      "epochs = 7\n"
      "\n"
      "  lr=0.5   # inline comment\n"
      "basis_seed = 123456789012345\n"
      "diversity_include_translation = true\n"
      "room_extent = 6.5\n";
  const RunConfig cfg = parse_config_text(text, "mem");
  CHECK(cfg.epochs == 7);
  CHECK(cfg.lr == 0.5);
  CHECK(cfg.basis_seed == 123456789012345ull);
  CHECK(cfg.diversity_include_translation == true);
  CHECK(cfg.room_extent == 6.5);
  CHECK(cfg.batch_size == 32);  // untouched keys keep defaults

  CHECK(parse_config_text("diversity_include_translation = 1", "mem")
            .diversity_include_translation);
  CHECK(!parse_config_text("diversity_include_translation = false", "mem")
             .diversity_include_translation);
}

TEST_CASE("unknown keys and malformed values fail loudly with the line number") {
  try {
    parse_config_text("epochs = 5\nnot_a_knob = 3\n", "mem");
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("mem:2") != std::string::npos);
    CHECK(msg.find("not_a_knob") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config_text("epochs = banana", "mem"), ParseError);
  CHECK_THROWS_AS(parse_config_text("epochs = 5x", "mem"), ParseError);
  CHECK_THROWS_AS(parse_config_text("lr = ", "mem"), ParseError);
  CHECK_THROWS_AS(parse_config_text("just a line\n", "mem"), ParseError);
  CHECK_THROWS_AS(parse_config_text("diversity_include_translation = maybe", "mem"),
                  ParseError);
}

TEST_CASE("resolved config round-trips exactly") {
  RunConfig cfg;
  cfg.epochs = 3;
  cfg.lr = 0.0123456789012345;
  cfg.basis_seed = 9999999999ull;
  cfg.diversity_include_translation = true;
  cfg.wall_spacing = 0.3;
  const std::string path =
      (std::filesystem::temp_directory_path() / "proxgen_test_cfg.cfg").string();
  save_resolved_config(cfg, path);
  const RunConfig back = load_config(path);
  CHECK(back.epochs == cfg.epochs);
  CHECK(back.lr == cfg.lr);  // %.17g writes doubles losslessly
  CHECK(back.basis_seed == cfg.basis_seed);
  CHECK(back.diversity_include_translation == cfg.diversity_include_translation);
  CHECK(back.wall_spacing == cfg.wall_spacing);
  CHECK(back.n_basis == cfg.n_basis);
  std::filesystem::remove(path);

  CHECK_THROWS_AS(load_config("/nonexistent/config.cfg"), IoError);
}

TEST_CASE("converters map the grouped settings onto the module configs") {
  RunConfig cfg;
  cfg.n_basis = 64;
  cfg.basis_seed = 3;
  cfg.room_extent = 5.0;
  cfg.furniture_count = 2;
  cfg.train_scenes = 4;
  cfg.test_scenes = 2;
  cfg.placements_per_scene = 6;
  cfg.test_placements_per_scene = 3;
  cfg.augmentations = 2;
  cfg.data_seed = 77;
  cfg.cage_edge = 2.5;
  cfg.wall_spacing = 0.5;
  cfg.h1 = 32;
  cfg.h2 = 16;
  cfg.dz = 4;
  cfg.epochs = 9;
  cfg.batch_size = 5;
  cfg.lr = 0.01;
  cfg.alpha1 = 0.9;
  cfg.alpha2 = 0.002;
  cfg.alpha3 = 0.003;
  cfg.gate_fraction = 0.5;
  cfg.weight_seed = 21;
  cfg.shuffle_seed = 22;
  cfg.contact_sigma = 0.1;
  cfg.lambda1 = 1;
  cfg.lambda2 = 2;
  cfg.lambda3 = 3;
  cfg.lambda4 = 4;
  cfg.lambda5 = 5;
  cfg.opt_steps = 11;
  cfg.opt_step_size = 0.02;

  const DataGenConfig d = cfg.data_config();
  CHECK(d.n_basis == 64);
  CHECK(d.basis_seed == 3);
  CHECK(d.room_extent == 5.0);
  CHECK(d.furniture_count == 2);
  CHECK(d.train_scenes == 4);
  CHECK(d.test_scenes == 2);
  CHECK(d.placements_per_scene == 6);
  CHECK(d.test_placements_per_scene == 3);
  CHECK(d.augmentations == 2);
  CHECK(d.data_seed == 77);
  CHECK(d.cage_edge == 2.5);
  CHECK(d.wall_spacing == 0.5);

  const NetArch a = cfg.net_arch();
  CHECK(a.n == 64);
  CHECK(a.h1 == 32);
  CHECK(a.h2 == 16);
  CHECK(a.dz == 4);
  CHECK(a.v == 642);

  const TrainConfig t = cfg.train_config();
  CHECK(t.epochs == 9);
  CHECK(t.batch_size == 5);
  CHECK(t.lr == 0.01);
  CHECK(t.weights.alpha1 == 0.9);
  CHECK(t.weights.alpha2 == 0.002);
  CHECK(t.weights.alpha3 == 0.003);
  CHECK(t.gate_fraction == 0.5);
  CHECK(t.weight_seed == 21);
  CHECK(t.shuffle_seed == 22);
  CHECK(t.weights.contact_sigma == 0.1);

  const OptimConfig o = cfg.optim_config(OptimVariant::SimOptim);
  CHECK(o.variant == OptimVariant::SimOptim);
  CHECK(o.lambda1 == 1);
  CHECK(o.lambda2 == 2);
  CHECK(o.lambda3 == 3);
  CHECK(o.lambda4 == 4);
  CHECK(o.lambda5 == 5);
  CHECK(o.steps == 11);
  CHECK(o.step_size == 0.02);
  CHECK(o.contact_sigma == 0.1);
}
