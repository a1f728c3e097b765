#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#ifndef PROXGEN_BIN
#error "PROXGEN_BIN must point at the command-line binary"
#endif

namespace {

namespace fs = std::filesystem;

int run(const std::string& args, const std::string& log = "/dev/null") {
  const std::string cmd = std::string(PROXGEN_BIN) + " " + args + " > " + log + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

struct TempTree {
  fs::path root;
  TempTree() {
    root = fs::temp_directory_path() / "proxgen_cli_test";
    fs::remove_all(root);
    fs::create_directories(root);
  }
  ~TempTree() { fs::remove_all(root); }
  std::string operator/(const std::string& leaf) const { return (root / leaf).string(); }
};

const char* kTinyCfg =
    "n_basis = 48\n"
    "h1 = 24\n"
    "h2 = 12\n"
    "dz = 4\n"
    "train_scenes = 2\n"
    "test_scenes = 1\n"
    "placements_per_scene = 2\n"
    "test_placements_per_scene = 1\n"
    "augmentations = 1\n"
    "epochs = 2\n"
    "batch_size = 4\n"
    "opt_steps = 15\n"
    "kmeans_k = 2\n";

}  // namespace

TEST_CASE("exit codes: help is 0, usage errors are 2, runtime failures are 1") {
  CHECK(run("--help") == 0);
  CHECK(run("generate --help") == 0);
  CHECK(run("") == 2);                       // missing subcommand
  CHECK(run("no-such-command") == 2);        // unknown subcommand
  CHECK(run("gen-data") == 2);               // missing --out
  CHECK(run("generate") == 2);               // missing positional + options
  TempTree tmp;
  CHECK(run("train /does/not/exist.pgds --out " + (tmp / "run")) == 1);
  CHECK(run("gen-data --config /does/not/exist.cfg --out " + (tmp / "d")) == 1);
  CHECK(run("eval /does/not/exist_dir") == 1);
}

TEST_CASE("full pipeline: gen-data, train, generate, optimize, eval, export-viz") {
  TempTree tmp;
  const std::string cfg = tmp / "tiny.cfg";
  {
    std::ofstream out(cfg);
    out << kTinyCfg;
  }

  // data generation writes both splits and a resolved config sidecar
  REQUIRE(run("gen-data --config " + cfg + " --out " + (tmp / "data"),
              tmp / "gen-data.log") == 0);
  CHECK(fs::exists(tmp / "data/train.pgds"));
  CHECK(fs::exists(tmp / "data/test.pgds"));
  const std::string resolved = slurp(tmp / "data/resolved.cfg");
  CHECK(resolved.find("n_basis = 48") != std::string::npos);
  CHECK(resolved.find("epochs = 2") != std::string::npos);

  // training accepts either the dataset file or its directory
  REQUIRE(run("train " + (tmp / "data") + " --config " + cfg + " --out " + (tmp / "run"),
              tmp / "train.log") == 0);
  CHECK(fs::exists(tmp / "run/checkpoint.pgck"));
  const std::string metrics = slurp(tmp / "run/metrics.csv");
  CHECK(metrics.find("epoch,rec_xs,rec_xb,rec_vb,kl_raw,kl_psi,collision,contact,total,"
                     "wall_s") == 0);
  CHECK(fs::exists(tmp / "run/resolved.cfg"));

  // sampling: raw then adversarial refinement
  REQUIRE(run("generate " + (tmp / "run/checkpoint.pgck") + " --scene synth:5 --config " +
                  cfg + " --out " + (tmp / "raw") + " --count 3 --seed 2 --variant raw",
              tmp / "generate.log") == 0);
  CHECK(fs::exists(tmp / "raw/sample_000.pgsm"));
  CHECK(fs::exists(tmp / "raw/sample_002.obj"));
  CHECK(fs::exists(tmp / "raw/manifest.csv"));

  REQUIRE(run("generate " + (tmp / "run/checkpoint.pgck") + " --scene synth:5 --config " +
                  cfg + " --out " + (tmp / "adv") + " --count 2 --seed 2 --variant advoptim",
              tmp / "adv.log") == 0);
  const std::string adv_log = slurp(tmp / "adv.log");
  CHECK(adv_log.find("advoptim") != std::string::npos);

  // refine one raw sample in place
  REQUIRE(run("optimize " + (tmp / "raw/sample_000.pgsm") + " --config " + cfg +
                  " --variant simoptim --out " + (tmp / "opt"),
              tmp / "optimize.log") == 0);
  CHECK(fs::exists(tmp / "opt/sample_000.pgsm"));
  // raw samples cannot be the target variant of a refinement
  CHECK(run("optimize " + (tmp / "raw/sample_000.pgsm") + " --config " + cfg +
            " --variant raw --out " + (tmp / "opt2")) == 1);

  // evaluation prints per-directory scores
  REQUIRE(run("eval " + (tmp / "adv") + " --config " + cfg, tmp / "eval.log") == 0);
  const std::string eval_log = slurp(tmp / "eval.log");
  CHECK(eval_log.find("non_collision") != std::string::npos);
  CHECK(eval_log.find("contact") != std::string::npos);

  // visualization export
  REQUIRE(run("export-viz " + (tmp / "adv/sample_000.pgsm") + " --out " + (tmp / "viz"),
              tmp / "viz.log") == 0);
  CHECK(fs::exists(tmp / "viz/sample_000_bps.ply"));
  CHECK(fs::exists(tmp / "viz/sample_000_body.ply"));
}
