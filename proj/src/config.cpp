#include "proxgen/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <variant>
#include <vector>

#include "proxgen/binio.hpp"
#include "proxgen/errors.hpp"

namespace proxgen {
namespace {

using Member = std::variant<int RunConfig::*, double RunConfig::*, std::uint64_t RunConfig::*,
                            bool RunConfig::*>;

struct Key {
  const char* name;
  Member member;
};

const std::vector<Key>& key_table() {
  static const std::vector<Key> keys = {
      {"alpha1", &RunConfig::alpha1},
      {"alpha2", &RunConfig::alpha2},
      {"alpha3", &RunConfig::alpha3},
      {"augmentations", &RunConfig::augmentations},
      {"basis_seed", &RunConfig::basis_seed},
      {"batch_size", &RunConfig::batch_size},
      {"cage_edge", &RunConfig::cage_edge},
      {"contact_sigma", &RunConfig::contact_sigma},
      {"data_seed", &RunConfig::data_seed},
      {"diversity_include_translation", &RunConfig::diversity_include_translation},
      {"dz", &RunConfig::dz},
      {"epochs", &RunConfig::epochs},
      {"furniture_count", &RunConfig::furniture_count},
      {"gate_fraction", &RunConfig::gate_fraction},
      {"h1", &RunConfig::h1},
      {"h2", &RunConfig::h2},
      {"kmeans_k", &RunConfig::kmeans_k},
      {"kmeans_seed", &RunConfig::kmeans_seed},
      {"lambda1", &RunConfig::lambda1},
      {"lambda2", &RunConfig::lambda2},
      {"lambda3", &RunConfig::lambda3},
      {"lambda4", &RunConfig::lambda4},
      {"lambda5", &RunConfig::lambda5},
      {"lr", &RunConfig::lr},
      {"n_basis", &RunConfig::n_basis},
      {"opt_step_size", &RunConfig::opt_step_size},
      {"opt_steps", &RunConfig::opt_steps},
      {"placements_per_scene", &RunConfig::placements_per_scene},
      {"room_extent", &RunConfig::room_extent},
      {"shuffle_seed", &RunConfig::shuffle_seed},
      {"test_placements_per_scene", &RunConfig::test_placements_per_scene},
      {"test_scenes", &RunConfig::test_scenes},
      {"train_scenes", &RunConfig::train_scenes},
      {"wall_spacing", &RunConfig::wall_spacing},
      {"weight_seed", &RunConfig::weight_seed},
  };
  return keys;
}

std::string trim(const std::string& s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

[[noreturn]] void bad_value(const std::string& origin, int line, const std::string& key) {
  throw ParseError(origin + ":" + std::to_string(line) + ": bad value for " + key);
}

void assign(RunConfig* cfg, const Key& key, const std::string& raw, const std::string& origin,
            int line) {
  std::size_t used = 0;
  try {
    if (auto* p = std::get_if<int RunConfig::*>(&key.member)) {
      const long long v = std::stoll(raw, &used);
      if (used != raw.size()) bad_value(origin, line, key.name);
      cfg->**p = int(v);
    } else if (auto* p = std::get_if<double RunConfig::*>(&key.member)) {
      cfg->**p = std::stod(raw, &used);
      if (used != raw.size()) bad_value(origin, line, key.name);
    } else if (auto* p = std::get_if<std::uint64_t RunConfig::*>(&key.member)) {
      cfg->**p = std::stoull(raw, &used);
      if (used != raw.size()) bad_value(origin, line, key.name);
    } else {
      auto* b = std::get_if<bool RunConfig::*>(&key.member);
      if (raw == "0" || raw == "false")
        cfg->**b = false;
      else if (raw == "1" || raw == "true")
        cfg->**b = true;
      else
        bad_value(origin, line, key.name);
    }
  } catch (const std::invalid_argument&) {
    bad_value(origin, line, key.name);
  } catch (const std::out_of_range&) {
    bad_value(origin, line, key.name);
  }
}

std::string format_value(const RunConfig& cfg, const Member& member) {
  char buf[64];
  if (auto* p = std::get_if<int RunConfig::*>(&member)) {
    std::snprintf(buf, sizeof buf, "%d", cfg.*(*p));
  } else if (auto* p = std::get_if<double RunConfig::*>(&member)) {
    std::snprintf(buf, sizeof buf, "%.17g", cfg.*(*p));
  } else if (auto* p = std::get_if<std::uint64_t RunConfig::*>(&member)) {
    std::snprintf(buf, sizeof buf, "%llu", static_cast<unsigned long long>(cfg.*(*p)));
  } else {
    auto* b = std::get_if<bool RunConfig::*>(&member);
    std::snprintf(buf, sizeof buf, "%d", cfg.*(*b) ? 1 : 0);
  }
  return buf;
}

}  // namespace

RunConfig parse_config_text(const std::string& text, const std::string& origin) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError(origin + ":" + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ParseError(origin + ":" + std::to_string(lineno) + ": expected key = value");
    const auto& keys = key_table();
    auto it = std::find_if(keys.begin(), keys.end(),
                           [&](const Key& k) { return key == k.name; });
    if (it == keys.end())
      throw ValidationError(origin + ":" + std::to_string(lineno) + ": unknown key " + key);
    assign(&cfg, *it, value, origin, lineno);
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open for reading: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path);
}

void save_resolved_config(const RunConfig& cfg, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  for (const Key& k : key_table()) out << k.name << " = " << format_value(cfg, k.member) << "\n";
  if (!out.flush()) throw IoError("write failed: " + path);
}

DataGenConfig RunConfig::data_config() const {
  DataGenConfig d;
  d.n_basis = n_basis;
  d.basis_seed = basis_seed;
  d.room_extent = room_extent;
  d.furniture_count = furniture_count;
  d.train_scenes = train_scenes;
  d.test_scenes = test_scenes;
  d.placements_per_scene = placements_per_scene;
  d.test_placements_per_scene = test_placements_per_scene;
  d.augmentations = augmentations;
  d.data_seed = data_seed;
  d.cage_edge = cage_edge;
  d.wall_spacing = wall_spacing;
  return d;
}

NetArch RunConfig::net_arch() const {
  NetArch a;
  a.n = n_basis;
  a.h1 = h1;
  a.h2 = h2;
  a.dz = dz;
  return a;
}

TrainConfig RunConfig::train_config() const {
  TrainConfig t;
  t.arch = net_arch();
  t.epochs = epochs;
  t.batch_size = batch_size;
  t.lr = lr;
  t.weights.alpha1 = alpha1;
  t.weights.alpha2 = alpha2;
  t.weights.alpha3 = alpha3;
  t.weights.contact_sigma = contact_sigma;
  t.gate_fraction = gate_fraction;
  t.weight_seed = weight_seed;
  t.shuffle_seed = shuffle_seed;
  return t;
}

OptimConfig RunConfig::optim_config(OptimVariant variant) const {
  OptimConfig o;
  o.variant = variant;
  o.lambda1 = lambda1;
  o.lambda2 = lambda2;
  o.lambda3 = lambda3;
  o.lambda4 = lambda4;
  o.lambda5 = lambda5;
  o.steps = opt_steps;
  o.step_size = opt_step_size;
  o.contact_sigma = contact_sigma;
  return o;
}

}  // namespace proxgen
