#include "proxgen/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>

#include "proxgen/binio.hpp"
#include "proxgen/errors.hpp"
#include "proxgen/losses.hpp"
#include "proxgen/rng.hpp"

namespace proxgen {
namespace {

constexpr char kDatasetMagic[4] = {'P', 'G', 'D', 'S'};
constexpr std::uint32_t kDatasetVersion = 1;
constexpr double kFloorSpacing = 0.25;
constexpr double kBoxSpacing = 0.12;
constexpr double kGroundZ = 0.0;
constexpr double kCageHeight = 1.0;  // cage center above the ground
constexpr double kCageSlack = 1e-9;  // absorbs FK rounding for vertices exactly on a face

// Inclusive grid tessellation of one rectangle patch. `at` maps (u, v) grid
// coordinates to a world position.
template <class F>
void add_patch(TriMesh* mesh, double u_len, double v_len, double spacing, bool flip, F at) {
  const int su = std::max(1, int(std::lround(u_len / spacing)));
  const int sv = std::max(1, int(std::lround(v_len / spacing)));
  const int base = int(mesh->vertices.size());
  for (int i = 0; i <= su; ++i)
    for (int j = 0; j <= sv; ++j)
      mesh->vertices.push_back(at(double(i) / su, double(j) / sv));
  auto id = [&](int i, int j) { return base + i * (sv + 1) + j; };
  for (int i = 0; i < su; ++i)
    for (int j = 0; j < sv; ++j) {
      int a = id(i, j), b = id(i + 1, j), c = id(i + 1, j + 1), d = id(i, j + 1);
      if (flip) std::swap(b, d);
      mesh->faces.push_back({a, b, c});
      mesh->faces.push_back({a, c, d});
    }
}

void add_box_mesh(TriMesh* mesh, const BoxSpec& box, double spacing) {
  const Vec3 he = box.half_extents;
  auto world = [&](double lx, double ly, double lz) {
    return box.center + rotate_z(box.yaw, Vec3(lx, ly, lz));
  };
  // top (+z)
  add_patch(mesh, 2 * he.x(), 2 * he.y(), spacing, false, [&](double u, double v) {
    return world(-he.x() + 2 * he.x() * u, -he.y() + 2 * he.y() * v, he.z());
  });
  // +x / -x sides
  add_patch(mesh, 2 * he.y(), 2 * he.z(), spacing, false, [&](double u, double v) {
    return world(he.x(), -he.y() + 2 * he.y() * u, -he.z() + 2 * he.z() * v);
  });
  add_patch(mesh, 2 * he.y(), 2 * he.z(), spacing, true, [&](double u, double v) {
    return world(-he.x(), -he.y() + 2 * he.y() * u, -he.z() + 2 * he.z() * v);
  });
  // +y / -y sides
  add_patch(mesh, 2 * he.x(), 2 * he.z(), spacing, true, [&](double u, double v) {
    return world(-he.x() + 2 * he.x() * u, he.y(), -he.z() + 2 * he.z() * v);
  });
  add_patch(mesh, 2 * he.x(), 2 * he.z(), spacing, false, [&](double u, double v) {
    return world(-he.x() + 2 * he.x() * u, -he.y(), -he.z() + 2 * he.z() * v);
  });
}

// Conservative axis-aligned footprint half-extents of a yawed box.
void box_aabb(const BoxSpec& b, double* ax, double* ay) {
  const double c = std::abs(std::cos(b.yaw)), s = std::abs(std::sin(b.yaw));
  *ax = b.half_extents.x() * c + b.half_extents.y() * s;
  *ay = b.half_extents.x() * s + b.half_extents.y() * c;
}

double min_sdf_over(const SdfField& sdf, const std::vector<Vec3>& verts,
                    const std::vector<int>& subset) {
  double m = std::numeric_limits<double>::infinity();
  for (int i : subset) m = std::min(m, sdf.eval(verts[i]));
  return m;
}

std::vector<int> segment_vertex_ids(const BodyTemplate& tmpl, const std::string& name) {
  std::vector<int> ids;
  for (const auto& seg : tmpl.segments())
    if (seg.name == name)
      for (int i = 0; i < seg.vertex_count; ++i) ids.push_back(seg.first_vertex + i);
  return ids;
}

}  // namespace

SynthScene generate_scene(std::uint64_t seed, double room_extent, int furniture_count) {
  if (room_extent < 3.0) throw ValidationError("generate_scene: room extent must be >= 3 m");
  if (furniture_count < 0) throw ValidationError("generate_scene: negative furniture count");
  Rng rng(Rng::derive(seed, 1));
  std::vector<BoxSpec> boxes;
  std::vector<int> seats;
  const double half = room_extent / 2.0;
  for (int k = 0; k < furniture_count; ++k) {
    const bool is_seat = (k % 2 == 0);
    bool placed = false;
    for (int attempt = 0; attempt < 100 && !placed; ++attempt) {
      BoxSpec b;
      double height;
      if (is_seat) {
        b.half_extents.x() = rng.uniform(0.20, 0.25);
        b.half_extents.y() = rng.uniform(0.20, 0.25);
        height = rng.uniform(0.40, 0.50);
      } else {
        b.half_extents.x() = rng.uniform(0.30, 0.60);
        b.half_extents.y() = rng.uniform(0.30, 0.50);
        height = rng.uniform(0.70, 0.80);
      }
      b.half_extents.z() = height / 2.0;
      b.yaw = rng.uniform(0.0, 2.0 * M_PI);
      b.center.z() = height / 2.0;  // resting on the floor
      double ax, ay;
      box_aabb(b, &ax, &ay);
      const double lx = half - ax - 0.2, ly = half - ay - 0.2;
      if (lx <= 0.0 || ly <= 0.0) continue;
      b.center.x() = rng.uniform(-lx, lx);
      b.center.y() = rng.uniform(-ly, ly);
      bool overlap = false;
      for (const BoxSpec& o : boxes) {
        double ox, oy;
        box_aabb(o, &ox, &oy);
        if (std::abs(b.center.x() - o.center.x()) < ax + ox + 0.15 &&
            std::abs(b.center.y() - o.center.y()) < ay + oy + 0.15) {
          overlap = true;
          break;
        }
      }
      if (overlap) continue;
      if (is_seat) seats.push_back(int(boxes.size()));
      boxes.push_back(b);
      placed = true;
    }
    if (!placed)
      throw PlacementError("generate_scene: cannot place furniture without overlap");
  }

  TriMesh mesh;
  add_patch(&mesh, room_extent, room_extent, kFloorSpacing, false, [&](double u, double v) {
    return Vec3(-half + room_extent * u, -half + room_extent * v, kGroundZ);
  });
  for (const BoxSpec& b : boxes) add_box_mesh(&mesh, b, kBoxSpacing);
  mesh.validate();

  return SynthScene{seed,  room_extent, boxes, seats, std::move(mesh),
                    SdfField::analytic(boxes, kGroundZ)};
}

bool placement_valid(const SynthScene& scene, const BodyMesh& body, PoseCategory category,
                     std::string* why) {
  auto fail = [&](const std::string& m) {
    if (why) *why = m;
    return false;
  };
  const double half = scene.room_extent / 2.0;
  for (const Vec3& v : body.vertices)
    if (std::abs(v.x()) > half || std::abs(v.y()) > half) return fail("outside room");

  const auto coll = collision_penalty(body.vertices, scene.sdf, false);
  if (!(coll.value < 1e-4)) return fail("collision " + std::to_string(coll.value));

  const BodyTemplate& tmpl = *body.tmpl;
  const double lo = -1e-6, hi = 0.02;
  switch (category) {
    case PoseCategory::Standing: {
      const double feet = min_sdf_over(scene.sdf, body.vertices, tmpl.feet_vertices());
      if (feet < lo || feet > hi) return fail("feet support " + std::to_string(feet));
      break;
    }
    case PoseCategory::Sitting: {
      const double feet = min_sdf_over(scene.sdf, body.vertices, tmpl.feet_vertices());
      if (feet < lo || feet > hi) return fail("feet support " + std::to_string(feet));
      double pelvis = std::numeric_limits<double>::infinity();
      for (int i : segment_vertex_ids(tmpl, "pelvis"))
        pelvis = std::min(pelvis, std::abs(scene.sdf.eval(body.vertices[i])));
      if (pelvis > hi) return fail("pelvis support " + std::to_string(pelvis));
      break;
    }
    case PoseCategory::Lying: {
      double m = std::numeric_limits<double>::infinity();
      for (const Vec3& v : body.vertices) m = std::min(m, scene.sdf.eval(v));
      if (m < lo || m > hi) return fail("body support " + std::to_string(m));
      break;
    }
  }
  if (why) why->clear();
  return true;
}

BodyParams place_body(const SynthScene& scene, PoseCategory category, std::uint64_t seed) {
  auto tmpl = BodyTemplate::standard();
  if (category == PoseCategory::Sitting && scene.seat_boxes.empty())
    throw PlacementError("place_body: no seat in scene");
  Rng rng(Rng::derive(seed, 2));
  const double half = scene.room_extent / 2.0;
  std::string why;
  for (int attempt = 0; attempt < 100; ++attempt) {
    BodyParams p = sample_pose(category, Rng::derive(seed, 100 + attempt), tmpl);
    if (category == PoseCategory::Sitting) {
      const BoxSpec& seat =
          scene.boxes[scene.seat_boxes[rng.uniform_index(scene.seat_boxes.size())]];
      const double top_z = seat.center.z() + seat.half_extents.z();
      const double side = rng.uniform() < 0.5 ? 1.0 : -1.0;
      const double lx = side * (seat.half_extents.x() - 0.07);
      const double wy = std::max(0.0, seat.half_extents.y() - 0.10);
      const double ly = rng.uniform(-wy, wy);
      const double c = std::cos(seat.yaw), s = std::sin(seat.yaw);
      p.translation.x() = seat.center.x() + c * lx - s * ly;
      p.translation.y() = seat.center.y() + s * lx + c * ly;
      p.translation.z() += top_z - 0.45;  // pelvis bottom from nominal onto this seat
      p.yaw = seat.yaw + (side > 0 ? 0.0 : M_PI) + rng.uniform(-0.15, 0.15);
      solve_sitting_legs(*tmpl, hip_joint_height(p), rng.normal(0.0, 0.05),
                         rng.normal(0.0, 0.05), &p);
    } else {
      const double margin = (category == PoseCategory::Lying) ? 1.1 : 0.6;
      const double lim = half - margin;
      if (lim <= 0.0) throw PlacementError("place_body: room too small for category");
      p.translation.x() = rng.uniform(-lim, lim);
      p.translation.y() = rng.uniform(-lim, lim);
      p.yaw = rng.uniform(0.0, 2.0 * M_PI);
    }
    const BodyMesh mesh = forward(tmpl, p);
    if (placement_valid(scene, mesh, category, &why)) return p;
  }
  throw PlacementError("place_body: no valid placement after 100 attempts (" + why + ")");
}

TrainSample extract_sample(const SynthScene& scene, const BodyParams& params,
                           const BasisPointSet& basis, std::uint64_t aug_seed,
                           double cage_edge, double wall_spacing) {
  auto tmpl = BodyTemplate::standard();
  const BodyMesh body = forward(tmpl, params);
  Rng rng(aug_seed);
  const double world_rot = rng.uniform(0.0, 2.0 * M_PI);

  TriMesh rot_scene = scene.mesh;
  for (Vec3& v : rot_scene.vertices) v = rotate_z(world_rot, v);
  std::vector<Vec3> rot_body(body.vertices.size());
  Vec3 centroid = Vec3::Zero();
  for (size_t i = 0; i < body.vertices.size(); ++i) {
    rot_body[i] = rotate_z(world_rot, body.vertices[i]);
    centroid += rot_body[i];
  }
  centroid /= double(rot_body.size());
  Vec3 lo = rot_body[0], hi = rot_body[0];
  for (const Vec3& v : rot_body) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }

  const double r = cage_edge / 2.0;
  const double cz = kGroundZ + kCageHeight;
  if (lo.z() < cz - r - kCageSlack || hi.z() > cz + r + kCageSlack)
    throw PlacementError("extract_sample: body taller than the cage");

  for (int attempt = 0; attempt < 20; ++attempt) {
    // shift range: inside [-r/3, r/3] and keeping the body inside the cage
    Vec3 cage_center(0, 0, cz);
    bool feasible = true;
    for (int a = 0; a < 2 && feasible; ++a) {
      const double d_lo = std::max(-r / 3.0, hi[a] - centroid[a] - r);
      const double d_hi = std::min(r / 3.0, lo[a] - centroid[a] + r);
      if (d_lo > d_hi) {
        feasible = false;
        break;
      }
      cage_center[a] = centroid[a] + rng.uniform(d_lo, d_hi);
    }
    if (!feasible) break;
    bool inside = true;
    for (const Vec3& v : rot_body)
      if ((v - cage_center).cwiseAbs().maxCoeff() > r + kCageSlack) {
        inside = false;
        break;
      }
    if (!inside) continue;

    LocalScene local = crop_local_scene(rot_scene, cage_center, cage_edge, wall_spacing);
    const double sphere_rot = rng.uniform(0.0, 2.0 * M_PI);
    const Vec3 sphere_shift(rng.uniform(-0.05, 0.05), rng.uniform(-0.05, 0.05),
                            rng.uniform(-0.05, 0.05));
    local.transform = CageTransform::make(cage_center, cage_edge, sphere_rot, sphere_shift);
    const NormalizedScene norm = to_unit_sphere(local);
    const SceneEncoding enc = encode_scene(basis, norm);

    const int n = basis.n();
    const int v = int(rot_body.size());
    TrainSample sample;
    sample.scene_seed = scene.seed;
    sample.world_rot = world_rot;
    sample.transform = local.transform;
    sample.scene_bps.resize(3 * n);
    sample.scene_feature = enc.scene_feature.cast<float>();
    for (int i = 0; i < n; ++i)
      for (int c = 0; c < 3; ++c) sample.scene_bps[3 * i + c] = float(enc.scene_bps[i][c]);
    sample.body_vertices.resize(3 * v);
    for (int k = 0; k < v; ++k) {
      const Vec3 q = local.transform.world_to_cage(rot_body[k]);
      for (int c = 0; c < 3; ++c) sample.body_vertices[3 * k + c] = float(q[c]);
    }
    // body feature from the f32-rounded coordinates, so stored arrays are
    // self-consistent under re-encoding
    SceneEncoding rounded;
    rounded.scene_bps.resize(n);
    for (int i = 0; i < n; ++i)
      rounded.scene_bps[i] = Vec3(sample.scene_bps[3 * i], sample.scene_bps[3 * i + 1],
                                  sample.scene_bps[3 * i + 2]);
    std::vector<Vec3> body32(v);
    for (int k = 0; k < v; ++k)
      body32[k] = Vec3(sample.body_vertices[3 * k], sample.body_vertices[3 * k + 1],
                       sample.body_vertices[3 * k + 2]);
    sample.body_feature = encode_body(rounded, body32).values.cast<float>();
    return sample;
  }
  throw PlacementError("extract_sample: body does not fit inside the cage");
}

void Dataset::save(const std::string& path) const {
  BinWriter w(path);
  w.write_magic(kDatasetMagic);
  w.write<std::uint32_t>(kDatasetVersion);
  w.write<std::uint32_t>(n);
  w.write<std::uint32_t>(v);
  w.write<std::uint64_t>(basis_seed);
  w.write<double>(room_extent);
  w.write<std::uint32_t>(furniture_count);
  w.write<std::uint32_t>(std::uint32_t(samples.size()));
  for (const TrainSample& s : samples) {
    w.write<std::uint64_t>(s.scene_seed);
    w.write<std::uint8_t>(std::uint8_t(s.category));
    w.write<double>(s.world_rot);
    for (int c = 0; c < 3; ++c) w.write<double>(s.transform.cage_center[c]);
    w.write<double>(s.transform.cage_edge);
    w.write<double>(s.transform.scale);
    w.write<double>(s.transform.rotation);
    for (int c = 0; c < 3; ++c) w.write<double>(s.transform.shift[c]);
    w.write_array(s.scene_bps.data(), size_t(s.scene_bps.size()));
    w.write_array(s.scene_feature.data(), size_t(s.scene_feature.size()));
    w.write_array(s.body_vertices.data(), size_t(s.body_vertices.size()));
    w.write_array(s.body_feature.data(), size_t(s.body_feature.size()));
  }
  w.close();
}

Dataset Dataset::load(const std::string& path) {
  BinReader r(path);
  r.expect_magic(kDatasetMagic, "dataset");
  if (r.read<std::uint32_t>() != kDatasetVersion)
    throw IoError(path + ": unsupported dataset version");
  Dataset d;
  d.n = r.read<std::uint32_t>();
  d.v = r.read<std::uint32_t>();
  d.basis_seed = r.read<std::uint64_t>();
  d.room_extent = r.read<double>();
  d.furniture_count = r.read<std::uint32_t>();
  const std::uint32_t count = r.read<std::uint32_t>();
  d.samples.resize(count);
  for (TrainSample& s : d.samples) {
    s.scene_seed = r.read<std::uint64_t>();
    const std::uint8_t cat = r.read<std::uint8_t>();
    if (cat > 2) throw IoError(path + ": bad category value");
    s.category = PoseCategory(cat);
    s.world_rot = r.read<double>();
    for (int c = 0; c < 3; ++c) s.transform.cage_center[c] = r.read<double>();
    s.transform.cage_edge = r.read<double>();
    s.transform.scale = r.read<double>();
    s.transform.rotation = r.read<double>();
    for (int c = 0; c < 3; ++c) s.transform.shift[c] = r.read<double>();
    s.scene_bps.resize(3 * d.n);
    s.scene_feature.resize(d.n);
    s.body_vertices.resize(3 * d.v);
    s.body_feature.resize(d.n);
    r.read_array(s.scene_bps.data(), size_t(3 * d.n));
    r.read_array(s.scene_feature.data(), size_t(d.n));
    r.read_array(s.body_vertices.data(), size_t(3 * d.v));
    r.read_array(s.body_feature.data(), size_t(d.n));
  }
  return d;
}

void build_dataset(const DataGenConfig& cfg, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  const BasisPointSet basis = make_basis(cfg.n_basis, cfg.basis_seed);
  auto tmpl = BodyTemplate::standard();

  auto build_split = [&](int scenes, int placements, std::uint64_t label_base) {
    Dataset d;
    d.n = std::uint32_t(cfg.n_basis);
    d.v = std::uint32_t(tmpl->vertex_count());
    d.basis_seed = cfg.basis_seed;
    d.room_extent = cfg.room_extent;
    d.furniture_count = std::uint32_t(cfg.furniture_count);
    for (int si = 0; si < scenes; ++si) {
      const std::uint64_t scene_seed = Rng::derive(cfg.data_seed, label_base + si);
      const SynthScene scene = generate_scene(scene_seed, cfg.room_extent, cfg.furniture_count);
      for (int pi = 0; pi < placements; ++pi) {
        const auto category = PoseCategory(pi % 3);
        BodyParams placed;
        bool ok = false;
        std::string err;
        for (int retry = 0; retry < 5 && !ok; ++retry) {
          try {
            placed = place_body(scene, category, Rng::derive(scene_seed, 10000 + pi * 8 + retry));
            ok = true;
          } catch (const PlacementError& e) {
            err = e.what();
          }
        }
        if (!ok)
          throw PlacementError("build_dataset: scene " + std::to_string(scene_seed) + ": " + err);
        for (int a = 0; a < cfg.augmentations; ++a) {
          TrainSample s;
          ok = false;
          for (int retry = 0; retry < 3 && !ok; ++retry) {
            try {
              s = extract_sample(scene, placed, basis,
                                 Rng::derive(scene_seed, 20000 + pi * 64 + a * 8 + retry),
                                 cfg.cage_edge, cfg.wall_spacing);
              ok = true;
            } catch (const PlacementError& e) {
              err = e.what();
            }
          }
          if (!ok) throw PlacementError("build_dataset: augmentation failed: " + err);
          s.category = category;
          d.samples.push_back(std::move(s));
        }
      }
    }
    return d;
  };

  const Dataset train = build_split(cfg.train_scenes, cfg.placements_per_scene, 0);
  const Dataset test = build_split(cfg.test_scenes, cfg.test_placements_per_scene, 1000000);

  std::set<std::uint64_t> train_seeds, test_seeds;
  for (const auto& s : train.samples) train_seeds.insert(s.scene_seed);
  for (const auto& s : test.samples) test_seeds.insert(s.scene_seed);
  for (std::uint64_t s : test_seeds)
    if (train_seeds.count(s))
      throw ValidationError("build_dataset: train/test scene seeds overlap");

  train.save((std::filesystem::path(out_dir) / "train.pgds").string());
  test.save((std::filesystem::path(out_dir) / "test.pgds").string());
}

const SceneCache::Entry& SceneCache::get(std::uint64_t scene_seed) {
  auto it = entries_.find(scene_seed);
  if (it == entries_.end()) {
    SynthScene scene = generate_scene(scene_seed, extent_, furniture_);
    PointIndex index(scene.mesh.vertices);
    it = entries_.emplace(scene_seed, Entry{std::move(scene), std::move(index)}).first;
  }
  return it->second;
}

}  // namespace proxgen
