#include "proxgen/mesh.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>

#include "proxgen/binio.hpp"

namespace proxgen {

void TriMesh::validate() const {
  const int n = int(vertices.size());
  for (size_t f = 0; f < faces.size(); ++f) {
    for (int k = 0; k < 3; ++k) {
      const int idx = faces[f][k];
      if (idx < 0 || idx >= n)
        throw ValidationError("face " + std::to_string(f) + " references vertex " +
                              std::to_string(idx) + " outside [0, " + std::to_string(n) + ")");
    }
  }
  if (!quality.empty() && quality.size() != vertices.size())
    throw ValidationError("quality channel has " + std::to_string(quality.size()) +
                          " entries for " + std::to_string(vertices.size()) + " vertices");
}

MeshFormat format_from_path(const std::string& path) {
  const auto dot = path.rfind('.');
  const std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
  if (ext == "obj") return MeshFormat::Obj;
  if (ext == "ply") return MeshFormat::Ply;
  throw ValidationError("cannot infer mesh format from extension: " + path);
}

namespace {

[[noreturn]] void parse_fail(const std::string& path, int line, const std::string& why) {
  throw ParseError(path + ":" + std::to_string(line) + ": " + why);
}

double parse_double(const std::string& tok, const std::string& path, int line) {
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end != tok.c_str() + tok.size()) parse_fail(path, line, "bad number '" + tok + "'");
  return v;
}

// OBJ face tokens may carry /texture/normal suffixes; only the vertex index
// matters here.
int parse_face_index(const std::string& tok, const std::string& path, int line) {
  char* end = nullptr;
  const long v = std::strtol(tok.c_str(), &end, 10);
  if (end == tok.c_str() || (*end != '\0' && *end != '/'))
    parse_fail(path, line, "bad face index '" + tok + "'");
  return int(v);
}

TriMesh load_obj(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open for reading: " + path);
  TriMesh mesh;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ss(line);
    std::string key;
    if (!(ss >> key) || key[0] == '#') continue;
    if (key == "v") {
      std::string xs, ys, zs;
      if (!(ss >> xs >> ys >> zs)) parse_fail(path, lineno, "vertex needs 3 coordinates");
      mesh.vertices.emplace_back(parse_double(xs, path, lineno), parse_double(ys, path, lineno),
                                 parse_double(zs, path, lineno));
    } else if (key == "f") {
      std::string a, b, c, extra;
      if (!(ss >> a >> b >> c)) parse_fail(path, lineno, "face needs 3 indices");
      if (ss >> extra) parse_fail(path, lineno, "only triangle faces are supported");
      mesh.faces.push_back({parse_face_index(a, path, lineno) - 1,
                            parse_face_index(b, path, lineno) - 1,
                            parse_face_index(c, path, lineno) - 1});
    } else if (key == "vn" || key == "vt" || key == "vp" || key == "o" || key == "g" ||
               key == "s" || key == "usemtl" || key == "mtllib" || key == "l") {
      // tolerated but unused
    } else {
      parse_fail(path, lineno, "unsupported directive '" + key + "'");
    }
  }
  mesh.validate();
  return mesh;
}

void save_obj(const TriMesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  char buf[128];
  for (const Vec3& v : mesh.vertices) {
    std::snprintf(buf, sizeof(buf), "v %.9g %.9g %.9g\n", v.x(), v.y(), v.z());
    out << buf;
  }
  for (const auto& f : mesh.faces) {
    std::snprintf(buf, sizeof(buf), "f %d %d %d\n", f[0] + 1, f[1] + 1, f[2] + 1);
    out << buf;
  }
  out.close();
  if (!out) throw IoError("write failed: " + path);
}

TriMesh load_ply(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path);
  std::string line;
  int lineno = 0;
  auto next_line = [&]() {
    if (!std::getline(in, line)) parse_fail(path, lineno, "truncated header");
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
  };

  if (next_line() != "ply") parse_fail(path, lineno, "not a ply file");
  size_t n_vertices = 0, n_faces = 0;
  bool has_quality = false;
  bool saw_format = false;
  std::vector<std::string> vertex_props;
  std::string current_element;
  while (next_line() != "end_header") {
    std::istringstream ss(line);
    std::string key;
    ss >> key;
    if (key == "comment") continue;
    if (key == "format") {
      std::string fmt, ver;
      ss >> fmt >> ver;
      if (fmt != "binary_little_endian" || ver != "1.0")
        parse_fail(path, lineno, "unsupported format '" + fmt + " " + ver + "'");
      saw_format = true;
    } else if (key == "element") {
      std::string name;
      size_t count = 0;
      ss >> name >> count;
      if (name == "vertex")
        n_vertices = count;
      else if (name == "face")
        n_faces = count;
      else
        parse_fail(path, lineno, "unsupported element '" + name + "'");
      current_element = name;
    } else if (key == "property") {
      if (current_element == "vertex") {
        std::string type, name;
        ss >> type >> name;
        if (type != "float") parse_fail(path, lineno, "vertex properties must be float");
        vertex_props.push_back(name);
      } else if (current_element == "face") {
        std::string list, ctype, itype, name;
        ss >> list >> ctype >> itype >> name;
        if (list != "list" || ctype != "uchar" || itype != "int" || name != "vertex_indices")
          parse_fail(path, lineno, "unsupported face property");
      } else {
        parse_fail(path, lineno, "property before element");
      }
    } else {
      parse_fail(path, lineno, "unsupported header line '" + line + "'");
    }
  }
  if (!saw_format) parse_fail(path, lineno, "missing format line");
  const bool xyz_only = vertex_props == std::vector<std::string>{"x", "y", "z"};
  has_quality = vertex_props == std::vector<std::string>{"x", "y", "z", "quality"};
  if (!xyz_only && !has_quality)
    parse_fail(path, lineno, "vertex layout must be x y z [quality]");

  TriMesh mesh;
  mesh.vertices.resize(n_vertices);
  if (has_quality) mesh.quality.resize(n_vertices);
  for (size_t i = 0; i < n_vertices; ++i) {
    float v[4];
    in.read(reinterpret_cast<char*>(v), has_quality ? 16 : 12);
    if (!in) throw ParseError(path + ": truncated vertex data");
    mesh.vertices[i] = Vec3(v[0], v[1], v[2]);
    if (has_quality) mesh.quality[i] = v[3];
  }
  mesh.faces.resize(n_faces);
  for (size_t i = 0; i < n_faces; ++i) {
    unsigned char n;
    in.read(reinterpret_cast<char*>(&n), 1);
    if (!in) throw ParseError(path + ": truncated face data");
    if (n != 3) throw ParseError(path + ": only triangle faces are supported");
    std::int32_t idx[3];
    in.read(reinterpret_cast<char*>(idx), 12);
    if (!in) throw ParseError(path + ": truncated face data");
    mesh.faces[i] = {idx[0], idx[1], idx[2]};
  }
  mesh.validate();
  return mesh;
}

void save_ply(const TriMesh& mesh, const std::string& path) {
  mesh.validate();
  const bool has_quality = !mesh.quality.empty();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  std::ostringstream header;
  header << "ply\nformat binary_little_endian 1.0\n"
         << "element vertex " << mesh.vertices.size() << "\n"
         << "property float x\nproperty float y\nproperty float z\n";
  if (has_quality) header << "property float quality\n";
  header << "element face " << mesh.faces.size() << "\n"
         << "property list uchar int vertex_indices\nend_header\n";
  out << header.str();
  for (size_t i = 0; i < mesh.vertices.size(); ++i) {
    float v[4] = {float(mesh.vertices[i].x()), float(mesh.vertices[i].y()),
                  float(mesh.vertices[i].z()), has_quality ? float(mesh.quality[i]) : 0.f};
    out.write(reinterpret_cast<const char*>(v), has_quality ? 16 : 12);
  }
  for (const auto& f : mesh.faces) {
    const unsigned char n = 3;
    const std::int32_t idx[3] = {f[0], f[1], f[2]};
    out.write(reinterpret_cast<const char*>(&n), 1);
    out.write(reinterpret_cast<const char*>(idx), 12);
  }
  out.close();
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace

TriMesh load_mesh(const std::string& path) { return load_mesh(path, format_from_path(path)); }

TriMesh load_mesh(const std::string& path, MeshFormat format) {
  return format == MeshFormat::Obj ? load_obj(path) : load_ply(path);
}

void save_mesh(const TriMesh& mesh, const std::string& path) {
  save_mesh(mesh, path, format_from_path(path));
}

void save_mesh(const TriMesh& mesh, const std::string& path, MeshFormat format) {
  if (format == MeshFormat::Obj)
    save_obj(mesh, path);
  else
    save_ply(mesh, path);
}

Vec3 rotate_z(double angle, const Vec3& p) {
  const double c = std::cos(angle), s = std::sin(angle);
  return Vec3(c * p.x() - s * p.y(), s * p.x() + c * p.y(), p.z());
}

CageTransform CageTransform::make(const Vec3& center, double edge, double rotation,
                                  const Vec3& shift) {
  if (!(edge > 0.0)) throw ValidationError("cage edge must be positive");
  CageTransform t;
  t.cage_center = center;
  t.cage_edge = edge;
  t.scale = 2.0 / (edge * std::sqrt(3.0));  // cage corners land on the unit sphere
  t.rotation = rotation;
  t.shift = shift;
  return t;
}

Vec3 CageTransform::world_to_cage(const Vec3& p) const { return scale * (p - cage_center); }

Vec3 CageTransform::cage_to_world(const Vec3& p) const { return p / scale + cage_center; }

Vec3 CageTransform::cage_to_sphere(const Vec3& p) const {
  const double c = std::cos(rotation), s = std::sin(rotation);
  return Vec3(c * p.x() - s * p.y(), s * p.x() + c * p.y(), p.z()) + shift;
}

Vec3 CageTransform::sphere_to_cage(const Vec3& p) const {
  const Vec3 q = p - shift;
  const double c = std::cos(rotation), s = std::sin(rotation);
  return Vec3(c * q.x() + s * q.y(), -s * q.x() + c * q.y(), q.z());
}

Vec3 CageTransform::world_to_sphere(const Vec3& p) const { return cage_to_sphere(world_to_cage(p)); }

Vec3 CageTransform::sphere_to_world(const Vec3& p) const { return cage_to_world(sphere_to_cage(p)); }

LocalScene crop_local_scene(const TriMesh& scene, const Vec3& cage_center, double cage_edge,
                            double wall_spacing) {
  if (!(wall_spacing > 0.0)) throw ValidationError("wall spacing must be positive");
  scene.validate();
  LocalScene local;
  local.transform = CageTransform::make(cage_center, cage_edge);

  const double h = cage_edge / 2.0;
  const Vec3 lo = cage_center - Vec3(h, h, h);
  const Vec3 hi = cage_center + Vec3(h, h, h);

  // Closed-box crop: vertices exactly on a face are kept.
  std::vector<int> remap(scene.vertices.size(), -1);
  for (size_t i = 0; i < scene.vertices.size(); ++i) {
    const Vec3& p = scene.vertices[i];
    const bool inside = p.x() >= lo.x() && p.x() <= hi.x() && p.y() >= lo.y() &&
                        p.y() <= hi.y() && p.z() >= lo.z() && p.z() <= hi.z();
    if (!inside) continue;
    remap[i] = int(local.cropped.vertices.size());
    local.cropped.vertices.push_back(p);
    if (!scene.quality.empty()) local.cropped.quality.push_back(scene.quality[i]);
  }
  for (const auto& f : scene.faces) {
    if (remap[f[0]] >= 0 && remap[f[1]] >= 0 && remap[f[2]] >= 0)
      local.cropped.faces.push_back({remap[f[0]], remap[f[1]], remap[f[2]]});
  }

  // Virtual cage walls: ceiling plus the four side faces, each an inclusive
  // regular grid. The floor face is left open so the ground plane of the
  // scene itself provides support. Shared edges are emitted once per face.
  const int steps = std::max(1, int(std::lround(cage_edge / wall_spacing)));
  const double pitch = cage_edge / steps;
  for (int ix = 0; ix <= steps; ++ix)
    for (int iy = 0; iy <= steps; ++iy)
      local.cage_points.emplace_back(lo.x() + ix * pitch, lo.y() + iy * pitch, hi.z());
  for (double x : {lo.x(), hi.x()})
    for (int iy = 0; iy <= steps; ++iy)
      for (int iz = 0; iz <= steps; ++iz)
        local.cage_points.emplace_back(x, lo.y() + iy * pitch, lo.z() + iz * pitch);
  for (double y : {lo.y(), hi.y()})
    for (int ix = 0; ix <= steps; ++ix)
      for (int iz = 0; iz <= steps; ++iz)
        local.cage_points.emplace_back(lo.x() + ix * pitch, y, lo.z() + iz * pitch);
  return local;
}

NormalizedScene to_unit_sphere(const LocalScene& local) {
  NormalizedScene out;
  out.transform = local.transform;
  out.points.reserve(local.cropped.vertices.size() + local.cage_points.size());
  for (const Vec3& p : local.cropped.vertices) {
    out.points.push_back(local.transform.world_to_sphere(p));
    out.is_cage.push_back(0);
  }
  for (const Vec3& p : local.cage_points) {
    out.points.push_back(local.transform.world_to_sphere(p));
    out.is_cage.push_back(1);
  }
  return out;
}

}  // namespace proxgen
