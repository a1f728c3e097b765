#include "proxgen/networks.hpp"

#include <cstdint>
#include <map>

#include "proxgen/binio.hpp"
#include "proxgen/errors.hpp"

namespace proxgen {
namespace {

constexpr char kMagic[4] = {'P', 'G', 'C', 'K'};
constexpr std::uint32_t kVersion = 1;

void fnv_mix(std::uint64_t* h, const void* data, std::size_t len) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    *h ^= p[i];
    *h *= 0x100000001b3ull;
  }
}

}  // namespace

// Fingerprint of the architecture: sizes plus every parameter name and shape.
// Guards checkpoints against being loaded into a different layout.
std::uint64_t arch_hash(const NetArch& a) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  const std::uint32_t dims[5] = {std::uint32_t(a.n), std::uint32_t(a.h1), std::uint32_t(a.h2),
                                 std::uint32_t(a.dz), std::uint32_t(a.v)};
  fnv_mix(&h, dims, sizeof(dims));
  Networks<float> probe;
  probe.init(a, 0, 0);
  for (auto& [name, t] : probe.params()) {
    fnv_mix(&h, name.data(), name.size());
    const std::uint32_t shape[2] = {std::uint32_t(t->rows()), std::uint32_t(t->cols())};
    fnv_mix(&h, shape, sizeof(shape));
  }
  return h;
}

void save_checkpoint(Networks<float>& nets, const std::string& path) {
  BinWriter w(path);
  w.write_magic(kMagic);
  w.write<std::uint32_t>(kVersion);
  w.write<std::uint64_t>(arch_hash(nets.arch));
  w.write<std::uint32_t>(std::uint32_t(nets.arch.n));
  w.write<std::uint32_t>(std::uint32_t(nets.arch.h1));
  w.write<std::uint32_t>(std::uint32_t(nets.arch.h2));
  w.write<std::uint32_t>(std::uint32_t(nets.arch.dz));
  w.write<std::uint32_t>(std::uint32_t(nets.arch.v));
  w.write<std::uint64_t>(nets.basis_seed);
  auto params = nets.params();
  w.write<std::uint32_t>(std::uint32_t(params.size()));
  for (auto& [name, t] : params) {
    w.write<std::uint32_t>(std::uint32_t(name.size()));
    w.write_bytes(name.data(), name.size());
    w.write<std::uint32_t>(std::uint32_t(t->rows()));
    w.write<std::uint32_t>(std::uint32_t(t->cols()));
    const auto& m = t->value();
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) w.write<float>(m(r, c));
  }
  w.close();
}

Networks<float> load_checkpoint(const std::string& path) {
  BinReader r(path);
  r.expect_magic(kMagic, "checkpoint");
  if (r.read<std::uint32_t>() != kVersion)
    throw IoError(path + ": unsupported checkpoint version");
  const std::uint64_t stored_hash = r.read<std::uint64_t>();
  NetArch a;
  a.n = int(r.read<std::uint32_t>());
  a.h1 = int(r.read<std::uint32_t>());
  a.h2 = int(r.read<std::uint32_t>());
  a.dz = int(r.read<std::uint32_t>());
  a.v = int(r.read<std::uint32_t>());
  if (arch_hash(a) != stored_hash) throw IoError(path + ": architecture hash mismatch");
  const std::uint64_t basis_seed = r.read<std::uint64_t>();
  Networks<float> nets;
  nets.init(a, 0, basis_seed);
  std::map<std::string, TensorT<float>*> by_name;
  for (auto& [name, t] : nets.params()) by_name[name] = t;
  const std::uint32_t count = r.read<std::uint32_t>();
  if (count != by_name.size()) throw IoError(path + ": parameter count mismatch");
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint32_t name_len = r.read<std::uint32_t>();
    std::string name(name_len, '\0');
    r.read_bytes(name.data(), name_len);
    auto it = by_name.find(name);
    if (it == by_name.end()) throw IoError(path + ": unknown parameter " + name);
    const std::uint32_t rows = r.read<std::uint32_t>();
    const std::uint32_t cols = r.read<std::uint32_t>();
    if (Eigen::Index(rows) != it->second->rows() || Eigen::Index(cols) != it->second->cols())
      throw IoError(path + ": shape mismatch for " + name);
    TensorT<float>::Mat m(rows, cols);
    for (std::uint32_t rr = 0; rr < rows; ++rr)
      for (std::uint32_t cc = 0; cc < cols; ++cc) m(rr, cc) = r.read<float>();
    it->second->set_value(std::move(m));
  }
  return nets;
}

}  // namespace proxgen
