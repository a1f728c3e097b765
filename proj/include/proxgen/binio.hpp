#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace proxgen {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Little-endian binary file helpers. All on-disk formats in this project are
// little-endian regardless of host order.

namespace detail {
inline bool host_is_little_endian() {
  const std::uint16_t probe = 1;
  unsigned char b;
  std::memcpy(&b, &probe, 1);
  return b == 1;
}
}  // namespace detail

class BinWriter {
public:
  explicit BinWriter(const std::string& path) : out_(path, std::ios::binary) {
    if (!out_) throw IoError("cannot open for writing: " + path);
    path_ = path;
  }

  template <class T>
  void write(T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    unsigned char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    if (!detail::host_is_little_endian()) {
      for (size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(buf[i], buf[sizeof(T) - 1 - i]);
    }
    out_.write(reinterpret_cast<const char*>(buf), sizeof(T));
  }

  template <class T>
  void write_array(const T* data, size_t n) {
    for (size_t i = 0; i < n; ++i) write(data[i]);
  }

  void write_bytes(const void* data, size_t n) {
    out_.write(static_cast<const char*>(data), std::streamsize(n));
  }

  void write_magic(const char tag[4]) { out_.write(tag, 4); }

  void close() {
    out_.close();
    if (!out_) throw IoError("write failed: " + path_);
  }

private:
  std::ofstream out_;
  std::string path_;
};

class BinReader {
public:
  explicit BinReader(const std::string& path) : in_(path, std::ios::binary) {
    if (!in_) throw IoError("cannot open for reading: " + path);
    path_ = path;
  }

  template <class T>
  T read() {
    static_assert(std::is_trivially_copyable_v<T>);
    unsigned char buf[sizeof(T)];
    in_.read(reinterpret_cast<char*>(buf), sizeof(T));
    if (!in_) throw IoError("unexpected end of file: " + path_);
    if (!detail::host_is_little_endian()) {
      for (size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(buf[i], buf[sizeof(T) - 1 - i]);
    }
    T v;
    std::memcpy(&v, buf, sizeof(T));
    return v;
  }

  template <class T>
  void read_array(T* data, size_t n) {
    for (size_t i = 0; i < n; ++i) data[i] = read<T>();
  }

  void read_bytes(void* data, size_t n) {
    in_.read(static_cast<char*>(data), std::streamsize(n));
    if (!in_) throw IoError("unexpected end of file: " + path_);
  }

  void expect_magic(const char tag[4], const std::string& what) {
    char got[4];
    in_.read(got, 4);
    if (!in_ || std::memcmp(got, tag, 4) != 0)
      throw IoError("bad magic for " + what + " in " + path_);
  }

  const std::string& path() const { return path_; }

private:
  std::ifstream in_;
  std::string path_;
};

}  // namespace proxgen
