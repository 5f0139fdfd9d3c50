#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "twist/core/rng.hpp"

namespace twist {

std::uint64_t fnv1a64(std::string_view bytes);
std::string to_hex(std::string_view bytes);
std::string from_hex(std::string_view hex);
std::string hash_hex(std::uint64_t h);

// Little-endian flat byte archive. Structs expose
//   template <class Ar, class S> void visit(Ar&, S&)
// and the same visitor drives both writing and reading.
class ByteWriter {
 public:
  static constexpr bool kReading = false;

  template <class T>
    requires std::is_arithmetic_v<T> || std::is_enum_v<T>
  void io(const T& v) {
    const auto* p = reinterpret_cast<const char*>(&v);
    bytes_.append(p, sizeof(T));
  }
  void io(const std::string& s) {
    io(static_cast<std::uint64_t>(s.size()));
    bytes_.append(s);
  }
  template <class Scalar, int R, int C, int O, int MR, int MC>
  void io(const Eigen::Matrix<Scalar, R, C, O, MR, MC>& m) {
    io(static_cast<std::int64_t>(m.rows()));
    io(static_cast<std::int64_t>(m.cols()));
    for (Eigen::Index i = 0; i < m.size(); ++i) io(m.data()[i]);
  }
  void io(const Eigen::Quaterniond& q) {
    io(q.w()); io(q.x()); io(q.y()); io(q.z());
  }
  template <class T, std::size_t N>
  void io(const std::array<T, N>& a) {
    for (const auto& x : a) io(x);
  }
  template <class T>
  void io(const std::vector<T>& v) {
    io(static_cast<std::uint64_t>(v.size()));
    for (const auto& x : v) io(x);
  }
  void io(const Rng& rng) { io(rng.save()); }
  template <class T>
    requires requires(ByteWriter& w, const T& t) { visit(w, t); }
  void io(const T& t) {
    visit(*this, t);
  }

  const std::string& bytes() const { return bytes_; }
  std::string take() { return std::move(bytes_); }

 private:
  std::string bytes_;
};

class ByteReader {
 public:
  static constexpr bool kReading = true;

  explicit ByteReader(std::string_view bytes) : bytes_(bytes) {}

  template <class T>
    requires std::is_arithmetic_v<T> || std::is_enum_v<T>
  void io(T& v) {
    need(sizeof(T));
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
  }
  void io(std::string& s) {
    std::uint64_t n = 0;
    io(n);
    need(n);
    s.assign(bytes_.data() + pos_, n);
    pos_ += n;
  }
  template <class Scalar, int R, int C, int O, int MR, int MC>
  void io(Eigen::Matrix<Scalar, R, C, O, MR, MC>& m) {
    std::int64_t rows = 0, cols = 0;
    io(rows);
    io(cols);
    if constexpr (R != Eigen::Dynamic || C != Eigen::Dynamic) {
      if ((R != Eigen::Dynamic && rows != R) || (C != Eigen::Dynamic && cols != C))
        throw std::runtime_error("archive: matrix shape mismatch");
    }
    if (rows < 0 || cols < 0) throw std::runtime_error("archive: negative matrix shape");
    m.resize(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) io(m.data()[i]);
  }
  void io(Eigen::Quaterniond& q) {
    io(q.w()); io(q.x()); io(q.y()); io(q.z());
  }
  template <class T, std::size_t N>
  void io(std::array<T, N>& a) {
    for (auto& x : a) io(x);
  }
  template <class T>
  void io(std::vector<T>& v) {
    std::uint64_t n = 0;
    io(n);
    if (n > bytes_.size()) throw std::runtime_error("archive: implausible vector length");
    v.resize(n);
    for (auto& x : v) io(x);
  }
  void io(Rng& rng) {
    std::string s;
    io(s);
    rng.load(s);
  }
  template <class T>
    requires requires(ByteReader& r, T& t) { visit(r, t); }
  void io(T& t) {
    visit(*this, t);
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) throw std::runtime_error("archive: truncated input");
  }
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

template <class T>
std::string to_bytes(const T& value) {
  ByteWriter w;
  w.io(value);
  return w.take();
}

template <class T>
T from_bytes(std::string_view bytes) {
  T value{};
  ByteReader r(bytes);
  r.io(value);
  if (!r.done()) throw std::runtime_error("archive: trailing bytes");
  return value;
}

}  // namespace twist
