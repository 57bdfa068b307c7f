#include "ekflow/snapshot.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace ekflow {

namespace {

constexpr char kMagic[8] = {'E', 'K', 'S', 'N', 'A', 'P', 0, 0};

class Writer {
 public:
  void bytes(const void* p, std::size_t n) { out_.append(static_cast<const char*>(p), n); }
  template <typename T>
  void uint(T v) {
    for (std::size_t k = 0; k < sizeof(T); ++k) out_.push_back(static_cast<char>((v >> (8 * k)) & 0xff));
  }
  void f64(Scalar v) { uint(std::bit_cast<std::uint64_t>(v)); }
  void name(const std::string& s) {
    if (s.size() > 0xffff) throw FormatError("array name too long: " + s.substr(0, 32));
    uint(static_cast<std::uint16_t>(s.size()));
    bytes(s.data(), s.size());
  }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

class Cursor {
 public:
  explicit Cursor(const std::string& b) : b_(b) {}
  void need(std::size_t n, const char* what) {
    if (b_.size() - pos_ < n) throw FormatError(std::string("truncated snapshot while reading ") + what);
  }
  template <typename T>
  T uint(const char* what) {
    need(sizeof(T), what);
    T v = 0;
    for (std::size_t k = 0; k < sizeof(T); ++k)
      v |= static_cast<T>(static_cast<unsigned char>(b_[pos_ + k])) << (8 * k);
    pos_ += sizeof(T);
    return v;
  }
  Scalar f64(const char* what) { return std::bit_cast<Scalar>(uint<std::uint64_t>(what)); }
  std::string str(std::size_t n, const char* what) {
    need(n, what);
    std::string s = b_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == b_.size(); }

 private:
  const std::string& b_;
  std::size_t pos_ = 0;
};

}  // namespace

Scalar Snapshot::scalar(const std::string& name) const {
  auto it = scalars.find(name);
  if (it == scalars.end()) throw FormatError("snapshot has no scalar '" + name + "'");
  return it->second;
}

const ScalarField& Snapshot::array(const std::string& name) const {
  auto it = arrays.find(name);
  if (it == arrays.end()) throw FormatError("snapshot has no array '" + name + "'");
  return it->second;
}

std::string encode_snapshot(const Snapshot& s) {
  Writer w;
  w.bytes(kMagic, sizeof kMagic);
  w.uint(Snapshot::kVersion);
  w.uint(static_cast<std::uint32_t>(s.grid.nx));
  w.uint(static_cast<std::uint32_t>(s.grid.ny));
  w.f64(s.grid.h);
  w.f64(s.grid.origin.x());
  w.f64(s.grid.origin.y());
  w.uint(static_cast<std::uint32_t>(s.scalars.size()));
  for (const auto& [k, v] : s.scalars) {
    w.name(k);
    w.f64(v);
  }
  w.uint(static_cast<std::uint32_t>(s.arrays.size()));
  for (const auto& [k, a] : s.arrays) {
    w.name(k);
    w.uint(static_cast<std::uint32_t>(a.rows()));
    w.uint(static_cast<std::uint32_t>(a.cols()));
    for (Eigen::Index n = 0; n < a.size(); ++n) w.f64(a(n));
  }
  w.uint(static_cast<std::uint64_t>(s.config.size()));
  w.bytes(s.config.data(), s.config.size());
  return w.take();
}

Snapshot decode_snapshot(const std::string& bytes) {
  Cursor c(bytes);
  if (c.str(sizeof kMagic, "magic") != std::string(kMagic, sizeof kMagic))
    throw FormatError("not a snapshot file (bad magic)");
  const auto version = c.uint<std::uint32_t>("version");
  if (version != Snapshot::kVersion)
    throw FormatError("unsupported snapshot version " + std::to_string(version) + " (expected " +
                      std::to_string(Snapshot::kVersion) + ")");
  Snapshot s;
  s.grid.nx = static_cast<int>(c.uint<std::uint32_t>("grid header"));
  s.grid.ny = static_cast<int>(c.uint<std::uint32_t>("grid header"));
  s.grid.h = c.f64("grid header");
  s.grid.origin.x() = c.f64("grid header");
  s.grid.origin.y() = c.f64("grid header");
  const auto ns = c.uint<std::uint32_t>("scalar count");
  for (std::uint32_t k = 0; k < ns; ++k) {
    std::string name = c.str(c.uint<std::uint16_t>("scalar name"), "scalar name");
    s.scalars[name] = c.f64("scalar value");
  }
  const auto na = c.uint<std::uint32_t>("array count");
  for (std::uint32_t k = 0; k < na; ++k) {
    std::string name = c.str(c.uint<std::uint16_t>("array name"), "array name");
    const auto rows = c.uint<std::uint32_t>("array shape");
    const auto cols = c.uint<std::uint32_t>("array shape");
    c.need(std::size_t(rows) * cols * 8, "array data");
    ScalarField a(rows, cols);
    for (Eigen::Index n = 0; n < a.size(); ++n) a(n) = c.f64("array data");
    s.arrays[name] = std::move(a);
  }
  s.config = c.str(c.uint<std::uint64_t>("config length"), "config text");
  if (!c.done()) throw FormatError("trailing bytes after snapshot payload");
  return s;
}

void write_snapshot(const Snapshot& s, const std::string& path) {
  const std::string bytes = encode_snapshot(s);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open " + path + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError("failed writing " + path);
}

Snapshot read_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return decode_snapshot(ss.str());
}

}  // namespace ekflow
