#ifndef EKFLOW_SNAPSHOT_HPP
#define EKFLOW_SNAPSHOT_HPP

#include "ekflow/types.hpp"

#include <cstdint>
#include <map>
#include <string>

namespace ekflow {

struct FormatError : Error {
  using Error::Error;
  const char* kind() const noexcept override { return "FormatError"; }
};

/// Flat self-describing container: grid header, named scalars, named 2D
/// arrays of little-endian f64 and an opaque text block (the run config).
///
/// Layout: "EKSNAP\0\0", u32 version, u32 nx, u32 ny, f64 h, f64 x0, f64 y0,
/// u32 scalar count, {u16 name length, name, f64}*, u32 array count,
/// {u16 name length, name, u32 rows, u32 cols, f64[rows*cols] column-major}*,
/// u64 text length, text.
struct Snapshot {
  static constexpr std::uint32_t kVersion = 1;
  Grid grid;
  std::map<std::string, Scalar> scalars;
  std::map<std::string, ScalarField> arrays;
  std::string config;

  Scalar scalar(const std::string& name) const;
  const ScalarField& array(const std::string& name) const;
};

std::string encode_snapshot(const Snapshot& s);
Snapshot decode_snapshot(const std::string& bytes);

void write_snapshot(const Snapshot& s, const std::string& path);
Snapshot read_snapshot(const std::string& path);

}  // namespace ekflow

#endif  // EKFLOW_SNAPSHOT_HPP
