#ifndef EKFLOW_TYPES_HPP
#define EKFLOW_TYPES_HPP

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace ekflow {

using Scalar = double;
using Vec2 = Eigen::Matrix<Scalar, 2, 1>;
using Mat2 = Eigen::Matrix<Scalar, 2, 2>;

/// Cell-centred scalar samples, indexed (i, j) with i along x.
using ScalarField = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Uniform cell-centred grid on the rectangular enclosure
/// [origin.x, origin.x + nx*h] x [origin.y, origin.y + ny*h].
struct Grid {
  int nx = 0;
  int ny = 0;
  Scalar h = 0;
  Vec2 origin = Vec2::Zero();

  Grid() = default;
  Grid(int nx_, int ny_, Scalar h_, Vec2 origin_ = Vec2::Zero())
      : nx(nx_), ny(ny_), h(h_), origin(origin_) {}

  Scalar xc(int i) const { return origin.x() + (i + Scalar(0.5)) * h; }
  Scalar yc(int j) const { return origin.y() + (j + Scalar(0.5)) * h; }
  Vec2 cell_center(int i, int j) const { return {xc(i), yc(j)}; }
  /// x-coordinate of the vertical face i (0..nx).
  Scalar xf(int i) const { return origin.x() + i * h; }
  Scalar yf(int j) const { return origin.y() + j * h; }

  Scalar x_min() const { return origin.x(); }
  Scalar x_max() const { return origin.x() + nx * h; }
  Scalar y_min() const { return origin.y(); }
  Scalar y_max() const { return origin.y() + ny * h; }
  Scalar cell_area() const { return h * h; }
  Scalar area() const { return nx * ny * h * h; }
  int cells() const { return nx * ny; }

  ScalarField zeros() const { return ScalarField::Zero(nx, ny); }
  bool operator==(const Grid&) const = default;
};

/// Two-component cell-centred field.
struct VectorField {
  ScalarField x;
  ScalarField y;

  static VectorField zeros(const Grid& g) { return {g.zeros(), g.zeros()}; }
};

/// Staggered (MAC) velocity: u on vertical faces (nx+1, ny), v on
/// horizontal faces (nx, ny+1).
struct MacVelocity {
  ScalarField u;
  ScalarField v;

  static MacVelocity zeros(const Grid& g) {
    return {ScalarField::Zero(g.nx + 1, g.ny), ScalarField::Zero(g.nx, g.ny + 1)};
  }
};

/// Values on the faces of the cell grid, same layout as MacVelocity.
using FaceField = MacVelocity;

/// Symmetric 2x2 tensor per cell.
struct TensorField {
  ScalarField xx;
  ScalarField xy;
  ScalarField yy;
};

struct SpeciesParams {
  int Z = 1;
  Scalar d = 1;
};

// Error taxonomy shared by all modules.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "Error"; }
};
struct GeometryError : Error {
  using Error::Error;
  const char* kind() const noexcept override { return "GeometryError"; }
};
struct InvariantViolation : Error {
  using Error::Error;
  const char* kind() const noexcept override { return "InvariantViolation"; }
};
struct StabilityError : Error {
  using Error::Error;
  const char* kind() const noexcept override { return "StabilityError"; }
};
struct OracleError : Error {
  using Error::Error;
  const char* kind() const noexcept override { return "OracleError"; }
};
struct SolverError : Error {
  SolverError(const std::string& what, std::vector<Scalar> history)
      : Error(what), residual_history(std::move(history)) {}
  const char* kind() const noexcept override { return "SolverError"; }
  std::vector<Scalar> residual_history;
};
struct PicardError : Error {
  PicardError(const std::string& what, std::vector<Scalar> trace)
      : Error(what), residual_trace(std::move(trace)) {}
  const char* kind() const noexcept override { return "PicardError"; }
  std::vector<Scalar> residual_trace;
};

}  // namespace ekflow

#endif  // EKFLOW_TYPES_HPP
