#ifndef EKFLOW_CONFIG_HPP
#define EKFLOW_CONFIG_HPP

#include "ekflow/geometry.hpp"
#include "ekflow/poisson.hpp"
#include "ekflow/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace ekflow {

struct ConfigIssue {
  std::string path;
  std::string message;
};

/// Every problem found while reading a configuration, not just the first.
struct ConfigError : Error {
  explicit ConfigError(std::vector<ConfigIssue> list);
  const char* kind() const noexcept override { return "ConfigError"; }
  std::vector<ConfigIssue> issues;
};

struct SpeciesInit {
  std::string kind = "uniform";  ///< uniform | blob
  Scalar value = 1;              ///< uniform level, or blob background
  Scalar amplitude = 0;          ///< blob peak above background
  Vec2 center = Vec2::Zero();
  Scalar width = 0.1;
  Scalar noise = 0;              ///< relative uniform noise, drawn from the run seed
};

struct FixedChargeInit {
  std::string kind = "gaussian";  ///< gaussian | dipole | none
  Scalar total = 1;               ///< integral of rho0 (gaussian), or lobe charge (dipole)
  Vec2 offset = Vec2::Zero();     ///< lobe centre relative to the body centre
  Scalar width = 0.04;
};

struct SimConfig {
  struct {
    int nx = 64, ny = 64;
    Vec2 x_range{0, 1}, y_range{0, 1};
  } grid;
  struct {
    std::string kind = "disk";  ///< disk | polygon
    Scalar radius = 0.15;
    Vec2 center{0.5, 0.5};
    Scalar theta = 0;
    std::vector<Vec2> vertices;  ///< polygon, relative to the centre
  } shape;
  struct {
    Scalar kappa1 = 1, kappa2 = 1, eta = 1, mu_p = 1, mu_f = 1, e = 1, kBT = 1;
    std::vector<SpeciesParams> species{{1, 1}, {-1, 1}};
  } physics;
  struct {
    std::string kind = "uniform_field";  ///< constant | uniform_field | tabulated
    Scalar value = 0;
    Vec2 E0{10, 0};
    Scalar offset = 0;
    Eigen::ArrayXd left, right, bottom, top;
  } boundary;
  struct {
    std::vector<SpeciesInit> species{SpeciesInit{}, SpeciesInit{}};
    FixedChargeInit rho0;
    Vec2 body_velocity = Vec2::Zero();
    Scalar body_omega = 0;
  } initial;
  struct {
    Scalar t_end = 0.01;
    Scalar snapshot_every = 0;  ///< 0: every step
    Scalar tol = 1e-8;          ///< Picard tolerance
    int max_iter = 25;
    Scalar safety = 0.5;
    std::optional<Scalar> gamma_min;  ///< default 2h
    std::string force_convention = "force_per_mass";
    std::uint64_t seed = 0;
    Scalar damping = 1;
    Scalar projection_tol = 1e-8;
    Scalar poisson_tol = 1e-10;
    std::optional<Scalar> dt;  ///< fixed step instead of the controller
    int max_steps = 1000000;
    int dt_halvings = 6;
  } run;

  Grid make_grid() const;
  ShapeSpec make_shape() const;
  Scalar resolved_gamma_min() const { return run.gamma_min.value_or(2 * make_grid().h); }
};

/// Parses JSON text; unspecified keys take their defaults. Throws ConfigError.
SimConfig parse_config_text(const std::string& text);
SimConfig parse_config(const std::string& path);

/// Fully resolved configuration as pretty JSON; parses back to an identical config.
std::string config_to_json(const SimConfig& cfg);

/// Semantic checks; returns all violations.
std::vector<ConfigIssue> validate(const SimConfig& cfg);

ElectrostaticBC make_boundary(const SimConfig& cfg, const Grid& grid);

}  // namespace ekflow

#endif  // EKFLOW_CONFIG_HPP
