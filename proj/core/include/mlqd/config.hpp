#pragma once

// Flat "section.key = value" run configuration. '#' starts a comment.
//
//   domain.lx, domain.ly            cm (required)
//   mesh.h_mat, mesh.h_moc          cm (required)
//   time.dt (ns), time.steps        (required)
//   quadrature.n_polar = 6, quadrature.n_azimuthal = 6, quadrature.file
//   groups.count = 17, groups.nu_min = 0.01, groups.nu_max = 30 (lower edge of
//   the open last group), groups.file
//   physics.c = 29.9792458, physics.a_r = 0.01372
//   material.cv (default 0.5917 a_r), material.opacity = fleck-cummings | constant,
//   material.kappa0 = 27, material.order = 8
//   boundary.left|right|bottom|top = vacuum | planckian:<T keV>
//   initial.temperature = 1e-3
//   iteration.eps_outer = 1e-12, iteration.eps_inner = 1e-12,
//   iteration.max_outer = 50, iteration.max_inner = 100
//   output.dir = ., output.snapshot_interval = 0.5 (ns, 0 = final only)
//   loqd.cross_terms = true
//   run.threads = 0 (0 = library default)

#include "mlqd/driver.hpp"

#include <array>
#include <optional>
#include <string>

namespace mlqd::config {

struct RunConfig {
  double lx = 0.0;
  double ly = 0.0;
  double h_mat = 0.0;
  double h_moc = 0.0;

  std::size_t n_polar = 6;
  std::size_t n_azimuthal = 6;
  std::string quadrature_file;

  std::size_t group_count = 17;
  double nu_min = 0.01;
  double nu_max = 30.0;
  std::string group_file;

  physics::PhysicalConstants constants{};
  std::optional<double> cv;
  physics::OpacityModel::Kind opacity = physics::OpacityModel::Kind::fleck_cummings;
  double kappa0 = 27.0;
  std::size_t opacity_order = 8;

  std::array<driver::BoundarySpec, mesh::kNumSides> boundary{};
  double initial_temperature = 1e-3;

  driver::TimeControls time{};
  driver::IterationControls iteration{};

  std::string output_dir = ".";
  double snapshot_interval = 0.5;
  bool cross_terms = true;
  int threads = 0;
};

/// Throws std::invalid_argument naming the offending key.
RunConfig parse_config_text(const std::string& text, const std::string& source = "<config>");
RunConfig parse_config(const std::string& path);

/// Checks cross-key constraints (h_mat divides Lx, Ly; ...). Called by the parsers.
void validate(const RunConfig& cfg);

/// Problem for the configured meshes, or for overriding h_mat / h_moc.
driver::Problem make_problem(const RunConfig& cfg);
driver::Problem make_problem(const RunConfig& cfg, double h_mat, double h_moc);

}  // namespace mlqd::config
