#pragma once

// Backward-Euler time stepping with nested iterations: transport sweeps
// (outer) around multigroup and grey moment solves (inner).

#include "mlqd/loqd.hpp"
#include "mlqd/mesh.hpp"
#include "mlqd/physics.hpp"
#include "mlqd/quadrature.hpp"
#include "mlqd/transport.hpp"

#include <array>
#include <cstddef>
#include <functional>
#include <vector>

namespace mlqd::driver {

struct BoundarySpec {
  enum class Kind { vacuum, planckian };
  Kind kind = Kind::vacuum;
  double temperature = 0.0;  ///< keV, planckian only

  static BoundarySpec vacuum() { return {}; }
  static BoundarySpec planckian(double t) { return {Kind::planckian, t}; }
};

struct Problem {
  mesh::MaterialGrid grid{1.0, 1.0, 1, 1};
  quadrature::AngularQuadrature quadrature{quadrature::build_product_quadrature(1, 1)};
  physics::FrequencyGrid groups{physics::FrequencyGrid::default_17()};
  physics::OpacityModel opacity{physics::OpacityModel::fleck_cummings()};
  physics::MaterialEOS eos{};
  physics::PhysicalConstants constants{};
  std::array<BoundarySpec, mesh::kNumSides> boundary{};  ///< left, right, bottom, top
  double h_moc = 0.1;
  double initial_temperature = 1e-3;
  bool cross_terms = true;
};

struct TimeControls {
  double dt = 0.02;
  std::size_t steps = 0;

  double t_end() const { return dt * static_cast<double>(steps); }
};

struct IterationControls {
  double eps_outer = 1e-12;
  double eps_inner = 1e-12;
  int max_outer = 50;
  int max_inner = 100;
};

struct FieldState {
  double time = 0.0;
  std::size_t step = 0;
  std::vector<double> temperature;  ///< [cell]
  std::vector<double> energy;       ///< grey E, [cell]
  std::vector<double> flux;         ///< grey F, [face]
  loqd::MultigroupFields multigroup;
  std::vector<double> intensity;    ///< cell-average I, [m][cell][g]
};

struct IterationRecord {
  std::size_t step = 0;
  double time = 0.0;
  int outer_iterations = 0;
  std::vector<int> inner_iterations;  ///< per outer iterate
  int total_inner = 0;
  std::vector<double> outer_residuals;  ///< max(T, E) change per outer iterate
  double residual_t = 0.0;
  double residual_e = 0.0;
  int nonmonotone_outer = 0;  ///< residual increases after the second iterate

  double energy_before = 0.0;   ///< sum V (E + eps) at t^{n-1}
  double energy_after = 0.0;
  double boundary_inflow = 0.0;  ///< net inward power through the boundary
  double energy_residual = 0.0;  ///< |dE_total - inflow dt| / max(E_total)

  double consistency_energy = 0.0;  ///< ||E - sum E_g|| / ||E||
  double consistency_flux = 0.0;    ///< ||F - sum F_g|| / ||F||
  double max_linear_residual = 0.0;
};

/// Worker threads for sweeps (no-op without OpenMP); n <= 0 keeps the default.
void set_worker_count(int n);

/// max_i |a_i - b_i| / max(|b_i|, floor)
double max_relative_change(const std::vector<double>& a, const std::vector<double>& b,
                           double floor = 1e-30);

/// Sum over cells of V (E + c_v T).
double total_energy(const mesh::MaterialGrid& grid, const physics::MaterialEOS& eos,
                    const std::vector<double>& energy, const std::vector<double>& temperature);

/// Net inward power: -sum_b L_b F.n over boundary faces.
double boundary_inflow(const mesh::MaterialGrid& grid, const std::vector<double>& flux);

class Simulation {
 public:
  explicit Simulation(Problem problem);

  const Problem& problem() const { return problem_; }
  const mesh::CharacteristicGrid& characteristics() const { return chars_; }
  const transport::BoundaryIntensity& boundary_intensity() const { return boundary_; }

  /// Uniform T0, isotropic Planckian intensities, zero flux.
  FieldState initial_state() const;

  /// Advances `state` by dt. Throws std::runtime_error (with the residual
  /// history) when max_outer or max_inner is exceeded.
  IterationRecord advance_step(FieldState& state, double dt, const IterationControls& controls);

 private:
  Problem problem_;
  mesh::CharacteristicGrid chars_;
  transport::BoundaryIntensity boundary_;
  loqd::LowOrderSystem system_;
};

struct RunResult {
  FieldState state;
  std::vector<IterationRecord> records;
};

/// Called after every step (and once with the initial state, record null).
using StepObserver = std::function<void(const FieldState&, const IterationRecord*)>;

RunResult run(Simulation& sim, FieldState state, const TimeControls& time,
              const IterationControls& controls, const StepObserver& observer = {});

}  // namespace mlqd::driver
