#pragma once

// Finite-volume low-order moment equations: cell-centred energy density,
// face-normal flux, boundary-face energy density as auxiliary unknown.
// The face momentum equation is solved for the flux, leaving a sparse system
// in cell and boundary energies only.

#include "mlqd/mesh.hpp"
#include "mlqd/physics.hpp"
#include "mlqd/transport.hpp"

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace mlqd::loqd {

using transport::EddingtonTensor;

/// Coefficients of one scalar system
///
///   cell i:  (inv_dt + a_i) E_i + div F = s_i + inv_dt E_i^prev
///   face f:  (inv_dt/c)(F_f - F_f^prev) + c D(f E)_f + k_f F_f + eta_f E_f = 0
///   bdry b:  F.n - c C_b E_b = -F_in_b
///
/// inv_dt = 0 gives the steady equations.
struct LowOrderCoefficients {
  double c = 0.0;
  double inv_dt = 0.0;
  std::vector<double> absorption;          ///< [cell]
  std::vector<double> source;              ///< [cell]
  std::vector<double> previous_energy;     ///< [cell]
  std::vector<EddingtonTensor> cell_tensor;  ///< [cell]
  std::vector<double> drag;                ///< [face]
  std::vector<double> eta;                 ///< [face]
  std::vector<double> previous_flux;       ///< [face]
  std::vector<EddingtonTensor> face_tensor;  ///< [face]
  std::vector<double> boundary_factor;     ///< [b]
  std::vector<double> incoming_flux;       ///< [b]

  void resize(const mesh::MaterialGrid& grid);
};

struct LowOrderSolution {
  std::vector<double> energy;           ///< [cell]
  std::vector<double> flux;             ///< [face], along +x on x-faces, +y on y-faces
  std::vector<double> boundary_energy;  ///< [b]
  double relative_residual = 0.0;
};

/// Reusable assembler and sparse LU for one material grid. The sparsity
/// pattern depends only on the grid and the cross-term flag, so the
/// symbolic analysis is done once.
class LowOrderSystem {
 public:
  LowOrderSystem(const mesh::MaterialGrid& grid, bool cross_terms);
  ~LowOrderSystem();
  LowOrderSystem(LowOrderSystem&&) noexcept;
  LowOrderSystem& operator=(LowOrderSystem&&) noexcept;

  const mesh::MaterialGrid& grid() const { return grid_; }
  bool cross_terms() const { return cross_terms_; }

  /// Each `slot` keeps the factorization from its last refactoring and
  /// reuses it as a preconditioner while the matrix stays close; otherwise
  /// the new matrix is factored. Throws std::runtime_error if that fails.
  LowOrderSolution solve(const LowOrderCoefficients& coef, std::size_t slot = 0);

  /// Forget stored factorizations, so results do not depend on earlier solves.
  void clear_factorizations();

 private:
  struct Impl;
  mesh::MaterialGrid grid_;
  bool cross_terms_;
  std::unique_ptr<Impl> impl_;
};

/// Cell balance residual (inv_dt + a)E + div F - s - inv_dt E_prev per cell.
std::vector<double> cell_balance_residual(const mesh::MaterialGrid& grid,
                                          const LowOrderCoefficients& coef,
                                          const LowOrderSolution& sol);

/// Per-group low-order fields, group index fastest.
struct MultigroupFields {
  std::size_t groups = 0;
  std::vector<double> energy;           ///< [cell][g]
  std::vector<double> flux;             ///< [face][g]
  std::vector<double> boundary_energy;  ///< [b][g]
  double max_relative_residual = 0.0;

  static MultigroupFields zeros(const mesh::MaterialGrid& grid, std::size_t groups);
};

/// Group opacity and emission B_g per [cell][g] at the current temperature.
struct GroupProperties {
  std::size_t groups = 0;
  std::vector<double> kappa;
  std::vector<double> emission;
};

GroupProperties evaluate_properties(const physics::OpacityModel& opacity,
                                    const physics::FrequencyGrid& groups,
                                    const physics::PhysicalConstants& constants,
                                    std::span<const double> temperature);

/// Face opacity: mean of the adjacent cells, the cell value on the boundary.
double face_opacity(const mesh::MaterialGrid& grid, std::span<const double> cell_values,
                    std::size_t groups, std::size_t f, std::size_t g);

/// Solve every group with tensors and boundary factors from the latest sweep.
MultigroupFields solve_multigroup(LowOrderSystem& system, const transport::MomentTallies& moments,
                                  const GroupProperties& props, const MultigroupFields& previous,
                                  double c, double inv_dt);

/// Spectrum-averaged coefficients of the grey problem.
struct GreyClosures {
  std::vector<double> kappa_e;               ///< [cell] energy-weighted mean
  std::vector<double> kappa_b;               ///< [cell] Planck mean
  std::vector<EddingtonTensor> cell_tensor;  ///< [cell]
  std::vector<EddingtonTensor> face_tensor;  ///< [face]
  std::vector<double> drag;                  ///< [face] |F|-weighted mean opacity
  std::vector<double> eta;                   ///< [face]
  std::vector<double> boundary_factor;       ///< [b]
  std::vector<double> incoming_flux;         ///< [b]
};

/// Face group energy is the adjacent-cell mean (boundary unknown on the
/// boundary). Zero spectra fall back to Planck weights.
GreyClosures compute_grey_closures(const mesh::MaterialGrid& grid, const MultigroupFields& mg,
                                   const GroupProperties& props,
                                   const transport::MomentTallies& moments);

struct GreyState {
  std::vector<double> energy;           ///< [cell]
  std::vector<double> flux;             ///< [face]
  std::vector<double> boundary_energy;  ///< [b]
  std::vector<double> temperature;      ///< [cell]
};

struct GreyResult {
  GreyState state;
  int newton_iterations = 0;
  double relative_residual = 0.0;
};

struct GreyInputs {
  std::span<const double> previous_energy;       ///< [cell], time level n-1
  std::span<const double> previous_flux;         ///< [face]
  std::span<const double> previous_temperature;  ///< [cell]
  std::span<const double> initial_temperature;   ///< [cell], Newton starting iterate
  double inv_dt = 0.0;                           ///< 0 for steady state
  double tolerance = 1e-13;                      ///< on max |dT|/T
  int max_iterations = 100;
};

/// Grey moment equations coupled to the material energy balance, Newton on
/// T^4 with the temperature eliminated cell by cell. Every iterate
/// conserves total energy. Throws std::runtime_error after max_iterations.
GreyResult solve_grey_meb(LowOrderSystem& system, const GreyClosures& closures,
                          const physics::MaterialEOS& eos,
                          const physics::PhysicalConstants& constants, const GreyInputs& in);

}  // namespace mlqd::loqd
