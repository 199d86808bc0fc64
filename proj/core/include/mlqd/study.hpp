#pragma once

// Refinement ladders over h_mat or h_moc: run each value, difference
// consecutive solutions in a volume-weighted L2 norm, estimate rates.

#include "mlqd/driver.hpp"
#include "mlqd/mesh.hpp"

#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace mlqd::study {

enum class Varied { h_mat, h_moc };

struct RefinementLadder {
  Varied varied = Varied::h_mat;
  double fixed = 0.0;          ///< the other mesh width, cm
  std::vector<double> values;  ///< descending, each half the previous

  /// Throws std::invalid_argument unless >= 2 positive values with ratio 2.
  void validate() const;
};

/// Mean of each 2x2 block of fine cells. Throws std::invalid_argument if
/// `fine` is not an exact 2x2 subdivision of `coarse`.
std::vector<double> restrict_to_coarse(const mesh::MaterialGrid& fine,
                                       std::span<const double> values,
                                       const mesh::MaterialGrid& coarse);

/// sqrt(sum_i V_i y_i^2)
double l2_norm(const mesh::MaterialGrid& grid, std::span<const double> y);

struct DiffNorms {
  double absolute = 0.0;  ///< ||y_h - y_2h||
  double relative = 0.0;  ///< ||y_h - y_2h|| / ||y_h||
};

DiffNorms diff_norms(const mesh::MaterialGrid& grid, std::span<const double> y_h,
                     std::span<const double> y_2h);

struct LadderRun {
  double h = 0.0;
  mesh::MaterialGrid grid{1.0, 1.0, 1, 1};
  std::vector<double> temperature;
  std::vector<double> energy;
};

struct StudyRow {
  double h = 0.0;
  double ratio = 0.0;  ///< h_mat / h_moc
  DiffNorms dt;
  DiffNorms de;
  double rho_t = 0.0;  ///< NaN on the first row
  double rho_e = 0.0;
};

/// Rows from consecutive runs (first row at the second ladder value).
std::vector<StudyRow> tabulate(const RefinementLadder& ladder, const std::vector<LadderRun>& runs);

struct StudyResult {
  std::vector<LadderRun> runs;
  std::vector<StudyRow> rows;
  std::string failure;  ///< non-empty if a run threw; rows cover the finished runs
};

/// Builds the problem for (h_mat, h_moc).
using ProblemFactory = std::function<driver::Problem(double h_mat, double h_moc)>;
using RunCallback = std::function<void(const LadderRun&)>;

StudyResult run_ladder(const RefinementLadder& ladder, const ProblemFactory& factory,
                       const driver::TimeControls& time, const driver::IterationControls& controls,
                       const RunCallback& on_run = {});

/// Columns: h_mat,h_moc,ratio,dT,rho_T,dE,rho_E,dT_rel,dE_rel
void write_study_csv(std::ostream& out, const RefinementLadder& ladder,
                     const std::vector<StudyRow>& rows);

}  // namespace mlqd::study
