#pragma once

// Long-characteristics sweep of the backward-Euler transport equation and
// the angular moments it feeds to the low-order equations.

#include "mlqd/mesh.hpp"
#include "mlqd/quadrature.hpp"

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace mlqd::transport {

struct SegmentResult {
  double outgoing = 0.0;
  double average = 0.0;
};

/// Weight alpha(tau) = 1/tau - e^{-tau}/(1 - e^{-tau}) of the incoming
/// intensity in the segment average.
inline double segment_weight(double tau) {
  if (tau < 0.1) {
    const double t2 = tau * tau;
    return 0.5 - tau * (1.0 / 12.0 -
                        t2 * (1.0 / 720.0 -
                              t2 * (1.0 / 30240.0 - t2 * (1.0 / 1209600.0 - t2 / 47900160.0))));
  }
  const double e = std::exp(-tau);
  return 1.0 / tau - e / (1.0 - e);
}

/// Exact solution across a segment of optical thickness tau with constant
/// source ratio S = Q / kappa~. No argument checking; see step_segment().
inline SegmentResult step_segment_unchecked(double incoming, double tau, double source_ratio) {
  double outgoing;
  double alpha;
  if (tau < 1e-6) {
    const double h = 0.5 * tau * tau;
    outgoing = incoming * (1.0 - tau + h) + source_ratio * (tau - h);
    alpha = 0.5 - tau / 12.0;
  } else if (tau < 0.1) {
    const double om = -std::expm1(-tau);
    outgoing = incoming * (1.0 - om) + source_ratio * om;
    alpha = segment_weight(tau);
  } else {
    const double e = std::exp(-tau);
    const double om = 1.0 - e;
    outgoing = incoming * e + source_ratio * om;
    alpha = 1.0 / tau - e / om;
  }
  return {outgoing, alpha * incoming + (1.0 - alpha) * outgoing};
}

/// Throws std::invalid_argument for negative or NaN tau.
SegmentResult step_segment(double incoming, double tau, double source_ratio);

/// Isotropic incoming intensity per boundary side and group.
struct BoundaryIntensity {
  std::array<std::vector<double>, mesh::kNumSides> side;

  static BoundaryIntensity vacuum(std::size_t groups);
  std::size_t groups() const { return side[0].size(); }
  const std::vector<double>& on(mesh::Side s) const { return side[static_cast<std::size_t>(s)]; }
  std::vector<double>& on(mesh::Side s) { return side[static_cast<std::size_t>(s)]; }
};

/// Per-cell total opacity kappa~ = kappa + 1/(c dt) and per-(direction,
/// cell, group) source ratio S = Q / kappa~ with Q = kappa B + I_prev/(c dt).
struct CellSource {
  std::size_t cells = 0;
  std::size_t groups = 0;
  std::size_t directions = 0;
  std::vector<double> total_opacity;  ///< [cell][g]
  std::vector<double> source_ratio;   ///< [m][cell][g]
};

/// kappa and emission are [cell][g]; previous_intensity is [m][cell][g]
/// (may be empty when inv_c_dt == 0).
CellSource make_cell_source(std::size_t cells, std::size_t groups, std::size_t directions,
                            std::span<const double> kappa, std::span<const double> emission,
                            std::span<const double> previous_intensity, double inv_c_dt);

/// Cell-average and face-average angular intensities per direction.
struct AngularTallies {
  std::size_t cells = 0;
  std::size_t faces = 0;
  std::size_t groups = 0;
  std::size_t directions = 0;
  std::vector<double> cell_intensity;  ///< [m][cell][g]
  std::vector<double> face_intensity;  ///< [m][face][g]

  double cell(std::size_t m, std::size_t i, std::size_t g) const {
    return cell_intensity[(m * cells + i) * groups + g];
  }
  double face(std::size_t m, std::size_t f, std::size_t g) const {
    return face_intensity[(m * faces + f) * groups + g];
  }
};

/// Transport every (direction, group) along its rays. Cell values are
/// area-weighted segment averages over the cell area; face values are
/// width-weighted crossing intensities over L_f |u . n_f|.
AngularTallies sweep(const mesh::MaterialGrid& grid, const quadrature::AngularQuadrature& quad,
                     const mesh::CharacteristicGrid& chars, const CellSource& source,
                     const BoundaryIntensity& boundary);

/// Symmetric second-moment ratio; zz completes the 3D trace.
struct EddingtonTensor {
  double xx = 1.0 / 3.0;
  double yy = 1.0 / 3.0;
  double zz = 1.0 / 3.0;
  double xy = 0.0;

  double trace() const { return xx + yy + zz; }
};

/// Per boundary face and group: transport energy density, net outward
/// normal flux and incoming partial flux sum_{O.n<0} w |O.n| I_in (>= 0).
struct BoundaryMoments {
  double energy = 0.0;
  double normal_flux = 0.0;
  double incoming_flux = 0.0;
};

struct MomentTallies {
  std::size_t cells = 0;
  std::size_t faces = 0;
  std::size_t boundary_faces = 0;
  std::size_t groups = 0;

  std::vector<double> cell_zeroth;             ///< [cell][g], sum w I
  std::vector<double> cell_first_x;            ///< [cell][g]
  std::vector<double> cell_first_y;            ///< [cell][g]
  std::vector<EddingtonTensor> cell_tensor;    ///< [cell][g]
  std::vector<double> face_zeroth;             ///< [face][g]
  std::vector<EddingtonTensor> face_tensor;    ///< [face][g]
  std::vector<BoundaryMoments> boundary;       ///< [b][g]
  /// C_b = (F.n + F_in) / (c E_b); the low-order condition is F.n = c C_b E - F_in.
  std::vector<double> boundary_factor;         ///< [b][g]
};

std::vector<BoundaryMoments> boundary_partial_moments(const AngularTallies& tallies,
                                                      const mesh::MaterialGrid& grid,
                                                      const quadrature::AngularQuadrature& quad,
                                                      const BoundaryIntensity& boundary, double c);

MomentTallies compute_moments(const AngularTallies& tallies, const mesh::MaterialGrid& grid,
                              const quadrature::AngularQuadrature& quad,
                              const BoundaryIntensity& boundary, double c);

/// Throws std::logic_error if a tensor's trace is not 1, a diagonal entry
/// leaves [0, 1], or xx*yy - xy^2 < 0.
void check_tensor_properties(const MomentTallies& moments, double tolerance = 1e-12);

}  // namespace mlqd::transport
