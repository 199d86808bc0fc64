#pragma once

// Constants, frequency groups, Planck emission, spectral opacity and the
// material equation of state.
//
// Units: temperature and photon energy in keV, length in cm, time in ns,
// energy in jerks (1e9 J).

#include "mlqd/gauss.hpp"

#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

namespace mlqd::physics {

inline constexpr double kFourPi = 4.0 * std::numbers::pi;

struct PhysicalConstants {
  double c = 29.9792458;  ///< speed of light, cm/ns
  double a_r = 0.01372;   ///< radiation constant, jerks/(cm^3 keV^4)

  void validate() const;
};

/// Fraction of the normalized Planck spectrum (15/pi^4) x^3/(e^x - 1)
/// lying in [x_lo, x_hi]. x_hi may be +inf.
double planck_band_fraction(double x_lo, double x_hi);

/// Fraction of the normalized Planck spectrum lying in [x, inf).
double planck_fraction_above(double x);

/// Photon-frequency group structure. Holds G+1 ascending bounds; the last
/// group always extends to infinity (a finite last bound is nominal and
/// the tail beyond it is folded into group G).
class FrequencyGrid {
 public:
  explicit FrequencyGrid(std::vector<double> bounds);

  /// `groups` groups whose lower edges are log-spaced from `nu_first` to
  /// `nu_last_lower`; the last group is [nu_last_lower, inf).
  static FrequencyGrid log_spaced(std::size_t groups, double nu_first, double nu_last_lower);

  /// 17 groups, lower edges log-spaced 1e-2..30 keV, last group open.
  static FrequencyGrid default_17();

  /// One ascending bound (keV) per line, G+1 lines.
  static FrequencyGrid from_file(const std::string& path);

  std::size_t size() const { return bounds_.size() - 1; }
  double lower(std::size_t g) const { return bounds_[g]; }
  /// Upper edge used in physics integrals; +inf for the last group.
  double upper(std::size_t g) const;
  std::span<const double> bounds() const { return bounds_; }

 private:
  std::vector<double> bounds_;
};

/// Spectral absorption opacity kappa_nu(T) and its group-averaging rule
/// (Planck-weighted Gauss-Legendre per finite group, Gauss-Laguerre on the
/// open last group).
class OpacityModel {
 public:
  enum class Kind { fleck_cummings, constant };

  /// kappa_nu = coefficient / nu^3 * (1 - exp(-nu/T)).
  static OpacityModel fleck_cummings(double coefficient = 27.0, std::size_t order = 8);
  static OpacityModel constant(double kappa, std::size_t order = 8);

  Kind kind() const { return kind_; }
  double parameter() const { return parameter_; }
  std::size_t order() const { return legendre_.size(); }

  double spectral(double nu, double temperature) const;

  /// Planck-weighted mean of kappa_nu over group g.
  double group_mean(const FrequencyGrid& groups, double temperature, std::size_t g) const;

 private:
  OpacityModel(Kind kind, double parameter, std::size_t order);

  double weighted_mean(double nu_lo, double nu_hi, double temperature) const;
  double tail_mean(double nu_lo, double temperature) const;

  Kind kind_;
  double parameter_;
  numerics::QuadratureRule legendre_;  // on [-1, 1]
  numerics::QuadratureRule laguerre_;
};

/// Linear equation of state eps = cv * T.
struct MaterialEOS {
  double cv = 0.5917 * 0.01372;

  double energy_density(double temperature) const;
  double temperature(double energy_density) const;
};

/// Group emission B_g(T), normalized so that sum_g 4 pi B_g = a_R c T^4.
double group_emission(const PhysicalConstants& k, const FrequencyGrid& groups, double temperature,
                      std::size_t g);

/// All groups at once; out.size() must equal groups.size().
void group_emission_all(const PhysicalConstants& k, const FrequencyGrid& groups,
                        double temperature, std::span<double> out);

double group_opacity(const OpacityModel& model, const FrequencyGrid& groups, double temperature,
                     std::size_t g);

void group_opacity_all(const OpacityModel& model, const FrequencyGrid& groups, double temperature,
                       std::span<double> out);

}  // namespace mlqd::physics
