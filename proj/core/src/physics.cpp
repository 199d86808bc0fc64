#include "mlqd/physics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace mlqd::physics {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPlanckNorm = 15.0 / (std::numbers::pi * std::numbers::pi * std::numbers::pi *
                                       std::numbers::pi);
// Below this x the power series about 0 is used, above it the exponential series.
constexpr double kSeriesSwitch = 2.0;

// B_{2k}/(2k)! for k = 1..kTerms, via (-1)^{k+1} 2 zeta(2k) / (2 pi)^{2k}.
constexpr int kTerms = 30;

std::array<double, kTerms + 1> make_bernoulli_ratios() {
  std::array<double, kTerms + 1> out{};
  const double two_pi = 2.0 * std::numbers::pi;
  for (int k = 1; k <= kTerms; ++k) {
    double zeta = 0.0;
    if (k == 1) {
      zeta = std::numbers::pi * std::numbers::pi / 6.0;
    } else if (k == 2) {
      zeta = std::pow(std::numbers::pi, 4) / 90.0;
    } else {
      for (int n = 2000; n >= 1; --n) zeta += std::pow(static_cast<double>(n), -2.0 * k);
    }
    const double sign = (k % 2 == 1) ? 1.0 : -1.0;
    out[static_cast<std::size_t>(k)] = sign * 2.0 * zeta / std::pow(two_pi, 2.0 * k);
  }
  return out;
}

const std::array<double, kTerms + 1>& bernoulli_ratios() {
  static const auto table = make_bernoulli_ratios();
  return table;
}

// (15/pi^4) * int_0^x t^3/(e^t - 1) dt for 0 <= x < 2pi.
double fraction_below_series(double x) {
  if (x <= 0.0) return 0.0;
  const auto& b = bernoulli_ratios();
  const double x2 = x * x;
  const double x3 = x2 * x;
  double sum = x3 / 3.0 - x3 * x / 8.0;
  double power = x3;  // x^{2k+3}
  for (int k = 1; k <= kTerms; ++k) {
    power *= x2;
    const double term = b[static_cast<std::size_t>(k)] * power / (2.0 * k + 3.0);
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
  }
  return kPlanckNorm * sum;
}

// (15/pi^4) * int_x^inf t^3/(e^t - 1) dt via sum_n e^{-nx}(x^3/n + 3x^2/n^2 + 6x/n^3 + 6/n^4).
double fraction_above_series(double x) {
  if (x == kInf) return 0.0;
  const double x2 = x * x;
  const double x3 = x2 * x;
  double sum = 0.0;
  for (int n = 1; n < 100000; ++n) {
    const double nn = static_cast<double>(n);
    const double term = std::exp(-nn * x) * (x3 / nn + 3.0 * x2 / (nn * nn) +
                                             6.0 * x / (nn * nn * nn) + 6.0 / (nn * nn * nn * nn));
    sum += term;
    if (term < 1e-16 * sum || term == 0.0) break;
  }
  return kPlanckNorm * sum;
}

void check_temperature(double temperature, const char* where) {
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw std::domain_error(std::string(where) + ": temperature must be positive and finite");
  }
}

}  // namespace

void PhysicalConstants::validate() const {
  if (!(c > 0.0) || !(a_r > 0.0)) {
    throw std::invalid_argument("physical constants c and a_R must be positive");
  }
}

double planck_fraction_above(double x) {
  if (std::isnan(x) || x < 0.0) throw std::invalid_argument("planck_fraction_above: x must be >= 0");
  if (x < kSeriesSwitch) return 1.0 - fraction_below_series(x);
  return fraction_above_series(x);
}

double planck_band_fraction(double x_lo, double x_hi) {
  if (std::isnan(x_lo) || std::isnan(x_hi) || x_lo < 0.0 || x_hi < x_lo) {
    throw std::invalid_argument("planck_band_fraction: require 0 <= x_lo <= x_hi");
  }
  if (x_lo == x_hi) return 0.0;
  if (x_hi < kSeriesSwitch) return fraction_below_series(x_hi) - fraction_below_series(x_lo);
  return planck_fraction_above(x_lo) - fraction_above_series(x_hi);
}

FrequencyGrid::FrequencyGrid(std::vector<double> bounds) : bounds_(std::move(bounds)) {
  if (bounds_.size() < 2) throw std::invalid_argument("frequency grid needs at least 2 bounds");
  if (!(bounds_.front() >= 0.0)) throw std::invalid_argument("frequency bounds must be >= 0");
  for (std::size_t i = 1; i < bounds_.size(); ++i) {
    if (!(bounds_[i] > bounds_[i - 1])) {
      throw std::invalid_argument("frequency bounds must be strictly increasing");
    }
  }
  for (std::size_t i = 0; i + 1 < bounds_.size(); ++i) {
    if (!std::isfinite(bounds_[i])) {
      throw std::invalid_argument("only the last frequency bound may be infinite");
    }
  }
}

FrequencyGrid FrequencyGrid::log_spaced(std::size_t groups, double nu_first, double nu_last_lower) {
  if (groups == 0) throw std::invalid_argument("group count must be >= 1");
  if (!(nu_first > 0.0) || (groups > 1 && !(nu_last_lower > nu_first))) {
    throw std::invalid_argument("log-spaced groups need 0 < nu_first < nu_last_lower");
  }
  std::vector<double> bounds(groups + 1);
  if (groups == 1) {
    bounds[0] = nu_first;
  } else {
    const double ratio = std::log(nu_last_lower / nu_first) / static_cast<double>(groups - 1);
    for (std::size_t i = 0; i < groups; ++i) {
      bounds[i] = nu_first * std::exp(ratio * static_cast<double>(i));
    }
    bounds[groups - 1] = nu_last_lower;
  }
  bounds[groups] = kInf;
  return FrequencyGrid(std::move(bounds));
}

FrequencyGrid FrequencyGrid::default_17() { return log_spaced(17, 1e-2, 30.0); }

FrequencyGrid FrequencyGrid::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open group-bounds file: " + path);
  std::vector<double> bounds;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream fields(line);
    double value = 0.0;
    if (!(fields >> value)) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": expected a frequency");
    }
    bounds.push_back(value);
  }
  return FrequencyGrid(std::move(bounds));
}

double FrequencyGrid::upper(std::size_t g) const {
  return (g + 1 == size()) ? kInf : bounds_[g + 1];
}

OpacityModel::OpacityModel(Kind kind, double parameter, std::size_t order)
    : kind_(kind),
      parameter_(parameter),
      legendre_(numerics::gauss_legendre(order)),
      laguerre_(numerics::gauss_laguerre(2 * order)) {
  if (!(parameter > 0.0)) throw std::invalid_argument("opacity parameter must be positive");
}

OpacityModel OpacityModel::fleck_cummings(double coefficient, std::size_t order) {
  return OpacityModel(Kind::fleck_cummings, coefficient, order);
}

OpacityModel OpacityModel::constant(double kappa, std::size_t order) {
  return OpacityModel(Kind::constant, kappa, order);
}

double OpacityModel::spectral(double nu, double temperature) const {
  switch (kind_) {
    case Kind::constant:
      return parameter_;
    case Kind::fleck_cummings:
      return parameter_ / (nu * nu * nu) * -std::expm1(-nu / temperature);
  }
  return 0.0;
}

double OpacityModel::weighted_mean(double nu_lo, double nu_hi, double temperature) const {
  const double half = 0.5 * (nu_hi - nu_lo);
  const double mid = 0.5 * (nu_hi + nu_lo);
  // Planck weights nu^3/(e^{nu/T} - 1) scaled by e^{nu_0/T}, nu_0 the lowest
  // node, so the lowest-node weight is finite and nonzero for any T.
  const double nu_0 = mid + half * *std::min_element(legendre_.nodes.begin(), legendre_.nodes.end());
  double num = 0.0;
  double den = 0.0;
  for (std::size_t k = 0; k < legendre_.size(); ++k) {
    const double nu = mid + half * legendre_.nodes[k];
    const double damp = legendre_.weights[k] * std::exp((nu_0 - nu) / temperature);
    const double em = -std::expm1(-nu / temperature);
    den += damp * nu * nu * nu / em;
    // kappa_nu nu^3 / (1 - e^{-nu/T}) is the bare coefficient for the F-C form
    num += kind_ == Kind::fleck_cummings ? damp * parameter_
                                          : damp * nu * nu * nu / em * spectral(nu, temperature);
  }
  return num / den;
}

double OpacityModel::tail_mean(double nu_lo, double temperature) const {
  // nu = nu_lo + T s; the Planck weight is e^{-x_lo} e^{-s} nu^3 / (1 - e^{-nu/T}).
  double num = 0.0;
  double den = 0.0;
  for (std::size_t k = 0; k < laguerre_.size(); ++k) {
    const double nu = nu_lo + temperature * laguerre_.nodes[k];
    const double w = laguerre_.weights[k] * nu * nu * nu / -std::expm1(-nu / temperature);
    num += w * spectral(nu, temperature);
    den += w;
  }
  return num / den;
}

double OpacityModel::group_mean(const FrequencyGrid& groups, double temperature,
                                std::size_t g) const {
  check_temperature(temperature, "group_opacity");
  if (g >= groups.size()) throw std::out_of_range("group index out of range");
  if (kind_ == Kind::constant) return parameter_;
  // Group 1 extends down to 0 and group G up to infinity.
  const double lo = (g == 0) ? 0.0 : groups.lower(g);
  if (g + 1 == groups.size()) return tail_mean(lo, temperature);
  return weighted_mean(lo, groups.upper(g), temperature);
}

double MaterialEOS::energy_density(double temperature) const {
  if (!(temperature > 0.0)) throw std::domain_error("energy_density: temperature must be positive");
  return cv * temperature;
}

double MaterialEOS::temperature(double energy_density) const {
  if (!(energy_density > 0.0)) throw std::domain_error("temperature: energy density must be positive");
  return energy_density / cv;
}

double group_emission(const PhysicalConstants& k, const FrequencyGrid& groups, double temperature,
                      std::size_t g) {
  check_temperature(temperature, "group_emission");
  if (g >= groups.size()) throw std::out_of_range("group index out of range");
  const double t2 = temperature * temperature;
  const double scale = k.a_r * k.c * t2 * t2 / kFourPi;
  const double x_lo = (g == 0) ? 0.0 : groups.lower(g) / temperature;
  const double x_hi = (g + 1 == groups.size()) ? kInf : groups.upper(g) / temperature;
  return scale * planck_band_fraction(x_lo, x_hi);
}

void group_emission_all(const PhysicalConstants& k, const FrequencyGrid& groups, double temperature,
                        std::span<double> out) {
  check_temperature(temperature, "group_emission");
  const std::size_t n = groups.size();
  if (out.size() != n) throw std::invalid_argument("group_emission_all: output size mismatch");
  const double t2 = temperature * temperature;
  const double scale = k.a_r * k.c * t2 * t2 / kFourPi;
  // Fraction above each interior bound; telescoping keeps the sum exact.
  double above_lo = 1.0;
  for (std::size_t g = 0; g < n; ++g) {
    const double above_hi =
        (g + 1 == n) ? 0.0 : planck_fraction_above(groups.upper(g) / temperature);
    out[g] = scale * (above_lo - above_hi);
    above_lo = above_hi;
  }
}

double group_opacity(const OpacityModel& model, const FrequencyGrid& groups, double temperature,
                     std::size_t g) {
  return model.group_mean(groups, temperature, g);
}

void group_opacity_all(const OpacityModel& model, const FrequencyGrid& groups, double temperature,
                       std::span<double> out) {
  if (out.size() != groups.size()) throw std::invalid_argument("group_opacity_all: output size mismatch");
  for (std::size_t g = 0; g < groups.size(); ++g) out[g] = model.group_mean(groups, temperature, g);
}

}  // namespace mlqd::physics
