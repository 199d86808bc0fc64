#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mlqd/loqd.hpp"
#include "mlqd/mesh.hpp"
#include "mlqd/physics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

using namespace mlqd;
using loqd::EddingtonTensor;
using mesh::MaterialGrid;

namespace {

constexpr double kC = 29.9792458;

double exact_linear(double x, double y) { return 1.0 + 0.5 * x + 0.25 * y; }

// Centre of boundary face b.
std::pair<double, double> boundary_point(const MaterialGrid& g, std::size_t b) {
  const std::size_t f = g.boundary_face(b);
  const auto [line, pos] = g.face_coords(f);
  if (g.is_x_face(f)) return {line * g.dx(), (pos + 0.5) * g.dy()};
  return {(line + 0.5) * g.dx(), pos * g.dy()};
}

// Net outward power of a solution's flux through all boundary faces.
double leakage(const MaterialGrid& g, const std::vector<double>& flux) {
  double s = 0.0;
  for (std::size_t b = 0; b < g.num_boundary_faces(); ++b) {
    const std::size_t f = g.boundary_face(b);
    s += MaterialGrid::outward_sign(g.boundary_side(b)) * g.face_length(f) * flux[f];
  }
  return s;
}

loqd::LowOrderCoefficients vacuum_coefficients(const MaterialGrid& g, double kappa, double inv_dt) {
  loqd::LowOrderCoefficients coef;
  coef.resize(g);
  coef.c = kC;
  coef.inv_dt = inv_dt;
  std::fill(coef.absorption.begin(), coef.absorption.end(), kC * kappa);
  std::fill(coef.drag.begin(), coef.drag.end(), kappa);
  std::fill(coef.boundary_factor.begin(), coef.boundary_factor.end(), 0.5);
  return coef;
}

transport::MomentTallies isotropic_moments(const MaterialGrid& g, std::size_t groups) {
  transport::MomentTallies m;
  m.cells = g.num_cells();
  m.faces = g.num_faces();
  m.boundary_faces = g.num_boundary_faces();
  m.groups = groups;
  m.cell_tensor.assign(m.cells * groups, EddingtonTensor{});
  m.face_tensor.assign(m.faces * groups, EddingtonTensor{});
  m.boundary.assign(m.boundary_faces * groups, transport::BoundaryMoments{});
  m.boundary_factor.assign(m.boundary_faces * groups, 0.5);
  return m;
}

// c_v (T - T_prev) inv_dt = c k_E E - c k_B a T^4, solved by scalar Newton.
double scalar_meb(double cv, double inv_dt, double t_prev, double ke, double kb, double e) {
  const physics::PhysicalConstants k;
  double t = t_prev;
  for (int it = 0; it < 200; ++it) {
    const double f = cv * inv_dt * (t - t_prev) - k.c * ke * e + k.c * kb * k.a_r * std::pow(t, 4);
    const double df = cv * inv_dt + 4.0 * k.c * kb * k.a_r * std::pow(t, 3);
    const double step = f / df;
    t -= step;
    if (std::abs(step) < 1e-17 * t) break;
  }
  return t;
}

}  // namespace

TEST_CASE("linear profile is reproduced exactly") {
  const MaterialGrid g(2.0, 1.5, 8, 5);
  const double kappa = 2.0;
  auto coef = vacuum_coefficients(g, kappa, 0.0);
  const double a = 0.7;
  for (std::size_t i = 0; i < g.num_cells(); ++i) {
    const double x = (g.cell_ix(i) + 0.5) * g.dx();
    const double y = (g.cell_iy(i) + 0.5) * g.dy();
    coef.absorption[i] = a;
    coef.source[i] = a * exact_linear(x, y);
  }
  const double fx = -kC / (3.0 * kappa) * 0.5;
  const double fy = -kC / (3.0 * kappa) * 0.25;
  for (std::size_t b = 0; b < g.num_boundary_faces(); ++b) {
    const auto [x, y] = boundary_point(g, b);
    const std::size_t f = g.boundary_face(b);
    const double fn = MaterialGrid::outward_sign(g.boundary_side(b)) * (g.is_x_face(f) ? fx : fy);
    coef.incoming_flux[b] = kC * 0.5 * exact_linear(x, y) - fn;
  }
  loqd::LowOrderSystem sys(g, true);
  const auto sol = sys.solve(coef);
  for (std::size_t i = 0; i < g.num_cells(); ++i) {
    const double x = (g.cell_ix(i) + 0.5) * g.dx();
    const double y = (g.cell_iy(i) + 0.5) * g.dy();
    CHECK(sol.energy[i] == doctest::Approx(exact_linear(x, y)).epsilon(1e-12));
  }
  for (std::size_t f = 0; f < g.num_faces(); ++f) {
    CHECK(sol.flux[f] == doctest::Approx(g.is_x_face(f) ? fx : fy).epsilon(1e-11));
  }
  for (std::size_t b = 0; b < g.num_boundary_faces(); ++b) {
    const auto [x, y] = boundary_point(g, b);
    CHECK(sol.boundary_energy[b] == doctest::Approx(exact_linear(x, y)).epsilon(1e-12));
  }
  CHECK(sol.relative_residual <= 1e-13);
}

TEST_CASE("uniform equilibrium with cross terms") {
  const MaterialGrid g(1.0, 1.0, 4, 4);
  auto coef = vacuum_coefficients(g, 3.0, 0.0);
  const double e0 = 0.8;
  const EddingtonTensor skew{0.4, 0.3, 0.3, 0.12};
  std::fill(coef.cell_tensor.begin(), coef.cell_tensor.end(), skew);
  std::fill(coef.face_tensor.begin(), coef.face_tensor.end(), skew);
  for (std::size_t i = 0; i < g.num_cells(); ++i) coef.source[i] = coef.absorption[i] * e0;
  for (std::size_t b = 0; b < g.num_boundary_faces(); ++b) coef.incoming_flux[b] = kC * 0.5 * e0;
  loqd::LowOrderSystem sys(g, true);
  const auto sol = sys.solve(coef);
  for (double e : sol.energy) CHECK(e == doctest::Approx(e0).epsilon(1e-13));
  for (double f : sol.flux) CHECK(std::abs(f) <= 1e-12 * kC * e0);
}

TEST_CASE("single cell decay balances leakage and absorption") {
  const MaterialGrid g(1.0, 1.0, 1, 1);
  const double inv_dt = 10.0;
  auto coef = vacuum_coefficients(g, 0.4, inv_dt);
  coef.previous_energy[0] = 1.0;
  loqd::LowOrderSystem sys(g, true);
  const auto sol = sys.solve(coef);
  const double e = sol.energy[0];
  CHECK(e < 1.0);
  CHECK(e > 0.0);
  const double lhs = (e - 1.0) * inv_dt;
  const double rhs = -leakage(g, sol.flux) / g.cell_area() - coef.absorption[0] * e;
  CHECK(std::abs(lhs - rhs) <= 1e-12 * std::abs(lhs));
  const auto res = loqd::cell_balance_residual(g, coef, sol);
  CHECK(std::abs(res[0]) <= 1e-12 * std::abs(lhs));
}

TEST_CASE("summed cell balance telescopes to the boundary") {
  const MaterialGrid g(1.2, 0.8, 6, 4);
  const double inv_dt = 5.0;
  auto coef = vacuum_coefficients(g, 1.3, inv_dt);
  for (std::size_t i = 0; i < g.num_cells(); ++i) {
    coef.previous_energy[i] = 1.0 + 0.1 * static_cast<double>(i % 5);
    coef.source[i] = 0.3 * static_cast<double>(i % 3);
  }
  coef.incoming_flux[0] = 2.0;
  loqd::LowOrderSystem sys(g, true);
  const auto sol = sys.solve(coef);
  double change = 0.0;
  double sink = 0.0;
  for (std::size_t i = 0; i < g.num_cells(); ++i) {
    change += (sol.energy[i] - coef.previous_energy[i]) * inv_dt * g.cell_area();
    sink += (coef.absorption[i] * sol.energy[i] - coef.source[i]) * g.cell_area();
  }
  CHECK(std::abs(change + sink + leakage(g, sol.flux)) <= 1e-12 * std::abs(change));
}

TEST_CASE("reused factorization matches a fresh solve") {
  const MaterialGrid g(1.0, 1.0, 6, 6);
  auto coef = vacuum_coefficients(g, 2.0, 8.0);
  for (std::size_t i = 0; i < g.num_cells(); ++i) coef.previous_energy[i] = 1.0 + 0.01 * i;
  coef.incoming_flux[3] = 1.0;
  loqd::LowOrderSystem reused(g, true);
  (void)reused.solve(coef, 2);
  for (double& a : coef.absorption) a *= 1.0 + 1e-6;
  for (double& d : coef.drag) d *= 1.0 - 1e-6;
  const auto warm = reused.solve(coef, 2);
  loqd::LowOrderSystem fresh(g, true);
  const auto cold = fresh.solve(coef, 0);
  for (std::size_t i = 0; i < g.num_cells(); ++i) {
    CHECK(warm.energy[i] == doctest::Approx(cold.energy[i]).epsilon(1e-12));
  }
  reused.clear_factorizations();
  const auto again = reused.solve(coef, 2);
  for (std::size_t i = 0; i < g.num_cells(); ++i) CHECK(again.energy[i] == cold.energy[i]);
}

TEST_CASE("face opacity") {
  const MaterialGrid g(2.0, 1.0, 2, 1);
  const std::vector<double> k = {1.0, 10.0, 3.0, 30.0};  // [cell][g], two groups
  CHECK(loqd::face_opacity(g, k, 2, g.x_face(1, 0), 0) == 2.0);
  CHECK(loqd::face_opacity(g, k, 2, g.x_face(1, 0), 1) == 20.0);
  CHECK(loqd::face_opacity(g, k, 2, g.x_face(0, 0), 1) == 10.0);
  CHECK(loqd::face_opacity(g, k, 2, g.y_face(1, 1), 0) == 3.0);
}

TEST_CASE("spectrum-weighted closures") {
  const MaterialGrid g(1.0, 1.0, 1, 1);
  auto mg = loqd::MultigroupFields::zeros(g, 2);
  mg.energy = {1.0, 3.0};
  std::fill(mg.boundary_energy.begin(), mg.boundary_energy.end(), 0.0);
  for (std::size_t b = 0; b < g.num_boundary_faces(); ++b) {
    mg.boundary_energy[b * 2] = 1.0;
    mg.boundary_energy[b * 2 + 1] = 3.0;
  }
  const std::size_t f = g.x_face(0, 0);
  mg.flux[f * 2] = 3.0;
  mg.flux[f * 2 + 1] = -1.0;
  auto moments = isotropic_moments(g, 2);
  moments.cell_tensor[0] = {0.5, 0.25, 0.25, 0.0};
  moments.cell_tensor[1] = {0.25, 0.5, 0.25, 0.1};

  loqd::GroupProperties props{2, {2.0, 4.0}, {1.0, 1.0}};
  const auto a = loqd::compute_grey_closures(g, mg, props, moments);
  CHECK(a.kappa_e[0] == doctest::Approx(3.5).epsilon(1e-15));
  CHECK(a.kappa_b[0] == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(a.cell_tensor[0].xx == doctest::Approx((0.5 + 3 * 0.25) / 4).epsilon(1e-15));
  CHECK(a.cell_tensor[0].xy == doctest::Approx(0.3 / 4).epsilon(1e-15));

  props.kappa = {1.0, 2.0};
  const auto b = loqd::compute_grey_closures(g, mg, props, moments);
  CHECK(b.drag[f] == doctest::Approx(1.25).epsilon(1e-15));
  CHECK(b.eta[f] == doctest::Approx(((1.0 - 1.25) * 3.0 + (2.0 - 1.25) * -1.0) / 4.0).epsilon(1e-15));
  CHECK(b.kappa_e[0] >= 1.0);
  CHECK(b.kappa_e[0] <= 2.0);
}

TEST_CASE("single group closures are the group values") {
  const MaterialGrid g(1.0, 1.0, 2, 2);
  auto mg = loqd::MultigroupFields::zeros(g, 1);
  std::fill(mg.energy.begin(), mg.energy.end(), 0.5);
  std::fill(mg.boundary_energy.begin(), mg.boundary_energy.end(), 0.5);
  for (std::size_t f = 0; f < g.num_faces(); ++f) mg.flux[f] = 0.1 * (f % 3) - 0.1;
  auto moments = isotropic_moments(g, 1);
  moments.cell_tensor[2] = {0.4, 0.35, 0.25, -0.05};
  const loqd::GroupProperties props{1, {7.0, 7.0, 7.0, 7.0}, {1.0, 1.0, 1.0, 1.0}};
  const auto c = loqd::compute_grey_closures(g, mg, props, moments);
  for (std::size_t i = 0; i < 4; ++i) CHECK(c.kappa_e[i] == doctest::Approx(7.0).epsilon(1e-15));
  for (double e : c.eta) CHECK(std::abs(e) <= 1e-15);
  CHECK(c.cell_tensor[2].xy == doctest::Approx(-0.05).epsilon(1e-15));
}

TEST_CASE("cold spectrum falls back to Planck weights") {
  const MaterialGrid g(1.0, 1.0, 1, 1);
  const auto mg = loqd::MultigroupFields::zeros(g, 2);
  const auto moments = isotropic_moments(g, 2);
  const loqd::GroupProperties props{2, {2.0, 4.0}, {3.0, 1.0}};
  const auto c = loqd::compute_grey_closures(g, mg, props, moments);
  CHECK(c.kappa_e[0] == doctest::Approx(2.5).epsilon(1e-15));
  CHECK(c.kappa_b[0] == doctest::Approx(2.5).epsilon(1e-15));
  CHECK(std::isfinite(c.drag[0]));
}

namespace {

loqd::GreyClosures grey_closures(const MaterialGrid& g, double ke, double kb) {
  loqd::GreyClosures c;
  c.kappa_e.assign(g.num_cells(), ke);
  c.kappa_b.assign(g.num_cells(), kb);
  c.cell_tensor.assign(g.num_cells(), EddingtonTensor{});
  c.face_tensor.assign(g.num_faces(), EddingtonTensor{});
  c.drag.assign(g.num_faces(), ke);
  c.eta.assign(g.num_faces(), 0.0);
  c.boundary_factor.assign(g.num_boundary_faces(), 0.5);
  c.incoming_flux.assign(g.num_boundary_faces(), 0.0);
  return c;
}

}  // namespace

TEST_CASE("grey equilibrium cell needs one Newton iterate") {
  const MaterialGrid g(1.0, 1.0, 1, 1);
  const physics::PhysicalConstants k;
  const physics::MaterialEOS eos;
  auto cl = grey_closures(g, 5.0, 5.0);
  std::fill(cl.incoming_flux.begin(), cl.incoming_flux.end(), k.c * 0.5 * k.a_r);
  const std::vector<double> e_prev = {k.a_r};
  const std::vector<double> f_prev(g.num_faces(), 0.0);
  const std::vector<double> t_prev = {1.0};
  loqd::GreyInputs in{e_prev, f_prev, t_prev, t_prev, 50.0, 1e-13, 100};
  loqd::LowOrderSystem sys(g, true);
  const auto r = loqd::solve_grey_meb(sys, cl, eos, k, in);
  CHECK(r.newton_iterations == 1);
  CHECK(r.state.temperature[0] == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(r.state.energy[0] == doctest::Approx(k.a_r).epsilon(1e-13));
}

TEST_CASE("grey Newton matches a scalar material balance and conserves energy") {
  const MaterialGrid g(0.9, 0.9, 3, 3);
  const physics::PhysicalConstants k;
  const physics::MaterialEOS eos;
  const double ke = 20.0;
  const double kb = 12.0;
  auto cl = grey_closures(g, ke, kb);
  cl.incoming_flux[0] = 0.05;
  const std::vector<double> e_prev(g.num_cells(), 1e-6 * k.a_r);
  const std::vector<double> f_prev(g.num_faces(), 0.0);
  std::vector<double> t_prev(g.num_cells());
  for (std::size_t i = 0; i < t_prev.size(); ++i) t_prev[i] = 0.5 + 0.05 * static_cast<double>(i);
  const double inv_dt = 1.0 / 0.02;
  loqd::GreyInputs in{e_prev, f_prev, t_prev, t_prev, inv_dt, 1e-13, 100};
  loqd::LowOrderSystem sys(g, true);
  const auto r = loqd::solve_grey_meb(sys, cl, eos, k, in);
  REQUIRE(r.newton_iterations > 1);
  double before = 0.0;
  double after = 0.0;
  for (std::size_t i = 0; i < g.num_cells(); ++i) {
    const double t = scalar_meb(eos.cv, inv_dt, t_prev[i], ke, kb, r.state.energy[i]);
    CHECK(r.state.temperature[i] == doctest::Approx(t).epsilon(1e-12));
    CHECK(r.state.temperature[i] < t_prev[i]);
    before += (e_prev[i] + eos.cv * t_prev[i]) * g.cell_area();
    after += (r.state.energy[i] + eos.cv * r.state.temperature[i]) * g.cell_area();
  }
  const double inflow = -leakage(g, r.state.flux);
  CHECK(std::abs(after - before - inflow / inv_dt) <= 1e-12 * after);
}
