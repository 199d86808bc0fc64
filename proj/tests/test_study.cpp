#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mlqd/study.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

using namespace mlqd;
using mesh::MaterialGrid;

namespace {

std::vector<double> sample(const MaterialGrid& g, double (*f)(double, double)) {
  std::vector<double> v(g.num_cells());
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = f((g.cell_ix(i) + 0.5) * g.dx(), (g.cell_iy(i) + 0.5) * g.dy());
  }
  return v;
}

study::LadderRun fake_run(double h, double scale) {
  study::LadderRun r;
  r.h = h;
  r.grid = MaterialGrid(1.0, 1.0, 2, 2);
  r.temperature = {1.0, 1.0, 1.0, 1.0 + scale};
  r.energy = {2.0, 2.0, 2.0 + scale, 2.0};
  return r;
}

}  // namespace

TEST_CASE("restriction to the coarse grid") {
  const MaterialGrid coarse(2.0, 1.0, 4, 2);
  const MaterialGrid fine(2.0, 1.0, 8, 4);

  const std::vector<double> flat(fine.num_cells(), 3.25);
  for (double v : study::restrict_to_coarse(fine, flat, coarse)) CHECK(v == 3.25);

  std::vector<double> checker(fine.num_cells());
  for (std::size_t i = 0; i < checker.size(); ++i) {
    checker[i] = (fine.cell_ix(i) + fine.cell_iy(i)) % 2 ? 1.0 : -1.0;
  }
  for (double v : study::restrict_to_coarse(fine, checker, coarse)) CHECK(v == 0.0);

  const auto lin = [](double x, double y) { return 3.0 * x - 2.0 * y + 1.0; };
  const auto r = study::restrict_to_coarse(fine, sample(fine, lin), coarse);
  const auto want = sample(coarse, lin);
  for (std::size_t i = 0; i < r.size(); ++i) CHECK(r[i] == doctest::Approx(want[i]).epsilon(1e-14));

  double fine_mean = 0.0;
  double coarse_mean = 0.0;
  for (double v : sample(fine, lin)) fine_mean += v / fine.num_cells();
  for (double v : r) coarse_mean += v / coarse.num_cells();
  CHECK(coarse_mean == doctest::Approx(fine_mean).epsilon(1e-14));

  CHECK_THROWS_AS(study::restrict_to_coarse(MaterialGrid(2.0, 1.0, 6, 4), std::vector<double>(24), coarse),
                  std::invalid_argument);
  CHECK_THROWS_AS(study::restrict_to_coarse(fine, std::vector<double>(3), coarse), std::invalid_argument);
}

TEST_CASE("norms") {
  const MaterialGrid g(2.0, 1.0, 2, 1);
  CHECK(study::l2_norm(g, std::vector<double>{3.0, 4.0}) == doctest::Approx(5.0).epsilon(1e-15));
  const std::vector<double> a = {1.0, 2.0};
  const auto same = study::diff_norms(g, a, a);
  CHECK(same.absolute == 0.0);
  CHECK(same.relative == 0.0);

  const std::vector<double> b = {1.5, 2.0};
  const auto d = study::diff_norms(g, a, b);
  CHECK(d.absolute == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(d.relative == doctest::Approx(0.5 / std::sqrt(5.0)).epsilon(1e-15));

  const std::vector<double> a7 = {7.0, 14.0};
  const std::vector<double> b7 = {10.5, 14.0};
  const auto d7 = study::diff_norms(g, a7, b7);
  CHECK(d7.absolute == doctest::Approx(7.0 * d.absolute).epsilon(1e-15));
  CHECK(d7.relative == doctest::Approx(d.relative).epsilon(1e-15));
  CHECK_THROWS_AS(study::diff_norms(g, a, std::vector<double>{1.0}), std::invalid_argument);
}

TEST_CASE("rate from consecutive differences") {
  study::RefinementLadder ladder{study::Varied::h_moc, 0.6, {0.4, 0.2, 0.1}};
  // differences 19.1 then 9.70 in the top-right cell (area 0.25)
  std::vector<study::LadderRun> runs = {fake_run(0.4, 0.0), fake_run(0.2, 2.0 * 19.1),
                                        fake_run(0.1, 2.0 * 19.1 - 2.0 * 9.70)};
  const auto rows = study::tabulate(ladder, runs);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].dt.absolute == doctest::Approx(19.1).epsilon(1e-13));
  CHECK(std::isnan(rows[0].rho_t));
  CHECK(rows[1].dt.absolute == doctest::Approx(9.70).epsilon(1e-13));
  CHECK(rows[1].rho_t == doctest::Approx(1.97).epsilon(1e-3));
  CHECK(rows[1].ratio == doctest::Approx(6.0).epsilon(1e-15));
  CHECK(rows[1].rho_e == doctest::Approx(1.97).epsilon(1e-3));

  std::ostringstream out;
  study::write_study_csv(out, ladder, rows);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "h_mat,h_moc,ratio,dT,rho_T,dE,rho_E,dT_rel,dE_rel");
  std::getline(in, line);
  CHECK(line.rfind("0.59999999999999998,0.20000000000000001,", 0) == 0);
}

TEST_CASE("two-value ladder gives one row without a rate") {
  study::RefinementLadder ladder{study::Varied::h_moc, 0.6, {0.4, 0.2}};
  const auto rows = study::tabulate(ladder, {fake_run(0.4, 0.0), fake_run(0.2, 1.0)});
  REQUIRE(rows.size() == 1);
  CHECK(std::isnan(rows[0].rho_t));
}

TEST_CASE("ladder validation") {
  CHECK_NOTHROW((study::RefinementLadder{study::Varied::h_mat, 5e-3, {0.6, 0.3, 0.15}}.validate()));
  CHECK_THROWS_AS((study::RefinementLadder{study::Varied::h_mat, 5e-3, {0.6}}.validate()),
                  std::invalid_argument);
  CHECK_THROWS_AS((study::RefinementLadder{study::Varied::h_mat, 5e-3, {0.6, 0.2}}.validate()),
                  std::invalid_argument);
  CHECK_THROWS_AS((study::RefinementLadder{study::Varied::h_moc, 0.0, {0.2, 0.1}}.validate()),
                  std::invalid_argument);
}

namespace {

driver::Problem slab(double h_mat, double h_moc) {
  driver::Problem p;
  p.grid = MaterialGrid::with_cell_width(1.2, 1.2, h_mat);
  p.quadrature = quadrature::build_product_quadrature(1, 2);
  p.h_moc = h_moc;
  p.boundary[0] = driver::BoundarySpec::planckian(1.0);
  return p;
}

}  // namespace

TEST_CASE("material-grid ladder runs end to end") {
  const study::RefinementLadder ladder{study::Varied::h_mat, 0.1, {0.6, 0.3}};
  std::vector<double> seen;
  const auto res = study::run_ladder(ladder, slab, {0.02, 2}, {},
                                     [&](const study::LadderRun& r) { seen.push_back(r.h); });
  CHECK(res.failure.empty());
  CHECK(seen == std::vector<double>{0.6, 0.3});
  REQUIRE(res.rows.size() == 1);
  CHECK(res.runs[1].grid.nx() == 4);
  CHECK(res.rows[0].dt.absolute > 0.0);
  CHECK(res.rows[0].ratio == doctest::Approx(3.0).epsilon(1e-14));
}

TEST_CASE("a failing run keeps the finished rows") {
  const study::RefinementLadder ladder{study::Varied::h_moc, 0.6, {0.2, 0.1, 0.05}};
  const auto factory = [](double h_mat, double h_moc) {
    if (h_moc < 0.07) throw std::runtime_error("boom");
    return slab(h_mat, h_moc);
  };
  const auto res = study::run_ladder(ladder, factory, {0.02, 1}, {});
  CHECK(res.runs.size() == 2);
  CHECK(res.rows.size() == 1);
  CHECK(res.failure.find("boom") != std::string::npos);
  CHECK(res.failure.find("h = 0.05") != std::string::npos);
}
