#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mlqd/mesh.hpp"
#include "mlqd/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

using namespace mlqd;
using mesh::MaterialGrid;
using mesh::Side;

namespace {

double max_rel(const std::vector<double>& got, const std::vector<double>& want) {
  double m = 0.0;
  for (std::size_t i = 0; i < got.size(); ++i) m = std::max(m, std::abs(got[i] - want[i]) / want[i]);
  return m;
}

std::vector<double> widths(const mesh::DirectionalGrid& d) {
  std::vector<double> w;
  for (const auto& r : d.rays) w.push_back(r.width);
  std::sort(w.begin(), w.end());
  return w;
}

}  // namespace

TEST_CASE("material grid indexing") {
  const MaterialGrid g(3.0, 2.0, 3, 2);
  CHECK(g.num_cells() == 6);
  CHECK(g.num_x_faces() == 8);
  CHECK(g.num_y_faces() == 9);
  CHECK(g.num_boundary_faces() == 10);
  CHECK(g.cell(2, 1) == 5);
  CHECK(g.cell_ix(5) == 2);
  CHECK(g.cell_iy(5) == 1);

  const auto [lo, hi] = g.face_cells(g.x_face(1, 1));
  CHECK(lo == static_cast<std::ptrdiff_t>(g.cell(0, 1)));
  CHECK(hi == static_cast<std::ptrdiff_t>(g.cell(1, 1)));
  CHECK(g.face_cells(g.x_face(0, 0)).first == -1);
  CHECK(g.face_cells(g.y_face(2, 2)).second == -1);
  CHECK(g.face_length(g.x_face(0, 0)) == 1.0);

  std::set<std::size_t> seen;
  for (std::size_t b = 0; b < g.num_boundary_faces(); ++b) {
    const std::size_t f = g.boundary_face(b);
    CHECK(g.boundary_index(f) == static_cast<std::ptrdiff_t>(b));
    seen.insert(f);
  }
  CHECK(seen.size() == g.num_boundary_faces());
  CHECK(g.boundary_side(0) == Side::left);
  CHECK(g.side_face(Side::top, 1) == g.y_face(1, 2));
  CHECK(g.boundary_index(g.x_face(1, 0)) == -1);
}

TEST_CASE("cell width must divide the domain") {
  CHECK(MaterialGrid::with_cell_width(6.0, 6.0, 0.6).nx() == 10);
  CHECK(MaterialGrid::with_cell_width(6.0, 6.0, 0.15).ny() == 40);
  CHECK_THROWS_AS(MaterialGrid::with_cell_width(6.0, 6.0, 0.7), std::invalid_argument);
  CHECK_THROWS_AS(MaterialGrid(1.0, 1.0, 0, 1), std::invalid_argument);
}

TEST_CASE("unit cell at 45 degrees") {
  const MaterialGrid g(1.0, 1.0, 1, 1);
  const double s = 1.0 / std::sqrt(2.0);
  const auto d = mesh::trace_direction(g, 1.0, 1.0, 1.0);
  REQUIRE(d.rays.size() == 2);
  for (const auto& r : d.rays) {
    CHECK(r.width == doctest::Approx(s).epsilon(1e-14));
    REQUIRE(r.segment_count == 1);
    CHECK(d.segments_of(r)[0].length == doctest::Approx(s).epsilon(1e-14));
  }
  CHECK(mesh::cell_coverage(g, d)[0] == doctest::Approx(1.0).epsilon(1e-14));

  const auto fine = mesh::trace_direction(g, 1.0, 1.0, 0.2);
  // each initial ray halves twice
  CHECK(fine.rays.size() == 8);
  for (const auto& r : fine.rays) CHECK(r.width == doctest::Approx(s / 4.0).epsilon(1e-14));
}

TEST_CASE("near-axis direction on two cells") {
  const MaterialGrid g(2.0, 1.0, 2, 1);
  const double n = std::hypot(0.9998, 0.0200);
  const double ux = 0.9998 / n;
  const auto d = mesh::trace_direction(g, 0.9998, 0.0200, 0.25);
  const auto fc = mesh::face_coverage(g, d);
  CHECK(fc[g.x_face(1, 0)] == doctest::Approx(ux).epsilon(1e-10));
  const auto cc = mesh::cell_coverage(g, d);
  CHECK(cc[0] == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(cc[1] == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("coverage identities for every direction") {
  const auto quad = quadrature::build_product_quadrature(3, 4);
  for (double h_moc : {0.3, 0.11}) {
    const MaterialGrid g(1.5, 1.2, 5, 3);
    const auto chars = mesh::build_characteristic_grids(g, quad, h_moc);
    for (std::size_t a = 0; a < chars.num_planar(); ++a) {
      const auto& d = chars.planar(a);
      const std::vector<double> area(g.num_cells(), g.cell_area());
      CHECK(max_rel(mesh::cell_coverage(g, d), area) < 1e-10);
      CHECK(max_rel(mesh::face_coverage(g, d), mesh::projected_face_lengths(g, d)) < 1e-10);
      for (const auto& r : d.rays) CHECK(r.width <= h_moc * (1.0 + 1e-12));
    }
  }
}

TEST_CASE("segments are contiguous and nonempty") {
  const MaterialGrid g(2.0, 2.0, 4, 4);
  const auto d = mesh::trace_direction(g, -0.3, 0.8, 0.1);
  for (const auto& r : d.rays) {
    const auto segs = d.segments_of(r);
    REQUIRE(!segs.empty());
    for (std::size_t s = 0; s < segs.size(); ++s) {
      CHECK(segs[s].length > 0.0);
      if (s > 0) CHECK(segs[s].upwind_face == segs[s - 1].downwind_face);
    }
    CHECK(g.boundary_index(segs.front().upwind_face) >= 0);
    CHECK(g.boundary_index(segs.back().downwind_face) >= 0);
  }
}

TEST_CASE("directions sharing an in-plane projection share a ray set") {
  const auto quad = quadrature::build_product_quadrature(3, 2);
  const MaterialGrid g(1.0, 1.0, 2, 2);
  const auto chars = mesh::build_characteristic_grids(g, quad, 0.2);
  CHECK(chars.num_directions() == quad.size());
  CHECK(chars.num_planar() == 8);
  for (std::size_t m = 0; m < quad.size(); ++m) {
    const auto& d = chars.for_direction(m);
    const double s = quad[m].sin_polar();
    CHECK(d.ux == doctest::Approx(quad[m].x / s).epsilon(1e-14));
    CHECK(d.uy == doctest::Approx(quad[m].y / s).epsilon(1e-14));
  }
  std::size_t total = 0;
  for (std::size_t a = 0; a < chars.num_planar(); ++a) total += chars.directions_of(a).size();
  CHECK(total == quad.size());
}

TEST_CASE("reflection in x preserves ray widths") {
  const MaterialGrid g(3.0, 2.0, 3, 4);
  const auto a = widths(mesh::trace_direction(g, 0.4, 0.7, 0.13));
  const auto b = widths(mesh::trace_direction(g, -0.4, 0.7, 0.13));
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));
}

TEST_CASE("halving the ray width never coarsens") {
  const MaterialGrid g(6.0, 6.0, 10, 10);
  double prev_max = 1e300;
  std::size_t prev_count = 0;
  for (double h : {0.075, 0.0375, 0.01875}) {
    const auto d = mesh::trace_direction(g, 0.3, 0.95, h);
    const auto w = widths(d);
    CHECK(w.back() <= prev_max);
    CHECK(w.size() >= prev_count);
    prev_max = w.back();
    prev_count = w.size();
  }
}

TEST_CASE("at least eight rays cross each cell column") {
  const MaterialGrid g = MaterialGrid::with_cell_width(6.0, 6.0, 0.6);
  const auto quad = quadrature::build_product_quadrature(6, 6);
  const auto chars = mesh::build_characteristic_grids(g, quad, 0.075);
  for (std::size_t a = 0; a < chars.num_planar(); ++a) {
    const auto& d = chars.planar(a);
    std::vector<int> per_cell(g.num_cells(), 0);
    for (const auto& s : d.segments) ++per_cell[s.cell];
    CHECK(*std::min_element(per_cell.begin(), per_cell.end()) >= 8);
  }
}

TEST_CASE("mesh csv dump") {
  const MaterialGrid g(1.0, 1.0, 1, 1);
  const auto quad = quadrature::build_product_quadrature(1, 1);
  const auto chars = mesh::build_characteristic_grids(g, quad, 1.0);
  std::ostringstream out;
  mesh::write_mesh_csv(out, chars);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "m,k,s,cell,length,width");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 8);
}
