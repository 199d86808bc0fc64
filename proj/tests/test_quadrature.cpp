#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mlqd/quadrature.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <stdexcept>

using namespace mlqd;

namespace {

constexpr double kFourPi = 4.0 * std::numbers::pi;

struct Moments {
  double w = 0, x = 0, y = 0, z = 0, xx = 0, yy = 0, zz = 0, xy = 0;
};

Moments moments(const quadrature::AngularQuadrature& q) {
  Moments m;
  for (const auto& d : q.directions()) {
    m.w += d.weight;
    m.x += d.weight * d.x;
    m.y += d.weight * d.y;
    m.xx += d.weight * d.x * d.x;
    m.yy += d.weight * d.y * d.y;
    m.zz += d.weight * d.z * d.z;
    m.xy += d.weight * d.x * d.y;
  }
  return m;
}

std::filesystem::path temp_file(const char* name) {
  return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("smallest product set") {
  const auto q = quadrature::build_product_quadrature(1, 1);
  REQUIRE(q.size() == 4);
  const Moments m = moments(q);
  CHECK(m.w == doctest::Approx(kFourPi).epsilon(1e-14));
  CHECK(m.xx == doctest::Approx(kFourPi / 3.0).epsilon(1e-14));
  CHECK(m.yy == doctest::Approx(kFourPi / 3.0).epsilon(1e-14));
  // single polar node: cos = 1/sqrt(3), azimuth pi/4
  const double mu = 1.0 / std::sqrt(3.0);
  for (const auto& d : q.directions()) {
    CHECK(d.z == doctest::Approx(mu).epsilon(1e-14));
    CHECK(std::abs(d.x) == doctest::Approx(std::abs(d.y)).epsilon(1e-14));
    CHECK(d.weight == doctest::Approx(std::numbers::pi).epsilon(1e-14));
  }
}

TEST_CASE("product sets are symmetric and moment-exact") {
  for (std::size_t np : {1, 2, 3, 6}) {
    for (std::size_t na : {1, 2, 3, 6}) {
      const auto q = quadrature::build_product_quadrature(np, na);
      CHECK(q.size() == 4 * np * na);
      const Moments m = moments(q);
      CHECK(m.w == doctest::Approx(kFourPi).epsilon(1e-13));
      CHECK(std::abs(m.x) < 1e-13);
      CHECK(std::abs(m.y) < 1e-13);
      CHECK(m.xx == doctest::Approx(kFourPi / 3.0).epsilon(1e-13));
      CHECK(m.yy == doctest::Approx(kFourPi / 3.0).epsilon(1e-13));
      CHECK(m.zz == doctest::Approx(kFourPi / 3.0).epsilon(1e-13));
      CHECK(std::abs(m.xy) < 1e-13);
      CHECK_NOTHROW(q.check_moments(1e-12));
      for (const auto& d : q.directions()) {
        CHECK(d.x * d.x + d.y * d.y + d.z * d.z == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(d.z > 0.0);
        CHECK(d.weight > 0.0);
      }
    }
  }
}

TEST_CASE("144-direction set") {
  const auto q = quadrature::build_product_quadrature(6, 6);
  CHECK(q.size() == 144);
  CHECK(q.total_weight() == doctest::Approx(kFourPi).epsilon(1e-14));
}

TEST_CASE("rejects invalid direction sets") {
  CHECK_THROWS_AS(quadrature::AngularQuadrature({{1.0, 1.0, 0.0, 1.0}}), std::invalid_argument);
  CHECK_THROWS_AS(quadrature::AngularQuadrature({{0.6, 0.48, 0.64, -1.0}}), std::invalid_argument);
  CHECK_THROWS_AS(quadrature::AngularQuadrature({{0.0, 0.0, 1.0, 1.0}}), std::invalid_argument);
  CHECK_THROWS(quadrature::build_product_quadrature(0, 2));
  const quadrature::AngularQuadrature lopsided({{0.6, 0.48, 0.64, kFourPi}});
  CHECK_THROWS_AS(lopsided.check_moments(), std::invalid_argument);
}

TEST_CASE("file round trip") {
  const auto q = quadrature::build_product_quadrature(2, 3);
  const auto path = temp_file("mlqd_quad_roundtrip.txt");
  {
    std::ofstream out(path);
    out.precision(17);
    for (const auto& d : q.directions()) out << d.x << ' ' << d.y << ' ' << d.z << ' ' << d.weight << '\n';
  }
  const auto r = quadrature::load_quadrature(path.string());
  REQUIRE(r.size() == q.size());
  for (std::size_t m = 0; m < q.size(); ++m) {
    CHECK(r[m].x == q[m].x);
    CHECK(r[m].weight == q[m].weight);
  }
  std::filesystem::remove(path);
}

TEST_CASE("loading a set with wrong moments fails") {
  const auto path = temp_file("mlqd_quad_bad.txt");
  {
    std::ofstream out(path);
    out << "0.6 0.48 0.64 12.566370614359172\n";
  }
  CHECK_THROWS_AS(quadrature::load_quadrature(path.string()), std::invalid_argument);
  std::filesystem::remove(path);
  CHECK_THROWS(quadrature::load_quadrature("/nonexistent/quad.txt"));
}
