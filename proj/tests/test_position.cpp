#include "catch_amalgamated.hpp"

#include <mahlerlab/catalog.hpp>
#include <mahlerlab/position.hpp>

using namespace mahlerlab;
using namespace mahlerlab::position;
using Catch::Approx;

namespace {

geom::ConvexBody centered(const geom::ConvexBody& K) { return geom::translate(K, -geom::barycenter(K)); }

double polar_volume_by_polar_body(const geom::ConvexBody& K, const Vec& z) {
  return geom::volume(geom::polar(geom::translate(K, -z)));
}

}  // namespace

TEST_CASE("Santalo point of symmetric bodies and simplices", "[position][santalo]") {
  for (int n = 1; n <= 3; ++n) {
    for (const auto& K : {catalog::cube(n), catalog::unit_ball(n), catalog::crosspolytope(n)}) {
      const auto s = santalo_point(K);
      CHECK(s.converged);
      CHECK(s.point.norm() <= 1e-8);
    }
  }
  // ℳ(Δ_n - s) = (n+1)^{n+1} / n!
  for (int n = 1; n <= 3; ++n) {
    const auto s = santalo_point(catalog::simplex(n));
    CHECK(s.value == Approx(std::pow(n + 1.0, n + 1) / factorial(n)).epsilon(1e-9));
    CHECK(s.polar_barycenter.norm() <= 1e-9);
  }
  CHECK(santalo_point(catalog::simplex(2)).value == Approx(13.5).epsilon(1e-3));
}

TEST_CASE("Santalo point properties", "[position][santalo][property]") {
  Rng rng(61);
  for (int t = 0; t < 12; ++t) {
    const int n = 2 + t % 2;
    const auto K = catalog::random_hull(n, n + 3 + t % 4, 1000 + t);
    const auto s = santalo_point(K);
    REQUIRE(s.converged);
    CHECK(geom::interior_depth(K, s.point) > 0);
    // certificate through the polar body
    const auto pb = polar_barycenter_geometric(K, s.point);
    REQUIRE(pb.has_value());
    CHECK(pb->norm() <= 1e-5);
    // local minimality
    for (int k = 0; k < 20; ++k) {
      const Vec z = s.point + 1e-3 * rng.unit_vec(n);
      CHECK(functionals::mahler(geom::translate(K, -z), functionals::Route::Geometric).value >= s.value - 1e-6);
    }
    // Santalo inequality
    const double ball = factorial(n) * std::pow(unit_ball_volume(n), 2);
    CHECK(s.value <= ball + 1e-6);
    // translation covariance
    const Vec shift = rng.normal_vec(n);
    const auto s2 = santalo_point(geom::translate(K, shift));
    CHECK((s2.point - s.point - shift).norm() <= 1e-7);
  }
  const auto sb = santalo_point(geom::ellipsoid(Eigen::Vector2d(0.3, -1), Eigen::Matrix2d{{2, 0.5}, {0.5, 1}}));
  CHECK((sb.point - Eigen::Vector2d(0.3, -1)).norm() <= 1e-8);
  CHECK(sb.value == Approx(2 * kPi * kPi).epsilon(1e-9));
}

TEST_CASE("Santalo objective gradient against finite differences of the polar volume", "[position][santalo][property]") {
  Rng rng(67);
  for (int t = 0; t < 10; ++t) {
    const int n = 2 + t % 2;
    const auto K = catalog::random_hull(n, n + 4, 1100 + t);
    const Vec b = geom::barycenter(K);
    const Vec z = b + 0.5 * geom::interior_depth(K, b) * rng.unit_vec(n);
    const auto F = functionals::shifted_polar_integral(K, z);
    const double h = 1e-6;
    Vec fd(n);
    for (int i = 0; i < n; ++i) {
      const Vec e = Vec::Unit(n, i) * h;
      fd(i) = (polar_volume_by_polar_body(K, z + e) - polar_volume_by_polar_body(K, z - e)) / (2 * h);
    }
    const Vec grad = F.grad / factorial(n);
    CHECK((fd - grad).norm() <= 1e-5 * grad.norm());
  }
}

TEST_CASE("maximal inscribed ellipsoid", "[position][ellipsoid]") {
  for (int n = 1; n <= 3; ++n) {
    const auto E = inscribed_ellipsoid(catalog::cube(n));
    CHECK(E.center.norm() <= 1e-7);
    CHECK((E.shape - Mat::Identity(n, n)).norm() <= 1e-7);
    CHECK(E.min_slack >= -1e-9);
    CHECK(E.max_outer_ratio == Approx(std::sqrt(double(n))).epsilon(1e-6));
  }
  // triangle conv{0, e1, e2}: the Steiner inellipse, centered at the centroid with area π/(3√3) times the triangle
  const auto T = inscribed_ellipsoid(catalog::simplex(2));
  CHECK((T.center - Eigen::Vector2d(1.0 / 3, 1.0 / 3)).norm() <= 1e-7);
  CHECK(kPi * T.shape.determinant() == Approx(kPi / (3 * std::sqrt(3.0)) * 0.5).epsilon(1e-7));
  CHECK(T.max_outer_ratio == Approx(2.0).epsilon(1e-7));
  // it beats the incircle
  const double inradius = (2 - std::sqrt(2.0)) / 2;
  CHECK(T.shape.determinant() > inradius * inradius);

  for (int t = 0; t < 40; ++t) {
    const int n = 2 + t % 2;
    const auto K = catalog::random_hull(n, n + 3 + t % 5, 1200 + t);
    const auto E = inscribed_ellipsoid(K);
    CHECK(E.min_slack >= -1e-9);
    CHECK(E.max_outer_ratio <= n * (1 + 1e-7));
  }
  CHECK_THROWS_AS(inscribed_ellipsoid(catalog::unit_ball(2)), Error);
}

TEST_CASE("John normalization", "[position][john]") {
  const auto C = john_normalize(catalog::cube(2));
  CHECK(C.a.norm() <= 1e-7);
  CHECK(C.r == Approx(1.0).epsilon(1e-7));
  CHECK(C.ball_in_body >= -1e-8);
  CHECK(C.body_in_ball > 0);
  CHECK(C.polar_in_ball > 0);

  const auto D = john_normalize(centered(catalog::simplex(2)));
  CHECK(std::isfinite(D.r));
  CHECK(D.r > 0);
  CHECK(D.body_in_ball > 0);
  CHECK(D.polar_in_ball > 0);

  int failures = 0;
  for (int t = 0; t < 200; ++t) {
    const int n = 2 + t % 2;
    const auto K = centered(catalog::random_hull(n, n + 3 + t % 6, 1300 + t));
    const auto J = john_normalize(K);
    failures += (J.ball_in_body < -1e-8) + (J.body_in_ball < -1e-8) + (J.polar_in_ball < -1e-8);
    CHECK(J.outer_ratio <= 2 * n);
    CHECK(J.center_ratio < n);
  }
  CHECK(failures == 0);
  CHECK_THROWS_AS(john_normalize(catalog::simplex(2)), Error);
}
