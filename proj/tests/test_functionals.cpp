#include "catch_amalgamated.hpp"

#include <mahlerlab/catalog.hpp>
#include <mahlerlab/functionals.hpp>

using namespace mahlerlab;
using namespace mahlerlab::functionals;
using Catch::Approx;

namespace {

std::vector<geom::ConvexBody> mixed_bodies() {
  using namespace catalog;
  std::vector<geom::ConvexBody> out{
      interval(), cube(2), simplex(2), simplex(3), crosspolytope(3), unit_ball(2), unit_ball(3), random_hull(2, 7, 1),
      random_hull(3, 9, 2), geom::product(interval(), simplex(2)), geom::product(unit_ball(2), interval()),
      geom::apply_affine(geom::AffineMap::make(Eigen::Matrix2d{{1.5, 0.4}, {-0.2, 0.7}}, Eigen::Vector2d(0.3, -0.1)), unit_ball(2)),
      geom::apply_affine(geom::AffineMap::make(Eigen::Matrix3d{{1, 0.3, 0}, {0, 1, 0.2}, {0.1, 0, 2}}, Eigen::Vector3d(0.1, 0.2, 0.3)),
                         geom::product(simplex(1), simplex(2))),
      geom::ellipsoid(Eigen::Vector4d(0.1, 0, 0, -0.2), Eigen::Vector4d(1, 2, 0.5, 1.5).asDiagonal().toDenseMatrix()),
  };
  return out;
}

geom::ConvexBody centered(const geom::ConvexBody& K) { return geom::translate(K, -geom::barycenter(K)); }

// 2 ∫_0^∞ (pt / sinh pt)^{1/p} dt, the one-dimensional factor of ℳ_p for [-1,1]^n
double cube_mahler_p_factor(double p) {
  quad::QuadConfig cfg;
  cfg.rel_tol = 1e-12;
  auto f = [p](double t) {
    const double a = p * t;
    if (a < 1e-6) return 1.0;
    const double log_sinh = a + std::log1p(-std::exp(-2 * a)) - std::log(2.0);
    return std::exp((std::log(a) - log_sinh) / p);
  };
  auto r = quad::integrate_interval(f, 0.0, 120.0, cfg, {1.0 / p, 10.0 / p, 1.0, 5.0, 20.0});
  return 2.0 * 2.0 * r.value;
}

}  // namespace

TEST_CASE("tilde_h closed forms", "[functionals][tilde_h]") {
  for (const auto& K : mixed_bodies()) CHECK(std::abs(tilde_h(K, Vec::Zero(K.dim()))) < 1e-13);
  CHECK(tilde_h(catalog::interval(), Vec::Constant(1, 2.0)) == Approx(std::log(std::sinh(1.0))).epsilon(1e-13));
  CHECK(tilde_h(catalog::interval(), Vec::Constant(1, 2.0)) == Approx(0.1614394).epsilon(1e-6));
  // tiny and huge arguments stay finite and accurate
  const auto K = catalog::cube(3);
  const Vec tiny = Vec::Constant(3, 1e-9);
  CHECK(std::abs(tilde_h(K, tiny) - 3 * (1e-18 / 6)) < 1e-15);
  const Vec big = Vec::Constant(3, 400.0);
  CHECK(tilde_h(K, big) == Approx(3 * (400.0 - std::log(800.0))).epsilon(1e-12));
}

TEST_CASE("tilde_h matches direct cubature of the body average", "[functionals][tilde_h][property]") {
  Rng rng(31);
  for (const auto& K : mixed_bodies()) {
    for (int t = 0; t < 4; ++t) {
      const Vec x = rng.normal_vec(K.dim()) * (t + 0.5);
      quad::QuadConfig cfg;
      cfg.rel_tol = 1e-12;
      const auto ref = tilde_h_by_cubature(K, x, cfg);
      INFO("kind=" << geom::to_string(K.kind()) << " n=" << K.dim() << " |x|=" << x.norm());
      CHECK(std::abs(tilde_h(K, x) - ref.value) <= 1e-9 * std::max(1.0, std::abs(ref.value)));
    }
  }
}

TEST_CASE("tilde_h shift rule, convexity and the h bound", "[functionals][tilde_h][property]") {
  Rng rng(37);
  for (int t = 0; t < 30; ++t) {
    const int n = 1 + t % 3;
    const auto K = catalog::random_hull(n, n + 5, 700 + t);
    const Vec a = geom::barycenter(K);
    const Vec x = 3 * rng.normal_vec(n), y = 3 * rng.normal_vec(n);
    CHECK(std::abs(tilde_h(geom::translate(K, -a), x) - (tilde_h(K, x) - a.dot(x))) <= 1e-8 * std::max(1.0, std::abs(tilde_h(K, x))));
    CHECK(tilde_h(K, 0.5 * (x + y)) <= 0.5 * (tilde_h(K, x) + tilde_h(K, y)) + 1e-12);
    CHECK(tilde_h(K, x) <= geom::support(K, x) + 1e-12);
  }
}

TEST_CASE("polar volume, both routes", "[functionals][polar_volume]") {
  CHECK(polar_volume(catalog::cube(2), Route::Geometric).value == Approx(2.0).epsilon(1e-12));
  CHECK(polar_volume(catalog::cube(2), Route::Integral).value == Approx(2.0).epsilon(1e-7));
  CHECK(polar_volume(geom::ball(2, 2.0), Route::Geometric).value == Approx(kPi / 4).epsilon(1e-12));
  CHECK(polar_volume(geom::ball(2, 2.0), Route::Integral).value == Approx(kPi / 4).epsilon(1e-7));
  CHECK_THROWS_AS(polar_volume(catalog::simplex(2)), Error);

  for (int n = 1; n <= 3; ++n) {
    std::vector<geom::ConvexBody> cat{catalog::cube(n), centered(catalog::simplex(n)), catalog::unit_ball(n)};
    if (n >= 2) cat.push_back(catalog::crosspolytope(n));
    quad::QuadConfig cfg;
    cfg.rel_tol = 1e-5;
    for (const auto& K : cat) {
      const double g = polar_volume(K, Route::Geometric).value;
      const auto in = polar_volume(K, Route::Integral, cfg);
      INFO("n=" << n << " kind=" << geom::to_string(K.kind()));
      CHECK(std::abs(in.value - g) <= 1e-6 * g);
      if (K.kind() != geom::BodyKind::Ellipsoid) CHECK(volume(geom::polar(K)) == Approx(g).epsilon(1e-10));
    }
  }
  // non-centered ellipsoid: the polar is still an ellipsoid in closed form
  const auto E = geom::ball(2, 1.0, Eigen::Vector2d(0.3, 0.1));
  CHECK(polar_volume(E, Route::Integral).value == Approx(polar_volume(E, Route::Geometric).value).epsilon(1e-6));
}

TEST_CASE("Mahler volume", "[functionals][mahler]") {
  CHECK(mahler(catalog::cube(1)).value == Approx(4.0).epsilon(1e-7));
  CHECK(mahler(catalog::cube(2), Route::Geometric).value == Approx(16.0).epsilon(1e-12));
  CHECK(mahler(catalog::cube(2)).value == Approx(16.0).epsilon(1e-6));

  Rng rng(41);
  for (int t = 0; t < 20; ++t) {
    const int n = 2 + t % 2;
    auto K = centered(catalog::random_hull(n, n + 5, 800 + t));
    Mat A;
    for (;;) {
      A = Mat(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) A(i, j) = rng.normal();
      Eigen::JacobiSVD<Mat> svd(A);
      if (svd.singularValues()(0) / svd.singularValues()(n - 1) <= 20) break;
    }
    const auto AK = geom::apply_affine(geom::AffineMap::linear(A), K);
    const double m0 = mahler(K, Route::Geometric).value;
    CHECK(std::abs(mahler(AK, Route::Geometric).value - m0) <= 1e-6 * m0);
    if (t < 4) {
      quad::QuadConfig cfg;
      cfg.rel_tol = 1e-5;
      const auto mi = mahler(AK, Route::Integral, cfg);
      CHECK(mi.converged);
      CHECK(std::abs(mi.value - m0) <= std::max(1e-5 * m0, mi.error));
    }
  }
}

TEST_CASE("p-Mahler volume", "[functionals][mahler_p]") {
  const auto I = catalog::cube(1);
  CHECK(mahler_p(I, 1.0).value == Approx(kPi * kPi).epsilon(1e-7));
  // cross-check with the value of the kernel invariant: (4π)(π/4)
  CHECK(mahler_p(I, 1.0).value == Approx(4 * kPi * kPi / 4).epsilon(1e-7));
  CHECK_THROWS_AS(mahler_p(I, 0.0), Error);
  CHECK_THROWS_AS(mahler_p(I, -1.0), Error);

  for (double p : {1.0, 4.0, 64.0}) {
    for (int n = 1; n <= 2; ++n) {
      const double oracle = std::pow(cube_mahler_p_factor(p), n);
      CHECK(mahler_p(catalog::cube(n), p).value == Approx(oracle).epsilon(1e-6));
    }
  }
  double prev = std::numeric_limits<double>::infinity();
  for (double p : {1.0, 4.0, 16.0, 64.0, 256.0, 4096.0}) {
    const double v = cube_mahler_p_factor(p);
    CHECK(v < prev);
    CHECK(v > 4.0);
    prev = v;
  }
  CHECK(cube_mahler_p_factor(4096.0) == Approx(4.0).epsilon(3e-3));

  const auto K = centered(catalog::random_hull(2, 6, 77));
  const double m = mahler_p(K, 1.0).value;
  for (double lam : {0.5, 3.0}) CHECK(std::abs(mahler_p(geom::scale(K, lam), 1.0).value - m) <= 1e-6 * m);
}

TEST_CASE("Jensen comparison", "[functionals][jensen]") {
  const auto I = catalog::interval();
  auto j0 = jensen_gap(I, Vec::Zero(1), Vec::Zero(1));
  CHECK(j0.lhs == 1.0);
  CHECK(j0.rhs == Approx(2.0));
  auto j3 = jensen_gap(I, Vec::Zero(1), Vec::Constant(1, 3.0));
  CHECK(j3.lhs == Approx(std::exp(1.5)));
  CHECK(j3.rhs == Approx(2.0 * std::sinh(3.0) / 3.0));
  CHECK(j3.lhs <= j3.rhs);
  CHECK_THROWS_AS(jensen_gap(I, Vec::Constant(1, 2.0), Vec::Zero(1)), Error);

  Rng rng(43);
  int at_barycenter = 0, corrected = 0;
  for (int t = 0; t < 1000; ++t) {
    const int n = 1 + t % 3;
    const auto K = (t % 10 == 0) ? catalog::unit_ball(n) : catalog::random_hull(n, n + 4, 900 + t % 50);
    const Vec b = geom::barycenter(K);
    const Vec x = rng.uniform(0.0, 20.0) * rng.unit_vec(n);
    const auto jb = jensen_gap(K, b, x);
    at_barycenter += jb.log_lhs > jb.log_rhs + 1e-8;
    // arbitrary a in K: the comparison holds with the extra factor e^{<a - b, x>}
    const auto V = geom::vertices(K.kind() == geom::BodyKind::Ellipsoid ? catalog::cube(n, 0.5) : K);
    Vec w(V.size());
    for (int i = 0; i < w.size(); ++i) w(i) = -std::log(rng.uniform() + 1e-300);
    w /= w.sum();
    Vec a = Vec::Zero(n);
    for (int i = 0; i < w.size(); ++i) a += w(i) * V[i];
    const auto ja = jensen_gap(K, a, x);
    corrected += ja.log_lhs > ja.log_rhs + (a - b).dot(x) + 1e-8;
  }
  CHECK(at_barycenter == 0);
  CHECK(corrected == 0);
}

TEST_CASE("Jensen comparison fails near the boundary without the barycenter term", "[functionals][jensen]") {
  // K = [-1/2, 1/2], a = 1/2, x = t > 0: lhs = 1 while rhs = 2 e^{-t} sinh(t) / t < 1 for t > 1
  const auto I = catalog::interval();
  for (double t : {2.0, 5.0, 20.0}) {
    const auto jp = jensen_gap(I, Vec::Constant(1, 0.5), Vec::Constant(1, t));
    CHECK(jp.lhs == Approx(1.0));
    CHECK(jp.rhs == Approx(2.0 * std::exp(-t) * std::sinh(t) / t));
    CHECK(jp.lhs > jp.rhs);
  }
}

TEST_CASE("shifted polar integral derivatives", "[functionals][polar_integral]") {
  Rng rng(47);
  for (const auto& K : mixed_bodies()) {
    for (int t = 0; t < 3; ++t) {
      const int n = K.dim();
      const Vec b = geom::barycenter(K);
      const Vec z = b + 0.3 * geom::interior_depth(K, b) * rng.unit_vec(n);
      const auto F = shifted_polar_integral(K, z);
      const double h = 1e-5;
      for (int i = 0; i < n; ++i) {
        const Vec e = Vec::Unit(n, i) * h;
        const auto Fp = shifted_polar_integral(K, z + e), Fm = shifted_polar_integral(K, z - e);
        const double fd = (Fp.value - Fm.value) / (2 * h);
        CHECK(std::abs(fd - F.grad(i)) <= 1e-5 * std::max(1.0, F.grad.norm()));
        const Vec fdh = (Fp.grad - Fm.grad) / (2 * h);
        CHECK((fdh - F.hess.col(i)).norm() <= 1e-5 * std::max(1.0, F.hess.norm()));
      }
    }
  }
}
