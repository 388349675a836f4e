#include "catch_amalgamated.hpp"

#include <mahlerlab/catalog.hpp>
#include <mahlerlab/tube.hpp>

using namespace mahlerlab;
using namespace mahlerlab::tube;
using Catch::Approx;

namespace {

// strip of width 1: 𝒦(z, w) = π / (4 cosh^2(π (z - w̄) / 2))
cplx strip_kernel(cplx z, cplx w) {
  const cplx c = std::cosh(0.5 * kPi * (z - std::conj(w)));
  return kPi / (4.0 * c * c);
}

TubePoint tp(double x, double y) { return {Vec::Constant(1, x), Vec::Constant(1, y)}; }

geom::ConvexBody interval(double lo, double hi) {
  Mat A(2, 1);
  A << 1, -1;
  return geom::hpolytope(A, Eigen::Vector2d(hi, -lo));
}

Mat random_matrix(Rng& rng, int n) {
  for (;;) {
    Mat A(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) A(i, j) = rng.normal();
    Eigen::JacobiSVD<Mat> svd(A);
    if (svd.singularValues()(0) / svd.singularValues()(n - 1) < 10) return A;
  }
}

}  // namespace

TEST_CASE("interval kernel closed forms", "[tube][kernel]") {
  const auto I = catalog::interval();
  CHECK(bergman_diagonal(I, Vec::Zero(1)).value == Approx(kPi / 4).epsilon(1e-10));
  CHECK(B_invariant(I).value == Approx(kPi / 4).epsilon(1e-10));
  for (double s : {0.5, 2.0, 3.0})
    CHECK(bergman_diagonal(interval(-s / 2, s / 2), Vec::Zero(1)).value == Approx(kPi / (4 * s * s)).epsilon(1e-9));
  for (double a : {-0.3, 0.1, 0.45})
    CHECK(bergman_diagonal(I, Vec::Constant(1, a)).value == Approx(strip_kernel(cplx(0, a), cplx(0, a)).real()).epsilon(1e-8));

  Rng rng(51);
  for (int t = 0; t < 10; ++t) {
    const double lo = rng.uniform(-3, 3), len = rng.uniform(0.1, 5);
    CHECK(B_invariant(interval(lo, lo + len)).value == Approx(kPi / 4).epsilon(1e-8));
  }
}

TEST_CASE("off-diagonal kernel", "[tube][kernel]") {
  const auto I = catalog::interval();
  Rng rng(53);
  for (int t = 0; t < 10; ++t) {
    const auto z = tp(rng.uniform(-3, 3), rng.uniform(-0.4, 0.4));
    const auto w = tp(rng.uniform(-3, 3), rng.uniform(-0.4, 0.4));
    const auto k = bergman_kernel(I, z, w);
    const cplx exact = strip_kernel(cplx(z.x(0), z.y(0)), cplx(w.x(0), w.y(0)));
    CHECK(std::abs(k.value - exact) <= 1e-8 * std::abs(exact) + 1e-12);
  }
  // Hermitian symmetry in two dimensions
  const auto K = catalog::random_hull(2, 7, 5);
  const Vec b = geom::barycenter(K);
  const double r = geom::interior_depth(K, b);
  for (int t = 0; t < 5; ++t) {
    TubePoint z{rng.normal_vec(2), b + 0.5 * r * rng.unit_vec(2)}, w{rng.normal_vec(2), b + 0.5 * r * rng.unit_vec(2)};
    const auto kzw = bergman_kernel(K, z, w), kwz = bergman_kernel(K, w, z);
    CHECK(std::abs(kzw.value - std::conj(kwz.value)) <= 1e-7 * std::abs(kzw.value));
  }
  CHECK_THROWS_AS(bergman_kernel(I, tp(0, 0), tp(9, 0)), Error);
  try {
    bergman_kernel(I, tp(0, 0), tp(9, 0));
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::OscillationBudgetExceeded);
  }
  try {
    bergman_diagonal(I, Vec::Constant(1, 0.5));
    FAIL("boundary point accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::PointNotInterior);
  }
}

TEST_CASE("diagonal grows toward the boundary", "[tube][kernel][property]") {
  const auto I = catalog::interval();
  double prev = 0.0;
  for (int k = 2; k <= 8; ++k) {
    const double v = bergman_diagonal(I, Vec::Constant(1, 0.5 - std::ldexp(1.0, -k))).value;
    CHECK(v > prev);
    prev = v;
  }
  const auto sq = geom::product(I, I);
  CHECK(bergman_diagonal(sq, Vec::Zero(2)).value == Approx(kPi * kPi / 16).epsilon(1e-9));
}

TEST_CASE("affine law, tensorization and the p-Mahler identity", "[tube][property]") {
  Rng rng(57);
  for (int t = 0; t < 6; ++t) {
    const int n = 1 + t % 3;
    const auto K = catalog::random_hull(n, n + 4, 60 + t);
    const Vec a = geom::barycenter(K) + 0.3 * geom::interior_depth(K, geom::barycenter(K)) * rng.unit_vec(n);
    const Mat A = random_matrix(rng, n);
    const auto S = geom::AffineMap::make(A, rng.normal_vec(n));
    const double lhs = bergman_diagonal(K, a).value;
    const double rhs = S.det * S.det * bergman_diagonal(geom::apply_affine(S, K), S.apply(a)).value;
    CHECK(lhs == Approx(rhs).epsilon(1e-6));
    CHECK(B_invariant(K).value == Approx(B_invariant(geom::apply_affine(S, K)).value).epsilon(1e-6));
  }
  for (int t = 0; t < 3; ++t) {
    const auto K = catalog::random_hull(1, 3, 70 + t), L = catalog::random_hull(2, 6, 80 + t);
    const Vec a = geom::barycenter(K), b = geom::barycenter(L) + 0.1 * rng.unit_vec(2) * geom::interior_depth(L, geom::barycenter(L));
    const double prod = bergman_diagonal(K, a).value * bergman_diagonal(L, b).value;
    CHECK(bergman_diagonal(geom::product(K, L), concat(a, b)).value == Approx(prod).epsilon(1e-6));
  }
  for (int n = 1; n <= 3; ++n) {
    for (const auto& K : {catalog::cube(n), catalog::simplex(n), catalog::unit_ball(n), catalog::crosspolytope(n)}) {
      const double B = B_invariant(K).value;
      CHECK(B == Approx(B_via_mahler_p(K).value).epsilon(1e-5));
      CHECK(B > 0.0);
    }
  }
}

TEST_CASE("kernel bound on the Mahler volume", "[tube][mahler]") {
  // K = [-1, 1]: ℳ(K - a) = 4 / (1 - a^2) and π |K|^2 𝒦(ia, ia) = π^2 / (4 cos^2(π a / 2))
  const auto K = catalog::cube(1);
  for (double a : {0.0, 0.3, 0.5, 0.6, 0.8}) {
    const Vec av = Vec::Constant(1, a);
    const double m = functionals::mahler(geom::translate(K, -av), functionals::Route::Geometric).value;
    const double rhs = kPi * 4.0 * bergman_diagonal(K, av).value;
    CHECK(m == Approx(4.0 / (1 - a * a)).epsilon(1e-12));
    const double c = std::cos(kPi * a / 2);
    CHECK(rhs == Approx(kPi * kPi / (4 * c * c)).epsilon(1e-8));
    if (a <= 0.5) CHECK(m >= rhs);
    else CHECK(m < rhs);  // the bound fails away from the barycenter
  }
}

TEST_CASE("Paley-Wiener transform", "[tube][pw]") {
  const auto I = catalog::interval();
  Trial zero;
  zero.n = 1;
  zero.g = [](const Vec&) { return cplx(0.0); };
  CHECK(std::abs(pw_transform(I, zero, tp(0.3, 0.1)).value) == 0.0);
  const auto ind = indicator_trial(Vec::Constant(1, -1), Vec::Constant(1, 1));
  CHECK(pw_transform(I, ind, tp(0, 0)).value.real() == Approx(2.0 / std::sqrt(2 * kPi)).epsilon(1e-12));

  quad::QuadConfig tight;
  tight.rel_tol = 1e-10;
  PwOptions opt;
  opt.quad = tight;
  const auto gau = gaussian_trial(Vec::Zero(1), 1.0 / std::sqrt(2.0));  // e^{-x^2}
  const auto w = tp(0.3, 0.1);
  const cplx q = pw_transform(I, gau, w, opt).value;
  // independent 1D route: real and imaginary parts on a finite interval
  auto re = quad::integrate_interval([](double x) { return std::exp(-x * x - 0.1 * x) * std::cos(0.3 * x); }, -12.0, 12.0, tight);
  auto im = quad::integrate_interval([](double x) { return std::exp(-x * x - 0.1 * x) * std::sin(0.3 * x); }, -12.0, 12.0, tight);
  const cplx direct = cplx(re.value, im.value) / std::sqrt(2 * kPi);
  CHECK(std::abs(q - direct) <= 1e-7 * std::abs(direct));
  CHECK(std::abs(gau.pw(w.complex()) - direct) <= 1e-10 * std::abs(direct));

  Rng rng(59);
  const auto K2 = catalog::cube(2, 0.5);
  const auto trials = std::vector<Trial>{
      gaussian_trial(Eigen::Vector2d(0.2, -0.1), 0.7), moment_gaussian_trial(Eigen::Vector2d(0.0, 0.3), 0.9, 1),
      modulated_trial(gaussian_trial(Vec::Zero(2), 0.5), Eigen::Vector2d(1.0, -2.0)),
      indicator_trial(Eigen::Vector2d(-1, -0.5), Eigen::Vector2d(0.5, 1))};
  for (const auto& t : trials) {
    for (int k = 0; k < 3; ++k) {
      const TubePoint z{rng.normal_vec(2), 0.4 * rng.uniform() * rng.unit_vec(2)};
      const cplx a = pw_transform(K2, t, z, opt).value, b = t.pw(z.complex());
      INFO(t.name);
      CHECK(std::abs(a - b) <= 1e-8 * std::max(1.0, std::abs(b)));
    }
  }

  Trial flat;
  flat.n = 1;
  flat.g = [](const Vec&) { return cplx(1.0); };
  try {
    pw_transform(I, flat, tp(0, 0));
    FAIL("constant function accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotInWeightedL2);
  }
}

TEST_CASE("Paley-Wiener isometry", "[tube][pw]") {
  Trial zero;
  zero.n = 1;
  zero.g = [](const Vec&) { return cplx(0.0); };
  const auto z = pw_isometry_check(catalog::interval(), zero);
  CHECK(z.lhs == 0.0);
  CHECK(z.rhs == 0.0);

  quad::QuadConfig cfg;
  cfg.rel_tol = 1e-6;
  const auto ind = indicator_trial(Vec::Constant(1, -1), Vec::Constant(1, 1));
  const auto r1 = pw_isometry_check(catalog::interval(), ind, cfg);
  CHECK(std::abs(r1.lhs - r1.rhs) <= 1e-4 * r1.rhs);
  const auto r2 = pw_isometry_check(catalog::cube(1), gaussian_trial(Vec::Zero(1), 0.8), cfg);
  CHECK(std::abs(r2.lhs - r2.rhs) <= 1e-4 * r2.rhs);
  // the same check with the transform computed by quadrature instead of the closed form
  auto g = gaussian_trial(Vec::Constant(1, 0.2), 0.6);
  g.pw = nullptr;
  quad::QuadConfig loose;
  loose.rel_tol = 1e-5;
  const auto r3 = pw_isometry_check(catalog::interval(), g, loose);
  CHECK(std::abs(r3.lhs - r3.rhs) <= 1e-4 * r3.rhs);
}

TEST_CASE("trial-function lower bounds", "[tube][trial]") {
  const auto I = catalog::interval();
  const auto fam = default_trial_family(1);
  CHECK(fam.sigmas.size() == 25);
  const auto tb = bergman_lower_bound_trial(I, tp(0, 0), fam);
  CHECK(tb.value >= 0.9 * kPi / 4);
  CHECK(tb.value <= kPi / 4 * (1 + 1e-4));

  // every single trial stays below the kernel, and the sup grows with the family
  const auto w = tp(0.4, 0.2);
  const double k = bergman_diagonal(I, w.y).value;
  TrialFamily small{{0.5, 1.0}, {Vec::Zero(1)}};
  TrialFamily larger{{0.5, 1.0, 2.0, 4.0}, {Vec::Zero(1), Vec::Constant(1, -0.5), Vec::Constant(1, -1.5)}};
  const auto a = bergman_lower_bound_trial(I, w, small), b = bergman_lower_bound_trial(I, w, larger);
  CHECK(a.value <= b.value);
  CHECK(b.value <= k * (1 + 1e-4));
  CHECK(bergman_lower_bound_trial(I, w, default_trial_family(1)).value >= 0.8 * k);

  const auto sq = catalog::cube(2, 0.5);
  const auto t2 = bergman_lower_bound_trial(sq, TubePoint::imaginary(Vec::Zero(2)), default_trial_family(2));
  CHECK(t2.value <= kPi * kPi / 16 * (1 + 1e-4));
  CHECK(t2.value >= 0.8 * kPi * kPi / 16);
  // parallel evaluation gives the same answer
  const auto t2p = bergman_lower_bound_trial(sq, TubePoint::imaginary(Vec::Zero(2)), default_trial_family(2), {}, 3);
  CHECK(t2p.value == t2.value);
  CHECK(t2p.best_index == t2.best_index);

  CHECK_THROWS_AS(bergman_lower_bound_trial(I, tp(0, 0), TrialFamily{}), Error);
}
