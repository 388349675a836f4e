#include "catch_amalgamated.hpp"

#include <mahlerlab/body.hpp>
#include <mahlerlab/catalog.hpp>
#include <mahlerlab/rng.hpp>

using namespace mahlerlab;
using namespace mahlerlab::geom;
using Catch::Approx;

namespace {

Mat random_matrix(Rng& rng, int n, double max_cond = 20.0) {
  for (;;) {
    Mat A(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) A(i, j) = rng.normal();
    Eigen::JacobiSVD<Mat> svd(A);
    const auto& s = svd.singularValues();
    if (s(0) / s(n - 1) <= max_cond) return A;
  }
}

Vec random_in_box(Rng& rng, int n, double lo, double hi) {
  Vec x(n);
  for (int i = 0; i < n; ++i) x(i) = rng.uniform(lo, hi);
  return x;
}

// Brute-force hull facet count: pairs/triples of points whose hyperplane
// supports the whole set.
int brute_facet_count(const std::vector<Vec>& pts) {
  const int n = static_cast<int>(pts[0].size());
  std::vector<std::pair<Vec, double>> found;
  const int m = static_cast<int>(pts.size());
  std::vector<int> idx(n);
  std::function<void(int, int)> rec = [&](int start, int depth) {
    if (depth == n) {
      Mat D(n - 1, n);
      for (int i = 1; i < n; ++i) D.row(i - 1) = (pts[idx[i]] - pts[idx[0]]).transpose();
      Eigen::FullPivLU<Mat> lu(D);
      if (lu.rank() < n - 1) return;
      Vec u = lu.kernel().col(0).normalized();
      double d = u.dot(pts[idx[0]]);
      double lo = 0, hi = 0;
      for (const auto& p : pts) lo = std::min(lo, u.dot(p) - d), hi = std::max(hi, u.dot(p) - d);
      if (lo < -1e-9 && hi > 1e-9) return;
      if (hi > 1e-9) u = -u, d = -d;
      for (const auto& [v, e] : found)
        if ((v - u).norm() < 1e-7 && std::abs(e - d) < 1e-7) return;
      found.emplace_back(u, d);
      return;
    }
    for (int i = start; i < m; ++i) {
      idx[depth] = i;
      rec(i + 1, depth + 1);
    }
  };
  rec(0, 0);
  return static_cast<int>(found.size());
}

}  // namespace

TEST_CASE("volume of catalog bodies", "[geom][volume]") {
  CHECK(volume(catalog::cube(3)) == Approx(8.0).epsilon(1e-12));
  CHECK(volume(catalog::simplex(2)) == Approx(0.5).epsilon(1e-12));
  CHECK(volume(catalog::simplex(3)) == Approx(1.0 / 6).epsilon(1e-12));
  CHECK(volume(catalog::crosspolytope(3)) == Approx(8.0 / 6).epsilon(1e-12));
  CHECK(volume(catalog::unit_ball(3)) == Approx(4.0 * kPi / 3).epsilon(1e-12));
  CHECK(volume(catalog::cube(4)) == Approx(16.0).epsilon(1e-12));
}

TEST_CASE("random V-polytope volume agrees with a rejection-sampling estimate", "[geom][volume]") {
  const auto K = catalog::random_hull(2, 8, 42);
  const auto V = vertices(K);
  Vec lo = V[0], hi = V[0];
  for (const auto& v : V) lo = lo.cwiseMin(v), hi = hi.cwiseMax(v);
  Rng rng(42);
  const int N = 400000;
  int hits = 0;
  for (int i = 0; i < N; ++i) {
    Vec x(2);
    for (int j = 0; j < 2; ++j) x(j) = rng.uniform(lo(j), hi(j));
    // independent membership: point is on the inner side of every hull edge
    // found by brute force over vertex pairs
    bool in = true;
    for (std::size_t a = 0; a < V.size() && in; ++a)
      for (std::size_t b = 0; b < V.size() && in; ++b) {
        if (a == b) continue;
        const Vec e = V[b] - V[a];
        const Vec nrm(Eigen::Vector2d(e(1), -e(0)));
        bool supporting = true;
        for (const auto& w : V) supporting = supporting && nrm.dot(w - V[a]) <= 1e-12;
        if (supporting && nrm.dot(x - V[a]) > 0) in = false;
      }
    hits += in;
  }
  const double box = (hi - lo).prod();
  const double p = double(hits) / N;
  const double est = p * box;
  const double se = box * std::sqrt(p * (1 - p) / N);
  CHECK(std::abs(volume(K) - est) <= 3 * se);
}

TEST_CASE("barycenter", "[geom][barycenter]") {
  CHECK(barycenter(catalog::cube(3)).norm() < 1e-14);
  const Vec b = barycenter(catalog::simplex(2));
  CHECK(b(0) == Approx(1.0 / 3));
  CHECK(b(1) == Approx(1.0 / 3));

  Rng rng(3);
  for (int t = 0; t < 20; ++t) {
    const int n = 2 + t % 2;
    const auto K = catalog::random_hull(n, 7, 100 + t);
    const auto S = AffineMap::make(random_matrix(rng, n), rng.normal_vec(n));
    const Vec lhs = barycenter(apply_affine(S, K));
    const Vec rhs = S.apply(barycenter(K));
    CHECK((lhs - rhs).norm() < 1e-10);
    const auto K0 = translate(K, -barycenter(K));
    CHECK(barycenter(K0).norm() < 1e-10);
  }
}

TEST_CASE("support function", "[geom][support]") {
  Rng rng(5);
  for (int t = 0; t < 20; ++t) {
    const Vec y = rng.normal_vec(3);
    CHECK(support(catalog::cube(3), y) == Approx(y.cwiseAbs().sum()));
    CHECK(support(catalog::unit_ball(3), y) == Approx(y.norm()));
    const auto K = catalog::random_hull(3, 8, 200 + t);
    const double lam = rng.uniform(0.1, 5.0);
    CHECK(support(scale(K, lam), y) == Approx(lam * support(K, y)).epsilon(1e-12));
    // convexity in y
    const Vec z = rng.normal_vec(3);
    CHECK(support(K, 0.5 * (y + z)) <= 0.5 * (support(K, y) + support(K, z)) + 1e-12);
  }
  const Vec y = Vec::Unit(2, 0);
  CHECK(support(product(catalog::interval(), catalog::interval()), y) == Approx(0.5));
}

TEST_CASE("polar", "[geom][polar]") {
  const auto P = polar(catalog::cube(2));
  CHECK(P.kind() == BodyKind::VPolytope);
  CHECK(vertices(P).size() == 4);
  CHECK(volume(P) == Approx(2.0));
  for (const auto& v : vertices(P)) CHECK(v.cwiseAbs().sum() == Approx(1.0));

  const auto B = polar(ball(2, 2.0));
  CHECK(volume(B) == Approx(kPi / 4));

  CHECK_THROWS_AS(polar(catalog::simplex(2)), Error);
  try {
    polar(catalog::simplex(2));
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::OriginNotInterior);
  }
  CHECK_THROWS_AS(polar(ball(2, 1.0, Vec::Constant(2, 0.2))), Error);

  // bipolarity on a translated simplex, membership agreement on 1000 samples
  const auto K = translate(catalog::simplex(2), -Vec::Constant(2, 0.25));
  const auto KK = polar(polar(K));
  Rng rng(11);
  int disagree = 0;
  for (int i = 0; i < 1000; ++i) {
    const Vec x = random_in_box(rng, 2, -0.5, 1.0);
    if (std::abs(interior_depth(K, x)) < 1e-9) continue;
    disagree += membership(K, x, 1e-9) != membership(KK, x, 1e-9);
  }
  CHECK(disagree == 0);
}

TEST_CASE("support/polar duality", "[geom][polar][property]") {
  for (int t = 0; t < 15; ++t) {
    const int n = 2 + t % 2;
    auto K = catalog::random_hull(n, 9, 300 + t);
    K = translate(K, -barycenter(K));
    const auto Ko = polar(K);
    const auto P = as_polytope(K);
    for (const auto& y : vertices(Ko)) CHECK(support(K, y) <= 1.0 + 1e-9);
    // each facet normal scaled by its offset attains h = 1
    for (int i = 0; i < P->normals.rows(); ++i)
      CHECK(support(K, P->normals.row(i).transpose() / P->offsets(i)) == Approx(1.0).epsilon(1e-9));
    // number of polar vertices equals facet count of the hull (brute-force oracle)
    CHECK(static_cast<int>(vertices(polar(vpolytope(vertices(K)))).size()) == brute_facet_count(vertices(K)));
  }
}

TEST_CASE("membership", "[geom][membership]") {
  const auto C = catalog::cube(2);
  CHECK(membership(C, Eigen::Vector2d(0.5, -0.5)));
  CHECK_FALSE(membership(C, Eigen::Vector2d(1.5, 0.0)));
  Rng rng(13);
  for (int t = 0; t < 10; ++t) {
    const auto K = catalog::random_hull(3, 10, 400 + t);
    for (int i = 0; i < 200; ++i) {
      const Vec x = rng.normal_vec(3), y = rng.normal_vec(3);
      if (membership(K, x) && membership(K, y)) CHECK(membership(K, 0.5 * (x + y)));
    }
  }
}

TEST_CASE("vertex enumeration", "[geom][vertices]") {
  CHECK(vertices(catalog::cube(2)).size() == 4);
  for (const auto& v : vertices(catalog::cube(2))) CHECK(v.cwiseAbs().minCoeff() == Approx(1.0));
  Mat A(3, 2);
  A << -1, 0, 0, -1, 1, 1;
  const auto V = vertices(hpolytope(A, Eigen::Vector3d(0, 0, 1)));
  CHECK(V.size() == 3);
  int matched = 0;
  for (const auto& v : V)
    for (const Vec& w : {Vec(Eigen::Vector2d(0, 0)), Vec(Eigen::Vector2d(1, 0)), Vec(Eigen::Vector2d(0, 1))})
      matched += (v - w).norm() < 1e-12;
  CHECK(matched == 3);

  Mat U(2, 2);
  U << 1, 0, 0, 1;
  try {
    hpolytope(U, Eigen::Vector2d(1, 1));
    FAIL("expected UnboundedBody");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnboundedBody);
  }
  Mat big(70, 2);
  for (int i = 0; i < 70; ++i) big.row(i) << std::cos(0.09 * i), std::sin(0.09 * i);
  try {
    hpolytope(big, Vec::Ones(70));
    FAIL("expected TooLarge");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TooLarge);
  }
  try {
    vpolytope(std::vector<Vec>{Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 1), Eigen::Vector2d(2, 2)});
    FAIL("expected DegenerateBody");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateBody);
  }
}

TEST_CASE("reflection body", "[geom][reflection]") {
  // symmetric body is its own reflection body
  const auto C = catalog::cube(2);
  const auto RC = reflection_body(C);
  CHECK(volume(RC) == Approx(volume(C)));
  for (int n = 1; n <= 4; ++n) {
    const auto S = catalog::simplex(n);
    CHECK(std::abs(volume(reflection_body(S)) - std::pow(2.0, n) * volume(S)) <= 1e-9);
  }
  Rng rng(17);
  for (int t = 0; t < 20; ++t) {
    const int n = 2 + t % 2;
    auto K = catalog::random_hull(n, 8, 500 + t);
    K = translate(K, -barycenter(K));
    const auto R = reflection_body(K);
    CHECK(volume(R) <= std::pow(2.0, n) * volume(K) * (1 + 1e-12));
    for (int i = 0; i < 100; ++i) {
      const Vec x = 2 * rng.normal_vec(n);
      CHECK(membership(R, x, 1e-9) == membership(R, -x, 1e-9));
    }
  }
  CHECK_THROWS_AS(reflection_body(ball(2, 1.0, Vec::Constant(2, 0.1))), Error);
}

TEST_CASE("affine images and products", "[geom][affine][product]") {
  const auto C = catalog::cube(2);
  CHECK(apply_affine(AffineMap::identity(2), C).ptr() == C.ptr());
  for (int n = 1; n <= 3; ++n)
    CHECK(volume(scale(catalog::cube(n), 2.0)) == Approx(std::pow(2.0, n) * volume(catalog::cube(n))));
  CHECK_THROWS_AS(AffineMap::make(Mat::Zero(2, 2), Vec::Zero(2)), Error);

  Rng rng(19);
  for (int t = 0; t < 20; ++t) {
    const int n = 1 + t % 3;
    const auto K = (t % 4 == 0) ? ball(n, 1.3) : catalog::random_hull(n, n + 4, 600 + t);
    const Mat A = random_matrix(rng, n);
    const auto S = AffineMap::make(A, rng.normal_vec(n));
    CHECK(volume(apply_affine(S, K)) == Approx(std::abs(A.determinant()) * volume(K)).epsilon(1e-9));
  }

  const auto I = catalog::interval();
  const auto sq = product(I, I);
  CHECK(volume(sq) == Approx(1.0));
  const auto ref = catalog::cube(2, 0.5);
  for (int i = 0; i < 200; ++i) {
    const Vec x = random_in_box(rng, 2, -1, 1);
    CHECK(membership(sq, x) == membership(ref, x));
  }
  const auto K = catalog::random_hull(2, 6, 7);
  const auto L = catalog::simplex(1);
  const auto KL = product(K, L);
  CHECK((barycenter(KL) - concat(barycenter(K), barycenter(L))).norm() < 1e-12);
  CHECK(volume(KL) == Approx(volume(K) * volume(L)));
  CHECK(as_polytope(KL)->volume == Approx(volume(KL)).epsilon(1e-10));
  CHECK((as_polytope(KL)->barycenter - barycenter(KL)).norm() < 1e-10);
}

TEST_CASE("origin-interior flag is validated", "[geom]") {
  Mat A(3, 2);
  A << -1, 0, 0, -1, 1, 1;
  CHECK_THROWS_AS(hpolytope(A, Eigen::Vector3d(0, 0, 1), true), Error);
  CHECK_NOTHROW(hpolytope(A, Eigen::Vector3d(0.1, 0.1, 1), true));
}
