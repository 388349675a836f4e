#pragma once

#include "position.hpp"
#include "rng.hpp"

#include <complex>

namespace mahlerlab::weight {

using geom::ConvexBody;
using cplx = std::complex<double>;

/// Φ(ζ) = -2iζ / (ζ - 2i), mapping {Im ζ <= 1} onto the closed disk of radius 2.
inline cplx conformal_map(cplx z) {
  const cplx two_i(0.0, 2.0);
  return -two_i * z / (z - two_i);
}

/// g(ζ) = log(Φ(ζ)/ζ) / ζ = -log(1 + iζ/2) / ζ, with g(0) = -i/2.
inline cplx log_quotient(cplx z) {
  if (z == cplx(0.0, 0.0)) return {0.0, -0.5};
  return -std::log(1.0 + cplx(0.0, 0.5) * z) / z;
}

namespace detail {

inline double quotient_on_circle(double theta) { return std::abs(log_quotient(std::polar(0.5, theta))); }

inline double compute_conformal_constant() {
  const int m = 1024;
  int best = 0;
  double best_v = -1.0;
  for (int k = 0; k < m; ++k) {
    const double v = quotient_on_circle(2.0 * kPi * k / m);
    if (v > best_v) best_v = v, best = k;
  }
  // golden-section refinement on the bracketing arc
  const double h = 2.0 * kPi / m;
  double lo = (best - 1) * h, hi = (best + 1) * h;
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = hi - g * (hi - lo), d = lo + g * (hi - lo);
  double fc = quotient_on_circle(c), fd = quotient_on_circle(d);
  for (int it = 0; it < 100 && hi - lo > 1e-14; ++it) {
    if (fc > fd) {
      hi = d, d = c, fd = fc;
      c = hi - g * (hi - lo), fc = quotient_on_circle(c);
    } else {
      lo = c, c = d, fc = fd;
      d = lo + g * (hi - lo), fd = quotient_on_circle(d);
    }
  }
  return std::max({best_v, fc, fd});
}

}  // namespace detail

/// C = max |g| over |ζ| <= 1/2 (attained on the circle), so that
/// |log|Φ(ζ)| - log|ζ|| <= C|ζ| there.
inline double conformal_constant() {
  static const double C = detail::compute_conformal_constant();
  return C;
}

// ---------------------------------------------------------------------------

/// A body in John position together with its polar vertices.
struct JohnBody {
  ConvexBody body;  // A (K - b(K))
  position::JohnPosition john;
  Mat polar;  // vertices of the polar, one per row
  Vec lo, hi;  // bounding box
  int n = 0;
  double r = 0.0;
  Vec a;
};

inline JohnBody john_body(const ConvexBody& K, const position::SolverConfig& cfg = {}) {
  const ConvexBody centered = geom::translate(K, -geom::barycenter(K));
  JohnBody J;
  J.john = position::john_normalize(centered, cfg);
  J.body = geom::apply_affine(J.john.map, centered);
  J.n = K.dim();
  J.r = J.john.r;
  J.a = J.john.a;
  const auto P = geom::as_polytope(J.body);
  J.polar.resize(P->normals.rows(), J.n);
  for (int i = 0; i < P->normals.rows(); ++i) J.polar.row(i) = P->normals.row(i) / P->offsets(i);
  J.lo = Vec::Constant(J.n, std::numeric_limits<double>::infinity());
  J.hi = -J.lo;
  for (const auto& v : P->vertices) J.lo = J.lo.cwiseMin(v), J.hi = J.hi.cwiseMax(v);
  return J;
}

/// Gauge of K_ℂ: max over t in K° of |<z, t>| = sqrt(<x,t>^2 + <y,t>^2). The
/// function is convex in t, so the polar vertices attain it.
inline double complex_gauge(const Mat& T, const Vec& x, const Vec& y) {
  const Vec u = T * x, v = T * y;
  return std::sqrt((u.array().square() + v.array().square()).maxCoeff());
}

/// sup over t in K° of |Φ(<z, t>)|. Sublevel sets of |Φ| inside {Im ζ <= 1} are
/// disks, so |Φ(<z, ·>)| is quasiconvex on K° and the polar vertices attain the sup.
inline double conformal_sup(const Mat& T, const Vec& x, const Vec& y) {
  double m = 0.0;
  for (int i = 0; i < T.rows(); ++i) m = std::max(m, std::abs(conformal_map({T.row(i).dot(x), T.row(i).dot(y)})));
  return m;
}

/// φ(z) = |Im z|^2 / (4n^2 r^2) + 2n log sup_t |Φ(<z, t>)|
inline double weight_phi(const JohnBody& J, const Vec& x, const Vec& y) {
  const double n = J.n;
  return y.squaredNorm() / (4.0 * n * n * J.r * J.r) + 2.0 * n * std::log(conformal_sup(J.polar, x, y));
}

struct ShellParams {
  double sigma = 1.5;
  double delta = 0.0;
};

/// Upper end of the admissible δ range, 1 / (8 (1 + 2√2 n^2)).
inline double max_delta(int n) { return 1.0 / (8.0 * (1.0 + 2.0 * std::sqrt(2.0) * n * n)); }

inline ShellParams default_shell(int n) { return {1.5, 0.5 * max_delta(n)}; }

inline double upper_bound(int n) { return 2.0 * n * std::log(2.0) + 1.0; }

inline double shell_lower_bound(int n, double delta, double C) {
  return 2.0 * n * std::log(delta) - 16.0 * std::sqrt(2.0) * C * delta * n * n * n;
}

inline double inner_inclusion_factor(int n) { return 1.0 / (4.0 * std::sqrt(2.0) * n * n); }

inline double distance_bound(int n, const ShellParams& p, double r) {
  return (p.sigma - 1.0) * p.delta * r / (4.0 * n * n * std::sqrt(2.0));
}

/// Upper bound on φ near the origin: 1 + nC + 2n log(2n|z| / r), valid for |z| <= r/(4n).
inline double singularity_bound(int n, double C, double r, double z_norm) {
  return 1.0 + n * C + 2.0 * n * std::log(2.0 * n * z_norm / r);
}

/// z in σδK_ℂ - (σ-1)δã, with ã = a + ia
inline bool in_outer(const JohnBody& J, const ShellParams& p, const Vec& x, const Vec& y) {
  const double s = (p.sigma - 1.0) * p.delta;
  return complex_gauge(J.polar, x + s * J.a, y + s * J.a) <= p.sigma * p.delta;
}

inline bool in_shell(const JohnBody& J, const ShellParams& p, const Vec& x, const Vec& y) {
  return in_outer(J, p, x, y) && complex_gauge(J.polar, x, y) > p.delta;
}

/// Exact distance from a point of the outer body to its complement: each
/// constraint |<z + (σ-1)δã, t>| <= σδ is a round cylinder of radius σδ/|t|.
inline double distance_to_outer_complement(const JohnBody& J, const ShellParams& p, const Vec& x, const Vec& y) {
  const double s = (p.sigma - 1.0) * p.delta;
  double d = std::numeric_limits<double>::infinity();
  for (int i = 0; i < J.polar.rows(); ++i) {
    const Vec t = J.polar.row(i).transpose();
    const double mod = std::hypot(t.dot(x + s * J.a), t.dot(y + s * J.a));
    d = std::min(d, (p.sigma * p.delta - mod) / t.norm());
  }
  return d;
}

// ---------------------------------------------------------------------------
// samplers

inline Vec uniform_in_box(Rng& rng, const Vec& lo, const Vec& hi) {
  Vec x(lo.size());
  for (int i = 0; i < lo.size(); ++i) x(i) = rng.uniform(lo(i), hi(i));
  return x;
}

inline Vec uniform_in_body(Rng& rng, const JohnBody& J) {
  const auto P = geom::as_polytope(J.body);
  for (;;) {
    Vec x = uniform_in_box(rng, J.lo, J.hi);
    if (P->max_slack_violation(x) < 0.0) return x;
  }
}

/// Point of the boundary of δK_ℂ along a uniformly random direction of R^{2n}.
inline std::pair<Vec, Vec> boundary_point(Rng& rng, const JohnBody& J, double delta) {
  const Vec u = rng.unit_vec(2 * J.n);
  const Vec x = u.head(J.n), y = u.tail(J.n);
  const double g = complex_gauge(J.polar, x, y);
  return {delta * x / g, delta * y / g};
}

}  // namespace mahlerlab::weight
