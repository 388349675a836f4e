#pragma once

#include "functionals.hpp"

#include <optional>

namespace mahlerlab::position {

using geom::ConvexBody;

struct SantaloResult {
  Vec point;
  double value = 0.0;  // ℳ(K - s)
  double grad_norm = 0.0;
  int iterations = 0;
  Vec polar_barycenter;  // b((K - s)°), zero at the optimum
  bool converged = false;
};

struct SolverConfig {
  int max_iterations = 100;
  double tol = 1e-13;  // on the Newton decrement squared
};

/// Minimizes z -> ∫ e^{-h_K(y) + <z, y>} dy = n! |(K - z)°| over int K by damped Newton.
inline SantaloResult santalo_point(const ConvexBody& K, const SolverConfig& cfg = {}) {
  const int n = K.dim();
  const double vol = geom::volume(K);
  Vec z = geom::barycenter(K);
  auto F = functionals::shifted_polar_integral(K, z);
  SantaloResult res;
  for (int it = 0; it < cfg.max_iterations; ++it) {
    res.iterations = it;
    const Eigen::LDLT<Mat> ldlt(F.hess);
    const Vec step = -ldlt.solve(F.grad);
    const double decrement = -F.grad.dot(step) / F.value;
    if (decrement <= cfg.tol) {
      res.converged = true;
      break;
    }
    double t = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 60; ++ls, t *= 0.5) {
      const Vec trial = z + t * step;
      if (!(geom::interior_depth(K, trial) > 0.0)) continue;
      const auto Ft = functionals::shifted_polar_integral(K, trial);
      if (Ft.value <= F.value + 0.25 * t * F.grad.dot(step)) {
        z = trial;
        F = Ft;
        moved = true;
        break;
      }
    }
    if (!moved) {
      // no descent at machine precision: accept the iterate if it is stationary
      res.converged = decrement <= 1e-10;
      break;
    }
  }
  res.point = z;
  res.value = vol * F.value;
  res.grad_norm = F.grad.norm() / F.value;
  res.polar_barycenter = F.grad / ((n + 1) * F.value);
  return res;
}

/// b((K - z)°) through the polar body itself, when it has an exact representation.
inline std::optional<Vec> polar_barycenter_geometric(const ConvexBody& K, const Vec& z) {
  try {
    return geom::barycenter(geom::polar(geom::translate(K, -z)));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::UnsupportedRepresentation) return std::nullopt;
    throw;
  }
}

// ---------------------------------------------------------------------------

struct InscribedEllipsoid {
  Vec center;
  Mat shape;              // E = center + shape * (unit ball), shape symmetric positive definite
  double min_slack = 0.0;     // min over facets of b_i - <a_i, c> - |B a_i|
  double max_outer_ratio = 0.0;  // max over vertices of |B^{-1}(v - c)|, at most n for the maximal ellipsoid
  int iterations = 0;
};

namespace detail {

struct EllipsoidBarrier {
  const Mat& A;  // unit normals, rows
  const Vec& b;
  int n;
  int m_sym;
  std::vector<Mat> basis;

  EllipsoidBarrier(const Mat& A_, const Vec& b_) : A(A_), b(b_), n(static_cast<int>(A_.cols())) {
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        Mat E = Mat::Zero(n, n);
        E(i, j) = E(j, i) = 1.0;
        basis.push_back(E);
      }
    m_sym = static_cast<int>(basis.size());
  }

  Mat to_matrix(const Vec& theta) const {
    Mat B = Mat::Zero(n, n);
    for (int k = 0; k < m_sym; ++k) B += theta(k) * basis[k];
    return B;
  }

  /// slacks; empty optional when infeasible
  bool slacks(const Vec& v, Vec& s) const {
    const Mat B = to_matrix(v.head(m_sym));
    Eigen::LLT<Mat> llt(B);
    if (llt.info() != Eigen::Success) return false;
    const Vec c = v.tail(n);
    s.resize(A.rows());
    for (int i = 0; i < A.rows(); ++i) s(i) = b(i) - A.row(i).dot(c) - (B * A.row(i).transpose()).norm();
    return (s.array() > 0.0).all();
  }

  /// t (-log det B) - Σ log s_i with gradient and Hessian
  double eval(const Vec& v, double t, Vec& grad, Mat& hess) const {
    const int dim = m_sym + n;
    const Mat B = to_matrix(v.head(m_sym));
    const Mat Binv = B.inverse();
    const Vec c = v.tail(n);
    grad = Vec::Zero(dim);
    hess = Mat::Zero(dim, dim);
    double f = -t * std::log(B.determinant());
    std::vector<Mat> BE(m_sym);
    for (int k = 0; k < m_sym; ++k) BE[k] = Binv * basis[k];
    for (int k = 0; k < m_sym; ++k) {
      grad(k) -= t * BE[k].trace();
      for (int l = k; l < m_sym; ++l) {
        const double h = t * (BE[k] * BE[l]).trace();
        hess(k, l) += h;
        if (l != k) hess(l, k) += h;
      }
    }
    for (int i = 0; i < A.rows(); ++i) {
      const Vec a = A.row(i).transpose();
      const Vec u = B * a;
      const double rho = u.norm();
      const double s = b(i) - a.dot(c) - rho;
      f -= std::log(s);
      Vec ds(dim);
      Mat d2rho = Mat::Zero(m_sym, m_sym);
      std::vector<Vec> g(m_sym);
      for (int k = 0; k < m_sym; ++k) {
        g[k] = basis[k] * a;
        ds(k) = -u.dot(g[k]) / rho;
      }
      for (int k = 0; k < m_sym; ++k)
        for (int l = 0; l < m_sym; ++l) d2rho(k, l) = g[k].dot(g[l]) / rho - (u.dot(g[k])) * (u.dot(g[l])) / (rho * rho * rho);
      ds.tail(n) = -a;
      grad -= ds / s;
      hess += ds * ds.transpose() / (s * s);
      hess.topLeftCorner(m_sym, m_sym) += d2rho / s;
    }
    return f;
  }
};

}  // namespace detail

/// Maximum-volume ellipsoid inside an H-polytope by a log-barrier Newton method.
inline InscribedEllipsoid inscribed_ellipsoid(const ConvexBody& K, const SolverConfig& cfg = {}) {
  if (!geom::is_polytopal(K)) throw Error(ErrorCode::UnsupportedRepresentation, "inscribed ellipsoid needs a polytope");
  const auto P = geom::as_polytope(K);
  const int n = P->n;
  const Mat& A = P->normals;
  const Vec& b = P->offsets;
  detail::EllipsoidBarrier bar(A, b);
  const int dim = bar.m_sym + n;

  Vec v = Vec::Zero(dim);
  const Vec c0 = P->barycenter;
  const double depth = (b - A * c0).minCoeff();
  if (!(depth > 0.0)) throw Error(ErrorCode::DegenerateBody, "polytope has empty interior");
  for (int k = 0, i = 0; i < n; ++i)
    for (int j = i; j < n; ++j, ++k)
      if (i == j) v(k) = 0.5 * depth;
  v.tail(n) = c0;

  const double m = static_cast<double>(A.rows());
  double t = 1.0;
  int total = 0;
  Vec grad, s;
  Mat hess;
  for (int outer = 0; outer < 60; ++outer) {
    for (int it = 0; it < cfg.max_iterations; ++it, ++total) {
      const double f = bar.eval(v, t, grad, hess);
      const Vec step = -Eigen::LDLT<Mat>(hess).solve(grad);
      const double dec = -grad.dot(step);
      if (dec <= 1e-14 * std::max(1.0, t)) break;
      double alpha = 1.0;
      bool moved = false;
      for (int ls = 0; ls < 60; ++ls, alpha *= 0.5) {
        const Vec trial = v + alpha * step;
        if (!bar.slacks(trial, s)) continue;
        Vec g2;
        Mat h2;
        if (bar.eval(trial, t, g2, h2) <= f - 0.25 * alpha * dec) {
          v = trial;
          moved = true;
          break;
        }
      }
      if (!moved) break;
    }
    if (m / t <= 1e-12) break;
    t *= 8.0;
  }
  if (m / t > 1e-12) throw Error(ErrorCode::NotConverged, "inscribed ellipsoid barrier did not converge");

  InscribedEllipsoid out;
  out.iterations = total;
  out.shape = bar.to_matrix(v.head(bar.m_sym));
  out.center = v.tail(n);
  bar.slacks(v, s);
  out.min_slack = s.minCoeff();
  const Mat Binv = out.shape.inverse();
  for (const auto& vert : P->vertices) out.max_outer_ratio = std::max(out.max_outer_ratio, (Binv * (vert - out.center)).norm());
  return out;
}

// ---------------------------------------------------------------------------

struct JohnPosition {
  geom::AffineMap map;  // linear
  Vec a;
  double r = 0.0;
  // inclusion margins, in units of r (ball in body), r (body in ball) and 1/r (polar in ball)
  double ball_in_body = 0.0;
  double body_in_ball = 0.0;
  double polar_in_ball = 0.0;
  // tight data-dependent constants next to the stated ones (2n, 2n, n)
  double outer_ratio = 0.0;   // max |A v| / r over vertices of K
  double polar_ratio = 0.0;   // r max |t| over vertices t of (AK)°
  double center_ratio = 0.0;  // |a| / r
  InscribedEllipsoid ellipsoid;
};

/// John position of a polytope with barycenter at the origin: B(a, r) ⊆ AK ⊆ B(0, 2nr), (AK)° ⊆ B(0, 2n/r).
inline JohnPosition john_normalize(const ConvexBody& K, const SolverConfig& cfg = {}) {
  const int n = K.dim();
  const Vec bK = geom::barycenter(K);
  if (bK.norm() > 1e-8 * std::max(1.0, geom::support(K, Vec::Unit(n, 0))))
    throw Error(ErrorCode::InvalidArgument, "john_normalize expects the barycenter at the origin");
  const auto E = inscribed_ellipsoid(K, cfg);
  const double r = std::pow(E.shape.determinant(), 1.0 / n);
  const Mat A = r * E.shape.inverse();
  JohnPosition jp;
  jp.map = geom::AffineMap::linear(A);
  jp.a = A * E.center;
  jp.r = r;
  jp.ellipsoid = E;

  const auto P = geom::as_polytope(K);
  const Mat Ainv = A.inverse();
  // AK = {x : <A^{-T} a_i, x> <= b_i}
  double inner = std::numeric_limits<double>::infinity(), polar = 0.0;
  for (int i = 0; i < P->normals.rows(); ++i) {
    const Vec alpha = Ainv.transpose() * P->normals.row(i).transpose();
    const double an = alpha.norm();
    inner = std::min(inner, (P->offsets(i) - alpha.dot(jp.a)) / an - r);
    polar = std::max(polar, an / P->offsets(i));
  }
  double outer = 0.0;
  for (const auto& v : P->vertices) outer = std::max(outer, (A * v).norm());
  jp.ball_in_body = inner / r;
  jp.body_in_ball = (2.0 * n * r - outer) / r;
  jp.polar_in_ball = (2.0 * n / r - polar) * r;
  jp.outer_ratio = outer / r;
  jp.polar_ratio = polar * r;
  jp.center_ratio = jp.a.norm() / r;
  if (jp.polar_in_ball < -1e-8) throw Error(ErrorCode::PolarVertexOutOfRange, "a polar vertex lies outside B(0, 2n/r)");
  return jp;
}

}  // namespace mahlerlab::position
