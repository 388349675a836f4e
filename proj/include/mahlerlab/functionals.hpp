#pragma once

#include "body.hpp"
#include "core.hpp"
#include "laplace.hpp"
#include "quad.hpp"

#include <array>
#include <string>
#include <vector>

namespace mahlerlab::functionals {

using geom::BodyKind;
using geom::ConvexBody;

/// Flattened form of a body tree for fast evaluation of h_K and h̃_K:
/// h(x) = <c, x> + sum over leaves of h_leaf(M_leaf x).
class BodyEvaluator {
 public:
  explicit BodyEvaluator(const ConvexBody& K) : n_(K.dim()), offset_(Vec::Zero(K.dim())) {
    add(K, Mat::Identity(n_, n_), Vec::Zero(n_));
    scratch_.resize(max_vertices_);
  }

  int dim() const { return n_; }

  double support(const Vec& y) const {
    double h = offset_.dot(y);
    for (const auto& leaf : leaves_) {
      if (leaf.polytope) h += (leaf.W * y).maxCoeff();
      else h += (leaf.W * y).norm();
    }
    return h;
  }

  /// log of the average of e^{<x, y>} over K
  double tilde_h(const Vec& x) const {
    double h = offset_.dot(x);
    for (const auto& leaf : leaves_) {
      if (!leaf.polytope) {
        h += laplace::log_ball_average(leaf.n, (leaf.W * x).norm());
        continue;
      }
      const int m = static_cast<int>(leaf.W.rows());
      double tmax = -std::numeric_limits<double>::infinity();
      for (int j = 0; j < m; ++j) {
        scratch_[j] = leaf.W.row(j).dot(x);
        tmax = std::max(tmax, scratch_[j]);
      }
      double acc = 0.0;
      double t[8];
      for (std::size_t s = 0; s < leaf.simplices.size(); ++s) {
        const auto& ids = leaf.simplices[s];
        for (int i = 0; i <= leaf.n; ++i) t[i] = scratch_[ids[i]] - tmax;
        acc += leaf.weights[s] * laplace::exp_divided_difference(t, leaf.n + 1);
      }
      h += tmax + std::log(acc);
    }
    return h;
  }

  /// h_{K,p}(y) = h̃_K(p y) / p
  double support_p(const Vec& y, double p) const { return tilde_h(p * y) / p; }

 private:
  struct Leaf {
    bool polytope = true;
    int n = 0;
    Mat W;  // polytope: vertex j gives t_j = W.row(j) x; ellipsoid: rho = |W x|
    std::vector<std::array<int, 5>> simplices;
    std::vector<double> weights;  // n! |S| / |K|
  };

  void add(const ConvexBody& K, const Mat& M, const Vec& c) {
    // contributes <c, x> + h_K(M x) for x in the ambient space
    offset_ += c;
    switch (K.kind()) {
      case BodyKind::HPolytope:
      case BodyKind::VPolytope: add_polytope(K.polytope(), M); break;
      case BodyKind::Ellipsoid: {
        Leaf leaf;
        leaf.polytope = false;
        leaf.n = K.dim();
        leaf.W = K.chol().transpose() * M;
        offset_ += M.transpose() * K.center();
        leaves_.push_back(std::move(leaf));
        break;
      }
      case BodyKind::Product: {
        const int n1 = K.first().dim();
        add(K.first(), M.topRows(n1), Vec::Zero(n_));
        add(K.second(), M.bottomRows(K.dim() - n1), Vec::Zero(n_));
        break;
      }
      case BodyKind::AffineImage:
        if (geom::is_polytopal(K)) {
          add_polytope(*geom::as_polytope(K), M);
        } else {
          const auto& S = K.map();
          add(K.inner(), S.A.transpose() * M, M.transpose() * S.b);
        }
        break;
    }
  }

  void add_polytope(const geom::Polytope& P, const Mat& M) {
    Leaf leaf;
    leaf.n = P.n;
    leaf.W = P.vertex_matrix().transpose() * M;
    const double nf = factorial(P.n);
    for (std::size_t s = 0; s < P.simplices.size(); ++s) {
      std::array<int, 5> ids{};
      for (int i = 0; i <= P.n; ++i) ids[i] = P.simplices[s][i];
      leaf.simplices.push_back(ids);
      leaf.weights.push_back(nf * P.simplex_volumes[s] / P.volume);
    }
    max_vertices_ = std::max<std::size_t>(max_vertices_, P.vertices.size());
    leaves_.push_back(std::move(leaf));
  }

  int n_;
  Vec offset_;
  std::vector<Leaf> leaves_;
  std::size_t max_vertices_ = 1;
  mutable std::vector<double> scratch_;
};

// ---------------------------------------------------------------------------

enum class Route { Geometric, Integral };

inline const char* to_string(Route r) { return r == Route::Geometric ? "geometric" : "integral"; }

struct FunctionalValue {
  std::string name;
  double value = 0.0;
  double error = 0.0;
  Route provenance = Route::Geometric;
  bool converged = true;
};

inline double tilde_h(const ConvexBody& K, const Vec& x) {
  if (x.size() != K.dim()) throw Error(ErrorCode::InvalidArgument, "point dimension mismatch");
  return BodyEvaluator(K).tilde_h(x);
}

/// h̃_K by direct cubature of the body average (independent of the closed forms).
inline quad::IntegralResult<double> tilde_h_by_cubature(const ConvexBody& K, const Vec& x, const quad::QuadConfig& cfg = {}) {
  const double shift = geom::support(K, x);
  auto r = quad::integrate_body(K, [&](const Vec& y) { return std::exp(x.dot(y) - shift); }, cfg);
  const double vol = geom::volume(K);
  quad::IntegralResult<double> out = r;
  out.value = shift + std::log(r.value / vol);
  out.error = r.error / r.value;
  return out;
}

/// |K| e^{h̃_K(-2x)}
inline double weight_J(const ConvexBody& K, const Vec& x) { return geom::volume(K) * std::exp(tilde_h(K, -2.0 * x)); }

/// Value, gradient and Hessian in z of F(z) = ∫ e^{-h_K(y) + <z,y>} dy = n! |(K - z)°|.
struct PolarIntegral {
  double value = 0.0;
  Vec grad;
  Mat hess;
};

inline PolarIntegral shifted_polar_integral(const ConvexBody& K, const Vec& z) {
  const int n = K.dim();
  PolarIntegral out;
  out.grad = Vec::Zero(n);
  out.hess = Mat::Zero(n, n);
  switch (K.kind()) {
    case BodyKind::HPolytope:
    case BodyKind::VPolytope:
    case BodyKind::AffineImage: {
      if (K.kind() == BodyKind::AffineImage && !geom::is_polytopal(K)) {
        const auto& S = K.map();
        auto in = shifted_polar_integral(K.inner(), S.apply_inverse(z));
        const double ad = std::abs(S.det);
        out.value = in.value / ad;
        out.grad = S.A_inv.transpose() * in.grad / ad;
        out.hess = S.A_inv.transpose() * in.hess * S.A_inv / ad;
        return out;
      }
      const auto P = geom::as_polytope(K);
      const Vec c = P->offsets - P->normals * z;
      if (c.minCoeff() <= 0.0) throw Error(ErrorCode::OriginNotInterior, "shift point is not interior");
      Vec g(n);
      for (std::size_t s = 0; s < P->polar_cells.size(); ++s) {
        const auto& cell = P->polar_cells[s];
        double prod = 1.0;
        g.setZero();
        Mat h2 = Mat::Zero(n, n);
        for (int i : cell) {
          prod *= c(i);
          const Vec a = P->normals.row(i).transpose() / c(i);
          g += a;
          h2 += a * a.transpose();
        }
        const double term = P->polar_cell_dets[s] / prod;
        out.value += term;
        out.grad += term * g;
        out.hess += term * (g * g.transpose() + h2);
      }
      return out;
    }
    case BodyKind::Ellipsoid: {
      // K = c + L B: F(z) = F_ball(L^{-1}(z - c)) / det L with
      // F_ball(w) = n! ω_n (1 - |w|^2)^{-(n+1)/2}
      const Mat& L = K.chol();
      const Mat Linv = L.inverse();
      const Vec w = Linv * (z - K.center());
      const double q = 1.0 - w.squaredNorm();
      if (q <= 0.0) throw Error(ErrorCode::OriginNotInterior, "shift point is not interior");
      const double detL = L.diagonal().prod();
      const double base = factorial(n) * unit_ball_volume(n);
      const double F = base * std::pow(q, -0.5 * (n + 1));
      const Vec gw = base * (n + 1) * std::pow(q, -0.5 * (n + 3)) * w;
      const Mat hw = base * (n + 1) *
                     (std::pow(q, -0.5 * (n + 3)) * Mat::Identity(n, n) + (n + 3) * std::pow(q, -0.5 * (n + 5)) * w * w.transpose());
      out.value = F / detL;
      out.grad = Linv.transpose() * gw / detL;
      out.hess = Linv.transpose() * hw * Linv / detL;
      return out;
    }
    case BodyKind::Product: {
      const int n1 = K.first().dim();
      auto a = shifted_polar_integral(K.first(), z.head(n1));
      auto b = shifted_polar_integral(K.second(), z.tail(n - n1));
      out.value = a.value * b.value;
      out.grad << a.grad * b.value, a.value * b.grad;
      out.hess.topLeftCorner(n1, n1) = a.hess * b.value;
      out.hess.bottomRightCorner(n - n1, n - n1) = a.value * b.hess;
      out.hess.topRightCorner(n1, n - n1) = a.grad * b.grad.transpose();
      out.hess.bottomLeftCorner(n - n1, n1) = b.grad * a.grad.transpose();
      return out;
    }
  }
  return out;
}

namespace detail {

/// Linear premap W and decay scale for integrands like e^{-k h_{K-a}(∓x)}:
/// after x = W u the body looks isotropic with unit radius.
struct DecayMap {
  Mat W;
  double depth = 1.0;  // inradius of W^T (K - a) around 0
};

inline DecayMap decay_map(const ConvexBody& K, const Vec& a) {
  const int n = K.dim();
  Eigen::SelfAdjointEigenSolver<Mat> es(geom::covariance(K));
  const Mat inv_sqrt = es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
  DecayMap d;
  d.W = inv_sqrt / std::sqrt(n + 2.0);
  const auto S = geom::AffineMap::make(d.W.transpose(), -d.W.transpose() * a);
  d.depth = geom::interior_depth(geom::apply_affine(S, K), Vec::Zero(n));
  return d;
}

}  // namespace detail

inline void require_origin_interior(const ConvexBody& K) {
  if (!geom::origin_in_interior(K))
    throw Error(ErrorCode::OriginNotInterior, "the origin must lie in the interior of K");
}

/// |K°| through ∫ e^{-h_K} = n! |K°| (integral route) or the exact cone sum (geometric route).
inline FunctionalValue polar_volume(const ConvexBody& K, Route route = Route::Integral, const quad::QuadConfig& cfg_in = {}) {
  require_origin_interior(K);
  const int n = K.dim();
  FunctionalValue fv;
  fv.name = "polar-volume";
  fv.provenance = route;
  if (route == Route::Geometric) {
    fv.value = shifted_polar_integral(K, Vec::Zero(n)).value / factorial(n);
    return fv;
  }
  const auto dm = detail::decay_map(K, Vec::Zero(n));
  quad::QuadConfig cfg = cfg_in;
  cfg.premap = dm.W;
  cfg.scale = Vec::Constant(n, 1.0 / dm.depth);
  if (cfg.rule == quad::Rule::Auto) cfg.rule = quad::Rule::Radial;
  BodyEvaluator ev(K);
  auto r = quad::integrate_rn(n, [&](const Vec& y) { return std::exp(-ev.support(y)); }, cfg);
  fv.value = r.value / factorial(n);
  fv.error = r.error / factorial(n);
  fv.converged = r.converged;
  return fv;
}

/// ℳ(K) = n! |K| |K°|
inline FunctionalValue mahler(const ConvexBody& K, Route route = Route::Integral, const quad::QuadConfig& cfg = {}) {
  auto pv = polar_volume(K, route, cfg);
  const double vol = geom::volume(K);
  const double nf = factorial(K.dim());
  FunctionalValue fv = pv;
  fv.name = "mahler";
  fv.value = nf * vol * pv.value;
  fv.error = nf * vol * pv.error;
  return fv;
}

/// ℳ_p(K) = |K| ∫ e^{-h_{K,p}(y)} dy
inline FunctionalValue mahler_p(const ConvexBody& K, double p, const quad::QuadConfig& cfg_in = {}) {
  if (!(p > 0.0) || !std::isfinite(p)) throw Error(ErrorCode::InvalidArgument, "p must be positive");
  require_origin_interior(K);
  const int n = K.dim();
  const auto dm = detail::decay_map(K, Vec::Zero(n));
  quad::QuadConfig cfg = cfg_in;
  cfg.premap = dm.W;
  cfg.scale = Vec::Constant(n, 1.0 / dm.depth);
  if (cfg.rule == quad::Rule::Auto) cfg.rule = quad::Rule::TensorDE;
  BodyEvaluator ev(K);
  auto r = quad::integrate_rn(n, [&](const Vec& y) { return std::exp(-ev.support_p(y, p)); }, cfg);
  const double vol = geom::volume(K);
  FunctionalValue fv;
  fv.name = "mahler-p";
  fv.value = vol * r.value;
  fv.error = vol * r.error;
  fv.provenance = Route::Integral;
  fv.converged = r.converged;
  return fv;
}

/// Both sides of e^{h_{K-a}(x)} <= 2^n e^{h̃_{K-a}(2x)}, also in log form.
struct JensenPair {
  double lhs = 0.0, rhs = 0.0;
  double log_lhs = 0.0, log_rhs = 0.0;
};

inline JensenPair jensen_gap(const ConvexBody& K, const Vec& a, const Vec& x) {
  if (!geom::membership(K, a, 1e-12)) throw Error(ErrorCode::PointOutsideBody, "base point is outside K");
  const int n = K.dim();
  BodyEvaluator ev(K);
  JensenPair jp;
  jp.log_lhs = ev.support(x) - a.dot(x);
  jp.log_rhs = n * std::log(2.0) + ev.tilde_h(2.0 * x) - 2.0 * a.dot(x);
  jp.lhs = std::exp(jp.log_lhs);
  jp.rhs = std::exp(jp.log_rhs);
  return jp;
}

}  // namespace mahlerlab::functionals
