#pragma once

#include "core.hpp"
#include "polytope.hpp"

#include <memory>
#include <mutex>
#include <vector>

namespace mahlerlab::geom {

/// x -> A x + b with A invertible.
struct AffineMap {
  Mat A;
  Vec b;
  Mat A_inv;
  double det = 1.0;

  static AffineMap make(const Mat& A, const Vec& b, double tol = 1e-12) {
    if (A.rows() != A.cols() || A.rows() != b.size())
      throw Error(ErrorCode::InvalidArgument, "affine map shape mismatch");
    AffineMap S;
    S.A = A;
    S.b = b;
    S.det = A.determinant();
    if (!std::isfinite(S.det) || std::abs(S.det) <= tol) throw Error(ErrorCode::SingularMap, "|det A| below tolerance");
    S.A_inv = A.inverse();
    return S;
  }
  static AffineMap identity(int n) { return make(Mat::Identity(n, n), Vec::Zero(n)); }
  static AffineMap translation(const Vec& t) { return make(Mat::Identity(t.size(), t.size()), t); }
  static AffineMap linear(const Mat& A) { return make(A, Vec::Zero(A.rows())); }

  int dim() const { return static_cast<int>(b.size()); }
  Vec apply(const Vec& x) const { return A * x + b; }
  Vec apply_inverse(const Vec& y) const { return A_inv * (y - b); }
  AffineMap inverse() const { return make(A_inv, -A_inv * b); }
  /// (this ∘ other)(x) = this(other(x))
  AffineMap compose(const AffineMap& other) const { return make(A * other.A, A * other.b + b); }
  bool is_identity(double tol = 0.0) const {
    return (A - Mat::Identity(A.rows(), A.cols())).cwiseAbs().maxCoeff() <= tol && b.cwiseAbs().maxCoeff() <= tol;
  }
};

enum class BodyKind { HPolytope, VPolytope, Ellipsoid, Product, AffineImage };

inline const char* to_string(BodyKind k) {
  switch (k) {
    case BodyKind::HPolytope: return "hpolytope";
    case BodyKind::VPolytope: return "vpolytope";
    case BodyKind::Ellipsoid: return "ellipsoid";
    case BodyKind::Product: return "product";
    case BodyKind::AffineImage: return "affine";
  }
  return "?";
}

class ConvexBody;

namespace detail {

struct BodyNode {
  BodyKind kind{};
  int n = 0;
  bool origin_interior = false;
  // HPolytope input rows (normalized to unit normals) / VPolytope input points
  Mat h_normals;
  Vec h_offsets;
  std::vector<Vec> v_points;
  std::shared_ptr<const Polytope> poly;
  // Ellipsoid {x : (x-c)^T Q^{-1} (x-c) <= 1}, Q = L L^T
  Vec center;
  Mat shape;
  Mat chol;
  // Product / AffineImage
  std::shared_ptr<const BodyNode> first, second;
  std::shared_ptr<const AffineMap> map;

  mutable std::once_flag flat_once;
  mutable std::shared_ptr<const Polytope> flat;
};

}  // namespace detail

/// Immutable handle to a convex body; copies share the underlying tree.
class ConvexBody {
 public:
  ConvexBody() = default;
  explicit ConvexBody(std::shared_ptr<const detail::BodyNode> node) : node_(std::move(node)) {}

  bool valid() const { return static_cast<bool>(node_); }
  int dim() const { return node_->n; }
  BodyKind kind() const { return node_->kind; }
  bool origin_interior_flag() const { return node_->origin_interior; }
  const detail::BodyNode& node() const { return *node_; }
  const std::shared_ptr<const detail::BodyNode>& ptr() const { return node_; }

  ConvexBody first() const { return ConvexBody(node_->first); }
  ConvexBody second() const { return ConvexBody(node_->second); }
  ConvexBody inner() const { return ConvexBody(node_->first); }
  const AffineMap& map() const { return *node_->map; }
  const Polytope& polytope() const { return *node_->poly; }
  const Vec& center() const { return node_->center; }
  const Mat& shape() const { return node_->shape; }
  const Mat& chol() const { return node_->chol; }

 private:
  std::shared_ptr<const detail::BodyNode> node_;
};

// ---------------------------------------------------------------------------
// construction

inline ConvexBody hpolytope(const Mat& A, const Vec& b, bool origin_interior = false) {
  auto node = std::make_shared<detail::BodyNode>();
  node->kind = BodyKind::HPolytope;
  node->n = static_cast<int>(A.cols());
  node->poly = polytope_from_halfspaces(A, b);
  node->h_normals = A;
  node->h_offsets = b;
  for (int i = 0; i < A.rows(); ++i) {
    const double nr = A.row(i).norm();
    if (nr > 0) node->h_normals.row(i) /= nr, node->h_offsets(i) /= nr;
  }
  if (origin_interior) {
    for (int i = 0; i < node->h_offsets.size(); ++i)
      if (!(node->h_offsets(i) > kGeomTol))
        throw Error(ErrorCode::OriginNotInterior, "facet " + std::to_string(i) + " has offset <= 0; origin must be strictly interior");
  }
  node->origin_interior = origin_interior;
  return ConvexBody(node);
}

inline ConvexBody vpolytope(const std::vector<Vec>& points, bool origin_interior = false) {
  auto node = std::make_shared<detail::BodyNode>();
  node->kind = BodyKind::VPolytope;
  node->poly = polytope_from_points(points);
  node->n = node->poly->n;
  node->v_points = node->poly->vertices;
  if (origin_interior && !(node->poly->offsets.minCoeff() > kGeomTol))
    throw Error(ErrorCode::OriginNotInterior, "origin is not strictly inside the vertex hull");
  node->origin_interior = origin_interior;
  return ConvexBody(node);
}

inline ConvexBody vpolytope(const Mat& V_cols, bool origin_interior = false) {
  std::vector<Vec> pts;
  for (int j = 0; j < V_cols.cols(); ++j) pts.push_back(V_cols.col(j));
  return vpolytope(pts, origin_interior);
}

inline ConvexBody ellipsoid(const Vec& c, const Mat& Q, double tol = 1e-12) {
  const int n = static_cast<int>(c.size());
  if (Q.rows() != n || Q.cols() != n) throw Error(ErrorCode::InvalidArgument, "shape matrix size mismatch");
  if (n < 1 || n > kMaxDim) throw Error(ErrorCode::TooLarge, "dimension outside 1..4");
  if ((Q - Q.transpose()).cwiseAbs().maxCoeff() > 1e-10 * std::max(1.0, Q.cwiseAbs().maxCoeff()))
    throw Error(ErrorCode::InvalidArgument, "shape matrix is not symmetric");
  Eigen::SelfAdjointEigenSolver<Mat> es(Q);
  if (es.eigenvalues().minCoeff() <= tol) throw Error(ErrorCode::DegenerateBody, "shape matrix is not positive definite");
  auto node = std::make_shared<detail::BodyNode>();
  node->kind = BodyKind::Ellipsoid;
  node->n = n;
  node->center = c;
  node->shape = 0.5 * (Q + Q.transpose());
  node->chol = node->shape.llt().matrixL();
  return ConvexBody(node);
}

inline ConvexBody ball(int n, double r = 1.0, const Vec& c = Vec()) {
  return ellipsoid(c.size() ? c : Vec::Zero(n), r * r * Mat::Identity(n, n));
}

inline ConvexBody product(const ConvexBody& K, const ConvexBody& L) {
  if (K.dim() + L.dim() > kMaxDim) throw Error(ErrorCode::TooLarge, "product dimension exceeds 4");
  auto node = std::make_shared<detail::BodyNode>();
  node->kind = BodyKind::Product;
  node->n = K.dim() + L.dim();
  node->first = K.ptr();
  node->second = L.ptr();
  node->origin_interior = K.origin_interior_flag() && L.origin_interior_flag();
  return ConvexBody(node);
}

namespace detail {

inline Polytope transform_polytope(const Polytope& P, const AffineMap& S) {
  Polytope Q = P;
  const int n = P.n;
  for (auto& v : Q.vertices) v = S.apply(v);
  Mat N = P.normals * S.A_inv;
  Vec off = P.offsets + N * S.b;
  for (int i = 0; i < N.rows(); ++i) {
    const double nr = N.row(i).norm();
    N.row(i) /= nr;
    off(i) /= nr;
  }
  Q.normals = N;
  Q.offsets = off;
  const double adet = std::abs(S.det);
  for (auto& v : Q.simplex_volumes) v *= adet;
  Q.volume = P.volume * adet;
  Q.barycenter = S.apply(P.barycenter);
  const Vec m1 = P.volume * P.barycenter;
  Q.second_moment = adet * (S.A * P.second_moment * S.A.transpose() + S.A * m1 * S.b.transpose() +
                            S.b * m1.transpose() * S.A.transpose() + P.volume * S.b * S.b.transpose());
  for (std::size_t c = 0; c < Q.polar_cells.size(); ++c) {
    Mat A(n, n);
    for (int i = 0; i < n; ++i) A.row(i) = Q.normals.row(Q.polar_cells[c][i]);
    Q.polar_cell_dets[c] = std::abs(A.determinant());
  }
  return Q;
}

}  // namespace detail

/// Exact image S(K): vertices and facets are mapped for polytopes, center and
/// shape for ellipsoids; composite bodies are wrapped.
inline ConvexBody apply_affine(const AffineMap& S, const ConvexBody& K) {
  if (S.dim() != K.dim()) throw Error(ErrorCode::InvalidArgument, "affine map dimension mismatch");
  if (S.is_identity()) return K;
  switch (K.kind()) {
    case BodyKind::HPolytope:
    case BodyKind::VPolytope: {
      const auto& nd = K.node();
      auto node = std::make_shared<detail::BodyNode>();
      node->kind = K.kind();
      node->n = K.dim();
      node->poly = std::make_shared<const Polytope>(detail::transform_polytope(*nd.poly, S));
      if (K.kind() == BodyKind::HPolytope) {
        node->h_normals = nd.h_normals * S.A_inv;
        node->h_offsets = nd.h_offsets + node->h_normals * S.b;
        for (int i = 0; i < node->h_normals.rows(); ++i) {
          const double nr = node->h_normals.row(i).norm();
          node->h_normals.row(i) /= nr;
          node->h_offsets(i) /= nr;
        }
      } else {
        node->v_points = node->poly->vertices;
      }
      return ConvexBody(node);
    }
    case BodyKind::Ellipsoid:
      return ellipsoid(S.apply(K.center()), S.A * K.shape() * S.A.transpose());
    case BodyKind::AffineImage: {
      auto node = std::make_shared<detail::BodyNode>();
      node->kind = BodyKind::AffineImage;
      node->n = K.dim();
      node->first = K.node().first;
      node->map = std::make_shared<const AffineMap>(S.compose(K.map()));
      return ConvexBody(node);
    }
    case BodyKind::Product: {
      auto node = std::make_shared<detail::BodyNode>();
      node->kind = BodyKind::AffineImage;
      node->n = K.dim();
      node->first = K.ptr();
      node->map = std::make_shared<const AffineMap>(S);
      return ConvexBody(node);
    }
  }
  return K;
}

inline ConvexBody translate(const ConvexBody& K, const Vec& t) { return apply_affine(AffineMap::translation(t), K); }
inline ConvexBody scale(const ConvexBody& K, double lambda) {
  return apply_affine(AffineMap::linear(lambda * Mat::Identity(K.dim(), K.dim())), K);
}

// ---------------------------------------------------------------------------
// flattening composite polytopal bodies


inline bool is_polytopal(const ConvexBody& K) {
  switch (K.kind()) {
    case BodyKind::HPolytope:
    case BodyKind::VPolytope: return true;
    case BodyKind::Ellipsoid: return false;
    case BodyKind::Product: return is_polytopal(K.first()) && is_polytopal(K.second());
    case BodyKind::AffineImage: return is_polytopal(K.inner());
  }
  return false;
}

/// Full polytope data for any polytopal body (cached per node).
inline std::shared_ptr<const Polytope> as_polytope(const ConvexBody& K) {
  if (K.kind() == BodyKind::HPolytope || K.kind() == BodyKind::VPolytope) return K.node().poly;
  if (!is_polytopal(K)) throw Error(ErrorCode::UnsupportedRepresentation, "body is not polytopal");
  const auto& nd = K.node();
  std::call_once(nd.flat_once, [&] {
    if (K.kind() == BodyKind::AffineImage) {
      nd.flat = std::make_shared<const Polytope>(detail::transform_polytope(*as_polytope(K.inner()), K.map()));
    } else {
      auto P = as_polytope(K.first());
      auto Q = as_polytope(K.second());
      const int n1 = P->n, n2 = Q->n;
      Mat A = Mat::Zero(P->normals.rows() + Q->normals.rows(), n1 + n2);
      Vec b(A.rows());
      A.topLeftCorner(P->normals.rows(), n1) = P->normals;
      A.bottomRightCorner(Q->normals.rows(), n2) = Q->normals;
      b << P->offsets, Q->offsets;
      nd.flat = polytope_from_halfspaces(A, b);
    }
  });
  return nd.flat;
}

inline std::vector<Vec> vertices(const ConvexBody& K) { return as_polytope(K)->vertices; }

// ---------------------------------------------------------------------------
// measurements

inline double volume(const ConvexBody& K) {
  switch (K.kind()) {
    case BodyKind::HPolytope:
    case BodyKind::VPolytope: return K.polytope().volume;
    case BodyKind::Ellipsoid: return unit_ball_volume(K.dim()) * K.chol().diagonal().prod();
    case BodyKind::Product: return volume(K.first()) * volume(K.second());
    case BodyKind::AffineImage: return std::abs(K.map().det) * volume(K.inner());
  }
  return 0.0;
}

inline Vec barycenter(const ConvexBody& K) {
  switch (K.kind()) {
    case BodyKind::HPolytope:
    case BodyKind::VPolytope: return K.polytope().barycenter;
    case BodyKind::Ellipsoid: return K.center();
    case BodyKind::Product: return concat(barycenter(K.first()), barycenter(K.second()));
    case BodyKind::AffineImage: return K.map().apply(barycenter(K.inner()));
  }
  return {};
}

/// Covariance of the uniform distribution on K.
inline Mat covariance(const ConvexBody& K) {
  const int n = K.dim();
  switch (K.kind()) {
    case BodyKind::HPolytope:
    case BodyKind::VPolytope: {
      const auto& P = K.polytope();
      return P.second_moment / P.volume - P.barycenter * P.barycenter.transpose();
    }
    case BodyKind::Ellipsoid: return K.shape() / (n + 2.0);
    case BodyKind::Product: {
      Mat C = Mat::Zero(n, n);
      const int n1 = K.first().dim();
      C.topLeftCorner(n1, n1) = covariance(K.first());
      C.bottomRightCorner(n - n1, n - n1) = covariance(K.second());
      return C;
    }
    case BodyKind::AffineImage: return K.map().A * covariance(K.inner()) * K.map().A.transpose();
  }
  return {};
}

inline double support(const ConvexBody& K, const Vec& y) {
  switch (K.kind()) {
    case BodyKind::HPolytope:
    case BodyKind::VPolytope: return K.polytope().support(y);
    case BodyKind::Ellipsoid: return K.center().dot(y) + (K.chol().transpose() * y).norm();
    case BodyKind::Product: {
      const int n1 = K.first().dim();
      return support(K.first(), y.head(n1)) + support(K.second(), y.tail(K.dim() - n1));
    }
    case BodyKind::AffineImage: return K.map().b.dot(y) + support(K.inner(), K.map().A.transpose() * y);
  }
  return 0.0;
}

inline bool membership(const ConvexBody& K, const Vec& x, double tol = 1e-12) {
  switch (K.kind()) {
    case BodyKind::HPolytope:
    case BodyKind::VPolytope: return K.polytope().max_slack_violation(x) <= tol;
    case BodyKind::Ellipsoid: {
      const Vec u = K.chol().triangularView<Eigen::Lower>().solve(x - K.center());
      return u.squaredNorm() <= 1.0 + tol;
    }
    case BodyKind::Product: {
      const int n1 = K.first().dim();
      return membership(K.first(), x.head(n1), tol) && membership(K.second(), x.tail(K.dim() - n1), tol);
    }
    case BodyKind::AffineImage: return membership(K.inner(), K.map().apply_inverse(x), tol);
  }
  return false;
}

/// Lower bound on the Euclidean distance from x to the complement of K
/// (negative when x lies outside). Exact for polytopes.
inline double interior_depth(const ConvexBody& K, const Vec& x) {
  switch (K.kind()) {
    case BodyKind::HPolytope:
    case BodyKind::VPolytope: return -K.polytope().max_slack_violation(x);
    case BodyKind::Ellipsoid: {
      const Vec u = K.chol().triangularView<Eigen::Lower>().solve(x - K.center());
      Eigen::SelfAdjointEigenSolver<Mat> es(K.shape());
      return std::sqrt(es.eigenvalues().minCoeff()) * (1.0 - u.norm());
    }
    case BodyKind::Product: {
      const int n1 = K.first().dim();
      return std::min(interior_depth(K.first(), x.head(n1)), interior_depth(K.second(), x.tail(K.dim() - n1)));
    }
    case BodyKind::AffineImage: {
      if (is_polytopal(K)) return -as_polytope(K)->max_slack_violation(x);
      Eigen::JacobiSVD<Mat> svd(K.map().A);
      return interior_depth(K.inner(), K.map().apply_inverse(x)) * svd.singularValues().minCoeff();
    }
  }
  return 0.0;
}

inline bool origin_in_interior(const ConvexBody& K, double tol = kGeomTol) {
  return interior_depth(K, Vec::Zero(K.dim())) > tol;
}

// ---------------------------------------------------------------------------
// duality and symmetrization

inline ConvexBody polar(const ConvexBody& K) {
  const int n = K.dim();
  if (!origin_in_interior(K)) throw Error(ErrorCode::OriginNotInterior, "polar of a body without the origin in its interior is unbounded");
  switch (K.kind()) {
    case BodyKind::HPolytope: {
      const auto& nd = K.node();
      std::vector<Vec> pts;
      for (int i = 0; i < nd.h_normals.rows(); ++i) {
        if (nd.h_offsets(i) <= kGeomTol) throw Error(ErrorCode::OriginNotInterior, "non-positive facet offset");
        pts.push_back(nd.h_normals.row(i).transpose() / nd.h_offsets(i));
      }
      return vpolytope(pts, true);
    }
    case BodyKind::VPolytope: {
      const auto& pts = K.node().v_points;
      Mat A(pts.size(), n);
      for (std::size_t j = 0; j < pts.size(); ++j) A.row(j) = pts[j].transpose();
      return hpolytope(A, Vec::Ones(pts.size()), true);
    }
    case BodyKind::Ellipsoid:
      if (K.center().cwiseAbs().maxCoeff() > kGeomTol)
        throw Error(ErrorCode::UnsupportedRepresentation, "polar of a non-centered ellipsoid is not represented geometrically");
      return ellipsoid(Vec::Zero(n), K.shape().inverse());
    case BodyKind::AffineImage:
      if (K.map().b.cwiseAbs().maxCoeff() <= kGeomTol)
        return apply_affine(AffineMap::linear(K.map().A_inv.transpose()), polar(K.inner()));
      [[fallthrough]];
    case BodyKind::Product: {
      if (!is_polytopal(K)) throw Error(ErrorCode::UnsupportedRepresentation, "polar of this composite body is not represented geometrically");
      auto P = as_polytope(K);
      std::vector<Vec> pts;
      for (int i = 0; i < P->normals.rows(); ++i) pts.push_back(P->normals.row(i).transpose() / P->offsets(i));
      return vpolytope(pts, true);
    }
  }
  return K;
}

namespace detail {
inline bool centrally_symmetric_at_origin(const ConvexBody& K) {
  switch (K.kind()) {
    case BodyKind::Ellipsoid: return K.center().cwiseAbs().maxCoeff() <= kGeomTol;
    case BodyKind::Product: return centrally_symmetric_at_origin(K.first()) && centrally_symmetric_at_origin(K.second());
    case BodyKind::AffineImage:
      return K.map().b.cwiseAbs().maxCoeff() <= kGeomTol && centrally_symmetric_at_origin(K.inner());
    default: return false;
  }
}
}  // namespace detail

/// conv(K ∪ -K)
inline ConvexBody reflection_body(const ConvexBody& K) {
  if (!is_polytopal(K)) {
    if (detail::centrally_symmetric_at_origin(K)) return K;
    throw Error(ErrorCode::UnsupportedRepresentation, "reflection body needs a polytope or an origin-symmetric body");
  }
  std::vector<Vec> pts;
  for (const auto& v : as_polytope(K)->vertices) {
    pts.push_back(v);
    pts.push_back(-v);
  }
  return vpolytope(pts);
}

}  // namespace mahlerlab::geom
