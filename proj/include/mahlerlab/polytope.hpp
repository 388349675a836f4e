#pragma once

#include "core.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <vector>

namespace mahlerlab::geom {

namespace detail {

inline void for_each_combination(int m, int k, const std::function<void(const std::vector<int>&)>& fn) {
  if (k > m || k < 0) return;
  std::vector<int> idx(k);
  for (int i = 0; i < k; ++i) idx[i] = i;
  for (;;) {
    fn(idx);
    int i = k - 1;
    while (i >= 0 && idx[i] == m - k + i) --i;
    if (i < 0) return;
    ++idx[i];
    for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

inline int numeric_rank(const Mat& M, double tol) {
  if (M.rows() == 0 || M.cols() == 0) return 0;
  Eigen::JacobiSVD<Mat> svd(M);
  const auto& s = svd.singularValues();
  int r = 0;
  for (int i = 0; i < s.size(); ++i)
    if (s(i) > tol) ++r;
  return r;
}

inline int affine_rank(const std::vector<Vec>& pts, const std::vector<int>& ids, double tol) {
  if (ids.size() <= 1) return 0;
  const int n = static_cast<int>(pts[ids[0]].size());
  Mat D(ids.size() - 1, n);
  for (std::size_t i = 1; i < ids.size(); ++i) D.row(i - 1) = (pts[ids[i]] - pts[ids[0]]).transpose();
  return numeric_rank(D, tol);
}

inline std::vector<int> sorted_intersection(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<int> r;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(r));
  return r;
}

}  // namespace detail

/// Fully enumerated polytope: vertices, irredundant unit-normal facets,
/// incidence, a triangulation, and the cone decomposition of its polar boundary.
struct Polytope {
  int n = 0;
  std::vector<Vec> vertices;
  Mat normals;  // one unit normal per row
  Vec offsets;
  std::vector<std::vector<int>> facet_vertices;  // sorted vertex ids per facet
  std::vector<std::vector<int>> simplices;       // n+1 vertex ids each
  std::vector<double> simplex_volumes;
  double volume = 0.0;
  Vec barycenter;
  Mat second_moment;  // integral of y y^T over the body
  std::vector<std::vector<int>> polar_cells;  // n facet ids per boundary simplex of the polar
  std::vector<double> polar_cell_dets;        // |det| of the facet normals in each cell

  double support(const Vec& y) const {
    double m = -std::numeric_limits<double>::infinity();
    for (const auto& v : vertices) m = std::max(m, v.dot(y));
    return m;
  }

  double max_slack_violation(const Vec& x) const { return (normals * x - offsets).maxCoeff(); }

  Mat vertex_matrix() const {
    Mat V(n, vertices.size());
    for (std::size_t j = 0; j < vertices.size(); ++j) V.col(j) = vertices[j];
    return V;
  }
};

namespace detail {

inline double scale_of(const std::vector<Vec>& pts) {
  double s = 1.0;
  for (const auto& p : pts) s = std::max(s, p.cwiseAbs().maxCoeff());
  return s;
}

inline std::vector<Vec> dedup_points(const std::vector<Vec>& pts, double tol, std::vector<int>* origin = nullptr) {
  std::vector<Vec> out;
  if (origin) origin->clear();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    bool dup = false;
    for (const auto& q : out)
      if ((q - pts[i]).cwiseAbs().maxCoeff() <= tol) {
        dup = true;
        break;
      }
    if (!dup) {
      out.push_back(pts[i]);
      if (origin) origin->push_back(static_cast<int>(i));
    }
  }
  return out;
}

inline std::vector<std::vector<int>> triangulate_face(const std::vector<Vec>& verts,
                                                      const std::vector<std::vector<int>>& facets,
                                                      const std::vector<int>& face, int d, double tol) {
  if (d == 0) return {{face.front()}};
  const int v0 = face.front();
  std::set<std::vector<int>> subfaces;
  for (const auto& f : facets) {
    auto g = sorted_intersection(face, f);
    if (static_cast<int>(g.size()) < d || g.size() == face.size()) continue;
    if (affine_rank(verts, g, tol) == d - 1) subfaces.insert(g);
  }
  std::vector<std::vector<int>> out;
  for (const auto& g : subfaces) {
    if (std::binary_search(g.begin(), g.end(), v0)) continue;
    for (auto t : triangulate_face(verts, facets, g, d - 1, tol)) {
      t.push_back(v0);
      out.push_back(std::move(t));
    }
  }
  return out;
}

inline std::vector<std::pair<Vec, double>> hull_facets(const std::vector<Vec>& pts, double tol) {
  const int n = static_cast<int>(pts[0].size());
  const int m = static_cast<int>(pts.size());
  std::vector<std::pair<Vec, double>> facets;
  auto add = [&](const Vec& u, double d) {
    for (const auto& [v, e] : facets)
      if ((v - u).norm() < 1e-9 && std::abs(e - d) < 1e-9 * std::max(1.0, std::abs(d))) return;
    facets.emplace_back(u, d);
  };
  if (n == 1) {
    double lo = pts[0](0), hi = pts[0](0);
    for (const auto& p : pts) lo = std::min(lo, p(0)), hi = std::max(hi, p(0));
    facets.emplace_back(Vec::Constant(1, -1.0), -lo);
    facets.emplace_back(Vec::Constant(1, 1.0), hi);
    return facets;
  }
  for_each_combination(m, n, [&](const std::vector<int>& idx) {
    Mat D(n - 1, n);
    for (int i = 1; i < n; ++i) D.row(i - 1) = (pts[idx[i]] - pts[idx[0]]).transpose();
    Eigen::JacobiSVD<Mat> svd(D, Eigen::ComputeFullV);
    if (svd.singularValues()(n - 2) <= tol) return;
    Vec u = svd.matrixV().col(n - 1);
    u.normalize();
    const double d = u.dot(pts[idx[0]]);
    double lo = 0.0, hi = 0.0;
    for (const auto& p : pts) {
      const double s = u.dot(p) - d;
      lo = std::min(lo, s);
      hi = std::max(hi, s);
    }
    if (hi <= tol) add(u, d);
    else if (lo >= -tol) add(-u, -d);
  });
  return facets;
}

inline void finalize(Polytope& P, double tol) {
  const int n = P.n;
  const int nv = static_cast<int>(P.vertices.size());
  std::vector<int> all(nv);
  for (int i = 0; i < nv; ++i) all[i] = i;
  P.simplices = triangulate_face(P.vertices, P.facet_vertices, all, n, tol);
  P.volume = 0.0;
  P.barycenter = Vec::Zero(n);
  P.second_moment = Mat::Zero(n, n);
  std::vector<std::vector<int>> kept;
  const double nf = factorial(n);
  for (const auto& s : P.simplices) {
    Mat E(n, n);
    for (int i = 0; i < n; ++i) E.col(i) = P.vertices[s[i + 1]] - P.vertices[s[0]];
    const double vol = std::abs(E.determinant()) / nf;
    if (vol < 1e-14) continue;
    kept.push_back(s);
    P.simplex_volumes.push_back(vol);
    Vec sum = Vec::Zero(n);
    Mat outer = Mat::Zero(n, n);
    for (int id : s) {
      sum += P.vertices[id];
      outer += P.vertices[id] * P.vertices[id].transpose();
    }
    P.volume += vol;
    P.barycenter += vol * sum / (n + 1);
    P.second_moment += vol / ((n + 1.0) * (n + 2.0)) * (outer + sum * sum.transpose());
  }
  P.simplices = std::move(kept);
  if (P.volume <= 0.0) throw Error(ErrorCode::DegenerateBody, "polytope has zero volume");
  P.barycenter /= P.volume;
}

inline Polytope build_from_points(const std::vector<Vec>& input, double tol);

// Boundary cells of the polar are computed on (P - c)° for an interior c; the
// combinatorics do not depend on c.
inline void attach_polar_cells(Polytope& P, double tol) {
  const int n = P.n;
  const int m = static_cast<int>(P.offsets.size());
  std::vector<Vec> q(m);
  for (int i = 0; i < m; ++i) {
    const double c = P.offsets(i) - P.normals.row(i).dot(P.barycenter);
    q[i] = P.normals.row(i).transpose() / c;
  }
  if (n == 1) {
    for (int i = 0; i < m; ++i) {
      P.polar_cells.push_back({i});
      P.polar_cell_dets.push_back(std::abs(P.normals(i, 0)));
    }
    return;
  }
  const double stol = tol * scale_of(q);
  auto facets = hull_facets(q, stol);
  std::vector<std::vector<int>> fv;
  for (const auto& [u, d] : facets) {
    std::vector<int> inc;
    for (int i = 0; i < m; ++i)
      if (std::abs(u.dot(q[i]) - d) <= stol) inc.push_back(i);
    fv.push_back(inc);
  }
  for (const auto& f : fv) {
    for (const auto& cell : triangulate_face(q, fv, f, n - 1, stol)) {
      Mat A(n, n);
      for (int i = 0; i < n; ++i) A.row(i) = P.normals.row(cell[i]);
      const double det = std::abs(A.determinant());
      if (det < 1e-14) continue;
      P.polar_cells.push_back(cell);
      P.polar_cell_dets.push_back(det);
    }
  }
}

inline void check_caps(int n, std::size_t count) {
  if (n < 1 || n > kMaxDim) throw Error(ErrorCode::TooLarge, "dimension " + std::to_string(n) + " outside 1..4");
  if (count > static_cast<std::size_t>(kMaxElements))
    throw Error(ErrorCode::TooLarge, std::to_string(count) + " elements exceed the cap of 64");
}

inline Polytope build_from_points(const std::vector<Vec>& input, double tol) {
  if (input.empty()) throw Error(ErrorCode::DegenerateBody, "empty vertex list");
  const int n = static_cast<int>(input[0].size());
  check_caps(n, input.size());
  for (const auto& p : input) {
    if (p.size() != n) throw Error(ErrorCode::InvalidArgument, "vertices of mixed dimension");
    if (!p.allFinite()) throw Error(ErrorCode::InvalidArgument, "non-finite vertex coordinate");
  }
  const double scale = scale_of(input);
  const double stol = tol * scale;
  auto pts = dedup_points(input, stol);
  std::vector<int> all(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) all[i] = static_cast<int>(i);
  if (static_cast<int>(pts.size()) < n + 1 || affine_rank(pts, all, 1e-9 * scale) < n)
    throw Error(ErrorCode::DegenerateBody, "vertices do not affinely span R^" + std::to_string(n));
  auto facets = hull_facets(pts, stol);
  const int nf = static_cast<int>(facets.size());
  std::vector<std::vector<int>> inc(nf);
  for (int f = 0; f < nf; ++f)
    for (int j = 0; j < static_cast<int>(pts.size()); ++j)
      if (std::abs(facets[f].first.dot(pts[j]) - facets[f].second) <= stol) inc[f].push_back(j);
  std::vector<int> remap(pts.size(), -1);
  Polytope P;
  P.n = n;
  for (int j = 0; j < static_cast<int>(pts.size()); ++j) {
    std::vector<Vec> ns;
    for (int f = 0; f < nf; ++f)
      if (std::binary_search(inc[f].begin(), inc[f].end(), j)) ns.push_back(facets[f].first);
    Mat N(ns.size(), n);
    for (std::size_t i = 0; i < ns.size(); ++i) N.row(i) = ns[i].transpose();
    if (numeric_rank(N, 1e-9) == n) {
      remap[j] = static_cast<int>(P.vertices.size());
      P.vertices.push_back(pts[j]);
    }
  }
  P.normals.resize(nf, n);
  P.offsets.resize(nf);
  for (int f = 0; f < nf; ++f) {
    P.normals.row(f) = facets[f].first.transpose();
    P.offsets(f) = facets[f].second;
    std::vector<int> fv;
    for (int j : inc[f])
      if (remap[j] >= 0) fv.push_back(remap[j]);
    P.facet_vertices.push_back(fv);
  }
  finalize(P, 1e-9 * scale);
  attach_polar_cells(P, tol);
  return P;
}

inline Polytope build_from_halfspaces(const Mat& A_in, const Vec& b_in, double tol) {
  const int n = static_cast<int>(A_in.cols());
  if (A_in.rows() != b_in.size()) throw Error(ErrorCode::InvalidArgument, "normals/offsets length mismatch");
  check_caps(n, A_in.rows());
  if (!A_in.allFinite() || !b_in.allFinite()) throw Error(ErrorCode::InvalidArgument, "non-finite facet data");
  std::vector<Vec> rows;
  std::vector<double> offs;
  for (int i = 0; i < A_in.rows(); ++i) {
    const double nr = A_in.row(i).norm();
    if (nr < tol) {
      if (b_in(i) < -tol) throw Error(ErrorCode::DegenerateBody, "infeasible zero-normal constraint");
      continue;
    }
    rows.push_back(A_in.row(i).transpose() / nr);
    offs.push_back(b_in(i) / nr);
  }
  const int m = static_cast<int>(rows.size());
  Mat A(m, n);
  Vec b(m);
  for (int i = 0; i < m; ++i) A.row(i) = rows[i].transpose(), b(i) = offs[i];
  if (m == 0 || numeric_rank(A, 1e-9) < n)
    throw Error(ErrorCode::UnboundedBody, "facet normals do not span R^" + std::to_string(n));
  if (n >= 2) {
    for_each_combination(m, n - 1, [&](const std::vector<int>& idx) {
      Mat S(n - 1, n);
      for (int i = 0; i < n - 1; ++i) S.row(i) = A.row(idx[i]);
      Eigen::JacobiSVD<Mat> svd(S, Eigen::ComputeFullV);
      if (svd.singularValues()(n - 2) <= 1e-12) return;
      const Vec d = svd.matrixV().col(n - 1);
      const Vec Ad = A * d;
      if (Ad.maxCoeff() <= 1e-12 || Ad.minCoeff() >= -1e-12)
        throw Error(ErrorCode::UnboundedBody, "recession direction found");
    });
  }
  const double bscale = std::max(1.0, b.cwiseAbs().maxCoeff());
  const double stol = tol * bscale;
  std::vector<Vec> verts;
  for_each_combination(m, n, [&](const std::vector<int>& idx) {
    Mat S(n, n);
    Vec r(n);
    for (int i = 0; i < n; ++i) S.row(i) = A.row(idx[i]), r(i) = b(idx[i]);
    Eigen::FullPivLU<Mat> lu(S);
    if (std::abs(lu.determinant()) < 1e-12) return;
    const Vec v = lu.solve(r);
    if ((A * v - b).maxCoeff() > stol) return;
    for (const auto& w : verts)
      if ((w - v).cwiseAbs().maxCoeff() <= stol) return;
    verts.push_back(v);
  });
  if (verts.empty()) throw Error(ErrorCode::DegenerateBody, "empty feasible region");
  std::vector<int> all(verts.size());
  for (std::size_t i = 0; i < verts.size(); ++i) all[i] = static_cast<int>(i);
  if (affine_rank(verts, all, 1e-9 * bscale) < n) throw Error(ErrorCode::DegenerateBody, "feasible region is not full-dimensional");
  Polytope P;
  P.n = n;
  P.vertices = verts;
  std::vector<Vec> fn;
  std::vector<double> fo;
  for (int i = 0; i < m; ++i) {
    std::vector<int> inc;
    for (int j = 0; j < static_cast<int>(verts.size()); ++j)
      if (std::abs(A.row(i).dot(verts[j]) - b(i)) <= stol) inc.push_back(j);
    const bool facet = (n == 1) ? !inc.empty() : (static_cast<int>(inc.size()) >= n && affine_rank(verts, inc, 1e-9 * bscale) == n - 1);
    if (!facet) continue;
    bool dup = false;
    for (std::size_t k = 0; k < fn.size(); ++k)
      if ((fn[k] - rows[i]).norm() < 1e-9 && std::abs(fo[k] - b(i)) <= stol) dup = true;
    if (dup) continue;
    fn.push_back(A.row(i).transpose());
    fo.push_back(b(i));
    P.facet_vertices.push_back(inc);
  }
  P.normals.resize(fn.size(), n);
  P.offsets.resize(fn.size());
  for (std::size_t k = 0; k < fn.size(); ++k) P.normals.row(k) = fn[k].transpose(), P.offsets(k) = fo[k];
  finalize(P, 1e-9 * bscale);
  attach_polar_cells(P, tol);
  return P;
}

}  // namespace detail

inline std::shared_ptr<const Polytope> polytope_from_points(const std::vector<Vec>& pts, double tol = kGeomTol) {
  return std::make_shared<const Polytope>(detail::build_from_points(pts, tol));
}

inline std::shared_ptr<const Polytope> polytope_from_halfspaces(const Mat& A, const Vec& b, double tol = kGeomTol) {
  return std::make_shared<const Polytope>(detail::build_from_halfspaces(A, b, tol));
}

}  // namespace mahlerlab::geom
