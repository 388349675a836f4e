#pragma once

#include "body.hpp"
#include "rng.hpp"

#include <string>
#include <vector>

namespace mahlerlab::catalog {

/// [-h, h]^n as an H-polytope.
inline geom::ConvexBody cube(int n, double h = 1.0) {
  Mat A(2 * n, n);
  A.setZero();
  for (int i = 0; i < n; ++i) A(2 * i, i) = 1.0, A(2 * i + 1, i) = -1.0;
  return geom::hpolytope(A, Vec::Constant(2 * n, h));
}

/// (-1/2, 1/2)
inline geom::ConvexBody interval() { return cube(1, 0.5); }

/// conv{0, e_1, ..., e_n}
inline geom::ConvexBody simplex(int n) {
  std::vector<Vec> pts{Vec::Zero(n)};
  for (int i = 0; i < n; ++i) pts.push_back(Vec::Unit(n, i));
  return geom::vpolytope(pts);
}

/// conv{±e_i}
inline geom::ConvexBody crosspolytope(int n) {
  std::vector<Vec> pts;
  for (int i = 0; i < n; ++i) {
    pts.push_back(Vec::Unit(n, i));
    pts.push_back(-Vec::Unit(n, i));
  }
  return geom::vpolytope(pts);
}

inline geom::ConvexBody unit_ball(int n) { return geom::ball(n, 1.0); }

/// Convex hull of k standard Gaussian points; redrawn until full-dimensional.
inline geom::ConvexBody random_hull(int n, int k, std::uint64_t seed) {
  if (k < n + 1) throw Error(ErrorCode::InvalidArgument, "random-hull needs at least n+1 points");
  Rng rng(seed);
  for (int attempt = 0; attempt < 64; ++attempt) {
    std::vector<Vec> pts;
    for (int j = 0; j < k; ++j) pts.push_back(rng.normal_vec(n));
    try {
      return geom::vpolytope(pts);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DegenerateBody) throw;
    }
  }
  throw Error(ErrorCode::DegenerateBody, "could not draw a full-dimensional hull");
}

struct CatalogEntry {
  std::string name;
  std::string dims;
  std::string params;
  std::string description;
};

inline std::vector<CatalogEntry> listing() {
  return {
      {"ball", "1-4", "dim", "Euclidean unit ball (ellipsoid)"},
      {"crosspolytope", "1-4", "dim", "conv{±e_i}"},
      {"cube", "1-4", "dim", "[-1,1]^n"},
      {"interval", "1", "", "(-1/2,1/2)"},
      {"random-hull", "1-4", "dim, k, seed", "convex hull of k seeded Gaussian points"},
      {"simplex", "1-4", "dim", "conv{0,e_1,...,e_n}"},
  };
}

/// A named body of the standard corpus.
struct NamedBody {
  std::string name;
  geom::ConvexBody body;
};

/// Catalog bodies for dimensions in `dims` followed by `trials` seeded random
/// hulls per dimension.
inline std::vector<NamedBody> standard_corpus(const std::vector<int>& dims, int trials, std::uint64_t seed,
                                              bool include_ball = true) {
  std::vector<NamedBody> out;
  for (int n : dims) {
    const std::string d = std::to_string(n);
    out.push_back({"cube/" + d, cube(n)});
    out.push_back({"simplex/" + d, simplex(n)});
    if (n >= 2) out.push_back({"crosspolytope/" + d, crosspolytope(n)});
    if (include_ball) out.push_back({"ball/" + d, unit_ball(n)});
  }
  for (int n : dims) {
    for (int t = 0; t < trials; ++t) {
      const int k = n + 2 + static_cast<int>(stream_seed(seed, "corpus-size", 97 * n + t) % (3 * n + 3));
      const std::uint64_t s = stream_seed(seed, "corpus-hull", 1000 * n + t);
      out.push_back({"random-hull/" + std::to_string(n) + "/" + std::to_string(t), random_hull(n, k, s)});
    }
  }
  return out;
}

}  // namespace mahlerlab::catalog
