#pragma once

#include "catalog.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <regex>
#include <sstream>
#include <string>

namespace mahlerlab::io {

using json = nlohmann::json;
using geom::ConvexBody;

namespace detail {

inline Vec to_vec(const json& j, const char* field) {
  if (!j.is_array() || j.empty()) throw Error(ErrorCode::ParseError, std::string(field) + " must be a non-empty array of numbers");
  Vec v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw Error(ErrorCode::ParseError, std::string(field) + " must contain only numbers");
    v(i) = j[i].get<double>();
    if (!std::isfinite(v(i))) throw Error(ErrorCode::ParseError, std::string(field) + " contains a non-finite entry");
  }
  return v;
}

inline Mat to_mat(const json& j, const char* field) {
  if (!j.is_array() || j.empty()) throw Error(ErrorCode::ParseError, std::string(field) + " must be a non-empty array of rows");
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  if (cols == 0) throw Error(ErrorCode::ParseError, std::string(field) + " rows must be non-empty arrays");
  Mat M(j.size(), cols);
  for (std::size_t i = 0; i < j.size(); ++i) {
    const Vec row = to_vec(j[i], field);
    if (static_cast<std::size_t>(row.size()) != cols) throw Error(ErrorCode::ParseError, std::string(field) + " rows differ in length");
    M.row(i) = row.transpose();
  }
  return M;
}

inline const json& field(const json& j, const char* name) {
  if (!j.contains(name)) throw Error(ErrorCode::ParseError, std::string("missing field '") + name + "'");
  return j.at(name);
}

}  // namespace detail

/// Body from its structured description:
///   {"type": "hpolytope", "normals": [[...]], "offsets": [...]}
///   {"type": "vpolytope", "vertices": [[...]]}
///   {"type": "ellipsoid", "center": [...], "shape": [[...]]}
///   {"type": "product", "factors": [body, body, ...]}
///   {"type": "affine", "matrix": [[...]], "translation": [...], "body": body}
inline ConvexBody parse_body(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::ParseError, "body must be an object");
  const auto& t = detail::field(j, "type");
  if (!t.is_string()) throw Error(ErrorCode::ParseError, "'type' must be a string");
  const std::string type = t.get<std::string>();
  if (type == "hpolytope") {
    const Mat A = detail::to_mat(detail::field(j, "normals"), "normals");
    const Vec b = detail::to_vec(detail::field(j, "offsets"), "offsets");
    if (A.rows() != b.size()) throw Error(ErrorCode::ParseError, "normals and offsets differ in length");
    return geom::hpolytope(A, b);
  }
  if (type == "vpolytope") {
    const Mat V = detail::to_mat(detail::field(j, "vertices"), "vertices");
    std::vector<Vec> pts;
    for (int i = 0; i < V.rows(); ++i) pts.push_back(V.row(i).transpose());
    return geom::vpolytope(pts);
  }
  if (type == "ellipsoid") {
    const Vec c = detail::to_vec(detail::field(j, "center"), "center");
    const Mat Q = detail::to_mat(detail::field(j, "shape"), "shape");
    if (Q.rows() != c.size() || Q.cols() != c.size()) throw Error(ErrorCode::ParseError, "shape must be a square matrix matching center");
    return geom::ellipsoid(c, Q);
  }
  if (type == "product") {
    const auto& f = detail::field(j, "factors");
    if (!f.is_array() || f.size() < 2) throw Error(ErrorCode::ParseError, "product needs at least two factors");
    ConvexBody K = parse_body(f[0]);
    for (std::size_t i = 1; i < f.size(); ++i) K = geom::product(K, parse_body(f[i]));
    return K;
  }
  if (type == "affine") {
    const ConvexBody K = parse_body(detail::field(j, "body"));
    const Mat A = detail::to_mat(detail::field(j, "matrix"), "matrix");
    const Vec c = j.contains("translation") ? detail::to_vec(j.at("translation"), "translation") : Vec::Zero(A.rows());
    if (A.rows() != K.dim() || A.cols() != K.dim() || c.size() != K.dim())
      throw Error(ErrorCode::ParseError, "affine map dimensions do not match the body");
    return geom::apply_affine(geom::AffineMap::make(A, c), K);
  }
  throw Error(ErrorCode::ParseError, "unknown body type '" + type + "'");
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, path + ": " + e.what());
  }
}

/// Catalog body from "NAME" or "random-hull(k,seed)".
inline ConvexBody catalog_body(const std::string& spec, int dim) {
  static const std::regex hull(R"(random-hull\(\s*(\d+)\s*,\s*(\d+)\s*\))");
  std::smatch m;
  if (dim < 1 || dim > kMaxDim) throw Error(ErrorCode::TooLarge, "dimension must lie in [1, " + std::to_string(kMaxDim) + "]");
  if (spec == "cube") return catalog::cube(dim);
  if (spec == "simplex") return catalog::simplex(dim);
  if (spec == "crosspolytope") return catalog::crosspolytope(dim);
  if (spec == "ball") return catalog::unit_ball(dim);
  if (spec == "interval") {
    if (dim != 1) throw Error(ErrorCode::InvalidArgument, "interval is one-dimensional");
    return catalog::interval();
  }
  if (std::regex_match(spec, m, hull)) {
    const int k = std::stoi(m[1]);
    if (k > kMaxElements) throw Error(ErrorCode::TooLarge, "random-hull point count exceeds " + std::to_string(kMaxElements));
    return catalog::random_hull(dim, k, std::stoull(m[2]));
  }
  if (spec == "random-hull") throw Error(ErrorCode::InvalidArgument, "random-hull needs parameters: random-hull(k,seed)");
  throw Error(ErrorCode::InvalidArgument, "unknown catalog body '" + spec + "'");
}

/// Body from "catalog:NAME", an inline JSON object, or a path to a JSON file.
inline ConvexBody load_body(const std::string& spec, int dim) {
  if (spec.rfind("catalog:", 0) == 0) return catalog_body(spec.substr(8), dim);
  if (!spec.empty() && spec.front() == '{') {
    try {
      return parse_body(json::parse(spec));
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::ParseError, e.what());
    }
  }
  return parse_body(read_json_file(spec));
}

/// Default dimension of a body spec when none is given.
inline int default_dim(const std::string& spec) { return spec == "catalog:interval" ? 1 : 2; }

}  // namespace mahlerlab::io
