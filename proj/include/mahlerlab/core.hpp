#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace mahlerlab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kGeomTol = 1e-10;
inline constexpr int kMaxDim = 4;
inline constexpr int kMaxElements = 64;

enum class ErrorCode {
  UnboundedBody,
  DegenerateBody,
  OriginNotInterior,
  UnsupportedRepresentation,
  SingularMap,
  TooLarge,
  ToleranceNotReached,
  NonFiniteIntegrand,
  EmptyRegion,
  PointOutsideBody,
  PointNotInterior,
  OscillationBudgetExceeded,
  NotInWeightedL2,
  EmptyFamily,
  NotConverged,
  PolarVertexOutOfRange,
  EmptyShell,
  InvalidArgument,
  ParseError,
};

inline std::string_view to_string(ErrorCode c) {
  switch (c) {
    case ErrorCode::UnboundedBody: return "UnboundedBody";
    case ErrorCode::DegenerateBody: return "DegenerateBody";
    case ErrorCode::OriginNotInterior: return "OriginNotInterior";
    case ErrorCode::UnsupportedRepresentation: return "UnsupportedRepresentation";
    case ErrorCode::SingularMap: return "SingularMap";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::ToleranceNotReached: return "ToleranceNotReached";
    case ErrorCode::NonFiniteIntegrand: return "NonFiniteIntegrand";
    case ErrorCode::EmptyRegion: return "EmptyRegion";
    case ErrorCode::PointOutsideBody: return "PointOutsideBody";
    case ErrorCode::PointNotInterior: return "PointNotInterior";
    case ErrorCode::OscillationBudgetExceeded: return "OscillationBudgetExceeded";
    case ErrorCode::NotInWeightedL2: return "NotInWeightedL2";
    case ErrorCode::EmptyFamily: return "EmptyFamily";
    case ErrorCode::NotConverged: return "NotConverged";
    case ErrorCode::PolarVertexOutOfRange: return "PolarVertexOutOfRange";
    case ErrorCode::EmptyShell: return "EmptyShell";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

// Volume of the Euclidean unit ball in R^n.
inline double unit_ball_volume(int n) {
  return std::pow(kPi, 0.5 * n) / std::tgamma(0.5 * n + 1.0);
}

inline Vec concat(const Vec& a, const Vec& b) {
  Vec r(a.size() + b.size());
  r << a, b;
  return r;
}

}  // namespace mahlerlab
