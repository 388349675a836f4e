#pragma once

#include "functionals.hpp"
#include "parallel.hpp"

#include <optional>
#include <string>
#include <utility>

namespace mahlerlab::tube {

using geom::ConvexBody;
using quad::cplx;
using CVec = Eigen::VectorXcd;

/// z = x + i y with y in the interior of K.
struct TubePoint {
  Vec x, y;

  static TubePoint imaginary(const Vec& y) { return {Vec::Zero(y.size()), y}; }
  CVec complex() const { return x.cast<cplx>() + cplx(0, 1) * y.cast<cplx>(); }
};

struct KernelValue {
  cplx value;
  double error = 0.0;
  bool converged = true;
};

struct TubeConfig {
  quad::QuadConfig quad;
  double oscillation_cap = 8.0;  // max |Re z - Re w|
};

inline void require_tube_point(const ConvexBody& K, const Vec& y) {
  if (y.size() != K.dim()) throw Error(ErrorCode::InvalidArgument, "tube point dimension mismatch");
  if (!(geom::interior_depth(K, y) > 1e-10)) throw Error(ErrorCode::PointNotInterior, "imaginary part is not interior to K");
}

namespace detail {

inline quad::QuadConfig kernel_quad(const ConvexBody& K, const Vec& a, const quad::QuadConfig& base) {
  const auto dm = functionals::detail::decay_map(K, a);
  quad::QuadConfig cfg = base;
  cfg.premap = dm.W;
  cfg.scale = Vec::Constant(K.dim(), 0.5 / dm.depth);
  if (cfg.rule == quad::Rule::Auto) cfg.rule = quad::Rule::TensorDE;
  return cfg;
}

}  // namespace detail

/// 𝒦(z, w) = (2π)^{-n} |K|^{-1} ∫ e^{i<z - w̄, x> - h̃_K(-2x)} dx
inline KernelValue bergman_kernel(const ConvexBody& K, const TubePoint& z, const TubePoint& w, const TubeConfig& cfg = {}) {
  require_tube_point(K, z.y);
  require_tube_point(K, w.y);
  if (z.x.size() != K.dim() || w.x.size() != K.dim()) throw Error(ErrorCode::InvalidArgument, "tube point dimension mismatch");
  const Vec d = z.x - w.x;
  if (d.norm() > cfg.oscillation_cap)
    throw Error(ErrorCode::OscillationBudgetExceeded, "|Re z - Re w| exceeds the oscillation cap");
  const int n = K.dim();
  const Vec a = 0.5 * (z.y + w.y);
  const functionals::BodyEvaluator ev(geom::translate(K, -a));
  const double norm = std::pow(2.0 * kPi, n) * geom::volume(K);
  const auto qc = detail::kernel_quad(K, a, cfg.quad);
  KernelValue kv;
  if (d.squaredNorm() == 0.0) {
    auto r = quad::integrate_rn(n, [&](const Vec& x) { return std::exp(-ev.tilde_h(-2.0 * x)); }, qc);
    kv.value = r.value / norm;
    kv.error = r.error / norm;
    kv.converged = r.converged;
    return kv;
  }
  auto r = quad::integrate_rn(
      n, [&](const Vec& x) { return std::polar(std::exp(-ev.tilde_h(-2.0 * x)), d.dot(x)); }, qc);
  kv.value = r.value / norm;
  kv.error = r.error / norm;
  kv.converged = r.converged;
  return kv;
}

/// 𝒦(ia, ia) = (2π)^{-n} |K|^{-1} ∫ e^{-h̃_{K-a}(-2x)} dx
inline functionals::FunctionalValue bergman_diagonal(const ConvexBody& K, const Vec& a, const TubeConfig& cfg = {}) {
  require_tube_point(K, a);
  const auto kv = bergman_kernel(K, TubePoint::imaginary(a), TubePoint::imaginary(a), cfg);
  functionals::FunctionalValue fv;
  fv.name = "bk-diag";
  fv.value = kv.value.real();
  fv.error = kv.error;
  fv.provenance = functionals::Route::Integral;
  fv.converged = kv.converged;
  return fv;
}

/// ℬ(K) = |K|^2 𝒦(ib, ib) at the barycenter b.
inline functionals::FunctionalValue B_invariant(const ConvexBody& K, const TubeConfig& cfg = {}) {
  const double vol = geom::volume(K);
  auto fv = bergman_diagonal(K, geom::barycenter(K), cfg);
  fv.name = "B";
  fv.value *= vol * vol;
  fv.error *= vol * vol;
  return fv;
}

/// (4π)^{-n} ℳ_1(K - b), the same invariant through the p-Mahler integral.
inline functionals::FunctionalValue B_via_mahler_p(const ConvexBody& K, const quad::QuadConfig& cfg = {}) {
  const int n = K.dim();
  auto fv = functionals::mahler_p(geom::translate(K, -geom::barycenter(K)), 1.0, cfg);
  const double c = std::pow(4.0 * kPi, -n);
  fv.name = "B";
  fv.value *= c;
  fv.error *= c;
  return fv;
}

// ---------------------------------------------------------------------------
// Paley-Wiener transform and trial functions

/// A function on R^n together with what is known about it: an optional closed
/// form of its transform, an optional box containing its support, and the
/// decay length of the transform in the real directions.
struct Trial {
  std::string name;
  int n = 1;
  std::function<cplx(const Vec&)> g;
  std::function<cplx(const CVec&)> pw;  // closed-form transform, may be empty
  std::optional<std::pair<Vec, Vec>> support;
  double freq_scale = 1.0;
  double space_scale = 1.0;  // decay length of g
  bool smooth = false;  // analytic with Gaussian decay: the tensor sinh rule applies
};

/// e^{-|x - c|^2 / (2σ^2)}
inline Trial gaussian_trial(const Vec& c, double sigma) {
  if (!(sigma > 0)) throw Error(ErrorCode::InvalidArgument, "sigma must be positive");
  Trial t;
  t.name = "gaussian";
  t.n = static_cast<int>(c.size());
  t.g = [c, sigma](const Vec& x) { return cplx(std::exp(-(x - c).squaredNorm() / (2 * sigma * sigma)), 0.0); };
  const int n = t.n;
  t.pw = [c, sigma, n](const CVec& w) {
    const cplx ww = (w.array() * w.array()).sum();
    return std::pow(sigma, n) * std::exp(cplx(0, 1) * (w.array() * c.cast<cplx>().array()).sum() - 0.5 * sigma * sigma * ww);
  };
  t.freq_scale = 1.0 / sigma;
  t.space_scale = sigma;
  t.smooth = true;
  return t;
}

/// (x_k - c_k) e^{-|x - c|^2 / (2σ^2)}
inline Trial moment_gaussian_trial(const Vec& c, double sigma, int k) {
  Trial base = gaussian_trial(c, sigma);
  Trial t = base;
  t.name = "moment-gaussian";
  t.g = [c, sigma, k](const Vec& x) {
    return cplx((x(k) - c(k)) * std::exp(-(x - c).squaredNorm() / (2 * sigma * sigma)), 0.0);
  };
  t.pw = [pw = base.pw, sigma, k](const CVec& w) { return cplx(0, 1) * sigma * sigma * w(k) * pw(w); };
  return t;
}

/// e^{i<κ, x>} g(x)
inline Trial modulated_trial(const Trial& base, const Vec& kappa) {
  Trial t = base;
  t.name = "modulated-" + base.name;
  t.g = [g = base.g, kappa](const Vec& x) { return std::polar(1.0, kappa.dot(x)) * g(x); };
  if (base.pw) t.pw = [pw = base.pw, kappa](const CVec& w) { return pw(w + kappa.cast<cplx>()); };
  t.freq_scale = base.freq_scale + kappa.norm();
  return t;
}

/// Indicator of the box [lo, hi].
inline Trial indicator_trial(const Vec& lo, const Vec& hi) {
  Trial t;
  t.name = "indicator";
  t.n = static_cast<int>(lo.size());
  t.g = [lo, hi](const Vec& x) {
    return cplx(((x.array() >= lo.array()) && (x.array() <= hi.array())).all() ? 1.0 : 0.0, 0.0);
  };
  t.pw = [lo, hi](const CVec& w) {
    cplx acc = std::pow(2.0 * kPi, -0.5 * lo.size());
    for (int j = 0; j < lo.size(); ++j) {
      const double m = 0.5 * (lo(j) + hi(j)), h = 0.5 * (hi(j) - lo(j));
      const cplx u = w(j) * h;
      // ∫ e^{i w t} over [m - h, m + h] = e^{i w m} 2h sin(u)/u
      const cplx sinc = std::abs(u) < 1e-4 ? 1.0 - u * u / 6.0 + u * u * u * u / 120.0 : std::sin(u) / u;
      acc *= std::exp(cplx(0, 1) * w(j) * m) * 2.0 * h * sinc;
    }
    return acc;
  };
  t.support = std::make_pair(lo, hi);
  t.freq_scale = 1.0 / (hi - lo).minCoeff();
  return t;
}

/// α f + β g
inline Trial combine_trials(const Trial& f, cplx alpha, const Trial& g, cplx beta) {
  if (f.n != g.n) throw Error(ErrorCode::InvalidArgument, "trial dimensions differ");
  Trial t;
  t.name = f.name + "+" + g.name;
  t.n = f.n;
  t.g = [f = f.g, g = g.g, alpha, beta](const Vec& x) { return alpha * f(x) + beta * g(x); };
  if (f.pw && g.pw) t.pw = [f = f.pw, g = g.pw, alpha, beta](const CVec& w) { return alpha * f(w) + beta * g(w); };
  if (f.support && g.support)
    t.support = std::make_pair(f.support->first.cwiseMin(g.support->first), f.support->second.cwiseMax(g.support->second));
  t.freq_scale = std::max(f.freq_scale, g.freq_scale);
  t.space_scale = std::max(f.space_scale, g.space_scale);
  t.smooth = f.smooth && g.smooth;
  return t;
}

/// g1(x_head) g2(x_tail)
inline Trial tensor_trial(const Trial& f, const Trial& g) {
  Trial t;
  t.name = f.name + "*" + g.name;
  t.n = f.n + g.n;
  const int n1 = f.n, n2 = g.n;
  t.g = [f = f.g, g = g.g, n1, n2](const Vec& x) { return f(x.head(n1)) * g(x.tail(n2)); };
  if (f.pw && g.pw) t.pw = [f = f.pw, g = g.pw, n1, n2](const CVec& w) { return f(w.head(n1)) * g(w.tail(n2)); };
  if (f.support && g.support)
    t.support = std::make_pair(concat(f.support->first, g.support->first), concat(f.support->second, g.support->second));
  t.freq_scale = std::max(f.freq_scale, g.freq_scale);
  t.space_scale = std::max(f.space_scale, g.space_scale);
  t.smooth = f.smooth && g.smooth;
  return t;
}

inline quad::Rule rule_for(const Trial& t) { return t.smooth ? quad::Rule::TensorDE : quad::Rule::NestedAdaptive; }

/// ‖g‖^2 = |K| ∫ |g(x)|^2 e^{h̃_K(-2x)} dx
inline quad::IntegralResult<double> weighted_norm_sq(const ConvexBody& K, const Trial& t, const quad::QuadConfig& cfg_in = {}) {
  if (t.n != K.dim()) throw Error(ErrorCode::InvalidArgument, "trial dimension mismatch");
  const functionals::BodyEvaluator ev(K);
  auto f = [&](const Vec& x) {
    const double v = std::abs(t.g(x));
    if (v == 0.0) return 0.0;
    return std::exp(2.0 * std::log(v) + ev.tilde_h(-2.0 * x));
  };
  quad::QuadConfig cfg = cfg_in;
  quad::IntegralResult<double> r;
  try {
    if (t.support) {
      r = quad::integrate_box(f, t.support->first, t.support->second, cfg);
    } else {
      if (cfg.rule == quad::Rule::Auto) cfg.rule = rule_for(t);
      if (cfg.scale.size() == 0) cfg.scale = Vec::Constant(K.dim(), t.space_scale);
      r = quad::integrate_rn(K.dim(), f, cfg);
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::NonFiniteIntegrand) throw Error(ErrorCode::NotInWeightedL2, "weighted norm is not finite");
    throw;
  }
  if (!r.converged || !std::isfinite(r.value)) throw Error(ErrorCode::NotInWeightedL2, "weighted norm did not converge");
  const double vol = geom::volume(K);
  r.value *= vol;
  r.error *= vol;
  return r;
}

struct PwOptions {
  quad::QuadConfig quad;
  bool check_norm = true;
};

/// PW(g)(w) = (2π)^{-n/2} ∫ g(x) e^{i<w, x>} dx by quadrature.
inline quad::IntegralResult<cplx> pw_transform(const ConvexBody& K, const Trial& t, const TubePoint& w, const PwOptions& opt = {}) {
  if (t.n != K.dim()) throw Error(ErrorCode::InvalidArgument, "trial dimension mismatch");
  require_tube_point(K, w.y);
  if (opt.check_norm) weighted_norm_sq(K, t, opt.quad);
  const int n = t.n;
  auto f = [&](const Vec& x) -> cplx {
    const cplx v = t.g(x);
    if (v == cplx(0.0)) return cplx(0.0);
    return v * std::polar(std::exp(-w.y.dot(x)), w.x.dot(x));
  };
  quad::IntegralResult<cplx> r;
  if (t.support) {
    r = quad::integrate_box(f, t.support->first, t.support->second, opt.quad);
  } else {
    quad::QuadConfig cfg = opt.quad;
    if (cfg.rule == quad::Rule::Auto) cfg.rule = rule_for(t);
    if (cfg.scale.size() == 0) cfg.scale = Vec::Constant(n, t.space_scale);
    r = quad::integrate_rn(n, f, cfg);
  }
  const double c = std::pow(2.0 * kPi, -0.5 * n);
  r.value *= c;
  r.error *= c;
  return r;
}

struct IsometryResult {
  double lhs = 0.0, rhs = 0.0;
  double lhs_error = 0.0, rhs_error = 0.0;
  bool converged = true;
};

/// lhs = ∫_K ∫_{R^n} |PW(g)(ξ + i y)|^2 dξ dy, rhs = ‖g‖^2 in the weighted space.
/// The transform uses the trial's closed form when it has one.
inline IsometryResult pw_isometry_check(const ConvexBody& K, const Trial& t, const quad::QuadConfig& cfg = {}) {
  if (t.n != K.dim()) throw Error(ErrorCode::InvalidArgument, "trial dimension mismatch");
  const int n = t.n;
  IsometryResult out;
  const auto rhs = weighted_norm_sq(K, t, cfg);
  out.rhs = rhs.value;
  out.rhs_error = rhs.error;
  if (rhs.value == 0.0) return out;

  quad::QuadConfig inner = cfg;
  inner.rule = rule_for(t);
  inner.scale = Vec::Constant(n, t.freq_scale);
  inner.rel_tol = 0.1 * cfg.rel_tol;
  PwOptions pwo;
  pwo.quad = cfg;
  pwo.quad.rule = quad::Rule::Auto;
  pwo.quad.rel_tol = 0.1 * cfg.rel_tol;
  pwo.check_norm = false;
  bool ok = true;
  auto slice = [&](const Vec& y) {
    auto r = quad::integrate_rn(
        n,
        [&](const Vec& xi) {
          cplx v;
          if (t.pw) {
            v = t.pw(xi.cast<cplx>() + cplx(0, 1) * y.cast<cplx>());
          } else {
            v = pw_transform(K, t, TubePoint{xi, y}, pwo).value;
          }
          return std::norm(v);
        },
        inner);
    if (!r.converged) ok = false;
    return r.value;
  };
  quad::QuadConfig outer = cfg;
  auto lhs = quad::integrate_body(K, slice, outer);
  out.lhs = lhs.value;
  out.lhs_error = lhs.error;
  out.converged = ok && lhs.converged && rhs.converged;
  return out;
}

// ---------------------------------------------------------------------------
// trial-function lower bounds on the diagonal

struct TrialFamily {
  std::vector<double> sigmas;
  std::vector<Vec> centers;
};

/// 25 log-spaced widths in [0.1, 10] times the centers {0, ±0.5 e_i, ±1.5 e_i}.
inline TrialFamily default_trial_family(int n) {
  TrialFamily fam;
  for (int k = 0; k < 25; ++k) fam.sigmas.push_back(0.1 * std::pow(100.0, k / 24.0));
  fam.centers.push_back(Vec::Zero(n));
  for (double s : {0.5, 1.5})
    for (int i = 0; i < n; ++i)
      for (double sign : {-1.0, 1.0}) fam.centers.push_back(sign * s * Vec::Unit(n, i));
  return fam;
}

struct TrialBound {
  double value = 0.0;  // max over the family of |f(w)|^2 / ‖f‖^2
  std::size_t best_index = 0;
  double best_sigma = 0.0;
  Vec best_center;
  std::size_t evaluated = 0;
};

/// Certified lower bound for 𝒦(w, w) from trials f = PW(g), g a Gaussian modulated by e^{-i<Re w, x>}.
inline TrialBound bergman_lower_bound_trial(const ConvexBody& K, const TubePoint& w, const TrialFamily& fam,
                                            const quad::QuadConfig& cfg = {}, int threads = 1) {
  if (fam.sigmas.empty() || fam.centers.empty()) throw Error(ErrorCode::EmptyFamily, "trial family is empty");
  require_tube_point(K, w.y);
  const std::size_t count = fam.sigmas.size() * fam.centers.size();
  const CVec wc = w.complex();
  auto ratios = parallel_map<double>(count, resolve_threads(threads), [&](std::size_t i) {
    // transported along Re w, which is an isometry of the tube
    const auto t = modulated_trial(gaussian_trial(fam.centers[i % fam.centers.size()], fam.sigmas[i / fam.centers.size()]), -w.x);
    const double num = std::norm(t.pw(wc));
    const double den = weighted_norm_sq(K, t, cfg).value;
    return num / den;
  });
  TrialBound tb;
  tb.evaluated = count;
  for (std::size_t i = 0; i < count; ++i) {
    if (ratios[i] > tb.value) {
      tb.value = ratios[i];
      tb.best_index = i;
    }
  }
  tb.best_sigma = fam.sigmas[tb.best_index / fam.centers.size()];
  tb.best_center = fam.centers[tb.best_index % fam.centers.size()];
  return tb;
}

}  // namespace mahlerlab::tube
