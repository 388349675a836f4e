#pragma once

#include "catalog.hpp"
#include "parallel.hpp"
#include "position.hpp"
#include "tube.hpp"
#include "weight.hpp"

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace mahlerlab::proofcheck {

using geom::ConvexBody;

/// Check: a proved statement, evaluated exactly or by quadrature.
/// Sampled: a proved statement tested on finitely many samples.
/// Finding: recorded only, never a failure (open or disproved statements).
enum class Kind { Check, Sampled, Finding };

inline const char* to_string(Kind k) {
  switch (k) {
    case Kind::Check: return "check";
    case Kind::Sampled: return "sampled";
    case Kind::Finding: return "finding";
  }
  return "?";
}

struct VerificationReport {
  std::string check_id;
  std::string body;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;  // positive when the statement holds with room
  double tolerance = 0.0;
  bool pass = false;
  double error_budget = 0.0;
  std::uint64_t seed = 0;
  Kind kind = Kind::Check;
  long samples = 0;
  std::vector<std::pair<std::string, double>> extra;
  std::string note;

  /// A failure that quadrature error cannot explain.
  bool hard_failure() const {
    if (kind == Kind::Finding || pass) return false;
    return !std::isfinite(margin) || -margin > 10.0 * error_budget;
  }
};

inline VerificationReport make_report(std::string id, std::string body, double lhs, double rhs, double margin,
                                      double tolerance, double budget, std::uint64_t seed, Kind kind = Kind::Check) {
  VerificationReport r;
  r.check_id = std::move(id);
  r.body = std::move(body);
  r.lhs = lhs;
  r.rhs = rhs;
  r.margin = margin;
  r.tolerance = tolerance;
  r.error_budget = budget;
  r.seed = seed;
  r.kind = kind;
  r.pass = std::isfinite(margin) && margin >= -tolerance;
  return r;
}

/// Relative agreement report: margin = -|lhs - rhs| / |rhs|.
inline VerificationReport make_equality(std::string id, std::string body, double lhs, double rhs, double tolerance,
                                        double budget, std::uint64_t seed) {
  const double scale = std::max(std::abs(rhs), 1e-300);
  return make_report(std::move(id), std::move(body), lhs, rhs, -std::abs(lhs - rhs) / scale, tolerance, budget / scale, seed);
}

struct CheckConfig {
  tube::TubeConfig kernel;
  double equality_tol = 1e-5;
  double john_tol = 1e-8;
  double exact_tol = 1e-9;
  long weight_samples = 10'000;
  int jensen_trials = 200;
  double slope_tol = 0.05;
};

// ---------------------------------------------------------------------------
// sampling helpers

inline std::pair<Vec, Vec> bounding_box(const ConvexBody& K) {
  const int n = K.dim();
  Vec lo(n), hi(n);
  for (int i = 0; i < n; ++i) {
    hi(i) = geom::support(K, Vec::Unit(n, i));
    lo(i) = -geom::support(K, -Vec::Unit(n, i));
  }
  return {lo, hi};
}

/// Uniform point of K, at depth at least `min_depth` times the inradius scale.
inline Vec uniform_interior_point(const ConvexBody& K, Rng& rng, double min_depth = 1e-6) {
  const auto [lo, hi] = bounding_box(K);
  const double scale = (hi - lo).minCoeff();
  for (int it = 0; it < 1'000'000; ++it) {
    const Vec x = weight::uniform_in_box(rng, lo, hi);
    if (geom::interior_depth(K, x) > min_depth * scale) return x;
  }
  throw Error(ErrorCode::EmptyRegion, "no interior sample found");
}

/// x -> Q diag(e^{s_i}) Q' x + c with Haar-like rotations and log-uniform scales in [e^{-1}, e].
inline geom::AffineMap random_affine(Rng& rng, int n) {
  const Mat G = Mat::NullaryExpr(n, n, [&] { return rng.normal(); });
  const Mat H = Mat::NullaryExpr(n, n, [&] { return rng.normal(); });
  const Mat Q1 = Eigen::HouseholderQR<Mat>(G).householderQ();
  const Mat Q2 = Eigen::HouseholderQR<Mat>(H).householderQ();
  Vec s(n);
  for (int i = 0; i < n; ++i) s(i) = std::exp(rng.uniform(-1.0, 1.0));
  return geom::AffineMap::make(Q1 * s.asDiagonal() * Q2, rng.normal_vec(n));
}

// ---------------------------------------------------------------------------
// Mahler and kernel bounds

/// ℳ(K - s(K)) >= (π/4)^n at the Santaló point.
inline VerificationReport check_mahler_lower_bound(const std::string& name, const ConvexBody& K, std::uint64_t seed = 0) {
  const int n = K.dim();
  const auto s = position::santalo_point(K);
  auto r = make_report("mahler_lower_bound", name, s.value, std::pow(kPi / 4.0, n), s.value - std::pow(kPi / 4.0, n), 0.0,
                       1e-12 * s.value, seed);
  r.extra = {{"grad_norm", s.grad_norm}, {"iterations", s.iterations}};
  if (!s.converged) r.note = "santalo solver did not converge";
  return r;
}

/// ℬ(K) >= 4^{-n}
inline VerificationReport check_kernel_lower_bound(const std::string& name, const ConvexBody& K, const CheckConfig& cfg = {},
                                                   std::uint64_t seed = 0) {
  const int n = K.dim();
  const auto B = tube::B_invariant(K, cfg.kernel);
  const double rhs = std::pow(4.0, -n);
  auto r = make_report("kernel_invariant_lower_bound", name, B.value, rhs, B.value - rhs, 0.0, B.error, seed);
  r.extra = {{"ratio", B.value / rhs}};
  if (!B.converged) r.note = "quadrature not converged";
  return r;
}

/// ℳ(K - a) >= π^n |K|^2 𝒦(ia, ia)
inline VerificationReport check_mahler_kernel_bound(const std::string& id, const std::string& name, const ConvexBody& K,
                                                    const Vec& a, const CheckConfig& cfg = {}, std::uint64_t seed = 0,
                                                    Kind kind = Kind::Check) {
  const int n = K.dim();
  const double vol = geom::volume(K);
  const double lhs = vol * functionals::shifted_polar_integral(K, a).value;
  const auto k = tube::bergman_diagonal(K, a, cfg.kernel);
  const double c = std::pow(kPi, n) * vol * vol;
  auto r = make_report(id, name, lhs, c * k.value, lhs - c * k.value, 0.0, c * k.error, seed, kind);
  const Vec b = geom::barycenter(K);
  r.extra = {{"base_depth", geom::interior_depth(K, a) / geom::interior_depth(K, b)}, {"base_offset", (a - b).norm()}};
  return r;
}

inline VerificationReport check_mahler_kernel_bound_barycenter(const std::string& name, const ConvexBody& K,
                                                               const CheckConfig& cfg = {}, std::uint64_t seed = 0) {
  return check_mahler_kernel_bound("mahler_kernel_bound_barycenter", name, K, geom::barycenter(K), cfg, seed);
}

/// The bound at a uniformly random interior base point.
inline VerificationReport check_mahler_kernel_bound_random(const std::string& name, const ConvexBody& K, std::uint64_t seed,
                                                           const CheckConfig& cfg = {}, Kind kind = Kind::Check) {
  Rng rng(seed);
  return check_mahler_kernel_bound("mahler_kernel_bound", name, K, uniform_interior_point(K, rng), cfg, seed, kind);
}

// ---------------------------------------------------------------------------
// invariance and tensorization

/// ℬ(S(K)) = ℬ(K)
inline VerificationReport check_affine_invariance(const std::string& name, const ConvexBody& K, const geom::AffineMap& S,
                                                  const CheckConfig& cfg = {}, std::uint64_t seed = 0) {
  const auto b0 = tube::B_invariant(K, cfg.kernel);
  const auto b1 = tube::B_invariant(geom::apply_affine(S, K), cfg.kernel);
  auto r = make_equality("affine_invariance", name, b1.value, b0.value, cfg.equality_tol, b0.error + b1.error, seed);
  r.extra = {{"det", S.det}};
  return r;
}

/// ℳ(S(K) - b(S(K))) = ℳ(K - b(K))
inline VerificationReport check_mahler_affine_invariance(const std::string& name, const ConvexBody& K,
                                                         const geom::AffineMap& S, const CheckConfig& cfg = {},
                                                         std::uint64_t seed = 0) {
  const auto centered = [](const ConvexBody& L) { return geom::translate(L, -geom::barycenter(L)); };
  const double m0 = functionals::mahler(centered(K), functionals::Route::Geometric).value;
  const double m1 = functionals::mahler(centered(geom::apply_affine(S, K)), functionals::Route::Geometric).value;
  return make_equality("mahler_affine_invariance", name, m1, m0, cfg.equality_tol, 1e-12 * m0, seed);
}

/// 𝒦_K(z, w) = |det A|^2 𝒦_{S(K)}(Sz, Sw) with S(x + iy) = Ax + i(Ay + c).
inline VerificationReport check_kernel_affine_law(const std::string& name, const ConvexBody& K, const geom::AffineMap& S,
                                                  std::uint64_t seed, const CheckConfig& cfg = {}) {
  Rng rng(seed);
  const int n = K.dim();
  const Vec b = geom::barycenter(K);
  const double depth = geom::interior_depth(K, b);
  const tube::TubePoint z{0.2 * rng.normal_vec(n), b + 0.4 * depth * rng.unit_vec(n)};
  const tube::TubePoint w{0.2 * rng.normal_vec(n), b + 0.4 * depth * rng.unit_vec(n)};
  const auto SK = geom::apply_affine(S, K);
  const tube::TubePoint Sz{S.A * z.x, S.apply(z.y)}, Sw{S.A * w.x, S.apply(w.y)};
  const auto k0 = tube::bergman_kernel(K, z, w, cfg.kernel);
  const auto k1 = tube::bergman_kernel(SK, Sz, Sw, cfg.kernel);
  const double d2 = S.det * S.det;
  const double scale = std::abs(k0.value);
  auto r = make_report("kernel_affine_law", name, std::abs(d2 * k1.value), scale, -std::abs(d2 * k1.value - k0.value) / scale,
                       cfg.equality_tol, (k0.error + d2 * k1.error) / scale, seed);
  return r;
}

/// ℬ(K × L) = ℬ(K) ℬ(L)
inline VerificationReport check_tensorization(const std::string& name, const ConvexBody& K, const ConvexBody& L,
                                              const CheckConfig& cfg = {}, std::uint64_t seed = 0) {
  const auto bk = tube::B_invariant(K, cfg.kernel);
  const auto bl = tube::B_invariant(L, cfg.kernel);
  const auto bp = tube::B_invariant(geom::product(K, L), cfg.kernel);
  const double rhs = bk.value * bl.value;
  return make_equality("tensorization", name, bp.value, rhs, cfg.equality_tol,
                       bp.error + bk.error * bl.value + bl.error * bk.value, seed);
}

// ---------------------------------------------------------------------------
// support-function comparison

enum class JensenBase { Barycenter, Corrected, AsStated };

/// e^{h_{K-a}(x)} <= 2^n e^{h̃_{K-a}(2x)} compared in logs; the corrected form adds
/// <a - b(K), x> to the right side. Reports the worst trial.
inline VerificationReport check_jensen(const std::string& name, const ConvexBody& K, std::uint64_t seed, JensenBase base,
                                       const CheckConfig& cfg = {}) {
  Rng rng(seed);
  const int n = K.dim();
  const Vec b = geom::barycenter(K);
  const double scale = 1.0 / geom::interior_depth(K, b);
  double worst = std::numeric_limits<double>::infinity(), wl = 0, wr = 0;
  for (int t = 0; t < cfg.jensen_trials; ++t) {
    const Vec a = base == JensenBase::Barycenter ? b : uniform_interior_point(K, rng);
    const Vec x = rng.uniform(0.0, 8.0) * scale * rng.unit_vec(n);
    const auto jp = functionals::jensen_gap(K, a, x);
    const double rhs = jp.log_rhs + (base == JensenBase::Corrected ? (a - b).dot(x) : 0.0);
    const double m = rhs - jp.log_lhs;
    if (m < worst) worst = m, wl = jp.log_lhs, wr = rhs;
  }
  const char* id = base == JensenBase::Barycenter  ? "jensen_support_bound"
                   : base == JensenBase::Corrected ? "jensen_support_bound_corrected"
                                                   : "jensen_support_bound_any_base";
  auto r = make_report(id, name, wl, wr, worst, cfg.exact_tol, 0.0, seed,
                       base == JensenBase::AsStated ? Kind::Finding : Kind::Sampled);
  r.samples = cfg.jensen_trials;
  return r;
}

// ---------------------------------------------------------------------------
// reflection body

/// |R(K - b)| <= 2^n |K|
inline VerificationReport check_reflection_volume(const std::string& name, const ConvexBody& K, const CheckConfig& cfg = {},
                                                  std::uint64_t seed = 0) {
  const int n = K.dim();
  const ConvexBody Kc = geom::translate(K, -geom::barycenter(K));
  const double lhs = geom::volume(geom::reflection_body(Kc));
  const double rhs = std::pow(2.0, n) * geom::volume(Kc);
  return make_report("reflection_volume_bound", name, lhs, rhs, (rhs - lhs) / rhs, cfg.exact_tol, 0.0, seed);
}

/// |RK| = 2^n |K| for a simplex with a vertex at the origin.
inline VerificationReport check_reflection_equality(int n) {
  const auto S = catalog::simplex(n);
  const double lhs = geom::volume(geom::reflection_body(S));
  const double rhs = std::pow(2.0, n) * geom::volume(S);
  return make_equality("reflection_volume_equality", "simplex/" + std::to_string(n), lhs, rhs, 1e-6, 0.0, 0);
}

/// ℳ(R(K - b)) <= 2^n ℳ(K - b)
inline VerificationReport check_reflection_mahler(const std::string& name, const ConvexBody& K, const CheckConfig& cfg = {},
                                                  std::uint64_t seed = 0) {
  const int n = K.dim();
  const ConvexBody Kc = geom::translate(K, -geom::barycenter(K));
  const double lhs = functionals::mahler(geom::reflection_body(Kc), functionals::Route::Geometric).value;
  const double rhs = std::pow(2.0, n) * functionals::mahler(Kc, functionals::Route::Geometric).value;
  return make_report("reflection_mahler_bound", name, lhs, rhs, (rhs - lhs) / rhs, cfg.exact_tol, 0.0, seed);
}

// ---------------------------------------------------------------------------
// John position

/// B(a, r) ⊆ AK ⊆ B(0, 2nr) and (AK)° ⊆ B(0, 2n/r) for K - b(K).
inline VerificationReport check_john(const std::string& name, const ConvexBody& K, const CheckConfig& cfg = {},
                                     std::uint64_t seed = 0) {
  const ConvexBody Kc = geom::translate(K, -geom::barycenter(K));
  const auto jp = position::john_normalize(Kc);
  const double m = std::min({jp.ball_in_body, jp.body_in_ball, jp.polar_in_ball});
  auto r = make_report("john_inclusions", name, m, 0.0, m, cfg.john_tol, 0.0, seed);
  r.extra = {{"ball_in_body", jp.ball_in_body}, {"body_in_ball", jp.body_in_ball}, {"polar_in_ball", jp.polar_in_ball},
             {"outer_ratio", jp.outer_ratio}, {"polar_ratio", jp.polar_ratio}, {"r", jp.r}};
  return r;
}

// ---------------------------------------------------------------------------
// weight function (sampled)

/// |log|Φ(ζ)| - log|ζ|| <= C|ζ| on |ζ| <= 1/2.
inline VerificationReport check_conformal_bound(long samples, std::uint64_t seed) {
  Rng rng(seed);
  const double C = weight::conformal_constant();
  double worst = std::numeric_limits<double>::infinity(), wl = 0, wr = 0;
  for (long i = 0; i < samples; ++i) {
    const weight::cplx z = std::polar(0.5 * std::sqrt(rng.uniform()), 2.0 * kPi * rng.uniform());
    if (std::abs(z) < 1e-12) continue;
    const double lhs = std::abs(std::log(std::abs(weight::conformal_map(z))) - std::log(std::abs(z)));
    const double rhs = C * std::abs(z);
    if (rhs - lhs < worst) worst = rhs - lhs, wl = lhs, wr = rhs;
  }
  auto r = make_report("conformal_log_bound", "disk(1/2)", wl, wr, worst, 1e-12, 0.0, seed, Kind::Sampled);
  r.samples = samples;
  r.extra = {{"C", C}};
  return r;
}

/// dist(C^n \ (σδK_ℂ - (σ-1)δã), δK_ℂ) >= (σ-1)δr / (4n^2√2), sampled over the boundary of δK_ℂ.
inline VerificationReport check_shell_distance(const std::string& name, const weight::JohnBody& J, const weight::ShellParams& sp,
                                               long samples, std::uint64_t seed) {
  Rng rng(seed);
  double worst = std::numeric_limits<double>::infinity();
  for (long i = 0; i < samples; ++i) {
    const auto [x, y] = weight::boundary_point(rng, J, sp.delta);
    worst = std::min(worst, weight::distance_to_outer_complement(J, sp, x, y));
  }
  const double rhs = weight::distance_bound(J.n, sp, J.r);
  auto r = make_report("shell_distance_bound", name, worst, rhs, worst - rhs, 1e-15, 0.0, seed, Kind::Sampled);
  r.samples = samples;
  r.extra = {{"C", weight::conformal_constant()}, {"r", J.r}, {"sigma", sp.sigma}, {"delta", sp.delta}};
  return r;
}

/// The sampled weight-function suite on a polytope brought to John position:
/// φ upper bound on the tube, φ lower bound on the shell, shell non-emptiness,
/// both K_ℂ inclusions, the shell distance bound, and the singularity order.
inline std::vector<VerificationReport> check_weight_function(const std::string& name, const ConvexBody& K,
                                                             std::uint64_t seed, const CheckConfig& cfg = {},
                                                             std::optional<weight::ShellParams> shell = std::nullopt) {
  using namespace weight;
  const JohnBody J = john_body(K);
  const int n = J.n;
  const double nd = n;
  const double C = conformal_constant();
  const ShellParams sp = shell.value_or(default_shell(n));
  const long N = cfg.weight_samples;
  const auto P = geom::as_polytope(J.body);
  std::vector<VerificationReport> out;
  auto base_extra = [&](VerificationReport& r) {
    r.samples = N;
    r.extra.insert(r.extra.begin(), {{"C", C}, {"r", J.r}, {"sigma", sp.sigma}, {"delta", sp.delta}});
  };

  {  // φ <= 2n log 2 + 1 on T_K
    Rng rng(stream_seed(seed, "weight_upper_bound"));
    double worst = -std::numeric_limits<double>::infinity();
    for (long i = 0; i < N; ++i) {
      const Vec y = uniform_in_body(rng, J);
      const double s = 2.0 * nd * J.r * std::pow(10.0, rng.uniform(-3.0, 2.0));
      const Vec x = s * rng.normal_vec(n);
      worst = std::max(worst, weight_phi(J, x, y));
    }
    const double rhs = upper_bound(n);
    auto r = make_report("weight_upper_bound", name, worst, rhs, rhs - worst, 1e-12, 0.0, seed, Kind::Sampled);
    base_extra(r);
    out.push_back(r);
  }

  {  // φ >= 2n log δ - 16√2 C δ n^3 on the shell, and the shell is non-empty
    Rng rng(stream_seed(seed, "weight_shell_lower_bound"));
    const double s = (sp.sigma - 1.0) * sp.delta;
    const Vec lo = sp.sigma * sp.delta * J.lo - s * J.a, hi = sp.sigma * sp.delta * J.hi - s * J.a;
    double worst = std::numeric_limits<double>::infinity();
    long found = 0, attempts = 0, outside_tube = 0;
    const long max_attempts = 1000 * N;
    while (found < N && attempts < max_attempts) {
      ++attempts;
      const Vec x = uniform_in_box(rng, lo, hi), y = uniform_in_box(rng, lo, hi);
      if (!in_shell(J, sp, x, y)) continue;
      ++found;
      if (!(P->max_slack_violation(y) < 0.0)) {
        ++outside_tube;
        continue;
      }
      worst = std::min(worst, weight_phi(J, x, y));
    }
    const double rhs = shell_lower_bound(n, sp.delta, C);
    auto ne = make_report("shell_nonempty", name, static_cast<double>(found), 1.0, found - 1.0, 0.0, 0.0, seed, Kind::Sampled);
    base_extra(ne);
    ne.samples = attempts;
    ne.extra.push_back({"acceptance", static_cast<double>(found) / attempts});
    out.push_back(ne);
    if (found == 0) throw Error(ErrorCode::EmptyShell, "no shell point found in " + std::to_string(attempts) + " draws");
    auto r = make_report("weight_shell_lower_bound", name, worst, rhs, worst - rhs, 1e-12, 0.0, seed, Kind::Sampled);
    base_extra(r);
    r.samples = found;
    r.extra.push_back({"outside_tube", static_cast<double>(outside_tube)});
    out.push_back(r);
  }

  {  // (1/(4√2 n^2)) (K × K) ⊆ K_ℂ
    Rng rng(stream_seed(seed, "complexified_body_inner"));
    const double f = inner_inclusion_factor(n);
    double worst = 0.0;
    for (long i = 0; i < N; ++i) {
      const Vec x = f * uniform_in_body(rng, J), y = f * uniform_in_body(rng, J);
      worst = std::max(worst, complex_gauge(J.polar, x, y));
    }
    auto r = make_report("complexified_body_inner", name, worst, 1.0, 1.0 - worst, 1e-12, 0.0, seed, Kind::Sampled);
    base_extra(r);
    out.push_back(r);
  }

  {  // K_ℂ ⊆ K × K, on points of K_ℂ drawn by rejection from K × K
    Rng rng(stream_seed(seed, "complexified_body_outer"));
    double worst = -std::numeric_limits<double>::infinity();
    long found = 0;
    for (long it = 0; found < N && it < 1000 * N; ++it) {
      const Vec x = uniform_in_box(rng, J.lo, J.hi), y = uniform_in_box(rng, J.lo, J.hi);
      if (complex_gauge(J.polar, x, y) > 1.0) continue;
      ++found;
      worst = std::max({worst, P->max_slack_violation(x), P->max_slack_violation(y)});
    }
    auto r = make_report("complexified_body_outer", name, worst, 0.0, -worst, 1e-12, 0.0, seed, Kind::Sampled);
    base_extra(r);
    r.samples = found;
    out.push_back(r);
  }

  out.push_back(check_shell_distance(name, J, sp, N, stream_seed(seed, "shell_distance_bound")));

  {  // φ(z) <= 1 + nC + 2n log(2n|z|/r) for |z| <= r/(4n)
    Rng rng(stream_seed(seed, "weight_singularity_bound"));
    double worst = std::numeric_limits<double>::infinity(), wl = 0, wr = 0;
    for (long i = 0; i < N; ++i) {
      const Vec u = rng.unit_vec(2 * n);
      const double rho = J.r / (4.0 * nd) * std::pow(10.0, rng.uniform(-6.0, 0.0));
      const Vec x = rho * u.head(n), y = rho * u.tail(n);
      const double phi = weight_phi(J, x, y);
      const double bound = singularity_bound(n, C, J.r, rho);
      if (bound - phi < worst) worst = bound - phi, wl = phi, wr = bound;
    }
    auto r = make_report("weight_singularity_bound", name, wl, wr, worst, 1e-12, 0.0, seed, Kind::Sampled);
    base_extra(r);
    out.push_back(r);
  }

  {  // slope of φ(εu) against log ε tends to 2n
    Rng rng(stream_seed(seed, "weight_singularity_order"));
    double worst = 0.0, worst_slope = 2.0 * nd;
    const int dirs = 16, pts = 13;
    for (int d = 0; d < dirs; ++d) {
      const Vec u = rng.unit_vec(2 * n);
      double sx = 0, sy = 0, sxx = 0, sxy = 0;
      for (int k = 0; k < pts; ++k) {
        const double eps = J.r / (4.0 * nd) * std::pow(10.0, -7.0 + 4.0 * k / (pts - 1));
        const double le = std::log(eps), phi = weight_phi(J, eps * u.head(n), eps * u.tail(n));
        sx += le, sy += phi, sxx += le * le, sxy += le * phi;
      }
      const double slope = (pts * sxy - sx * sy) / (pts * sxx - sx * sx);
      const double dev = std::abs(slope - 2.0 * nd) / (2.0 * nd);
      if (dev >= worst) worst = dev, worst_slope = slope;
    }
    auto r = make_report("weight_singularity_order", name, worst_slope, 2.0 * nd, -worst, cfg.slope_tol, 0.0, seed, Kind::Sampled);
    base_extra(r);
    r.samples = dirs;
    out.push_back(r);
  }
  return out;
}

// ---------------------------------------------------------------------------
// conjecture

/// ℬ(K) against ℬ(Δ_n); recorded, never asserted.
inline VerificationReport simplex_conjecture(const std::string& name, const ConvexBody& K, double B_simplex,
                                             double simplex_error, const CheckConfig& cfg = {}, std::uint64_t seed = 0) {
  const auto B = tube::B_invariant(K, cfg.kernel);
  auto r = make_report("simplex_conjecture", name, B.value, B_simplex, B.value - B_simplex, B.error + simplex_error,
                       B.error + simplex_error, seed, Kind::Finding);
  return r;
}

// ---------------------------------------------------------------------------
// suites

enum class Suite { Core, Paper, Conjecture };

inline const char* to_string(Suite s) {
  switch (s) {
    case Suite::Core: return "core";
    case Suite::Paper: return "paper";
    case Suite::Conjecture: return "conjecture";
  }
  return "?";
}

inline Suite parse_suite(const std::string& s) {
  if (s == "core") return Suite::Core;
  if (s == "paper") return Suite::Paper;
  if (s == "conjecture") return Suite::Conjecture;
  throw Error(ErrorCode::InvalidArgument, "unknown suite '" + s + "' (expected core, paper or conjecture)");
}

struct SuiteOptions {
  std::vector<int> dims{1, 2, 3};
  int trials = 10;  // random hulls per dimension
  std::uint64_t seed = 0;
  int threads = 1;
  CheckConfig check;
};

struct Summary {
  long run = 0;
  long passed = 0;
  long sampled_passed = 0;
  long findings = 0;
  long failed = 0;
  long hard_failures = 0;
};

inline Summary summarize(const std::vector<VerificationReport>& reports) {
  Summary s;
  for (const auto& r : reports) {
    ++s.run;
    if (r.kind == Kind::Finding) {
      ++s.findings;
    } else if (r.pass) {
      ++(r.kind == Kind::Sampled ? s.sampled_passed : s.passed);
    } else {
      ++s.failed;
      if (r.hard_failure()) ++s.hard_failures;
    }
  }
  return s;
}

namespace detail {

/// Runs fn, turning a library error into a failed report for `id`.
inline void guarded(std::vector<VerificationReport>& out, const std::string& id, const std::string& body, std::uint64_t seed,
                    const std::function<void(std::vector<VerificationReport>&)>& fn, Kind kind = Kind::Check) {
  try {
    fn(out);
  } catch (const Error& e) {
    auto r = make_report(id, body, std::nan(""), std::nan(""), std::nan(""), 0.0, 0.0, seed, kind);
    r.note = e.what();
    out.push_back(r);
  }
}

inline void push(std::vector<VerificationReport>& out, const std::string& id, const std::string& body, std::uint64_t seed,
                 const std::function<VerificationReport()>& fn, Kind kind = Kind::Check) {
  guarded(out, id, body, seed, [&](std::vector<VerificationReport>& o) { o.push_back(fn()); }, kind);
}

inline double sinh_integrand(double t, double r) {
  const double a = 2.0 * r * t;
  return std::abs(a) < 1e-8 ? 1.0 / (2.0 * r) : t / std::sinh(a);
}

inline std::vector<VerificationReport> core_checks(const catalog::NamedBody& nb, std::size_t index, const SuiteOptions& opt) {
  std::vector<VerificationReport> out;
  const auto& K = nb.body;
  const int n = K.dim();
  const auto seed_for = [&](const char* id) { return stream_seed(opt.seed, id, index); };
  const ConvexBody Kc = geom::translate(K, -geom::barycenter(K));

  push(out, "polar_involution", nb.name, 0, [&] {
    const double v = geom::volume(Kc);
    return make_equality("polar_involution", nb.name, geom::volume(geom::polar(geom::polar(Kc))), v, opt.check.exact_tol, 0.0, 0);
  });
  push(out, "tilde_h_routes", nb.name, seed_for("tilde_h_routes"), [&] {
    Rng rng(seed_for("tilde_h_routes"));
    const Vec x = rng.uniform(0.1, 4.0) * rng.unit_vec(n);
    quad::QuadConfig qc;
    qc.rel_tol = 1e-10;
    const auto c = functionals::tilde_h_by_cubature(K, x, qc);
    const double e = functionals::tilde_h(K, x);
    return make_report("tilde_h_routes", nb.name, e, c.value, -std::abs(e - c.value), 1e-8, c.error, seed_for("tilde_h_routes"));
  });
  if (n <= 2) {
    push(out, "polar_volume_routes", nb.name, 0, [&] {
      quad::QuadConfig qc;
      qc.rel_tol = 1e-8;
      const auto g = functionals::polar_volume(Kc, functionals::Route::Geometric);
      const auto q = functionals::polar_volume(Kc, functionals::Route::Integral, qc);
      return make_equality("polar_volume_routes", nb.name, q.value, g.value, 1e-6, q.error, 0);
    });
  }
  push(out, "kernel_routes", nb.name, 0, [&] {
    const auto k = tube::B_invariant(K, opt.check.kernel);
    const auto m = tube::B_via_mahler_p(K);
    return make_equality("kernel_routes", nb.name, k.value, m.value, opt.check.equality_tol, k.error + m.error, 0);
  });
  push(out, "santalo_certificate", nb.name, 0, [&] {
    const auto s = position::santalo_point(K);
    const auto pb = position::polar_barycenter_geometric(K, s.point);
    const double v = pb ? pb->norm() : s.polar_barycenter.norm();
    auto r = make_report("santalo_certificate", nb.name, v, 0.0, -v, 1e-5, 0.0, 0);
    r.note = pb ? "polar body barycenter" : "gradient of the exact polar integral";
    return r;
  });
  return out;
}

inline std::vector<VerificationReport> paper_checks(const catalog::NamedBody& nb, std::size_t index, const SuiteOptions& opt) {
  std::vector<VerificationReport> out;
  const auto& K = nb.body;
  const int n = K.dim();
  const auto& cfg = opt.check;
  const auto seed_for = [&](const char* id) { return stream_seed(opt.seed, id, index); };
  const std::string& name = nb.name;

  push(out, "mahler_lower_bound", name, 0, [&] { return check_mahler_lower_bound(name, K); });
  push(out, "kernel_invariant_lower_bound", name, 0, [&] { return check_kernel_lower_bound(name, K, cfg); });
  push(out, "mahler_kernel_bound_barycenter", name, 0, [&] { return check_mahler_kernel_bound_barycenter(name, K, cfg); });
  // false near the boundary; recorded with its margin, see README
  push(out, "mahler_kernel_bound", name, seed_for("mahler_kernel_bound"),
       [&] { return check_mahler_kernel_bound_random(name, K, seed_for("mahler_kernel_bound"), cfg, Kind::Finding); },
       Kind::Finding);
  {
    Rng rng(seed_for("affine_invariance"));
    const auto S = random_affine(rng, n);
    push(out, "affine_invariance", name, seed_for("affine_invariance"), [&] {
      auto r = check_affine_invariance(name, K, S, cfg);
      r.seed = seed_for("affine_invariance");
      return r;
    });
    push(out, "mahler_affine_invariance", name, seed_for("affine_invariance"), [&] {
      auto r = check_mahler_affine_invariance(name, K, S, cfg);
      r.seed = seed_for("affine_invariance");
      return r;
    });
    push(out, "kernel_affine_law", name, seed_for("kernel_affine_law"),
         [&] { return check_kernel_affine_law(name, K, S, seed_for("kernel_affine_law"), cfg); });
  }
  if (n <= 2) {
    push(out, "tensorization", name, seed_for("tensorization"), [&] {
      const auto L = catalog::random_hull(1, 3, seed_for("tensorization"));
      auto r = check_tensorization(name + " x random-hull/1", K, L, cfg);
      r.seed = seed_for("tensorization");
      return r;
    });
  }
  push(out, "jensen_support_bound", name, seed_for("jensen_support_bound"),
       [&] { return check_jensen(name, K, seed_for("jensen_support_bound"), JensenBase::Barycenter, cfg); }, Kind::Sampled);
  push(out, "jensen_support_bound_corrected", name, seed_for("jensen_support_bound_corrected"),
       [&] { return check_jensen(name, K, seed_for("jensen_support_bound_corrected"), JensenBase::Corrected, cfg); },
       Kind::Sampled);
  push(out, "jensen_support_bound_any_base", name, seed_for("jensen_support_bound_any_base"),
       [&] { return check_jensen(name, K, seed_for("jensen_support_bound_any_base"), JensenBase::AsStated, cfg); },
       Kind::Finding);
  push(out, "reflection_volume_bound", name, 0, [&] { return check_reflection_volume(name, K, cfg); });
  push(out, "reflection_mahler_bound", name, 0, [&] { return check_reflection_mahler(name, K, cfg); });
  if (geom::is_polytopal(K)) {
    push(out, "john_inclusions", name, 0, [&] { return check_john(name, K, cfg); });
    if (name.rfind("random-hull", 0) != 0) {
      guarded(out, "weight_function", name, seed_for("weight_function"), [&](std::vector<VerificationReport>& o) {
        for (auto& r : check_weight_function(name, K, seed_for("weight_function"), cfg)) o.push_back(std::move(r));
      }, Kind::Sampled);
    }
  }
  return out;
}

}  // namespace detail

/// Runs a suite over the standard corpus. Reports come back in corpus order,
/// whatever the thread count.
inline std::vector<VerificationReport> run_suite(Suite suite, const SuiteOptions& opt) {
  const auto corpus = catalog::standard_corpus(opt.dims, opt.trials, opt.seed);
  const int threads = resolve_threads(opt.threads);
  std::vector<VerificationReport> out;

  if (suite == Suite::Conjecture) {
    std::map<int, functionals::FunctionalValue> ref;
    for (int n : opt.dims) ref[n] = tube::B_invariant(catalog::simplex(n), opt.check.kernel);
    auto per = parallel_map<std::vector<VerificationReport>>(corpus.size(), threads, [&](std::size_t i) {
      std::vector<VerificationReport> v;
      const auto& nb = corpus[i];
      const auto& r = ref.at(nb.body.dim());
      detail::push(v, "simplex_conjecture", nb.name, 0,
                   [&] { return simplex_conjecture(nb.name, nb.body, r.value, r.error, opt.check); }, Kind::Finding);
      return v;
    });
    for (auto& v : per) out.insert(out.end(), v.begin(), v.end());
    return out;
  }

  if (suite == Suite::Core) {
    for (double r : {0.5, 1.0, 2.0}) {
      quad::QuadConfig qc;
      qc.rel_tol = 1e-10;
      const auto res = quad::integrate_rn(1, [&](const Vec& x) { return detail::sinh_integrand(x(0), r); }, qc);
      const double exact = kPi * kPi / (8.0 * r * r);
      out.push_back(make_equality("sinh_integral", "r=" + std::to_string(r).substr(0, 3), res.value, exact, 1e-8, res.error, 0));
    }
  }
  if (suite == Suite::Paper) {
    for (int n : opt.dims) out.push_back(check_reflection_equality(n));
    out.push_back(check_conformal_bound(opt.check.weight_samples, stream_seed(opt.seed, "conformal_log_bound")));
  }
  auto per = parallel_map<std::vector<VerificationReport>>(corpus.size(), threads, [&](std::size_t i) {
    return suite == Suite::Core ? detail::core_checks(corpus[i], i, opt) : detail::paper_checks(corpus[i], i, opt);
  });
  for (auto& v : per) out.insert(out.end(), v.begin(), v.end());
  return out;
}

}  // namespace mahlerlab::proofcheck
