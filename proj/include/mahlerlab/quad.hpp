#pragma once

#include "body.hpp"
#include "core.hpp"
#include "rng.hpp"

#include <algorithm>
#include <array>
#include <complex>
#include <functional>
#include <queue>
#include <vector>

namespace mahlerlab::quad {

using cplx = std::complex<double>;

template <class T>
struct IntegralResult {
  T value{};
  double error = 0.0;
  long evaluations = 0;
  bool converged = true;
};

enum class Rule { Auto, NestedAdaptive, TensorDE, Radial };

struct QuadConfig {
  double rel_tol = 1e-7;
  double abs_tol = 0.0;
  long max_evals = 20'000'000;
  Vec scale;    // per-axis decay-map scale; empty means 1
  Mat premap;   // optional linear change of variables x = premap * u
  Rule rule = Rule::Auto;
  double de_tmax = 5.0;
  int de_max_level = 7;
  long mc_samples = 1'000'000;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(rel_tol > 0.0 && rel_tol < 1.0)) throw Error(ErrorCode::InvalidArgument, "rel_tol must lie in (0,1)");
    if (max_evals < 1) throw Error(ErrorCode::InvalidArgument, "max_evals must be positive");
  }
};

namespace detail {

inline double magnitude(double v) { return std::abs(v); }
inline double magnitude(const cplx& v) { return std::abs(v); }
inline bool finite(double v) { return std::isfinite(v); }
inline bool finite(const cplx& v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); }

template <class T>
inline T checked(T v) {
  if (!finite(v)) throw Error(ErrorCode::NonFiniteIntegrand, "integrand returned NaN or infinity");
  return v;
}

// 21-point Gauss-Kronrod abscissae and weights on [-1,1]; every odd-indexed
// Kronrod node is also a 10-point Gauss node.
inline constexpr std::array<double, 11> kXgk = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452, 0.930157491355708226001207180059508,
    0.865063366688984510732096688423493, 0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784, 0.294392862701460198131126603103866,
    0.148874338981631210884826001129720, 0.0};
inline constexpr std::array<double, 11> kWgk = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390, 0.054755896574351996031381300244580,
    0.075039674810919952767043140916190, 0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077600525680278, 0.134709217311473325928054001771707, 0.142775938577060080797094273138717,
    0.147739104901338491374841515972068, 0.149445554002916905664936468389821};
inline constexpr std::array<double, 5> kWg = {0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
                                              0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
                                              0.295524224714752870173892994651338};

template <class T>
struct Segment {
  double a, b;
  T value;
  double error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

template <class T, class G>
Segment<T> gk21(G& g, double a, double b) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  T fc = checked<T>(g(c));
  T rk = fc * kWgk[10];
  T rg = T{};
  for (int j = 0; j < 10; ++j) {
    const double dx = h * kXgk[j];
    const T f1 = checked<T>(g(c - dx)), f2 = checked<T>(g(c + dx));
    rk += (f1 + f2) * kWgk[j];
    if (j % 2 == 1) rg += (f1 + f2) * kWg[j / 2];
  }
  const T vk = rk * h, vg = rg * h;
  const double err = std::max(magnitude(vk - vg), 50.0 * std::numeric_limits<double>::epsilon() * magnitude(vk));
  return {a, b, vk, err};
}

/// Globally adaptive GK21 over the union of the given breakpoint intervals.
template <class T, class G>
IntegralResult<T> adaptive(G& g, const std::vector<double>& breaks, double abs_tol, double rel_tol, long max_evals) {
  std::priority_queue<Segment<T>> heap;
  IntegralResult<T> res;
  T total{};
  double err = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    auto s = gk21<T>(g, breaks[i], breaks[i + 1]);
    res.evaluations += 21;
    total += s.value;
    err += s.error;
    heap.push(s);
  }
  while (err > std::max(abs_tol, rel_tol * magnitude(total))) {
    if (res.evaluations + 42 > max_evals) {
      res.converged = false;
      break;
    }
    auto s = heap.top();
    const double mid = 0.5 * (s.a + s.b);
    if (!(mid > s.a && mid < s.b) || (s.b - s.a) < 1e-14 * std::max(1.0, std::abs(mid))) {
      res.converged = false;
      break;
    }
    heap.pop();
    auto l = gk21<T>(g, s.a, mid), r = gk21<T>(g, mid, s.b);
    res.evaluations += 42;
    total += l.value + r.value - s.value;
    err += l.error + r.error - s.error;
    heap.push(l);
    heap.push(r);
  }
  // resum to limit drift from incremental updates
  total = T{};
  err = 0.0;
  while (!heap.empty()) {
    total += heap.top().value;
    err += heap.top().error;
    heap.pop();
  }
  res.value = total;
  res.error = err;
  return res;
}

/// Integral over R of f, through x = s u / (1 - u^2), u in (-1, 1).
template <class T, class F>
IntegralResult<T> adaptive_real_line(F& f, double s, double abs_tol, double rel_tol, long max_evals) {
  auto g = [&](double u) -> T {
    const double d = 1.0 - u * u;
    const double x = s * u / d;
    const T v = f(x);
    if (magnitude(v) == 0.0) return T{};
    return v * (s * (1.0 + u * u) / (d * d));
  };
  return adaptive<T>(g, {-1.0, -0.5, 0.0, 0.5, 1.0}, abs_tol, rel_tol, max_evals);
}

template <class T, class F>
IntegralResult<T> nested_rn(F& f, int n, const Vec& s, double abs_tol, double rel_tol, long max_evals) {
  Vec x(n);
  long evals = 0;
  bool ok = true;
  double err_acc = 0.0;
  std::function<T(int, double, double)> level = [&](int d, double atol, double rtol) -> T {
    if (d == n) {
      ++evals;
      return f(x);
    }
    auto g = [&](double xd) -> T {
      x(d) = xd;
      if (d + 1 == n) {
        ++evals;
        return checked<T>(f(x));
      }
      return level(d + 1, atol * 0.1, rtol * 0.5);
    };
    auto r = adaptive_real_line<T>(g, s(d), atol, rtol, std::max<long>(max_evals - evals, 42));
    if (!r.converged) ok = false;
    if (d == 0) err_acc = r.error;
    return r.value;
  };
  IntegralResult<T> res;
  res.value = level(0, abs_tol, rel_tol);
  res.error = err_acc;
  res.evaluations = std::max<long>(evals, 1);
  res.converged = ok && evals <= max_evals;
  return res;
}

template <class T>
struct Cell {
  Vec lo, hi;
  T value;
  double error;
  int split_axis;
  bool operator<(const Cell& o) const { return error < o.error; }
};

/// Degree-7 Genz-Malik rule with embedded degree-5 error estimate on a box.
template <class T, class G>
Cell<T> genz_malik(G& g, const Vec& lo, const Vec& hi) {
  const int d = static_cast<int>(lo.size());
  const double l2 = std::sqrt(9.0 / 70.0), l3 = std::sqrt(9.0 / 10.0), l4 = std::sqrt(9.0 / 10.0), l5 = std::sqrt(9.0 / 19.0);
  const double dd = d;
  const double w1 = (12824.0 - 9120.0 * dd + 400.0 * dd * dd) / 19683.0, w2 = 980.0 / 6561.0, w3 = (1820.0 - 400.0 * dd) / 19683.0,
               w4 = 200.0 / 19683.0, w5 = 6859.0 / 19683.0 / std::ldexp(1.0, d);
  const double v1 = (729.0 - 950.0 * dd + 50.0 * dd * dd) / 729.0, v2 = 245.0 / 486.0, v3 = (265.0 - 100.0 * dd) / 1458.0,
               v4 = 25.0 / 729.0;
  const Vec c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
  Vec x = c;
  const T f0 = checked<T>(g(x));
  T s2{}, s3{}, s4{}, s5{};
  double best = -1.0;
  int axis = 0;
  for (int i = 0; i < d; ++i) {
    x(i) = c(i) - l2 * h(i);
    const T a = checked<T>(g(x));
    x(i) = c(i) + l2 * h(i);
    const T b = checked<T>(g(x));
    x(i) = c(i) - l3 * h(i);
    const T e = checked<T>(g(x));
    x(i) = c(i) + l3 * h(i);
    const T f = checked<T>(g(x));
    x(i) = c(i);
    s2 += a + b;
    s3 += e + f;
    const double diff = magnitude(a + b - 2.0 * f0 - (l2 * l2 / (l3 * l3)) * (e + f - 2.0 * f0));
    if (diff > best * (1.0 + 1e-12)) {
      best = diff;
      axis = i;
    }
  }
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j)
      for (double si : {-1.0, 1.0})
        for (double sj : {-1.0, 1.0}) {
          x(i) = c(i) + si * l4 * h(i);
          x(j) = c(j) + sj * l4 * h(j);
          s4 += checked<T>(g(x));
          x(i) = c(i);
          x(j) = c(j);
        }
  for (int mask = 0; mask < (1 << d); ++mask) {
    for (int i = 0; i < d; ++i) x(i) = c(i) + ((mask >> i) & 1 ? l5 : -l5) * h(i);
    s5 += checked<T>(g(x));
  }
  const double vol = std::ldexp(h.prod(), d);
  const T r7 = (f0 * w1 + s2 * w2 + s3 * w3 + s4 * w4 + s5 * w5) * vol;
  const T r5 = (f0 * v1 + s2 * v2 + s3 * v3 + s4 * v4) * vol;
  const double err = std::max(magnitude(r7 - r5), 50.0 * std::numeric_limits<double>::epsilon() * magnitude(r7));
  return {lo, hi, r7, err, axis};
}

inline long genz_malik_points(int d) { return 1 + 4L * d + 2L * d * (d - 1) + (1L << d); }

/// Globally adaptive Genz-Malik cubature over a box (dimension >= 2).
template <class T, class G>
IntegralResult<T> adaptive_box(G& g, const Vec& lo, const Vec& hi, double abs_tol, double rel_tol, long max_evals) {
  const long per = genz_malik_points(static_cast<int>(lo.size()));
  std::priority_queue<Cell<T>> heap;
  IntegralResult<T> res;
  auto first = genz_malik<T>(g, lo, hi);
  res.evaluations = per;
  T total = first.value;
  double err = first.error;
  heap.push(first);
  while (err > std::max(abs_tol, rel_tol * magnitude(total))) {
    if (res.evaluations + 2 * per > max_evals) {
      res.converged = false;
      break;
    }
    auto cell = heap.top();
    heap.pop();
    const int k = cell.split_axis;
    const double mid = 0.5 * (cell.lo(k) + cell.hi(k));
    Vec hi1 = cell.hi, lo2 = cell.lo;
    hi1(k) = mid;
    lo2(k) = mid;
    auto a = genz_malik<T>(g, cell.lo, hi1), b = genz_malik<T>(g, lo2, cell.hi);
    res.evaluations += 2 * per;
    total += a.value + b.value - cell.value;
    err += a.error + b.error - cell.error;
    heap.push(std::move(a));
    heap.push(std::move(b));
  }
  total = T{};
  err = 0.0;
  while (!heap.empty()) {
    total += heap.top().value;
    err += heap.top().error;
    heap.pop();
  }
  res.value = total;
  res.error = err;
  return res;
}

/// Integral over R^n split into the 2n cones over the faces of the cube:
/// ∫ f = Σ_faces ∫_{[-1,1]^{n-1}} ∫_0^∞ r^{n-1} f(r u) dr du. Kinks of f along
/// rays through the origin are handled by the adaptive face integrals.
template <class T, class F>
IntegralResult<T> radial_rn(F& f, int n, double c, double abs_tol, double rel_tol, long max_evals) {
  Vec u(n), x(n);
  long evals = 0;
  bool ok = true;
  IntegralResult<T> res;
  const double ray_atol = abs_tol / (2.0 * n * std::ldexp(1.0, n - 1)) * 0.1;
  auto ray = [&]() -> T {
    auto g = [&](double t) -> T {
      const double r = c * t / (1.0 - t);
      x = r * u;
      ++evals;
      const T v = checked<T>(f(x));
      if (magnitude(v) == 0.0) return T{};
      return v * (std::pow(r, n - 1) * c / ((1.0 - t) * (1.0 - t)));
    };
    auto r = adaptive<T>(g, {0.0, 1.0}, ray_atol, 0.3 * rel_tol, std::max<long>(max_evals - evals, 42));
    if (!r.converged) ok = false;
    return r.value;
  };
  for (int axis = 0; axis < n; ++axis) {
    for (double sign : {-1.0, 1.0}) {
      u.setZero();
      u(axis) = sign;
      if (n == 1) {
        res.value += ray();
        continue;
      }
      std::vector<int> free;
      for (int d = 0; d < n; ++d)
        if (d != axis) free.push_back(d);
      const long budget = std::max<long>((max_evals - evals) / 64, 64);
      IntegralResult<T> r;
      if (n == 2) {
        auto g = [&](double v) -> T {
          u(free[0]) = v;
          return ray();
        };
        r = adaptive<T>(g, {-1.0, 0.0, 1.0}, abs_tol / (2 * n), rel_tol, budget);
      } else {
        auto g = [&](const Vec& v) -> T {
          for (int d = 0; d < n - 1; ++d) u(free[d]) = v(d);
          return ray();
        };
        r = adaptive_box<T>(g, -Vec::Ones(n - 1), Vec::Ones(n - 1), abs_tol / (2 * n), rel_tol, budget);
      }
      if (!r.converged) ok = false;
      res.value += r.value;
      res.error += r.error;
    }
  }
  res.evaluations = std::max<long>(evals, 1);
  res.converged = ok && evals <= max_evals;
  return res;
}

template <class T, class F>
IntegralResult<T> tensor_de(F& f, int n, const Vec& s, double abs_tol, double rel_tol, long max_evals, double tmax,
                            int max_level) {
  // Level L uses step h = 2^{-L}; nodes of level L-1 are reused.
  IntegralResult<T> res;
  T sum{};  // sum over the current grid of f * prod s cosh(t), without h^n
  T prev{};
  double prev_diff = -1.0;
  const int base = static_cast<int>(std::ceil(tmax));
  Vec x(n);
  std::vector<int> k(n);
  for (int L = 0; L <= max_level; ++L) {
    const int step = 1 << (max_level - L);          // index stride on the finest grid
    const int N = base << max_level;                // finest-grid half width
    const double hf = std::ldexp(1.0, -max_level);  // finest step
    const int m = 2 * (N / step) + 1;
    long count = 1;
    for (int d = 0; d < n; ++d) count *= m;
    if (res.evaluations + count > max_evals && L > 0) {
      res.converged = false;
      break;
    }
    T add{};
    for (long idx = 0; idx < count; ++idx) {
      long r = idx;
      bool is_new = (L == 0);
      double w = 1.0;
      for (int d = 0; d < n; ++d) {
        const int j = static_cast<int>(r % m) - N / step;
        r /= m;
        if (!is_new && (j % 2 != 0)) is_new = true;
        const double t = j * step * hf;
        x(d) = s(d) * std::sinh(t);
        w *= s(d) * std::cosh(t);
      }
      if (!is_new) continue;
      ++res.evaluations;
      const T v = checked<T>(f(x));
      add += v * w;
    }
    sum += add;
    const double h = step * hf;
    const T cur = sum * std::pow(h, n);
    if (L > 0) {
      const double diff = magnitude(cur - prev);
      double est = diff;
      if (prev_diff > 0.0 && diff < prev_diff) est = std::min(diff, diff * diff / prev_diff);
      res.value = cur;
      res.error = est;
      const double target = std::max(abs_tol, rel_tol * magnitude(cur));
      if (est <= target && L >= 2) {
        res.converged = true;
        return res;
      }
      prev_diff = diff;
    }
    prev = cur;
    res.value = cur;
  }
  res.converged = false;
  return res;
}

}  // namespace detail

/// Integral of f over R^n (n <= 4). f must decay at least exponentially.
template <class F>
auto integrate_rn(int n, F&& f, const QuadConfig& cfg = {}) {
  using T = std::decay_t<decltype(f(std::declval<const Vec&>()))>;
  cfg.validate();
  if (n < 1 || n > kMaxDim) throw Error(ErrorCode::TooLarge, "integration dimension outside 1..4");
  Vec s = cfg.scale.size() ? cfg.scale : Vec::Ones(n);
  if (s.size() != n || (s.array() <= 0).any()) throw Error(ErrorCode::InvalidArgument, "bad decay-map scale");
  const bool mapped = cfg.premap.size() > 0;
  double jac = 1.0;
  if (mapped) jac = std::abs(cfg.premap.determinant());
  Vec buf(n);
  auto g = [&](const Vec& u) -> T {
    if (!mapped) return f(u);
    buf.noalias() = cfg.premap * u;
    return f(buf) * jac;
  };
  Rule rule = cfg.rule;
  if (rule == Rule::Auto) rule = (n <= 2) ? Rule::NestedAdaptive : Rule::TensorDE;
  IntegralResult<T> res;
  if (rule == Rule::NestedAdaptive) {
    if (n == 1) {
      auto g1 = [&](double x) {
        Vec v(1);
        v(0) = x;
        return detail::checked<T>(g(v));
      };
      res = detail::adaptive_real_line<T>(g1, s(0), cfg.abs_tol, cfg.rel_tol, cfg.max_evals);
    } else {
      // a cheap pass fixes the absolute floor of the inner levels
      auto probe = detail::nested_rn<T>(g, n, s, 0.0, 1e-3, cfg.max_evals);
      const double floor = std::max(cfg.abs_tol, 1e-3 * cfg.rel_tol * detail::magnitude(probe.value));
      res = detail::nested_rn<T>(g, n, s, floor, cfg.rel_tol, cfg.max_evals);
      res.evaluations += probe.evaluations;
    }
  } else if (rule == Rule::Radial) {
    const double c = s.mean();
    auto probe = detail::radial_rn<T>(g, n, c, 0.0, 1e-2, cfg.max_evals);
    const double floor = std::max(cfg.abs_tol, 0.1 * cfg.rel_tol * detail::magnitude(probe.value));
    res = detail::radial_rn<T>(g, n, c, floor, cfg.rel_tol, cfg.max_evals);
    res.evaluations += probe.evaluations;
  } else {
    res = detail::tensor_de<T>(g, n, s, cfg.abs_tol, cfg.rel_tol, cfg.max_evals, cfg.de_tmax, cfg.de_max_level);
  }
  if (!detail::finite(res.value)) throw Error(ErrorCode::NonFiniteIntegrand, "integral is not finite");
  return res;
}

/// Adaptive GK21 over a bounded interval.
template <class F>
auto integrate_interval(F&& f, double a, double b, const QuadConfig& cfg = {}, std::vector<double> breaks = {}) {
  using T = std::decay_t<decltype(f(0.0))>;
  std::vector<double> pts{a};
  std::sort(breaks.begin(), breaks.end());
  for (double x : breaks)
    if (x > a && x < b) pts.push_back(x);
  pts.push_back(b);
  return detail::adaptive<T>(f, pts, cfg.abs_tol, cfg.rel_tol, cfg.max_evals);
}

/// Adaptive cubature over an axis-aligned box: GK21 in one dimension, Genz-Malik above.
template <class F>
auto integrate_box(F&& f, const Vec& lo, const Vec& hi, const QuadConfig& cfg = {}) {
  using T = std::decay_t<decltype(f(std::declval<const Vec&>()))>;
  cfg.validate();
  if (lo.size() != hi.size() || lo.size() < 1 || (hi.array() <= lo.array()).any())
    throw Error(ErrorCode::InvalidArgument, "bad integration box");
  if (lo.size() == 1) {
    Vec x(1);
    auto g = [&](double t) {
      x(0) = t;
      return detail::checked<T>(f(x));
    };
    return detail::adaptive<T>(g, {lo(0), 0.5 * (lo(0) + hi(0)), hi(0)}, cfg.abs_tol, cfg.rel_tol, cfg.max_evals);
  }
  return detail::adaptive_box<T>(f, lo, hi, cfg.abs_tol, cfg.rel_tol, cfg.max_evals);
}

// ---------------------------------------------------------------------------
// cubature over bodies

struct Rule1D {
  std::vector<double> x, w;
};

/// Gauss-Legendre rule on [0,1].
inline Rule1D gauss_legendre01(int q) {
  Rule1D r;
  r.x.resize(q);
  r.w.resize(q);
  for (int i = 0; i < (q + 1) / 2; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (q + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= q; ++k) {
        const double p2 = ((2.0 * k - 1) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (q == 1) p0 = 1.0, p1 = z;
      dp = q * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    double p0 = 1.0, p1 = z;
    for (int k = 2; k <= q; ++k) {
      const double p2 = ((2.0 * k - 1) * z * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = q * (z * p1 - p0) / (z * z - 1.0);
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    r.x[i] = 0.5 * (1.0 - z);
    r.x[q - 1 - i] = 0.5 * (1.0 + z);
    r.w[i] = r.w[q - 1 - i] = 0.5 * w;
  }
  return r;
}

/// Weighted point set approximating integration over a body.
struct Cubature {
  std::vector<Vec> points;
  std::vector<double> weights;
};

namespace detail {

inline void simplex_rule(const std::vector<Vec>& v, double vol, const Rule1D& g, Cubature& out) {
  // Collapsed coordinates: lambda_d = u_d * prod_{j<d} (1 - u_j), lambda_0 = prod (1 - u_j).
  const int n = static_cast<int>(v.size()) - 1;
  const int q = static_cast<int>(g.x.size());
  long count = 1;
  for (int d = 0; d < n; ++d) count *= q;
  const double scale = vol * factorial(n);
  for (long idx = 0; idx < count; ++idx) {
    long r = idx;
    double rem = 1.0, w = scale;
    Vec p = Vec::Zero(v[0].size());
    for (int d = 0; d < n; ++d) {
      const int k = static_cast<int>(r % q);
      r /= q;
      const double u = g.x[k];
      w *= g.w[k] * rem;
      p += rem * u * v[d + 1];
      rem *= 1.0 - u;
    }
    p += rem * v[0];
    out.points.push_back(std::move(p));
    out.weights.push_back(w);
  }
}

inline void ball_rule(int n, const Rule1D& g, const Vec& c, const Mat& L, Cubature& out) {
  // z_1 = R sin(theta); the remaining coordinates fill a ball of radius R cos(theta).
  const int q = static_cast<int>(g.x.size());
  long count = 1;
  for (int d = 0; d < n; ++d) count *= q;
  const double detL = std::abs(L.determinant());
  for (long idx = 0; idx < count; ++idx) {
    long r = idx;
    Vec z(n);
    double radius = 1.0, w = detL;
    for (int d = 0; d < n; ++d) {
      const int k = static_cast<int>(r % q);
      r /= q;
      if (d < n - 1) {
        const double th = kPi * (g.x[k] - 0.5);
        z(d) = radius * std::sin(th);
        w *= g.w[k] * kPi * radius * std::cos(th);
        radius *= std::cos(th);
      } else {
        z(d) = radius * (2.0 * g.x[k] - 1.0);
        w *= g.w[k] * 2.0 * radius;
      }
    }
    out.points.push_back(c + L * z);
    out.weights.push_back(w);
  }
}

}  // namespace detail

/// Cubature of order q (per collapsed axis) for K.
inline Cubature body_cubature(const geom::ConvexBody& K, int q) {
  using geom::BodyKind;
  Cubature out;
  const auto g = gauss_legendre01(q);
  switch (K.kind()) {
    case BodyKind::HPolytope:
    case BodyKind::VPolytope: {
      const auto& P = K.polytope();
      for (std::size_t s = 0; s < P.simplices.size(); ++s) {
        std::vector<Vec> v;
        for (int id : P.simplices[s]) v.push_back(P.vertices[id]);
        detail::simplex_rule(v, P.simplex_volumes[s], g, out);
      }
      break;
    }
    case BodyKind::Ellipsoid: detail::ball_rule(K.dim(), g, K.center(), K.chol(), out); break;
    case BodyKind::Product: {
      const auto A = body_cubature(K.first(), q), B = body_cubature(K.second(), q);
      for (std::size_t i = 0; i < A.points.size(); ++i)
        for (std::size_t j = 0; j < B.points.size(); ++j) {
          out.points.push_back(concat(A.points[i], B.points[j]));
          out.weights.push_back(A.weights[i] * B.weights[j]);
        }
      break;
    }
    case BodyKind::AffineImage: {
      out = body_cubature(K.inner(), q);
      const double a = std::abs(K.map().det);
      for (auto& p : out.points) p = K.map().apply(p);
      for (auto& w : out.weights) w *= a;
      break;
    }
  }
  return out;
}

/// Integral of a smooth f over K; the order is raised until two successive
/// orders agree.
template <class F>
auto integrate_body(const geom::ConvexBody& K, F&& f, const QuadConfig& cfg = {}) {
  using T = std::decay_t<decltype(f(std::declval<const Vec&>()))>;
  cfg.validate();
  IntegralResult<T> res;
  T prev{};
  bool have_prev = false;
  for (int q : {4, 6, 9, 13, 19, 27, 38, 54}) {
    const auto C = body_cubature(K, q);
    if (res.evaluations + static_cast<long>(C.points.size()) > cfg.max_evals && have_prev) break;
    T sum{};
    for (std::size_t i = 0; i < C.points.size(); ++i) sum += detail::checked<T>(f(C.points[i])) * C.weights[i];
    res.evaluations += static_cast<long>(C.points.size());
    if (have_prev) {
      const double diff = detail::magnitude(sum - prev);
      res.value = sum;
      res.error = diff;
      if (diff <= std::max(cfg.abs_tol, cfg.rel_tol * detail::magnitude(sum))) {
        res.converged = true;
        return res;
      }
    }
    prev = sum;
    res.value = sum;
    have_prev = true;
  }
  res.converged = false;
  return res;
}

/// Hit-or-miss volume of {x in box : inside(x)}.
template <class P>
IntegralResult<double> mc_volume(P&& inside, const Vec& lo, const Vec& hi, long n_samples, std::uint64_t seed) {
  if (lo.size() != hi.size() || (hi.array() <= lo.array()).any()) throw Error(ErrorCode::InvalidArgument, "bad bounding box");
  if (n_samples < 1) throw Error(ErrorCode::InvalidArgument, "need at least one sample");
  Rng rng(seed);
  const int n = static_cast<int>(lo.size());
  Vec x(n);
  long hits = 0;
  for (long i = 0; i < n_samples; ++i) {
    for (int d = 0; d < n; ++d) x(d) = rng.uniform(lo(d), hi(d));
    hits += inside(x) ? 1 : 0;
  }
  if (hits == 0) throw Error(ErrorCode::EmptyRegion, "no sample landed in the region");
  const double box = (hi - lo).prod();
  const double p = static_cast<double>(hits) / n_samples;
  IntegralResult<double> r;
  r.value = p * box;
  r.error = box * std::sqrt(p * (1.0 - p) / n_samples);
  r.evaluations = n_samples;
  return r;
}

}  // namespace mahlerlab::quad
