#pragma once

#include "core.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace mahlerlab::laplace {

namespace detail {

// exp[t_0..t_k] by Taylor expansion around the midpoint using complete
// homogeneous symmetric polynomials; accurate when the spread is small.
inline double dd_taylor(const double* t, int k) {
  double lo = t[0], hi = t[0];
  for (int i = 1; i <= k; ++i) lo = std::min(lo, t[i]), hi = std::max(hi, t[i]);
  const double c = 0.5 * (lo + hi);
  std::array<double, 8> d{};
  for (int i = 0; i <= k; ++i) d[i] = t[i] - c;
  // h[j] holds the degree-j complete homogeneous polynomial in the variables seen so far.
  constexpr int kTerms = 30;
  std::array<double, kTerms> h{};
  h.fill(0.0);
  h[0] = 1.0;
  for (int i = 0; i <= k; ++i)
    for (int j = 1; j < kTerms; ++j) h[j] += d[i] * h[j - 1];
  double sum = 0.0;
  double inv_fact = 1.0;
  for (int j = 1; j <= k; ++j) inv_fact /= j;
  for (int j = 0; j < kTerms; ++j) {
    sum += h[j] * inv_fact;
    inv_fact /= (j + k + 1);
  }
  return std::exp(c) * sum;
}

}  // namespace detail

/// Divided difference of exp at up to 8 nodes, robust to coincident nodes.
inline double exp_divided_difference(const double* t_in, int count) {
  const int k = count - 1;
  std::array<double, 8> t{};
  std::copy(t_in, t_in + count, t.begin());
  std::sort(t.begin(), t.begin() + count);
  constexpr double kSpread = 1.0;
  if (t[k] - t[0] <= kSpread) return detail::dd_taylor(t.data(), k);
  std::array<std::array<double, 8>, 8> D{};
  for (int i = 0; i <= k; ++i) D[i][i] = std::exp(t[i]);
  for (int len = 1; len <= k; ++len) {
    for (int i = 0; i + len <= k; ++i) {
      const int j = i + len;
      if (t[j] - t[i] <= kSpread) D[i][j] = detail::dd_taylor(&t[i], len);
      else D[i][j] = (D[i + 1][j] - D[i][j - 1]) / (t[j] - t[i]);
    }
  }
  return D[0][k];
}

/// log of the uniform average of e^{rho <u, y>} over the unit ball B^n, |u| = 1.
inline double log_ball_average(int n, double rho) {
  rho = std::abs(rho);
  const double nu = 0.5 * n;
  if (rho < 1e-3) {
    // 0F1(; nu+1; rho^2/4) series
    const double q = 0.25 * rho * rho;
    double term = 1.0, sum = 1.0;
    for (int k = 1; k < 8; ++k) {
      term *= q / (k * (nu + k));
      sum += term;
    }
    return std::log(sum);
  }
  const double pre = std::lgamma(nu + 1.0) + nu * std::log(2.0 / rho);
  if (rho <= 60.0) return pre + std::log(std::cyl_bessel_i(nu, rho));
  // Asymptotic expansion of e^{-rho} I_nu(rho).
  const double mu = 4.0 * nu * nu;
  double term = 1.0, sum = 1.0;
  for (int k = 1; k < 12; ++k) {
    term *= -(mu - (2.0 * k - 1) * (2.0 * k - 1)) / (k * 8.0 * rho);
    sum += term;
  }
  return pre + rho - 0.5 * std::log(2.0 * kPi * rho) + std::log(sum);
}

}  // namespace mahlerlab::laplace
