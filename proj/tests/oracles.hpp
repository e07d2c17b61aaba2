#pragma once

// Reference computations that share no code with the library.

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>

namespace oracle {

/// Positive root of the scalar discounted Riccati equation
///   k = q + alpha a^2 k - alpha^2 a^2 b^2 k^2 / (alpha b^2 k + r)
/// by bisection on [q, hi].
inline double scalar_riccati(double a, double b, double q, double r, double alpha, double tol = 1e-14) {
  auto f = [&](double k) {
    return q + alpha * a * a * k - alpha * alpha * a * a * b * b * k * k / (alpha * b * b * k + r) - k;
  };
  double lo = q, hi = std::max(1.0, q);
  while (f(hi) > 0.0) hi *= 2.0;
  if (f(lo) < 0.0) throw std::logic_error("bisection bracket failed");
  while (hi - lo > tol * std::max(1.0, hi)) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

/// Scalar weather from the closed-form sum
///   W_n = g^(n-k) w_k + sum_{m=k+1..n} g^(n-m) (E Z + sum_{j=m-L..m} eps_m(j)),
/// and its conditional expectation given reveal time k obtained by dropping
/// every entry revealed after k. `eps(m, j)` returns eps_m(j).
inline double forecast(double g, double mean_z, int trunc_lag, double w_k, long k, long n,
                       const std::function<double(long, long)>& eps) {
  double total = std::pow(g, static_cast<double>(n - k)) * w_k;
  for (long m = k + 1; m <= n; ++m) {
    double z = mean_z;
    for (long j = m - trunc_lag; j <= std::min(m, k); ++j) z += eps(m, j);
    total += std::pow(g, static_cast<double>(n - m)) * z;
  }
  return total;
}

}  // namespace oracle
