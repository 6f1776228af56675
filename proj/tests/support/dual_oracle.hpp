#pragma once

// Accelerated projected-gradient solver for the SVM dual, used only as an
// independent reference for the SMO solver.

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

namespace mfe::testing {

/// Euclidean projection onto {0 <= a <= C, y'a = 0} by bisection on the
/// equality multiplier.
inline std::vector<double> project_box_hyperplane(std::span<const double> v, std::span<const int> y, double c) {
  auto at = [&](double nu, std::vector<double>& out) {
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      out[i] = std::clamp(v[i] - nu * y[i], 0.0, c);
      s += y[i] * out[i];
    }
    return s;
  };
  std::vector<double> out(v.size());
  double lo = -1.0;
  double hi = 1.0;
  while (at(lo, out) < 0.0) lo *= 2.0;
  while (at(hi, out) > 0.0) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (at(mid, out) > 0.0 ? lo : hi) = mid;
  }
  at(0.5 * (lo + hi), out);
  return out;
}

struct DualReference {
  std::vector<double> alpha;
  double dual_objective;  // sum(a) - 1/2 a'Qa
};

inline double dual_value(std::span<const double> gram, std::span<const int> y, std::span<const double> a) {
  const std::size_t n = y.size();
  double lin = 0.0;
  double quad = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    lin += a[i];
    for (std::size_t j = 0; j < n; ++j) quad += a[i] * a[j] * y[i] * y[j] * gram[i * n + j];
  }
  return lin - 0.5 * quad;
}

inline DualReference projected_gradient_dual(std::span<const double> gram, std::span<const int> y, double c,
                                             int iterations = 60000) {
  const std::size_t n = y.size();
  double lip = 0.0;  // trace bounds the largest eigenvalue of the PSD Q
  for (std::size_t i = 0; i < n; ++i) lip += gram[i * n + i];
  const double step = 1.0 / std::max(lip, 1e-12);
  std::vector<double> a(n, 0.0);
  std::vector<double> prev = a;
  std::vector<double> mom = a;
  std::vector<double> v(n);
  double t = 1.0;
  for (int it = 0; it < iterations; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      double qa = 0.0;
      for (std::size_t j = 0; j < n; ++j) qa += y[i] * y[j] * gram[i * n + j] * mom[j];
      v[i] = mom[i] + step * (1.0 - qa);
    }
    prev = a;
    a = project_box_hyperplane(v, y, c);
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    for (std::size_t i = 0; i < n; ++i) mom[i] = a[i] + ((t - 1.0) / t_next) * (a[i] - prev[i]);
    t = t_next;
  }
  return {a, dual_value(gram, y, a)};
}

}  // namespace mfe::testing
