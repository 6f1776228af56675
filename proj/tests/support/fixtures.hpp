#pragma once

// Test-only helpers: random data generators and from-scratch reference
// computations that never touch the recursive pair statistics.

#include <cmath>
#include <memory>
#include <span>
#include <vector>

#include "mfe/dataset.hpp"
#include "mfe/kernels.hpp"
#include "mfe/random.hpp"

namespace mfe::testing {

inline std::shared_ptr<const Dataset> make_dataset(std::vector<int> y, std::vector<std::vector<double>> rows) {
  const std::size_t m = rows.empty() ? 0 : rows.front().size();
  std::vector<double> values;
  for (const auto& r : rows) values.insert(values.end(), r.begin(), r.end());
  return std::make_shared<const Dataset>(std::move(y), std::move(values), m);
}

/// Gaussian noise with class means +-shift on the first `informative` features.
inline std::shared_ptr<const Dataset> random_dataset(std::uint64_t seed, std::size_t n, std::size_t m,
                                                     std::size_t informative = 0, double shift = 1.0) {
  Rng rng(seed);
  std::vector<int> y(n);
  std::vector<double> values(n * m);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = (i % 2 == 0) ? 1 : -1;
    for (std::size_t f = 0; f < m; ++f) {
      values[i * m + f] = rng.normal() + (f < informative ? shift * y[i] : 0.0);
    }
  }
  return std::make_shared<const Dataset>(std::move(y), std::move(values), m);
}

/// Direct O(M) pair statistics over an explicit feature list.
struct ScratchPairs {
  const Dataset* ds;
  std::vector<Index> features;

  std::size_t n_samples() const { return ds->n_samples(); }
  double ip(Index i, Index j) const {
    double s = 0.0;
    for (Index m : features) s += ds->at(i, m) * ds->at(j, m);
    return s;
  }
  double sqdist(Index i, Index j) const {
    double s = 0.0;
    for (Index m : features) {
      const double d = ds->at(i, m) - ds->at(j, m);
      s += d * d;
    }
    return s;
  }
};

inline std::vector<Index> all_but(std::vector<Index> features, Index drop) {
  std::erase(features, drop);
  return features;
}

inline bool close_rel(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

}  // namespace mfe::testing
