#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "mfe/dataset.hpp"
#include "mfe/svm.hpp"

namespace mfe {

/// Scalar projections z_n of the training samples onto a fixed weight
/// direction, already divided by `norm_used` (= ||w||).
struct ProjectedData {
  std::vector<double> z;
  std::vector<int> labels;
  double norm_used = 1.0;
};

/// Which structure the 1-d optimum has.
enum class OneDKind {
  pair,        // one margin-setter per class, violator counts equal
  single,      // a margin-setter in one class only; its multiplier sits at C
  flat,        // w = 0
};

/// Optimum of min 1/2 w^2 + C sum xi  s.t.  y_n (w z_n + b) >= 1 - xi_n, xi >= 0.
struct OneDSolution {
  double w = 0.0;
  double b = 0.0;
  std::vector<double> xi;
  double objective = 0.0;
  OneDKind kind = OneDKind::flat;
  std::optional<Index> positive_setter;
  std::optional<Index> negative_setter;
};

/// Exact 1-d soft-margin SVM in O(N log N).
///
/// For each orientation (class +1 right of class -1, and the mirror) both
/// classes are sorted once, walking outward from the boundary. A margin-setter
/// pair shares its within-class rank i, so pair i has exactly i violators per
/// class, w = 2 / gap and
///     sum xi = 2 i - w (D+_i - D-_i),   D_{i+1} = D_i + z_i,
/// with the prefix sums D updated recursively. Pairs alone miss optima whose
/// margin is set in one class only (that setter's multiplier is C); those come
/// from the stationarity condition w = sum lambda y z with the violator counts
/// implied by the equality constraint, and are scored with the same prefix
/// sums plus a binary search. The w = 0 solution (b = +1 or -1) is also
/// scored, and the smallest objective wins.
///
/// Throws ConfigError if a class is empty, sizes differ or C <= 0.
OneDSolution solve_1d(const ProjectedData& pd, double c_param);

/// Reference solution through the generic SMO dual solver on the linear 1-d
/// Gram matrix z_i z_j, solved to a tight tolerance. The intercept is then
/// re-chosen exactly among the O(N) margin knots for the dual's w; `kind` and
/// the setters are not filled in.
OneDSolution solve_1d_oracle(const ProjectedData& pd, double c_param,
                             const SmoOptions& options = {1e-10, 10'000'000, WorkingSet::second_order});

/// Fills xi and objective for a given (w, b).
OneDSolution evaluate_1d(const ProjectedData& pd, double c_param, double w, double b);

/// The hinge term is piecewise linear in b, so for a fixed w the optimal
/// intercepts form a closed interval [lo, hi], often a single point.
struct InterceptRange {
  double lo = 0.0;
  double hi = 0.0;
  double mid() const { return 0.5 * (lo + hi); }
};

/// Minimizers of sum max(0, 1 - y_n (w z_n + b)) over b.
InterceptRange optimal_intercepts(const ProjectedData& pd, double w);

/// A P1/P2 margin-setter pair candidate, in the original z orientation.
struct PairCandidate {
  double w = 0.0;
  double b = 0.0;
  double slack_sum = 0.0;  // via the recursive prefix sums
  std::size_t rank = 0;
  Index positive_setter = 0;
  Index negative_setter = 0;
};

/// Every admissible margin-setter pair of both orientations.
std::vector<PairCandidate> margin_setter_pairs(const ProjectedData& pd);

/// Hard-margin rescale (A, w0) of unnormalized projections z'.
struct LoSolution {
  double a_scale = 0.0;
  double intercept = 0.0;
  double post_margin = 0.0;  // 1 / (|A| ||w||)
};

/// min A^2 s.t. y_n (A z'_n + w0) >= 1. Returns nullopt when the classes
/// overlap along z' (no separating rescale exists).
std::optional<LoSolution> solve_lo(std::span<const double> z_prime, std::span<const int> labels, double w_norm);

}  // namespace mfe
