#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "mfe/dataset.hpp"
#include "mfe/kernels.hpp"

namespace mfe {

enum class WorkingSet {
  max_violating_pair,
  second_order,  // first index by maximal violation, partner by second-order gain
};

struct SmoOptions {
  double tolerance = 1e-3;  // maximal-violating-pair gap at which SMO stops
  std::size_t max_iterations = 10'000'000;
  WorkingSet working_set = WorkingSet::max_violating_pair;
};

/// Solution of min 1/2 a'Qa - sum(a) s.t. 0 <= a <= C, y'a = 0, with
/// Q_ij = y_i y_j K_ij. `intercept` is w0 of f(x) = sum a_i y_i K(x_i, x) + w0.
struct DualSolution {
  std::vector<double> alpha;
  double intercept = 0.0;
  std::size_t iterations = 0;
};

/// SMO with maximal-violating-pair working-set selection. `gram` is the
/// row-major N x N kernel matrix. Throws SolverError past the iteration cap.
DualSolution solve_dual(std::span<const double> gram, std::span<const int> labels, double c_param,
                        const SmoOptions& options = {});

/// Trained soft-margin kernel SVM. Support vectors are referenced by dataset
/// sample index; kernels are evaluated through whatever pair statistics the
/// caller supplies, so the model follows the retained feature set.
struct SvmModel {
  IndexList sv_indices;
  std::vector<double> multipliers;  // lambda_k, 0 < lambda_k <= C
  std::vector<int> sv_labels;
  double intercept = 0.0;
  double c_param = 1.0;
  KernelConfig kernel;
  double w_norm_sq = 0.0;
  double objective = 0.0;
  std::size_t iterations = 0;

  std::size_t n_sv() const noexcept { return sv_indices.size(); }
  /// lambda_k * y_k
  double coefficient(std::size_t k) const { return multipliers[k] * sv_labels[k]; }

  bool operator==(const SvmModel&) const = default;
};

/// Multipliers at or below this fraction of min(C, largest multiplier) are
/// not support vectors.
inline constexpr double kSupportVectorThreshold = 1e-8;
/// g_n must exceed this for a sample to count as correctly separated.
inline constexpr double kSeparabilityTolerance = 1e-9;

/// Builds the model from a dual solution over `subset` (gram is over subset).
SvmModel model_from_dual(const Dataset& ds, std::span<const Index> subset, std::span<const double> gram,
                         const DualSolution& dual, const KernelConfig& cfg, double c_param);

/// sum_k lambda_k y_k K(s_k, n) without the intercept.
template <PairSource S>
double kernel_expansion(const SvmModel& model, const S& src, Index n) {
  double f = 0.0;
  for (std::size_t k = 0; k < model.n_sv(); ++k) f += model.coefficient(k) * kernel_value(model.kernel, src, model.sv_indices[k], n);
  return f;
}

template <PairSource S>
double discriminant(const SvmModel& model, const S& src, Index n) {
  return kernel_expansion(model, src, n) + model.intercept;
}

/// Kernel form of ||w||^2: sum_k sum_l lambda_k y_k lambda_l y_l K(s_k, s_l).
template <PairSource S>
double weight_norm_sq(const SvmModel& model, const S& src) {
  double acc = 0.0;
  for (std::size_t k = 0; k < model.n_sv(); ++k) {
    const double ck = model.coefficient(k);
    acc += ck * ck * kernel_value(model.kernel, src, model.sv_indices[k], model.sv_indices[k]);
    for (std::size_t l = k + 1; l < model.n_sv(); ++l)
      acc += 2.0 * ck * model.coefficient(l) * kernel_value(model.kernel, src, model.sv_indices[k], model.sv_indices[l]);
  }
  return std::max(acc, 0.0);
}

/// g_n = y_n f(x_n) on a sample set, plus the separability verdict and margin.
struct MarginView {
  std::vector<double> g;
  bool separable = false;
  double margin = 0.0;  // (min g) / ||w||, meaningful when separable
};

MarginView make_margin_view(std::vector<double> g, double w_norm_sq);

template <PairSource S>
MarginView margin_view(const SvmModel& model, const Dataset& ds, const S& src, std::span<const Index> samples) {
  std::vector<double> g(samples.size());
  for (std::size_t a = 0; a < samples.size(); ++a) g[a] = ds.label(samples[a]) * discriminant(model, src, samples[a]);
  return make_margin_view(std::move(g), weight_norm_sq(model, src));
}

/// 1/2 ||w||^2 + C sum_n max(0, 1 - g_n).
double primal_objective(double w_norm_sq, double c_param, std::span<const double> g);

/// Fraction of samples with y f(x) <= 0; a point on the boundary is an error.
/// Throws ConfigError when `f` is empty.
double error_rate(std::span<const double> f, std::span<const int> labels);

void check_trainable(const Dataset& ds, std::span<const Index> subset, const KernelConfig& cfg, double c_param);

/// Trains on `subset` with kernels evaluated through `src`.
/// Throws ConfigError if `subset` lacks a class or C <= 0.
template <PairSource S>
SvmModel train(const Dataset& ds, std::span<const Index> subset, const KernelConfig& cfg, const S& src, double c_param,
               const SmoOptions& options = {}) {
  check_trainable(ds, subset, cfg, c_param);
  const std::vector<double> gram = kernel_block(cfg, src, subset, subset);
  std::vector<int> y(subset.size());
  for (std::size_t a = 0; a < subset.size(); ++a) y[a] = ds.label(subset[a]);
  return model_from_dual(ds, subset, gram, solve_dual(gram, y, c_param, options), cfg, c_param);
}

/// Held-out error of `model` over `test_idx`, kernels evaluated on `ps`.
double test_error(const SvmModel& model, const PairStats& ps, std::span<const Index> test_idx);

struct GridPoint {
  KernelConfig kernel;
  double c_param = 1.0;
  bool operator==(const GridPoint&) const = default;
};

/// Default search grid: C in {2^-5, 2^-3, ..., 2^15}; for RBF also gamma in
/// {2^-15, 2^-11, 2^-7, 2^-3, 2^1} / M; polynomial is degree 3, gamma 1/M, coef0 1.
std::vector<GridPoint> default_grid(KernelKind kind, std::size_t n_features);

struct CvResult {
  GridPoint best;
  std::vector<double> mean_accuracy;  // one per grid point
};

/// k-fold cross-validation over `train_idx`; highest mean validation accuracy
/// wins, ties go to the smaller C and then to the earlier grid point. Folds
/// whose training part holds a single class are skipped.
CvResult cv_select(const Dataset& ds, const PairStats& ps, std::span<const Index> train_idx,
                   std::span<const GridPoint> grid, std::uint64_t seed, std::size_t k = 5,
                   const SmoOptions& options = {});

/// Text snapshot: kernel config, C, intercept, SV index/multiplier pairs.
void write_model(std::ostream& out, const SvmModel& model);
SvmModel read_model(std::istream& in);

}  // namespace mfe
