#pragma once

#include <cmath>
#include <concepts>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mfe/dataset.hpp"

namespace mfe {

enum class KernelKind { linear, polynomial, gaussian };

/// Kernel parameters. `gamma` is the polynomial scale or the RBF width;
/// `coef0` and `degree` only apply to the polynomial kernel.
struct KernelConfig {
  KernelKind kind = KernelKind::linear;
  double gamma = 1.0;
  double coef0 = 0.0;
  int degree = 3;

  void validate() const;
  bool operator==(const KernelConfig&) const = default;
};

std::string_view to_string(KernelKind kind);
/// Accepts linear, poly/polynomial, rbf/gaussian.
KernelKind parse_kernel_kind(std::string_view name);
std::string describe(const KernelConfig& cfg);

/// Anything exposing reduced-space inner products and squared distances.
template <typename S>
concept PairSource = requires(const S& s, Index i, Index j) {
  { s.ip(i, j) } -> std::convertible_to<double>;
  { s.sqdist(i, j) } -> std::convertible_to<double>;
};

class CandidateView;

/// Pairwise inner products and squared distances between all samples of a
/// dataset, summed over the retained feature set. Removing a feature
/// subtracts its contribution in O(N^2).
class PairStats {
 public:
  explicit PairStats(std::shared_ptr<const Dataset> ds);

  std::size_t n_samples() const noexcept { return n_; }
  const Dataset& dataset() const noexcept { return *ds_; }
  const std::shared_ptr<const Dataset>& dataset_ptr() const noexcept { return ds_; }

  double ip(Index i, Index j) const { return ip_[i * n_ + j]; }
  double sqdist(Index i, Index j) const { return sqdist_[i * n_ + j]; }

  bool is_retained(Index m) const { return m < mask_.size() && mask_[m]; }
  /// Retained features in ascending order.
  std::vector<Index> retained() const;
  std::size_t retained_count() const noexcept { return retained_count_; }

  /// Commits the removal of feature m. Throws ConfigError if m is not retained.
  void remove(Index m);

  /// Side-effect-free view of the statistics with feature m removed.
  CandidateView candidate(Index m) const;

  /// Largest |sqdist - (ip_ii + ip_jj - 2 ip_ij)| over all pairs.
  double consistency_gap() const;

  bool operator==(const PairStats& o) const {
    return ip_ == o.ip_ && sqdist_ == o.sqdist_ && mask_ == o.mask_;
  }

 private:
  std::shared_ptr<const Dataset> ds_;
  std::size_t n_ = 0;
  std::vector<double> ip_;
  std::vector<double> sqdist_;
  std::vector<bool> mask_;
  std::size_t retained_count_ = 0;
};

/// Delta overlay: subtracts feature m's contribution on read.
class CandidateView {
 public:
  CandidateView(const PairStats& base, Index m) : base_(&base), m_(m) {}

  Index removed_feature() const noexcept { return m_; }
  std::size_t n_samples() const noexcept { return base_->n_samples(); }

  double ip(Index i, Index j) const {
    const Dataset& ds = base_->dataset();
    return base_->ip(i, j) - ds.at(i, m_) * ds.at(j, m_);
  }
  double sqdist(Index i, Index j) const {
    const Dataset& ds = base_->dataset();
    const double d = ds.at(i, m_) - ds.at(j, m_);
    const double v = base_->sqdist(i, j) - d * d;
    return v > 0.0 ? v : 0.0;
  }

 private:
  const PairStats* base_;
  Index m_;
};

template <PairSource S>
double kernel_value(const KernelConfig& cfg, const S& src, Index i, Index j) {
  switch (cfg.kind) {
    case KernelKind::linear:
      return src.ip(i, j);
    case KernelKind::polynomial:
      return std::pow(cfg.gamma * src.ip(i, j) + cfg.coef0, cfg.degree);
    case KernelKind::gaussian:
      return std::exp(-cfg.gamma * src.sqdist(i, j));
  }
  return 0.0;
}

/// Dense kernel block K(rows[a], cols[b]), row-major.
template <PairSource S>
std::vector<double> kernel_block(const KernelConfig& cfg, const S& src, std::span<const Index> rows,
                                 std::span<const Index> cols) {
  std::vector<double> out(rows.size() * cols.size());
  for (std::size_t a = 0; a < rows.size(); ++a) {
    for (std::size_t b = 0; b < cols.size(); ++b) out[a * cols.size() + b] = kernel_value(cfg, src, rows[a], cols[b]);
  }
  return out;
}

/// Where the data radius is measured: between kernel-mapped points or between
/// raw points over the retained features.
enum class RadiusSpace { feature, input };

struct RadiusView {
  double r_sq = 0.0;
};

/// Squared diameter of `samples`: the largest pairwise squared distance,
/// K(i,i) - 2K(i,j) + K(j,j) in feature space or sqdist in input space.
template <PairSource S>
RadiusView radius_sq(const KernelConfig& cfg, const S& src, std::span<const Index> samples,
                     RadiusSpace space = RadiusSpace::feature) {
  double best = 0.0;
  if (space == RadiusSpace::input) {
    for (std::size_t a = 0; a < samples.size(); ++a)
      for (std::size_t b = a + 1; b < samples.size(); ++b) best = std::max(best, src.sqdist(samples[a], samples[b]));
    return {best};
  }
  if (cfg.kind == KernelKind::gaussian) {
    // K(i,i) = 1, so the distance only depends on the off-diagonal entry.
    double min_k = 1.0;
    for (std::size_t a = 0; a < samples.size(); ++a)
      for (std::size_t b = a + 1; b < samples.size(); ++b)
        min_k = std::min(min_k, kernel_value(cfg, src, samples[a], samples[b]));
    return {std::max(0.0, 2.0 - 2.0 * min_k)};
  }
  std::vector<double> diag(samples.size());
  for (std::size_t a = 0; a < samples.size(); ++a) diag[a] = kernel_value(cfg, src, samples[a], samples[a]);
  for (std::size_t a = 0; a < samples.size(); ++a) {
    for (std::size_t b = a + 1; b < samples.size(); ++b) {
      const double d = diag[a] + diag[b] - 2.0 * kernel_value(cfg, src, samples[a], samples[b]);
      best = std::max(best, d);
    }
  }
  return {best};
}

}  // namespace mfe
