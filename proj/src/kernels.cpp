#include "mfe/kernels.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "mfe/error.hpp"

namespace mfe {

void KernelConfig::validate() const {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ConfigError(fmt::format("kernel gamma must be > 0, got {}", gamma));
  if (kind == KernelKind::polynomial && degree < 1) {
    throw ConfigError(fmt::format("polynomial degree must be >= 1, got {}", degree));
  }
  if (!std::isfinite(coef0)) throw ConfigError("kernel coef0 must be finite");
}

std::string_view to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::linear: return "linear";
    case KernelKind::polynomial: return "poly";
    case KernelKind::gaussian: return "rbf";
  }
  return "?";
}

KernelKind parse_kernel_kind(std::string_view name) {
  if (name == "linear") return KernelKind::linear;
  if (name == "poly" || name == "polynomial") return KernelKind::polynomial;
  if (name == "rbf" || name == "gaussian") return KernelKind::gaussian;
  throw ConfigError(fmt::format("unknown kernel '{}'", name));
}

std::string describe(const KernelConfig& cfg) {
  switch (cfg.kind) {
    case KernelKind::linear: return "linear";
    case KernelKind::polynomial:
      return fmt::format("poly(gamma={},coef0={},degree={})", cfg.gamma, cfg.coef0, cfg.degree);
    case KernelKind::gaussian: return fmt::format("rbf(gamma={})", cfg.gamma);
  }
  return "?";
}

PairStats::PairStats(std::shared_ptr<const Dataset> ds)
    : ds_(std::move(ds)), n_(ds_->n_samples()), ip_(n_ * n_, 0.0), sqdist_(n_ * n_, 0.0),
      mask_(ds_->n_features(), true), retained_count_(ds_->n_features()) {
  for (Index i = 0; i < n_; ++i) {
    const auto xi = ds_->row(i);
    for (Index j = i; j < n_; ++j) {
      const auto xj = ds_->row(j);
      double dot = 0.0;
      double dist = 0.0;
      for (std::size_t m = 0; m < xi.size(); ++m) {
        dot += xi[m] * xj[m];
        const double d = xi[m] - xj[m];
        dist += d * d;
      }
      ip_[i * n_ + j] = ip_[j * n_ + i] = dot;
      sqdist_[i * n_ + j] = sqdist_[j * n_ + i] = dist;
    }
  }
}

std::vector<Index> PairStats::retained() const {
  std::vector<Index> out;
  out.reserve(retained_count_);
  for (Index m = 0; m < mask_.size(); ++m)
    if (mask_[m]) out.push_back(m);
  return out;
}

void PairStats::remove(Index m) {
  if (!is_retained(m)) throw ConfigError(fmt::format("feature {} is not retained", m));
  for (Index i = 0; i < n_; ++i) {
    const double xi = ds_->at(i, m);
    for (Index j = i; j < n_; ++j) {
      const double xj = ds_->at(j, m);
      const double d = xi - xj;
      const double ip = ip_[i * n_ + j] - xi * xj;
      const double sq = std::max(0.0, sqdist_[i * n_ + j] - d * d);
      ip_[i * n_ + j] = ip_[j * n_ + i] = ip;
      sqdist_[i * n_ + j] = sqdist_[j * n_ + i] = sq;
    }
  }
  mask_[m] = false;
  --retained_count_;
  if (retained_count_ == 0) {
    std::fill(ip_.begin(), ip_.end(), 0.0);
    std::fill(sqdist_.begin(), sqdist_.end(), 0.0);
  }
}

CandidateView PairStats::candidate(Index m) const {
  if (!is_retained(m)) throw ConfigError(fmt::format("feature {} is not retained", m));
  return CandidateView(*this, m);
}

double PairStats::consistency_gap() const {
  double worst = 0.0;
  for (Index i = 0; i < n_; ++i)
    for (Index j = 0; j < n_; ++j)
      worst = std::max(worst, std::abs(sqdist(i, j) - (ip(i, i) + ip(j, j) - 2.0 * ip(i, j))));
  return worst;
}

}  // namespace mfe
