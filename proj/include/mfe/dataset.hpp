#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mfe {

using Index = std::size_t;
using IndexList = std::vector<Index>;

/// Dense labelled two-class dataset. Values are stored row-major, one row per
/// sample; labels are exactly +1 or -1.
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::vector<int> labels, std::vector<double> values, std::size_t n_features);

  std::size_t n_samples() const noexcept { return labels_.size(); }
  std::size_t n_features() const noexcept { return n_features_; }

  int label(Index n) const { return labels_[n]; }
  const std::vector<int>& labels() const noexcept { return labels_; }

  double at(Index n, Index m) const { return values_[n * n_features_ + m]; }
  std::span<const double> row(Index n) const {
    return {values_.data() + n * n_features_, n_features_};
  }
  const std::vector<double>& values() const noexcept { return values_; }

  /// Throws ParseError unless N >= 2, M >= 1, labels are +-1 with both classes
  /// present and all values are finite.
  void validate() const;

  bool operator==(const Dataset&) const = default;

 private:
  std::vector<int> labels_;
  std::vector<double> values_;
  std::size_t n_features_ = 0;
};

/// Parses LIBSVM sparse text (`label idx:val ...`, 1-based strictly increasing
/// indices). Missing entries are 0. M is the larger of the largest index seen
/// and `n_features_hint`. Any positive label maps to +1, everything else to -1.
Dataset parse_libsvm(std::istream& in, std::optional<std::size_t> n_features_hint = std::nullopt);
Dataset parse_libsvm(std::string_view text, std::optional<std::size_t> n_features_hint = std::nullopt);
Dataset load_libsvm(const std::filesystem::path& path,
                    std::optional<std::size_t> n_features_hint = std::nullopt);

/// LIBSVM text for `ds`; zero entries are omitted, values printed round-trip exact.
std::string to_libsvm(const Dataset& ds);

/// True when both labels occur among `subset`.
bool has_both_classes(const Dataset& ds, std::span<const Index> subset);

/// Per-feature [0,1] min-max scaling fit on `fit_rows` and applied to every
/// sample. Constant features (on the fit rows) map to 0.
Dataset min_max_scaled(const Dataset& ds, std::span<const Index> fit_rows);

/// Random 50-50 split into a training half (ceil(N/2) samples) and a held-out half.
struct TrialSplit {
  int trial_id = 0;
  std::uint64_t seed = 0;
  IndexList train_indices;
  IndexList test_indices;
};

/// Unstratified uniform permutation split, deterministic in `seed`.
/// Throws ConfigError when N < 4.
TrialSplit make_trial(const Dataset& ds, std::uint64_t seed, int trial_id = 0);

/// Partitions `indices` into k folds whose sizes differ by at most one.
/// The first N mod k folds get the extra element.
std::vector<IndexList> make_folds(std::span<const Index> indices, std::size_t k, std::uint64_t seed);

}  // namespace mfe
