#include "mfe/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <sstream>

#include <fmt/format.h>

#include "mfe/error.hpp"
#include "mfe/random.hpp"

namespace mfe {

Dataset::Dataset(std::vector<int> labels, std::vector<double> values, std::size_t n_features)
    : labels_(std::move(labels)), values_(std::move(values)), n_features_(n_features) {
  if (values_.size() != labels_.size() * n_features_) {
    throw ParseError(fmt::format("dataset shape mismatch: {} values for {}x{}", values_.size(),
                                 labels_.size(), n_features_));
  }
}

void Dataset::validate() const {
  if (n_samples() < 2) throw ParseError(fmt::format("dataset needs at least 2 samples, got {}", n_samples()));
  if (n_features_ < 1) throw ParseError("dataset has no features");
  bool pos = false;
  bool neg = false;
  for (int y : labels_) {
    if (y == 1) pos = true;
    else if (y == -1) neg = true;
    else throw ParseError(fmt::format("label {} is not +1/-1", y));
  }
  if (!pos || !neg) throw ParseError("dataset has a single class");
  for (double v : values_) {
    if (!std::isfinite(v)) throw ParseError("dataset contains a non-finite value");
  }
}

namespace {

double parse_double(std::string_view tok, std::size_t line_no) {
  // from_chars for double is available in libstdc++ 11
  double v = 0.0;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  if (!tok.empty() && tok.front() == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || first == last) {
    throw ParseError(fmt::format("line {}: '{}' is not a number", line_no, tok));
  }
  return v;
}

std::size_t parse_index(std::string_view tok, std::size_t line_no) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size() || tok.empty()) {
    throw ParseError(fmt::format("line {}: bad feature index '{}'", line_no, tok));
  }
  if (v == 0) throw ParseError(fmt::format("line {}: feature indices are 1-based", line_no));
  return v;
}

struct SparseRow {
  int label;
  std::vector<std::pair<std::size_t, double>> entries;
};

}  // namespace

Dataset parse_libsvm(std::istream& in, std::optional<std::size_t> n_features_hint) {
  std::vector<SparseRow> rows;
  std::size_t max_index = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok)) continue;
    SparseRow row;
    row.label = parse_double(tok, line_no) > 0.0 ? 1 : -1;
    std::size_t prev = 0;
    while (ls >> tok) {
      const auto colon = tok.find(':');
      if (colon == std::string::npos) {
        throw ParseError(fmt::format("line {}: expected idx:val, got '{}'", line_no, tok));
      }
      const std::string_view sv(tok);
      const std::size_t idx = parse_index(sv.substr(0, colon), line_no);
      const double val = parse_double(sv.substr(colon + 1), line_no);
      if (idx == prev) throw ParseError(fmt::format("line {}: duplicate index {}", line_no, idx));
      if (idx < prev) throw ParseError(fmt::format("line {}: indices not increasing at {}", line_no, idx));
      prev = idx;
      row.entries.emplace_back(idx - 1, val);
    }
    max_index = std::max(max_index, prev);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("empty dataset");

  const std::size_t m = std::max(max_index, n_features_hint.value_or(0));
  std::vector<int> labels;
  std::vector<double> values(rows.size() * m, 0.0);
  labels.reserve(rows.size());
  for (std::size_t n = 0; n < rows.size(); ++n) {
    labels.push_back(rows[n].label);
    for (const auto& [idx, val] : rows[n].entries) values[n * m + idx] = val;
  }
  Dataset ds(std::move(labels), std::move(values), m);
  ds.validate();
  return ds;
}

Dataset parse_libsvm(std::string_view text, std::optional<std::size_t> n_features_hint) {
  std::istringstream in{std::string(text)};
  return parse_libsvm(in, n_features_hint);
}

Dataset load_libsvm(const std::filesystem::path& path, std::optional<std::size_t> n_features_hint) {
  std::ifstream in(path);
  if (!in) throw ParseError(fmt::format("cannot open {}", path.string()));
  return parse_libsvm(in, n_features_hint);
}

std::string to_libsvm(const Dataset& ds) {
  std::string out;
  for (Index n = 0; n < ds.n_samples(); ++n) {
    out += ds.label(n) > 0 ? "+1" : "-1";
    for (Index m = 0; m < ds.n_features(); ++m) {
      const double v = ds.at(n, m);
      if (v != 0.0) out += fmt::format(" {}:{}", m + 1, v);
    }
    out += '\n';
  }
  return out;
}

bool has_both_classes(const Dataset& ds, std::span<const Index> subset) {
  bool pos = false;
  bool neg = false;
  for (Index n : subset) (ds.label(n) > 0 ? pos : neg) = true;
  return pos && neg;
}

Dataset min_max_scaled(const Dataset& ds, std::span<const Index> fit_rows) {
  const std::size_t m_count = ds.n_features();
  std::vector<double> lo(m_count, 0.0);
  std::vector<double> hi(m_count, 0.0);
  for (Index m = 0; m < m_count; ++m) {
    bool first = true;
    for (Index n : fit_rows) {
      const double v = ds.at(n, m);
      if (first || v < lo[m]) lo[m] = v;
      if (first || v > hi[m]) hi[m] = v;
      first = false;
    }
  }
  std::vector<double> values(ds.values().size());
  for (Index n = 0; n < ds.n_samples(); ++n) {
    for (Index m = 0; m < m_count; ++m) {
      const double span = hi[m] - lo[m];
      values[n * m_count + m] = span > 0.0 ? (ds.at(n, m) - lo[m]) / span : 0.0;
    }
  }
  return Dataset(ds.labels(), std::move(values), m_count);
}

TrialSplit make_trial(const Dataset& ds, std::uint64_t seed, int trial_id) {
  const std::size_t n = ds.n_samples();
  if (n < 4) throw ConfigError(fmt::format("need at least 4 samples for a 50-50 trial, got {}", n));
  IndexList perm(n);
  std::iota(perm.begin(), perm.end(), Index{0});
  Rng rng(seed);
  rng.shuffle(std::span<Index>(perm));
  const std::size_t n_train = (n + 1) / 2;
  TrialSplit split;
  split.trial_id = trial_id;
  split.seed = seed;
  split.train_indices.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
  split.test_indices.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train), perm.end());
  std::sort(split.train_indices.begin(), split.train_indices.end());
  std::sort(split.test_indices.begin(), split.test_indices.end());
  return split;
}

std::vector<IndexList> make_folds(std::span<const Index> indices, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw ConfigError(fmt::format("k-fold needs k >= 2, got {}", k));
  if (k > indices.size()) {
    throw ConfigError(fmt::format("k={} exceeds the {} available indices", k, indices.size()));
  }
  IndexList perm(indices.begin(), indices.end());
  Rng rng(seed);
  rng.shuffle(std::span<Index>(perm));
  std::vector<IndexList> folds(k);
  const std::size_t base = perm.size() / k;
  const std::size_t extra = perm.size() % k;
  std::size_t pos = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t len = base + (f < extra ? 1 : 0);
    folds[f].assign(perm.begin() + static_cast<std::ptrdiff_t>(pos),
                    perm.begin() + static_cast<std::ptrdiff_t>(pos + len));
    std::sort(folds[f].begin(), folds[f].end());
    pos += len;
  }
  return folds;
}

}  // namespace mfe
