#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mfe/dataset.hpp"
#include "mfe/elimination.hpp"
#include "mfe/kernels.hpp"
#include "mfe/svm.hpp"

namespace mfe {

inline constexpr std::string_view kVersion = "0.1.0";

struct ExperimentConfig {
  std::filesystem::path data;
  KernelKind kernel = KernelKind::gaussian;
  std::vector<double> c_grid;      // empty: 2^-5, 2^-3, ..., 2^15
  std::vector<double> gamma_grid;  // RBF widths; empty: 2^{-15,-11,-7,-3,1} / M
  double poly_coef0 = 1.0;
  int poly_degree = 3;
  std::size_t n_trials = 10;
  std::uint64_t seed = 1;
  std::vector<Method> methods;
  std::size_t stop_at = 1;
  bool keep_only_separable = true;
  std::filesystem::path out_dir = "out";
  bool diagnostics = false;
  bool scale = false;
  std::size_t cv_folds = 5;
  unsigned threads = 1;
  RadiusSpace radius_space = RadiusSpace::feature;
  bool vcc_plus_one = false;
  double smo_tolerance = 1e-3;

  /// Throws ConfigError on an empty method list, zero trials and the like.
  void validate() const;
};

/// Applies one `key = value` setting. Throws ConfigError on unknown keys or
/// malformed values.
void apply_setting(ExperimentConfig& cfg, std::string_view key, std::string_view value);

/// Flat `key = value` lines; blank lines and `#` comments are ignored.
ExperimentConfig parse_config(std::istream& in, ExperimentConfig base = {});
ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base = {});

/// Resolved config in the same key = value form parse_config reads.
std::string config_text(const ExperimentConfig& cfg);

/// Hyperparameter candidates for a dataset with `n_features` features.
std::vector<GridPoint> build_grid(const ExperimentConfig& cfg, std::size_t n_features);

struct CurveRow {
  std::string method;
  std::size_t retained_count = 0;
  double mean_test_error = 0.0;
  std::size_t trial_count = 0;
  double std_test_error = 0.0;  // sample standard deviation, 0 for a single trial
  bool operator==(const CurveRow&) const = default;
};

/// Rows grouped by method (in config order), retained count decreasing.
struct CurveTable {
  std::vector<CurveRow> rows;
  bool operator==(const CurveTable&) const = default;
};

CurveTable aggregate(const std::vector<EliminationTrace>& traces, const std::vector<Method>& methods);

void write_curves_csv(std::ostream& out, const CurveTable& table);
/// Throws ParseError on malformed input.
CurveTable read_curves_csv(std::istream& in);

/// Static SVG line chart: one polyline per method, retained features on x.
std::string curves_svg(const CurveTable& table, std::string_view title = {});

struct TrialRecord {
  TrialSplit split;
  bool kept = false;
  std::string note;  // why a trial was discarded
  std::optional<GridPoint> chosen;
  std::shared_ptr<const SvmModel> initial_model;
  bool initially_separable = false;
};

struct ExperimentResult {
  CurveTable curves;
  std::vector<EliminationTrace> traces;  // kept trials, methods in config order
  std::vector<TrialRecord> trials;       // every attempt
  std::size_t n_features = 0;
};

/// Splits, cross-validates, trains and eliminates until `n_trials` trials are
/// kept or 10 * n_trials attempts are used. Throws ConfigError when no trial
/// is kept.
ExperimentResult run_experiment(const ExperimentConfig& cfg, std::shared_ptr<const Dataset> ds);
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// Writes curves.csv, trace_<trial>_<method>.csv, config.txt and curves.svg
/// (plus diagnostics_<trial>_<method>.csv when diagnostics are on) into
/// cfg.out_dir. Throws Error if the directory cannot be written.
void emit_outputs(const ExperimentResult& result, const ExperimentConfig& cfg);

}  // namespace mfe
