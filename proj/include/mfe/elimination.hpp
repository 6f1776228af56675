#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mfe/dataset.hpp"
#include "mfe/kernels.hpp"
#include "mfe/svm.hpp"

namespace mfe {

/// f(x) = a * sum_k lambda_k y_k K(s_k, x) + b, replacing the base model's
/// scale and intercept.
struct Rescale {
  double a = 1.0;
  double b = 0.0;
  bool operator==(const Rescale&) const = default;
};

/// Current decision boundary: the last trained model, optionally rescaled.
/// The retained feature set lives in the PairStats the state is paired with.
struct BoundaryState {
  std::shared_ptr<const SvmModel> base_model;
  std::optional<Rescale> rescale;

  double scale() const { return rescale ? rescale->a : 1.0; }
  double offset() const { return rescale ? rescale->b : base_model->intercept; }
};

template <PairSource S>
double boundary_value(const BoundaryState& state, const S& src, Index n) {
  return state.scale() * kernel_expansion(*state.base_model, src, n) + state.offset();
}

/// g_n, ||a w||^2, objective and separability of the boundary on `samples`.
struct BoundaryFit {
  MarginView view;
  double w_norm_sq = 0.0;
  double objective = 0.0;
};

BoundaryFit fit_boundary(const BoundaryState& state, const PairStats& ps, std::span<const Index> samples);

/// Error rate of the boundary on `samples`; y f(x) <= 0 counts as an error.
double boundary_error(const BoundaryState& state, const PairStats& ps, std::span<const Index> samples);

struct StepDecision {
  Index eliminated = 0;
  double criterion_value = 0.0;
  std::optional<std::map<Index, double>> per_candidate;  // only with diagnostics on
  std::optional<Index> anchor;
  std::optional<Rescale> rescale;  // boundary adjustment installed by the step
};

/// Terms of the expected-risk bound
///   R <= r_emp + sqrt((h (log(2N/h) + 1) - log(eta/4)) / N),  h = r^2 ||w||^2.
struct BoundTerms {
  double r_sq = 0.0;
  double w_norm_sq_eff = 0.0;
  double r_emp = 0.0;
  double eta = 0.05;
  double vcc = 0.0;
  double bound_value = 0.0;
};

/// The h-term is clamped below at 0. With `plus_one`, h = r^2 ||w||^2 + 1.
BoundTerms bound_terms(double r_sq, double w_norm_sq_eff, double r_emp, std::size_t n_samples, double eta = 0.05,
                       bool plus_one = false);

struct StepOptions {
  bool diagnostics = false;
  RadiusSpace radius_space = RadiusSpace::feature;
  double eta = 0.05;
  bool vcc_plus_one = false;
  unsigned threads = 1;  // candidate scoring workers
};

/// Everything a step criterion reads. `train` must hold both classes and the
/// statistics at least two retained features.
struct StepInput {
  const Dataset& ds;
  std::span<const Index> train;
  const BoundaryState& state;
  const PairStats& ps;
  double c_param;
};

/// Largest reduced-space margin among candidates keeping every g > tau_sep.
/// Throws NoAdmissibleCandidate ("separability exhausted").
StepDecision step_basic_mfe(const StepInput& in, const StepOptions& opt = {});
/// Joint (feature, anchor) minimum of 1/2 ||w||^2 rho^2 + C sum max(0, 1 - rho g),
/// rho = 1 / g_anchor.
StepDecision step_mfe_slack(const StepInput& in, const StepOptions& opt = {});
/// Basic MFE while some candidate keeps separability, MFE-Slack after.
StepDecision step_mfe_hybrid(const StepInput& in, const StepOptions& opt = {});
/// Largest post-LO margin; installs (A, w0).
StepDecision step_mfe_lo_emb(const StepInput& in, const StepOptions& opt = {});
/// Smallest 1-d SVM objective along each candidate's projection.
StepDecision step_mfe_qp_emb(const StepInput& in, const StepOptions& opt = {});
/// r_m^2 times the 1-d SVM objective.
StepDecision step_bmfe_qp_emb(const StepInput& in, const StepOptions& opt = {});
/// Smallest risk bound from the 1-d solution.
StepDecision step_bme_qp_emb(const StepInput& in, const StepOptions& opt = {});
/// r_m^2 times the MFE-Slack objective, jointly over (feature, anchor).
StepDecision step_bmfe_slack(const StepInput& in, const StepOptions& opt = {});
/// Smallest |1/2 sum sum c_k c_l (K - K^-m)| with the multipliers fixed.
StepDecision step_rfe(const StepInput& in, const StepOptions& opt = {});

/// Commits `decision` in `ps`, retrains on `train` with the base model's
/// kernel and C, and drops any rescale.
BoundaryState apply_frsub(const BoundaryState& state, const StepDecision& decision, PairStats& ps,
                          std::span<const Index> train, const SmoOptions& smo = {});

enum class Criterion {
  basic_mfe,
  mfe_slack,
  mfe_hybrid,
  mfe_lo_emb,
  mfe_qp_emb,
  bmfe_qp_emb,
  bme_qp_emb,
  bmfe_slack,
  rfe,
};

inline constexpr Criterion kAllCriteria[] = {
    Criterion::basic_mfe,  Criterion::mfe_slack,   Criterion::mfe_hybrid, Criterion::mfe_lo_emb, Criterion::mfe_qp_emb,
    Criterion::bmfe_qp_emb, Criterion::bme_qp_emb, Criterion::bmfe_slack, Criterion::rfe,
};

/// A criterion plus whether the SVM is fully retrained after each removal.
/// RFE is always retrained.
struct Method {
  Criterion criterion = Criterion::bmfe_qp_emb;
  bool frsub = false;
  bool operator==(const Method&) const = default;
};

std::string_view criterion_name(Criterion c);
/// e.g. "BMFE-QPemb", "MFE-Slack-FRsub", "RFE-FRsub".
std::string method_name(const Method& m);
/// Inverse of method_name; "RFE" is accepted for RFE-FRsub. Throws ConfigError.
Method parse_method(std::string_view name);

StepDecision run_step(Criterion c, const StepInput& in, const StepOptions& opt = {});

struct StepRecord {
  Index eliminated = 0;
  std::size_t retained_count = 0;
  std::shared_ptr<const SvmModel> model;
  std::optional<Rescale> rescale;
  std::optional<Index> anchor;
  double criterion_value = 0.0;
  double train_objective = 0.0;
  bool separable = false;
  double test_error = 0.0;
  std::optional<std::map<Index, double>> per_candidate;
};

struct EliminationTrace {
  std::string method;
  int trial_id = 0;
  double initial_test_error = 0.0;
  std::vector<StepRecord> steps;
  std::optional<std::string> termination;  // set when a criterion stopped applying

  IndexList eliminated() const;
};

struct RunOptions {
  std::size_t stop_at = 1;
  StepOptions step;
  SmoOptions smo;  // used by FRsub retraining
};

/// Eliminates features one at a time from `initial_ps` (copied) until
/// `stop_at` remain or the criterion stops applying. Test error is measured
/// on trial.test_indices through the propagated boundary after every step.
EliminationTrace run_elimination(const Method& method, const PairStats& initial_ps, const TrialSplit& trial,
                                 std::shared_ptr<const SvmModel> initial_model, const RunOptions& options = {});

/// Header plus one row per step. Features are written 1-based.
void write_trace_csv(std::ostream& out, const EliminationTrace& trace);

}  // namespace mfe
