#include "mfe/elimination.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <ostream>
#include <thread>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "mfe/error.hpp"
#include "mfe/oned_svm.hpp"

namespace mfe {

namespace {

constexpr double kMinProjectionNorm = 1e-12;

/// Reduced-space expansion of the base model for one candidate.
struct Expansion {
  std::vector<double> e;  // sum_k c_k K^-m(s_k, x_n) over the training samples
  double w_norm_sq = 0.0;
};

Expansion expand(const SvmModel& model, const CandidateView& view, std::span<const Index> train) {
  Expansion out;
  out.e.resize(train.size());
  for (std::size_t a = 0; a < train.size(); ++a) out.e[a] = kernel_expansion(model, view, train[a]);
  out.w_norm_sq = weight_norm_sq(model, view);
  return out;
}

struct Score {
  double value = 0.0;
  std::optional<Index> anchor;
  std::optional<Rescale> rescale;
};

using Scorer = std::function<std::optional<Score>(const CandidateView&)>;

/// Scores every retained feature, in parallel when asked. The result is in
/// ascending feature order regardless of the worker count.
std::vector<std::pair<Index, std::optional<Score>>> score_all(const PairStats& ps, const StepOptions& opt,
                                                              const Scorer& scorer) {
  const std::vector<Index> features = ps.retained();
  std::vector<std::pair<Index, std::optional<Score>>> out(features.size());
  auto work = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) out[i] = {features[i], scorer(ps.candidate(features[i]))};
  };
  const std::size_t workers = std::min<std::size_t>(std::max(opt.threads, 1u), features.size());
  if (workers <= 1) {
    work(0, features.size());
    return out;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (features.size() + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t lo = w * chunk;
      const std::size_t hi = std::min(features.size(), lo + chunk);
      if (lo >= hi) break;
      pool.emplace_back([&, lo, hi] {
        try {
          work(lo, hi);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

enum class Goal { minimize, maximize };

StepDecision select(const std::vector<std::pair<Index, std::optional<Score>>>& scores, Goal goal,
                    const StepOptions& opt, std::string_view empty_reason) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const auto& s = scores[i].second;
    if (!s || std::isnan(s->value)) continue;
    if (!best) {
      best = i;
      continue;
    }
    const double cur = scores[*best].second->value;
    if (goal == Goal::minimize ? s->value < cur : s->value > cur) best = i;
  }
  if (!best) throw NoAdmissibleCandidate(std::string(empty_reason));
  const auto& [feature, score] = scores[*best];
  StepDecision d;
  d.eliminated = feature;
  d.criterion_value = score->value;
  d.anchor = score->anchor;
  d.rescale = score->rescale;
  if (opt.diagnostics) {
    d.per_candidate.emplace();
    for (const auto& [m, s] : scores)
      if (s && !std::isnan(s->value)) (*d.per_candidate)[m] = s->value;
  }
  return d;
}

std::vector<Index> sorted_train(std::span<const Index> train) {
  std::vector<Index> t(train.begin(), train.end());
  std::sort(t.begin(), t.end());
  return t;
}

void check_input(const StepInput& in) {
  if (in.ps.retained_count() < 2) throw ConfigError("a step needs at least two retained features");
  if (!has_both_classes(in.ds, in.train)) throw ConfigError("training samples hold a single class");
  if (!in.state.base_model) throw ConfigError("boundary has no model");
}

std::vector<double> margins(const StepInput& in, std::span<const Index> train, const Expansion& ex) {
  const double a = in.state.scale();
  const double b = in.state.offset();
  std::vector<double> g(train.size());
  for (std::size_t i = 0; i < train.size(); ++i) g[i] = in.ds.label(train[i]) * (a * ex.e[i] + b);
  return g;
}

/// Best anchor for one candidate; nullopt when no sample has g > tau_sep.
std::optional<Score> best_anchor(std::span<const Index> train, std::span<const double> g, double w_norm_sq,
                                 double c_param) {
  std::optional<Score> best;
  for (std::size_t n = 0; n < g.size(); ++n) {
    if (!(g[n] > kSeparabilityTolerance)) continue;
    const double rho = 1.0 / g[n];
    double slack = 0.0;
    for (double gl : g) slack += std::max(0.0, 1.0 - rho * gl);
    const double obj = 0.5 * w_norm_sq * rho * rho + c_param * slack;
    if (!best || obj < best->value) best = Score{obj, train[n], std::nullopt};
  }
  return best;
}

ProjectedData project(const StepInput& in, std::span<const Index> train, const Expansion& ex) {
  ProjectedData pd;
  pd.norm_used = std::sqrt(ex.w_norm_sq);
  pd.z.resize(train.size());
  pd.labels.resize(train.size());
  for (std::size_t i = 0; i < train.size(); ++i) {
    pd.z[i] = ex.e[i] / pd.norm_used;
    pd.labels[i] = in.ds.label(train[i]);
  }
  return pd;
}

struct QpOutcome {
  OneDSolution sol;
  ProjectedData pd;
  Rescale rescale;
};

std::optional<QpOutcome> qp(const StepInput& in, std::span<const Index> train, const CandidateView& view) {
  const Expansion ex = expand(*in.state.base_model, view, train);
  if (!(std::sqrt(ex.w_norm_sq) >= kMinProjectionNorm)) return std::nullopt;
  QpOutcome out;
  out.pd = project(in, train, ex);
  out.sol = solve_1d(out.pd, in.c_param);
  out.rescale = Rescale{out.sol.w / out.pd.norm_used, out.sol.b};
  return out;
}

double candidate_radius(const StepInput& in, std::span<const Index> train, const CandidateView& view,
                        const StepOptions& opt) {
  return radius_sq(in.state.base_model->kernel, view, train, opt.radius_space).r_sq;
}

}  // namespace

BoundaryFit fit_boundary(const BoundaryState& state, const PairStats& ps, std::span<const Index> samples) {
  const Dataset& ds = ps.dataset();
  std::vector<double> g(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) g[i] = ds.label(samples[i]) * boundary_value(state, ps, samples[i]);
  BoundaryFit fit;
  const double a = state.scale();
  fit.w_norm_sq = a * a * weight_norm_sq(*state.base_model, ps);
  fit.objective = primal_objective(fit.w_norm_sq, state.base_model->c_param, g);
  fit.view = make_margin_view(std::move(g), fit.w_norm_sq);
  return fit;
}

BoundTerms bound_terms(double r_sq, double w_norm_sq_eff, double r_emp, std::size_t n_samples, double eta,
                       bool plus_one) {
  if (n_samples == 0) throw ConfigError("risk bound needs at least one sample");
  if (!(eta > 0.0 && eta < 1.0)) throw ConfigError(fmt::format("eta must lie in (0, 1), got {}", eta));
  BoundTerms t;
  t.r_sq = r_sq;
  t.w_norm_sq_eff = w_norm_sq_eff;
  t.r_emp = r_emp;
  t.eta = eta;
  const double n = static_cast<double>(n_samples);
  const double h = r_sq * w_norm_sq_eff + (plus_one ? 1.0 : 0.0);
  const double h_term = h > 0.0 ? std::max(0.0, h * (std::log(2.0 * n / h) + 1.0)) : 0.0;
  t.vcc = std::sqrt(std::max(0.0, (h_term - std::log(eta / 4.0)) / n));
  t.bound_value = r_emp + t.vcc;
  return t;
}

StepDecision step_basic_mfe(const StepInput& in, const StepOptions& opt) {
  check_input(in);
  const auto train = sorted_train(in.train);
  const double a = in.state.scale();
  auto scores = score_all(in.ps, opt, [&](const CandidateView& view) -> std::optional<Score> {
    const Expansion ex = expand(*in.state.base_model, view, train);
    const MarginView mv = make_margin_view(margins(in, train, ex), a * a * ex.w_norm_sq);
    if (!mv.separable) return std::nullopt;
    return Score{mv.margin, std::nullopt, std::nullopt};
  });
  return select(scores, Goal::maximize, opt, "separability exhausted");
}

StepDecision step_mfe_slack(const StepInput& in, const StepOptions& opt) {
  check_input(in);
  const auto train = sorted_train(in.train);
  const double a = in.state.scale();
  auto scores = score_all(in.ps, opt, [&](const CandidateView& view) {
    const Expansion ex = expand(*in.state.base_model, view, train);
    return best_anchor(train, margins(in, train, ex), a * a * ex.w_norm_sq, in.c_param);
  });
  return select(scores, Goal::minimize, opt, "no candidate has a correctly classified anchor sample");
}

StepDecision step_mfe_hybrid(const StepInput& in, const StepOptions& opt) {
  try {
    return step_basic_mfe(in, opt);
  } catch (const NoAdmissibleCandidate&) {
    return step_mfe_slack(in, opt);
  }
}

StepDecision step_mfe_lo_emb(const StepInput& in, const StepOptions& opt) {
  check_input(in);
  const auto train = sorted_train(in.train);
  std::vector<int> y(train.size());
  for (std::size_t i = 0; i < train.size(); ++i) y[i] = in.ds.label(train[i]);
  auto scores = score_all(in.ps, opt, [&](const CandidateView& view) -> std::optional<Score> {
    const Expansion ex = expand(*in.state.base_model, view, train);
    const double w = std::sqrt(ex.w_norm_sq);
    if (!(w >= kMinProjectionNorm)) return std::nullopt;
    const auto lo = solve_lo(ex.e, y, w);
    if (!lo) return std::nullopt;
    return Score{lo->post_margin, std::nullopt, Rescale{lo->a_scale, lo->intercept}};
  });
  return select(scores, Goal::maximize, opt, "LO inapplicable: every candidate leaves the classes overlapping");
}

StepDecision step_mfe_qp_emb(const StepInput& in, const StepOptions& opt) {
  check_input(in);
  const auto train = sorted_train(in.train);
  auto scores = score_all(in.ps, opt, [&](const CandidateView& view) -> std::optional<Score> {
    const auto out = qp(in, train, view);
    if (!out) return std::nullopt;
    return Score{out->sol.objective, std::nullopt, out->rescale};
  });
  return select(scores, Goal::minimize, opt, "every candidate projection has zero norm");
}

StepDecision step_bmfe_qp_emb(const StepInput& in, const StepOptions& opt) {
  check_input(in);
  const auto train = sorted_train(in.train);
  auto scores = score_all(in.ps, opt, [&](const CandidateView& view) -> std::optional<Score> {
    const double r_sq = candidate_radius(in, train, view, opt);
    if (r_sq == 0.0) {
      // Every training point coincides: only a constant boundary is left.
      ProjectedData flat;
      flat.z.assign(train.size(), 0.0);
      for (Index n : train) flat.labels.push_back(in.ds.label(n));
      return Score{0.0, std::nullopt, Rescale{0.0, solve_1d(flat, in.c_param).b}};
    }
    const auto out = qp(in, train, view);
    if (!out) return std::nullopt;
    return Score{r_sq * out->sol.objective, std::nullopt, out->rescale};
  });
  return select(scores, Goal::minimize, opt, "every candidate projection has zero norm");
}

StepDecision step_bme_qp_emb(const StepInput& in, const StepOptions& opt) {
  check_input(in);
  const auto train = sorted_train(in.train);
  auto scores = score_all(in.ps, opt, [&](const CandidateView& view) -> std::optional<Score> {
    const auto out = qp(in, train, view);
    if (!out) return std::nullopt;
    // the training error is read at the middle of the optimal intercept range
    const double b = optimal_intercepts(out->pd, out->sol.w).mid();
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < train.size(); ++i)
      if (out->pd.labels[i] * (out->sol.w * out->pd.z[i] + b) <= 0.0) ++wrong;
    const double r_emp = static_cast<double>(wrong) / static_cast<double>(train.size());
    const BoundTerms t = bound_terms(candidate_radius(in, train, view, opt), out->sol.w * out->sol.w, r_emp,
                                     train.size(), opt.eta, opt.vcc_plus_one);
    return Score{t.bound_value, std::nullopt, out->rescale};
  });
  return select(scores, Goal::minimize, opt, "every candidate projection has zero norm");
}

StepDecision step_bmfe_slack(const StepInput& in, const StepOptions& opt) {
  check_input(in);
  const auto train = sorted_train(in.train);
  const double a = in.state.scale();
  auto scores = score_all(in.ps, opt, [&](const CandidateView& view) -> std::optional<Score> {
    const Expansion ex = expand(*in.state.base_model, view, train);
    auto s = best_anchor(train, margins(in, train, ex), a * a * ex.w_norm_sq, in.c_param);
    if (s) s->value *= candidate_radius(in, train, view, opt);
    return s;
  });
  return select(scores, Goal::minimize, opt, "no candidate has a correctly classified anchor sample");
}

StepDecision step_rfe(const StepInput& in, const StepOptions& opt) {
  check_input(in);
  const SvmModel& model = *in.state.base_model;
  const Dataset& ds = in.ds;
  auto scores = score_all(in.ps, opt, [&](const CandidateView& view) -> std::optional<Score> {
    const Index m = view.removed_feature();
    if (model.kernel.kind == KernelKind::linear) {
      double wm = 0.0;
      for (std::size_t k = 0; k < model.n_sv(); ++k) wm += model.coefficient(k) * ds.at(model.sv_indices[k], m);
      return Score{0.5 * wm * wm, std::nullopt, std::nullopt};
    }
    double acc = 0.0;
    for (std::size_t k = 0; k < model.n_sv(); ++k) {
      for (std::size_t l = 0; l < model.n_sv(); ++l) {
        const Index sk = model.sv_indices[k];
        const Index sl = model.sv_indices[l];
        const double diff = kernel_value(model.kernel, in.ps, sk, sl) - kernel_value(model.kernel, view, sk, sl);
        acc += model.coefficient(k) * model.coefficient(l) * diff;
      }
    }
    return Score{std::abs(0.5 * acc), std::nullopt, std::nullopt};
  });
  return select(scores, Goal::minimize, opt, "no retained feature");
}

BoundaryState apply_frsub(const BoundaryState& state, const StepDecision& decision, PairStats& ps,
                          std::span<const Index> train, const SmoOptions& smo) {
  const SvmModel& base = *state.base_model;
  ps.remove(decision.eliminated);
  try {
    auto model = std::make_shared<const SvmModel>(mfe::train(ps.dataset(), train, base.kernel, ps, base.c_param, smo));
    return BoundaryState{std::move(model), std::nullopt};
  } catch (const SolverError& e) {
    throw SolverError(fmt::format("retraining after removing feature {}: {}", decision.eliminated + 1, e.what()),
                      e.iterations());
  }
}

std::string_view criterion_name(Criterion c) {
  switch (c) {
    case Criterion::basic_mfe:
      return "MFE";
    case Criterion::mfe_slack:
      return "MFE-Slack";
    case Criterion::mfe_hybrid:
      return "MFEhybrid";
    case Criterion::mfe_lo_emb:
      return "MFE-LOemb";
    case Criterion::mfe_qp_emb:
      return "MFE-QPemb";
    case Criterion::bmfe_qp_emb:
      return "BMFE-QPemb";
    case Criterion::bme_qp_emb:
      return "BME-QPemb";
    case Criterion::bmfe_slack:
      return "BMFE-Slack";
    case Criterion::rfe:
      return "RFE";
  }
  return "?";
}

std::string method_name(const Method& m) {
  std::string name(criterion_name(m.criterion));
  if (m.frsub || m.criterion == Criterion::rfe) name += "-FRsub";
  return name;
}

Method parse_method(std::string_view name) {
  auto lower = [](std::string_view s) {
    std::string out(s);
    for (char& ch : out) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    return out;
  };
  std::string key = lower(name);
  bool frsub = false;
  constexpr std::string_view suffix = "-frsub";
  if (key.size() > suffix.size() && key.ends_with(suffix)) {
    frsub = true;
    key.resize(key.size() - suffix.size());
  }
  for (Criterion c : kAllCriteria) {
    if (lower(criterion_name(c)) == key) return Method{c, frsub || c == Criterion::rfe};
  }
  throw ConfigError(fmt::format("unknown method '{}'", name));
}

StepDecision run_step(Criterion c, const StepInput& in, const StepOptions& opt) {
  switch (c) {
    case Criterion::basic_mfe:
      return step_basic_mfe(in, opt);
    case Criterion::mfe_slack:
      return step_mfe_slack(in, opt);
    case Criterion::mfe_hybrid:
      return step_mfe_hybrid(in, opt);
    case Criterion::mfe_lo_emb:
      return step_mfe_lo_emb(in, opt);
    case Criterion::mfe_qp_emb:
      return step_mfe_qp_emb(in, opt);
    case Criterion::bmfe_qp_emb:
      return step_bmfe_qp_emb(in, opt);
    case Criterion::bme_qp_emb:
      return step_bme_qp_emb(in, opt);
    case Criterion::bmfe_slack:
      return step_bmfe_slack(in, opt);
    case Criterion::rfe:
      return step_rfe(in, opt);
  }
  throw ConfigError("unknown criterion");
}

IndexList EliminationTrace::eliminated() const {
  IndexList out;
  out.reserve(steps.size());
  for (const auto& s : steps) out.push_back(s.eliminated);
  return out;
}

double boundary_error(const BoundaryState& state, const PairStats& ps, std::span<const Index> samples) {
  std::vector<double> f(samples.size());
  std::vector<int> y(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    f[i] = boundary_value(state, ps, samples[i]);
    y[i] = ps.dataset().label(samples[i]);
  }
  return error_rate(f, y);
}

EliminationTrace run_elimination(const Method& method, const PairStats& initial_ps, const TrialSplit& trial,
                                 std::shared_ptr<const SvmModel> initial_model, const RunOptions& options) {
  if (!initial_model) throw ConfigError("elimination needs an initial model");
  if (options.stop_at < 1) throw ConfigError("stop_at must be at least 1");
  if (trial.test_indices.empty()) throw ConfigError("trial has no held-out samples");
  PairStats ps = initial_ps;
  const Dataset& ds = ps.dataset();
  const auto train = sorted_train(trial.train_indices);
  const bool retrain = method.frsub || method.criterion == Criterion::rfe;

  EliminationTrace trace;
  trace.method = method_name(method);
  trace.trial_id = trial.trial_id;
  BoundaryState state{std::move(initial_model), std::nullopt};
  trace.initial_test_error = boundary_error(state, ps, trial.test_indices);

  while (ps.retained_count() > options.stop_at) {
    StepDecision decision;
    try {
      decision = run_step(method.criterion, StepInput{ds, train, state, ps, state.base_model->c_param}, options.step);
    } catch (const NoAdmissibleCandidate& e) {
      trace.termination = fmt::format("{} at {} retained features", e.what(), ps.retained_count());
      break;
    }
    if (retrain) {
      state = apply_frsub(state, decision, ps, train, options.smo);
    } else {
      ps.remove(decision.eliminated);
      state.rescale = decision.rescale;
    }
    const BoundaryFit fit = fit_boundary(state, ps, train);
    StepRecord rec;
    rec.eliminated = decision.eliminated;
    rec.retained_count = ps.retained_count();
    rec.model = state.base_model;
    rec.rescale = state.rescale;
    rec.anchor = decision.anchor;
    rec.criterion_value = decision.criterion_value;
    rec.train_objective = fit.objective;
    rec.separable = fit.view.separable;
    rec.test_error = boundary_error(state, ps, trial.test_indices);
    rec.per_candidate = std::move(decision.per_candidate);
    trace.steps.push_back(std::move(rec));
  }
  return trace;
}

void write_trace_csv(std::ostream& out, const EliminationTrace& trace) {
  fmt::print(out,
             "trial_id,method,step,eliminated_feature,retained_count,separable,train_objective,criterion_value,"
             "test_error\n");
  for (std::size_t s = 0; s < trace.steps.size(); ++s) {
    const auto& r = trace.steps[s];
    fmt::print(out, "{},{},{},{},{},{},{},{},{}\n", trace.trial_id, trace.method, s + 1, r.eliminated + 1,
               r.retained_count, r.separable ? 1 : 0, r.train_objective, r.criterion_value, r.test_error);
  }
}

}  // namespace mfe
