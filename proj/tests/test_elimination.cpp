#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "mfe/elimination.hpp"
#include "mfe/error.hpp"
#include "mfe/oned_svm.hpp"
#include "mfe/random.hpp"
#include "support/brute_force.hpp"
#include "support/elimination_setup.hpp"
#include "support/fixtures.hpp"

using namespace mfe;
using testing::close_rel;
using testing::make_dataset;
using testing::make_setup;
using testing::Setup;

namespace {

const KernelConfig kLinear{KernelKind::linear};
const KernelConfig kRbf{KernelKind::gaussian, 0.3};
const KernelConfig kPoly{KernelKind::polynomial, 0.5, 1.0, 2};

double tolerance_for(Criterion c) {
  switch (c) {
    case Criterion::mfe_qp_emb:
    case Criterion::bmfe_qp_emb:
    case Criterion::bme_qp_emb:
      return 1e-6;
    default:
      return 1e-9;
  }
}

/// Step decision against the exhaustive scan. A different feature is only
/// accepted when the brute-force values of both picks tie within tolerance.
void check_against_brute(Criterion crit, const Setup& s, const StepOptions& opt = {}) {
  const auto brute = testing::brute_decide(crit, s.brute(opt));
  if (!brute) {
    CHECK_THROWS_AS(run_step(crit, s.input(), opt), NoAdmissibleCandidate);
    return;
  }
  const StepDecision d = run_step(crit, s.input(), opt);
  const double tol = tolerance_for(crit);
  CHECK(close_rel(d.criterion_value, brute->value, tol));
  if (d.eliminated != brute->feature) {
    const auto scores = testing::brute_scores(crit, s.brute(opt));
    const auto it = std::find_if(scores.begin(), scores.end(), [&](const auto& b) { return b.feature == d.eliminated; });
    REQUIRE(it != scores.end());
    CHECK(close_rel(it->value, brute->value, tol));
  } else if (brute->anchor) {
    CHECK(d.anchor == brute->anchor);
  }
}

// Separable in feature 0; feature 1 is identically zero.
std::shared_ptr<const Dataset> null_feature_data() {
  return make_dataset({1, 1, 1, -1, -1, -1},
                      {{2.0, 0.0}, {3.0, 0.0}, {1.5, 0.0}, {-1.0, 0.0}, {-2.5, 0.0}, {-2.0, 0.0}});
}

}  // namespace

TEST_CASE("basic MFE removes an all-zero feature") {
  auto s = make_setup(null_feature_data(), kLinear, 1e6);
  const StepDecision d = step_basic_mfe(s.input(), {true});
  CHECK(d.eliminated == 1);
  CHECK(d.per_candidate->size() == 1);  // dropping feature 0 loses separability
  const BoundaryFit before = fit_boundary(s.state, s.ps, s.train);
  CHECK(close_rel(d.criterion_value, before.view.margin, 1e-12));
}

TEST_CASE("basic MFE never removes the only separating feature") {
  // feature 0 separates; features 1 and 2 alternate sign within each class
  auto ds = make_dataset({1, 1, -1, -1},
                         {{2.0, 1.0, 0.5}, {3.0, -1.0, -0.5}, {-2.0, 1.0, 0.25}, {-3.0, -1.0, -0.25}});
  auto s = make_setup(ds, kLinear, 1e6);
  const StepDecision d = step_basic_mfe(s.input(), {true});
  CHECK(d.eliminated != 0);
  CHECK(d.per_candidate->count(0) == 0);
  check_against_brute(Criterion::basic_mfe, s);
}

TEST_CASE("two retained features: every criterion equals brute force") {
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    auto ds = testing::random_dataset(seed, 10, 2, 2, 1.5);
    for (const auto& cfg : {kLinear, kRbf}) {
      auto s = make_setup(ds, cfg, seed % 2 == 0 ? 1e3 : 1.0);
      for (Criterion c : kAllCriteria) check_against_brute(c, s);
    }
  }
}

TEST_CASE("MFE-Slack: with huge C on separable data the anchor is the margin-setter") {
  auto ds = testing::random_dataset(7, 12, 4, 4, 2.5);
  auto s = make_setup(ds, kLinear, 1e6);
  REQUIRE(fit_boundary(s.state, s.ps, s.train).view.separable);
  const StepDecision slack = step_mfe_slack(s.input(), {true});
  const StepDecision basic = step_basic_mfe(s.input(), {true});
  for (const auto& [m, margin] : *basic.per_candidate) {
    // separable candidate: the objective is 1/(2 margin^2) and the slack term vanishes
    CHECK(close_rel(slack.per_candidate->at(m), 0.5 / (margin * margin), 1e-9));
  }
  CHECK(slack.eliminated == basic.eliminated);
  const auto brute = testing::brute_scores(Criterion::basic_mfe, s.brute());
  PairStats reduced = s.ps;
  reduced.remove(slack.eliminated);
  double min_g = std::numeric_limits<double>::infinity();
  Index setter = 0;
  for (Index n : s.train) {
    const double g = ds->label(n) * discriminant(*s.model, reduced, n);
    if (g < min_g) {
      min_g = g;
      setter = n;
    }
  }
  CHECK(slack.anchor == setter);
}

TEST_CASE("MFE-Slack: removing a null feature reproduces the pre-removal measurement") {
  auto base = testing::random_dataset(3, 10, 3, 2, 0.7);
  std::vector<std::vector<double>> rows;
  for (Index n = 0; n < base->n_samples(); ++n) {
    auto r = std::vector<double>(base->row(n).begin(), base->row(n).end());
    r.push_back(0.0);
    rows.push_back(r);
  }
  auto ds = make_dataset(base->labels(), rows);
  for (const auto& cfg : {kLinear, kRbf}) {
    auto s = make_setup(ds, cfg, 2.0);
    const StepDecision d = step_mfe_slack(s.input(), {true});
    // pre-removal best-anchor objective on the full feature set
    std::vector<double> g;
    for (Index n : s.train) g.push_back(ds->label(n) * discriminant(*s.model, s.ps, n));
    const double wsq = weight_norm_sq(*s.model, s.ps);
    double best = std::numeric_limits<double>::infinity();
    for (double ga : g) {
      if (ga <= kSeparabilityTolerance) continue;
      double obj = 0.5 * wsq / (ga * ga);
      for (double gl : g) obj += 2.0 * std::max(0.0, 1.0 - gl / ga);
      best = std::min(best, obj);
    }
    CHECK(close_rel(d.per_candidate->at(3), best, 1e-12));
  }
}

TEST_CASE("MFE-Slack and BMFE-Slack match the exhaustive (feature, anchor) scan") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto ds = testing::random_dataset(100 + seed, 6, 5, 2, 0.5);
    auto s = make_setup(ds, seed % 2 ? kRbf : kPoly, 0.5 + static_cast<double>(seed));
    check_against_brute(Criterion::mfe_slack, s);
    check_against_brute(Criterion::bmfe_slack, s);
  }
}

TEST_CASE("MFEhybrid switches to MFE-Slack once separability is exhausted") {
  auto sep = make_setup(null_feature_data(), kLinear, 1e6);
  CHECK(step_mfe_hybrid(sep.input()).eliminated == step_basic_mfe(sep.input()).eliminated);
  CHECK_FALSE(step_mfe_hybrid(sep.input()).anchor);

  auto overlap = make_setup(testing::random_dataset(5, 12, 3), kLinear, 1.0);
  REQUIRE_THROWS_AS(step_basic_mfe(overlap.input()), NoAdmissibleCandidate);
  const StepDecision h = step_mfe_hybrid(overlap.input());
  const StepDecision sl = step_mfe_slack(overlap.input());
  CHECK(h.eliminated == sl.eliminated);
  CHECK(h.anchor == sl.anchor);
  CHECK(h.criterion_value == sl.criterion_value);
}

TEST_CASE("MFE-LOemb: null feature margin does not shrink and overlap is excluded") {
  auto s = make_setup(null_feature_data(), kLinear, 1.0);
  const StepDecision d = step_mfe_lo_emb(s.input(), {true});
  CHECK(d.eliminated == 1);
  CHECK(d.per_candidate->count(0) == 0);  // projection collapses to zero
  PairStats reduced = s.ps;
  reduced.remove(1);
  const auto mv = margin_view(*s.model, *s.ds, reduced, s.train);
  if (mv.separable) CHECK(d.criterion_value >= mv.margin - 1e-12);
  REQUIRE(d.rescale);
  // the installed rescale puts every point at or beyond the unit margin
  BoundaryState next{s.model, d.rescale};
  const BoundaryFit fit = fit_boundary(next, reduced, s.train);
  CHECK(*std::min_element(fit.view.g.begin(), fit.view.g.end()) >= 1.0 - 1e-9);
}

TEST_CASE("MFE-LOemb matches brute-force LO over every candidate") {
  int feasible = 0;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    auto ds = testing::random_dataset(200 + seed, 5, 4, 2, 1.2);
    auto s = make_setup(ds, seed % 3 == 0 ? kLinear : kRbf, 10.0);
    if (testing::brute_decide(Criterion::mfe_lo_emb, s.brute())) ++feasible;
    check_against_brute(Criterion::mfe_lo_emb, s);
  }
  CHECK(feasible > 10);
}

TEST_CASE("MFE-LOemb reports LO inapplicable when every candidate overlaps") {
  auto ds = make_dataset({1, -1, 1, -1}, {{1.0, 1.0}, {1.0, 1.0}, {2.0, 2.0}, {2.0, 2.0}});
  auto s = make_setup(ds, kLinear, 1.0);
  CHECK_THROWS_AS(step_mfe_lo_emb(s.input()), NoAdmissibleCandidate);
}

TEST_CASE("MFE-QPemb: null feature bound and the slack comparison per candidate") {
  auto s = make_setup(null_feature_data(), kLinear, 10.0);
  const StepDecision qp = step_mfe_qp_emb(s.input(), {true});
  CHECK(qp.per_candidate->at(1) <= s.model->objective + 1e-8);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto ds = testing::random_dataset(300 + seed, 14, 6, 2, 0.8);
    auto r = make_setup(ds, seed % 2 ? kRbf : kLinear, 3.0);
    const StepDecision q = step_mfe_qp_emb(r.input(), {true});
    const StepDecision sl = step_mfe_slack(r.input(), {true});
    for (const auto& [m, v] : *sl.per_candidate) CHECK(q.per_candidate->at(m) <= v + 1e-8);
  }
}

TEST_CASE("MFE-QPemb endgame on a wide dataset matches the from-scratch oracle") {
  auto ds = testing::random_dataset(11, 20, 2000, 5, 1.0);
  IndexList removed;
  Rng rng(4);
  std::vector<Index> order(2000);
  std::iota(order.begin(), order.end(), Index{0});
  rng.shuffle(std::span<Index>(order));
  removed.assign(order.begin(), order.begin() + 1995);
  auto s = make_setup(ds, kRbf, 4.0, {}, removed);
  REQUIRE(s.ps.retained_count() == 5);
  check_against_brute(Criterion::mfe_qp_emb, s);
  check_against_brute(Criterion::bmfe_qp_emb, s);
}

TEST_CASE("QP steps match brute force after recursive removals") {
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    auto ds = testing::random_dataset(400 + seed, 9, 8, 3, 0.9);
    const KernelConfig cfg = seed % 3 == 0 ? kLinear : (seed % 3 == 1 ? kRbf : kPoly);
    auto s = make_setup(ds, cfg, 0.5 * static_cast<double>(seed + 1), {}, {seed % 8, (seed + 3) % 8});
    for (Criterion c : {Criterion::mfe_qp_emb, Criterion::bmfe_qp_emb, Criterion::bme_qp_emb})
      check_against_brute(c, s);
    StepOptions in_input;
    in_input.radius_space = RadiusSpace::input;
    check_against_brute(Criterion::bmfe_qp_emb, s, in_input);
  }
}

TEST_CASE("BMFE-QPemb: equal QP objectives are ordered by radius") {
  // Support vectors sit at f0 = +-1 with f1 = f2 = 0, so neither f1 nor f2
  // touches the expansion; f2 spreads the data wider than f1.
  auto ds = make_dataset({1, 1, 1, -1, -1, -1}, {{1.0, 0.0, 0.0},
                                                 {2.0, 0.5, 5.0},
                                                 {3.0, -0.5, -5.0},
                                                 {-1.0, 0.0, 0.0},
                                                 {-2.0, -0.5, 5.0},
                                                 {-3.0, 0.5, -5.0}});
  auto s = make_setup(ds, kLinear, 1e6);
  const StepDecision qp = step_mfe_qp_emb(s.input(), {true});
  CHECK(qp.per_candidate->at(1) == qp.per_candidate->at(2));
  CHECK(qp.eliminated == 1);
  const StepDecision b = step_bmfe_qp_emb(s.input(), {true});
  CHECK(b.eliminated == 2);
}

TEST_CASE("BMFE criteria: a zero-radius candidate scores 0 and wins") {
  auto ds = make_dataset({1, 1, -1, -1}, {{2.0, 3.0}, {1.0, 3.0}, {-1.0, 3.0}, {-2.0, 3.0}});
  auto s = make_setup(ds, kLinear, 1.0);
  const StepDecision b = step_bmfe_qp_emb(s.input(), {true});
  CHECK(b.eliminated == 0);
  CHECK(b.criterion_value == 0.0);
  CHECK(b.per_candidate->at(1) > 0.0);
  REQUIRE(b.rescale);
  CHECK(b.rescale->a == 0.0);
  const StepDecision bs = step_bmfe_slack(s.input(), {true});
  if (bs.per_candidate->count(0)) CHECK(bs.eliminated == 0);
}

TEST_CASE("bound terms: clamping and limits") {
  const double n = 20.0;
  const BoundTerms zero = bound_terms(0.0, 5.0, 0.0, 20);
  CHECK(zero.vcc == doctest::Approx(std::sqrt(-std::log(0.05 / 4.0) / n)).epsilon(1e-14));
  const BoundTerms tiny = bound_terms(1e-12, 1.0, 0.0, 20);
  CHECK(tiny.vcc == doctest::Approx(zero.vcc).epsilon(1e-9));
  const BoundTerms huge = bound_terms(1e4, 10.0, 0.25, 20);  // h far beyond 2N e
  CHECK(huge.vcc == doctest::Approx(zero.vcc).epsilon(1e-14));
  CHECK(huge.bound_value == doctest::Approx(0.25 + zero.vcc));
  const BoundTerms mid = bound_terms(2.0, 3.0, 0.0, 20);
  CHECK(mid.bound_value == mid.vcc);
  CHECK(mid.vcc == doctest::Approx(std::sqrt((6.0 * (std::log(40.0 / 6.0) + 1.0) - std::log(0.0125)) / n)));
  const BoundTerms plus = bound_terms(2.0, 3.0, 0.0, 20, 0.05, true);
  CHECK(plus.vcc == doctest::Approx(std::sqrt((7.0 * (std::log(40.0 / 7.0) + 1.0) - std::log(0.0125)) / n)));
  CHECK_THROWS_AS(bound_terms(1.0, 1.0, 0.0, 20, 1.5), ConfigError);
}

TEST_CASE("BME-QPemb on separable candidates ranks by the confidence term") {
  auto ds = testing::random_dataset(21, 10, 4, 4, 3.0);
  auto s = make_setup(ds, kRbf, 100.0);
  const StepDecision d = step_bme_qp_emb(s.input(), {true});
  check_against_brute(Criterion::bme_qp_emb, s);
  StepOptions plus;
  plus.vcc_plus_one = true;
  check_against_brute(Criterion::bme_qp_emb, s, plus);
  for (const auto& [m, v] : *d.per_candidate) CHECK(v <= 1.0 + 10.0);
}

TEST_CASE("RFE: linear criterion is w_m^2 / 2 and a null feature scores 0") {
  auto ds = testing::random_dataset(8, 12, 5, 3, 1.0);
  auto s = make_setup(ds, kLinear, 1.0);
  const StepDecision d = step_rfe(s.input(), {true});
  std::vector<double> w(5, 0.0);
  for (std::size_t k = 0; k < s.model->n_sv(); ++k)
    for (Index m = 0; m < 5; ++m) w[m] += s.model->coefficient(k) * ds->at(s.model->sv_indices[k], m);
  Index argmin = 0;
  for (Index m = 0; m < 5; ++m) {
    CHECK(close_rel(d.per_candidate->at(m), 0.5 * w[m] * w[m], 1e-12));
    if (std::abs(w[m]) < std::abs(w[argmin])) argmin = m;
  }
  CHECK(d.eliminated == argmin);

  auto nf = make_setup(null_feature_data(), kRbf, 1.0);
  const StepDecision z = step_rfe(nf.input(), {true});
  CHECK(z.eliminated == 1);
  CHECK(z.criterion_value == 0.0);
}

TEST_CASE("RFE with a nonlinear kernel matches the direct double sum") {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    auto s = make_setup(testing::random_dataset(500 + seed, 10, 6, 2), seed % 2 ? kRbf : kPoly, 2.0);
    check_against_brute(Criterion::rfe, s);
  }
}

TEST_CASE("FRsub: null-feature retrain, nesting below QP and determinism") {
  auto s = make_setup(null_feature_data(), kLinear, 10.0);
  PairStats ps = s.ps;
  const StepDecision d = step_mfe_qp_emb(s.input());
  REQUIRE(d.eliminated == 1);
  const BoundaryState next = apply_frsub(s.state, d, ps, s.train, testing::kTightSmo);
  CHECK_FALSE(next.rescale);
  CHECK(ps.retained_count() == 1);
  CHECK(next.base_model->objective == doctest::Approx(s.model->objective).epsilon(1e-6));

  PairStats again = s.ps;
  const BoundaryState twice = apply_frsub(s.state, d, again, s.train, testing::kTightSmo);
  CHECK(*twice.base_model == *next.base_model);

  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    auto r = make_setup(testing::random_dataset(600 + seed, 12, 5, 2), seed % 2 ? kRbf : kLinear, 1.0);
    const StepDecision q = step_mfe_qp_emb(r.input());
    PairStats p = r.ps;
    const BoundaryState fr = apply_frsub(r.state, q, p, r.train, testing::kTightSmo);
    CHECK(fr.base_model->objective <= q.criterion_value + 1e-8);
  }
}

TEST_CASE("candidate scoring is independent of the worker count") {
  auto s = make_setup(testing::random_dataset(31, 16, 40, 4), kRbf, 2.0);
  for (Criterion c : kAllCriteria) {
    StepOptions one{true};
    StepOptions many{true};
    many.threads = 3;
    StepDecision a;
    StepDecision b;
    try {
      a = run_step(c, s.input(), one);
    } catch (const NoAdmissibleCandidate&) {
      CHECK_THROWS_AS(run_step(c, s.input(), many), NoAdmissibleCandidate);
      continue;
    }
    b = run_step(c, s.input(), many);
    CHECK(a.eliminated == b.eliminated);
    CHECK(a.per_candidate == b.per_candidate);
    CHECK(a.anchor == b.anchor);
  }
}

TEST_CASE("step preconditions") {
  auto s = make_setup(null_feature_data(), kLinear, 1.0);
  PairStats ps = s.ps;
  ps.remove(0);
  StepInput in{*s.ds, s.train, s.state, ps, 1.0};
  CHECK_THROWS_AS(step_mfe_qp_emb(in), ConfigError);
  IndexList one_class{0, 1, 2};
  StepInput in2{*s.ds, one_class, s.state, s.ps, 1.0};
  CHECK_THROWS_AS(step_mfe_slack(in2), ConfigError);
}

TEST_CASE("method names round-trip") {
  for (Criterion c : kAllCriteria) {
    for (bool fr : {false, true}) {
      const Method m{c, fr || c == Criterion::rfe};
      CHECK(parse_method(method_name(m)) == m);
    }
  }
  CHECK(method_name(parse_method("rfe")) == "RFE-FRsub");
  CHECK(parse_method("bmfe-qpemb") == Method{Criterion::bmfe_qp_emb, false});
  CHECK(parse_method("MFE-Slack-FRsub") == Method{Criterion::mfe_slack, true});
  CHECK_THROWS_AS(parse_method("MFE-Foo"), ConfigError);
  CHECK_THROWS_AS(parse_method("-FRsub"), ConfigError);
}

namespace {

TrialSplit split_of(const Dataset& ds, IndexList train) {
  TrialSplit t;
  t.trial_id = 3;
  t.train_indices = std::move(train);
  for (Index n = 0; n < ds.n_samples(); ++n)
    if (!std::binary_search(t.train_indices.begin(), t.train_indices.end(), n)) t.test_indices.push_back(n);
  return t;
}

}  // namespace

TEST_CASE("three features run down to one") {
  auto ds = testing::random_dataset(41, 12, 3, 2, 1.5);
  const TrialSplit trial = split_of(*ds, {0, 1, 2, 3, 4, 5, 6, 7});
  PairStats ps(ds);
  auto model = std::make_shared<const SvmModel>(train(*ds, trial.train_indices, kLinear, ps, 4.0));
  for (Criterion c : kAllCriteria) {
    for (bool fr : {false, true}) {
      const auto trace = run_elimination(Method{c, fr}, ps, trial, model);
      if (trace.termination) continue;
      REQUIRE(trace.steps.size() == 2);
      CHECK(trace.steps[0].retained_count == 2);
      CHECK(trace.steps[1].retained_count == 1);
      const IndexList order = trace.eliminated();
      const std::set<Index> seen(order.begin(), order.end());
      CHECK(seen.size() == 2);
      for (const auto& st : trace.steps) {
        CHECK(st.test_error >= 0.0);
        CHECK(st.test_error <= 1.0);
        CHECK(st.eliminated < 3);
      }
      CHECK(trace.trial_id == 3);
    }
  }
}

TEST_CASE("MFE-LOemb terminates early when separability is lost; BMFE-QPemb runs on") {
  // eight noise points in eight dimensions: separable with every feature,
  // not along the fixed direction once enough features are gone
  auto data = testing::random_dataset(52, 16, 8, 0);
  const TrialSplit trial = split_of(*data, {0, 1, 2, 3, 4, 5, 6, 7});
  PairStats ps(data);
  auto model = std::make_shared<const SvmModel>(mfe::train(*data, trial.train_indices, kLinear, ps, 1e4));
  REQUIRE(fit_boundary(BoundaryState{model, std::nullopt}, ps, trial.train_indices).view.separable);
  const auto lo = run_elimination(Method{Criterion::mfe_lo_emb, false}, ps, trial, model);
  REQUIRE(lo.termination);
  CHECK(lo.termination->find("LO inapplicable") != std::string::npos);
  CHECK(lo.steps.size() < 7);
  const auto qp = run_elimination(Method{Criterion::bmfe_qp_emb, false}, ps, trial, model);
  CHECK_FALSE(qp.termination);
  CHECK(qp.steps.size() == 7);
}

TEST_CASE("a full BMFE-QPemb run equals manual step-by-step invocation") {
  auto ds = testing::random_dataset(61, 50, 200, 5, 0.8);
  TrialSplit trial = make_trial(*ds, 9, 1);
  PairStats ps(ds);
  auto model = std::make_shared<const SvmModel>(train(*ds, trial.train_indices, kRbf, ps, 2.0));
  RunOptions opt;
  opt.stop_at = 150;
  const auto trace = run_elimination(Method{Criterion::bmfe_qp_emb, false}, ps, trial, model, opt);
  REQUIRE(trace.steps.size() == 50);

  PairStats manual = ps;
  BoundaryState state{model, std::nullopt};
  for (const auto& rec : trace.steps) {
    const StepDecision d = step_bmfe_qp_emb(StepInput{*ds, trial.train_indices, state, manual, 2.0});
    REQUIRE(d.eliminated == rec.eliminated);
    CHECK(d.criterion_value == rec.criterion_value);
    manual.remove(d.eliminated);
    state.rescale = d.rescale;
    CHECK(rec.rescale == state.rescale);
    CHECK(rec.test_error == boundary_error(state, manual, trial.test_indices));
  }
}

TEST_CASE("trace CSV layout") {
  auto ds = testing::random_dataset(71, 10, 3, 2, 1.5);
  const TrialSplit trial = split_of(*ds, {0, 1, 2, 3, 4, 5});
  PairStats ps(ds);
  auto model = std::make_shared<const SvmModel>(train(*ds, trial.train_indices, kLinear, ps, 1.0));
  const auto trace = run_elimination(Method{Criterion::mfe_slack, true}, ps, trial, model);
  std::ostringstream out;
  write_trace_csv(out, trace);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line ==
        "trial_id,method,step,eliminated_feature,retained_count,separable,train_objective,criterion_value,test_error");
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    CHECK(line.starts_with(fmt::format("3,MFE-Slack-FRsub,{},{},{},", rows, trace.steps[rows - 1].eliminated + 1,
                                       3 - rows)));
  }
  CHECK(rows == 2);
}

TEST_CASE("run_elimination rejects bad options") {
  auto ds = testing::random_dataset(81, 8, 3, 2, 1.5);
  const TrialSplit trial = split_of(*ds, {0, 1, 2, 3});
  PairStats ps(ds);
  auto model = std::make_shared<const SvmModel>(train(*ds, trial.train_indices, kLinear, ps, 1.0));
  RunOptions opt;
  opt.stop_at = 0;
  CHECK_THROWS_AS(run_elimination(Method{}, ps, trial, model, opt), ConfigError);
  CHECK_THROWS_AS(run_elimination(Method{}, ps, trial, nullptr), ConfigError);
  opt.stop_at = 5;
  CHECK(run_elimination(Method{}, ps, trial, model, opt).steps.empty());
}
