#include "mfe/oned_svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "mfe/error.hpp"

namespace mfe {

namespace {

void check_input(const ProjectedData& pd, double c_param) {
  if (pd.z.size() != pd.labels.size()) throw ConfigError("projection and label counts differ");
  if (!(c_param > 0.0)) throw ConfigError(fmt::format("C must be > 0, got {}", c_param));
  bool pos = false;
  bool neg = false;
  for (std::size_t n = 0; n < pd.z.size(); ++n) {
    if (!std::isfinite(pd.z[n])) throw ConfigError("non-finite projection");
    (pd.labels[n] > 0 ? pos : neg) = true;
  }
  if (!pos || !neg) throw ConfigError("1-d SVM needs samples of both classes");
}

struct Point {
  double u;
  Index idx;
};

// One orientation of the problem, in coordinates u = sign * z where class +1
// lies to the right. P ascends, Q descends: both walk outward from the
// boundary, so the first i entries are the violators of pair i.
class Scenario {
 public:
  Scenario(const ProjectedData& pd, double sign) : sign_(sign) {
    for (Index n = 0; n < pd.z.size(); ++n) (pd.labels[n] > 0 ? pos_ : neg_).push_back({sign * pd.z[n], n});
    std::stable_sort(pos_.begin(), pos_.end(), [](const Point& a, const Point& b) { return a.u < b.u; });
    std::stable_sort(neg_.begin(), neg_.end(), [](const Point& a, const Point& b) { return a.u > b.u; });
    dp_.assign(pos_.size() + 1, 0.0);
    dq_.assign(neg_.size() + 1, 0.0);
    for (std::size_t i = 0; i < pos_.size(); ++i) dp_[i + 1] = dp_[i] + pos_[i].u;
    for (std::size_t i = 0; i < neg_.size(); ++i) dq_[i + 1] = dq_[i] + neg_[i].u;
  }

  double sign() const { return sign_; }
  const std::vector<Point>& pos() const { return pos_; }
  const std::vector<Point>& neg() const { return neg_; }
  double dp(std::size_t i) const { return dp_[i]; }
  double dq(std::size_t i) const { return dq_[i]; }

  // Exact sum of slacks for any w > 0 in this orientation.
  double slack_sum(double w, double b) const {
    const double t_pos = (1.0 - b) / w;   // class +1 violates when u < t_pos
    const double t_neg = (-1.0 - b) / w;  // class -1 violates when u > t_neg
    const auto c = static_cast<std::size_t>(
        std::lower_bound(pos_.begin(), pos_.end(), t_pos, [](const Point& p, double t) { return p.u < t; }) -
        pos_.begin());
    const auto d = static_cast<std::size_t>(
        std::lower_bound(neg_.begin(), neg_.end(), t_neg, [](const Point& p, double t) { return p.u > t; }) -
        neg_.begin());
    const double s_pos = static_cast<double>(c) * (1.0 - b) - w * dp_[c];
    const double s_neg = static_cast<double>(d) * (1.0 + b) + w * dq_[d];
    return std::max(0.0, s_pos) + std::max(0.0, s_neg);
  }

 private:
  double sign_;
  std::vector<Point> pos_;
  std::vector<Point> neg_;
  std::vector<double> dp_;
  std::vector<double> dq_;
};

struct Best {
  double objective = std::numeric_limits<double>::infinity();
  double w = 0.0;
  double b = 0.0;
  OneDKind kind = OneDKind::flat;
  std::optional<Index> pos_setter;
  std::optional<Index> neg_setter;

  void offer(double obj, double w_, double b_, OneDKind k, std::optional<Index> ps, std::optional<Index> ns) {
    if (std::isfinite(obj) && obj < objective) {
      objective = obj;
      w = w_;
      b = b_;
      kind = k;
      pos_setter = ps;
      neg_setter = ns;
    }
  }
};

template <typename Fn>
void for_each_pair(const Scenario& s, Fn&& fn) {
  const auto& p = s.pos();
  const auto& q = s.neg();
  const std::size_t count = std::min(p.size(), q.size());
  // Validity is monotone in the rank: skip to the closest valid pair, then
  // every later pair is valid too.
  std::size_t i = 0;
  while (i < count && !(p[i].u > q[i].u)) ++i;
  for (; i < count; ++i) {
    const double w = 2.0 / (p[i].u - q[i].u);
    if (!std::isfinite(w)) continue;
    const double b = 1.0 - w * p[i].u;
    const double slack = 2.0 * static_cast<double>(i) - w * (s.dp(i) - s.dq(i));
    fn(i, w, b, std::max(0.0, slack));
  }
}

void scan_scenario(const Scenario& s, double c, Best& best) {
  for_each_pair(s, [&](std::size_t i, double w, double b, double slack) {
    best.offer(0.5 * w * w + c * slack, s.sign() * w, b, OneDKind::pair, s.pos()[i].idx, s.neg()[i].idx);
  });

  const auto& p = s.pos();
  const auto& q = s.neg();
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double u = p[i].u;
    for (std::size_t k = i; k <= i + 1 && k <= q.size(); ++k) {
      const double w = c * ((static_cast<double>(k) * u - s.dq(k)) - (static_cast<double>(i) * u - s.dp(i)));
      if (!(w > 0.0) || !std::isfinite(w)) continue;
      const double b = 1.0 - w * u;
      best.offer(0.5 * w * w + c * s.slack_sum(w, b), s.sign() * w, b, OneDKind::single, p[i].idx, std::nullopt);
    }
  }
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double u = q[i].u;
    for (std::size_t k = i; k <= i + 1 && k <= p.size(); ++k) {
      const double w = c * ((s.dp(k) - static_cast<double>(k) * u) - (s.dq(i) - static_cast<double>(i) * u));
      if (!(w > 0.0) || !std::isfinite(w)) continue;
      const double b = -1.0 - w * u;
      best.offer(0.5 * w * w + c * s.slack_sum(w, b), s.sign() * w, b, OneDKind::single, std::nullopt, q[i].idx);
    }
  }
}

}  // namespace

OneDSolution evaluate_1d(const ProjectedData& pd, double c_param, double w, double b) {
  OneDSolution sol;
  sol.w = w;
  sol.b = b;
  sol.xi.resize(pd.z.size());
  double slack = 0.0;
  for (std::size_t n = 0; n < pd.z.size(); ++n) {
    sol.xi[n] = std::max(0.0, 1.0 - pd.labels[n] * (w * pd.z[n] + b));
    slack += sol.xi[n];
  }
  sol.objective = 0.5 * w * w + c_param * slack;
  return sol;
}

InterceptRange optimal_intercepts(const ProjectedData& pd, double w) {
  // a positive sample's hinge is active left of 1 - w z, a negative one's right of -1 - w z
  std::vector<std::pair<double, int>> knots;
  knots.reserve(pd.z.size());
  std::ptrdiff_t slope = 0;
  for (std::size_t n = 0; n < pd.z.size(); ++n) {
    const int y = pd.labels[n];
    knots.emplace_back(y * 1.0 - w * pd.z[n], y);
    if (y > 0) --slope;
  }
  std::sort(knots.begin(), knots.end());
  for (std::size_t i = 0; i < knots.size();) {
    const double v = knots[i].first;
    for (; i < knots.size() && knots[i].first == v; ++i) ++slope;
    if (slope > 0) return {v, v};
    if (slope == 0) return {v, i < knots.size() ? knots[i].first : v};
  }
  throw ConfigError("optimal_intercepts needs both classes");
}

OneDSolution solve_1d(const ProjectedData& pd, double c_param) {
  check_input(pd, c_param);
  Best best;
  for (double sign : {1.0, -1.0}) scan_scenario(Scenario(pd, sign), c_param, best);

  std::size_t n_pos = 0;
  for (int y : pd.labels) n_pos += y > 0 ? 1 : 0;
  const std::size_t n_neg = pd.labels.size() - n_pos;
  best.offer(2.0 * c_param * static_cast<double>(n_neg), 0.0, 1.0, OneDKind::flat, std::nullopt, std::nullopt);
  best.offer(2.0 * c_param * static_cast<double>(n_pos), 0.0, -1.0, OneDKind::flat, std::nullopt, std::nullopt);

  OneDSolution sol = evaluate_1d(pd, c_param, best.w, best.b);
  sol.kind = best.kind;
  sol.positive_setter = best.pos_setter;
  sol.negative_setter = best.neg_setter;
  return sol;
}

std::vector<PairCandidate> margin_setter_pairs(const ProjectedData& pd) {
  std::vector<PairCandidate> out;
  for (double sign : {1.0, -1.0}) {
    const Scenario s(pd, sign);
    for_each_pair(s, [&](std::size_t i, double w, double b, double slack) {
      out.push_back({sign * w, b, slack, i, s.pos()[i].idx, s.neg()[i].idx});
    });
  }
  return out;
}

OneDSolution solve_1d_oracle(const ProjectedData& pd, double c_param, const SmoOptions& options) {
  check_input(pd, c_param);
  const std::size_t n = pd.z.size();
  std::vector<double> gram(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) gram[i * n + j] = pd.z[i] * pd.z[j];
  const DualSolution dual = solve_dual(gram, pd.labels, c_param, options);
  double w = 0.0;
  for (std::size_t i = 0; i < n; ++i) w += dual.alpha[i] * pd.labels[i] * pd.z[i];

  // The slack sum is piecewise linear in b with knots where some sample sits
  // exactly on its margin, so the best intercept for this w is one of them.
  OneDSolution sol = evaluate_1d(pd, c_param, w, dual.intercept);
  for (std::size_t i = 0; i < n; ++i) {
    OneDSolution trial = evaluate_1d(pd, c_param, w, pd.labels[i] - w * pd.z[i]);
    if (trial.objective < sol.objective) sol = std::move(trial);
  }
  sol.kind = w == 0.0 ? OneDKind::flat : OneDKind::pair;
  return sol;
}

std::optional<LoSolution> solve_lo(std::span<const double> z_prime, std::span<const int> labels, double w_norm) {
  if (z_prime.size() != labels.size()) throw ConfigError("projection and label counts differ");
  if (!(w_norm > 0.0)) throw ConfigError("LO needs a nonzero weight norm");
  constexpr double inf = std::numeric_limits<double>::infinity();
  double min_pos = inf;
  double max_pos = -inf;
  double min_neg = inf;
  double max_neg = -inf;
  for (std::size_t n = 0; n < z_prime.size(); ++n) {
    if (labels[n] > 0) {
      min_pos = std::min(min_pos, z_prime[n]);
      max_pos = std::max(max_pos, z_prime[n]);
    } else {
      min_neg = std::min(min_neg, z_prime[n]);
      max_neg = std::max(max_neg, z_prime[n]);
    }
  }
  if (!std::isfinite(min_pos) || !std::isfinite(min_neg)) throw ConfigError("LO needs samples of both classes");

  std::optional<LoSolution> best;
  if (min_pos > max_neg) {
    const double a = 2.0 / (min_pos - max_neg);
    best = LoSolution{a, 1.0 - a * min_pos, 0.0};
  }
  if (max_pos < min_neg) {
    const double a = 2.0 / (max_pos - min_neg);
    if (!best || a * a < best->a_scale * best->a_scale) best = LoSolution{a, 1.0 - a * max_pos, 0.0};
  }
  if (best) {
    if (!std::isfinite(best->a_scale)) return std::nullopt;
    best->post_margin = 1.0 / (std::abs(best->a_scale) * w_norm);
  }
  return best;
}

}  // namespace mfe
