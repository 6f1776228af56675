#include "mfe/svm.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "mfe/error.hpp"

namespace mfe {

DualSolution solve_dual(std::span<const double> gram, std::span<const int> labels, double c_param,
                        const SmoOptions& options) {
  constexpr double kTau = 1e-12;
  const std::size_t n = labels.size();
  if (gram.size() != n * n) throw ConfigError("gram matrix does not match the label count");
  auto q = [&](std::size_t i, std::size_t j) { return labels[i] * labels[j] * gram[i * n + j]; };

  DualSolution sol;
  sol.alpha.assign(n, 0.0);
  std::vector<double> grad(n, -1.0);
  std::vector<double>& alpha = sol.alpha;
  const double c = c_param;

  auto in_up = [&](std::size_t t) { return labels[t] > 0 ? alpha[t] < c : alpha[t] > 0.0; };
  auto in_low = [&](std::size_t t) { return labels[t] > 0 ? alpha[t] > 0.0 : alpha[t] < c; };

  std::size_t iter = 0;
  for (;; ++iter) {
    double gmax = -std::numeric_limits<double>::infinity();
    double gmin = std::numeric_limits<double>::infinity();
    std::size_t i = n;
    std::size_t j = n;
    for (std::size_t t = 0; t < n; ++t) {
      const double v = -labels[t] * grad[t];
      if (in_up(t) && v > gmax) {
        gmax = v;
        i = t;
      }
      if (in_low(t) && v < gmin) {
        gmin = v;
        j = t;
      }
    }
    if (options.working_set == WorkingSet::second_order && i != n) {
      // Among violating partners of i, take the one with the largest
      // guaranteed decrease of the dual objective.
      double best_drop = std::numeric_limits<double>::infinity();
      for (std::size_t t = 0; t < n; ++t) {
        if (!in_low(t)) continue;
        const double diff = gmax + labels[t] * grad[t];
        if (diff <= 0.0) continue;
        double quad = gram[i * n + i] + gram[t * n + t] - 2.0 * gram[i * n + t];
        if (quad <= 0.0) quad = kTau;
        const double drop = -diff * diff / quad;
        if (drop < best_drop) {
          best_drop = drop;
          j = t;
        }
      }
    }
    if (i == n || j == n || gmax - gmin < options.tolerance) break;
    if (iter >= options.max_iterations) {
      throw SolverError(fmt::format("SMO did not converge within {} iterations (violation {})", iter, gmax - gmin),
                        iter);
    }

    const double old_ai = alpha[i];
    const double old_aj = alpha[j];
    if (labels[i] != labels[j]) {
      double quad = q(i, i) + q(j, j) + 2.0 * q(i, j);
      if (quad <= 0.0) quad = kTau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0.0) {
        if (alpha[j] < 0.0) {
          alpha[j] = 0.0;
          alpha[i] = diff;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = -diff;
      }
      if (diff > 0.0) {
        if (alpha[i] > c) {
          alpha[i] = c;
          alpha[j] = c - diff;
        }
      } else if (alpha[j] > c) {
        alpha[j] = c;
        alpha[i] = c + diff;
      }
    } else {
      double quad = q(i, i) + q(j, j) - 2.0 * q(i, j);
      if (quad <= 0.0) quad = kTau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > c) {
        if (alpha[i] > c) {
          alpha[i] = c;
          alpha[j] = sum - c;
        }
      } else if (alpha[j] < 0.0) {
        alpha[j] = 0.0;
        alpha[i] = sum;
      }
      if (sum > c) {
        if (alpha[j] > c) {
          alpha[j] = c;
          alpha[i] = sum - c;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = sum;
      }
    }
    const double di = alpha[i] - old_ai;
    const double dj = alpha[j] - old_aj;
    for (std::size_t t = 0; t < n; ++t) grad[t] += q(t, i) * di + q(t, j) * dj;
  }
  sol.iterations = iter;

  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  double sum_free = 0.0;
  std::size_t n_free = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = labels[t] * grad[t];
    if (alpha[t] >= c) {
      if (labels[t] < 0) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else if (alpha[t] <= 0.0) {
      if (labels[t] > 0) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else {
      ++n_free;
      sum_free += yg;
    }
  }
  const double rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : (ub + lb) / 2.0;
  sol.intercept = -rho;
  return sol;
}

void check_trainable(const Dataset& ds, std::span<const Index> subset, const KernelConfig& cfg, double c_param) {
  if (!(c_param > 0.0) || !std::isfinite(c_param)) throw ConfigError(fmt::format("C must be > 0, got {}", c_param));
  cfg.validate();
  if (!has_both_classes(ds, subset)) throw ConfigError("training subset holds a single class");
}

SvmModel model_from_dual(const Dataset& ds, std::span<const Index> subset, std::span<const double> gram,
                         const DualSolution& dual, const KernelConfig& cfg, double c_param) {
  const std::size_t n = subset.size();
  SvmModel model;
  model.kernel = cfg;
  model.c_param = c_param;
  model.intercept = dual.intercept;
  model.iterations = dual.iterations;
  std::vector<std::size_t> pos;
  const double largest = dual.alpha.empty() ? 0.0 : *std::max_element(dual.alpha.begin(), dual.alpha.end());
  const double cutoff = kSupportVectorThreshold * std::min(c_param, largest);
  for (std::size_t a = 0; a < n; ++a) {
    if (dual.alpha[a] > cutoff) {
      pos.push_back(a);
      model.sv_indices.push_back(subset[a]);
      model.multipliers.push_back(dual.alpha[a]);
      model.sv_labels.push_back(ds.label(subset[a]));
    }
  }
  double wsq = 0.0;
  for (std::size_t k = 0; k < pos.size(); ++k)
    for (std::size_t l = 0; l < pos.size(); ++l)
      wsq += model.coefficient(k) * model.coefficient(l) * gram[pos[k] * n + pos[l]];
  model.w_norm_sq = std::max(wsq, 0.0);

  std::vector<double> g(n);
  for (std::size_t a = 0; a < n; ++a) {
    double f = model.intercept;
    for (std::size_t k = 0; k < pos.size(); ++k) f += model.coefficient(k) * gram[pos[k] * n + a];
    g[a] = ds.label(subset[a]) * f;
  }
  model.objective = primal_objective(model.w_norm_sq, c_param, g);
  return model;
}

MarginView make_margin_view(std::vector<double> g, double w_norm_sq) {
  MarginView view;
  view.g = std::move(g);
  const double min_g = view.g.empty() ? 0.0 : *std::min_element(view.g.begin(), view.g.end());
  view.separable = !view.g.empty() && min_g > kSeparabilityTolerance && w_norm_sq > 0.0;
  view.margin = view.separable ? min_g / std::sqrt(w_norm_sq) : 0.0;
  return view;
}

double primal_objective(double w_norm_sq, double c_param, std::span<const double> g) {
  double slack = 0.0;
  for (double gn : g) slack += std::max(0.0, 1.0 - gn);
  return 0.5 * w_norm_sq + c_param * slack;
}

double error_rate(std::span<const double> f, std::span<const int> labels) {
  if (f.empty()) throw ConfigError("empty test set");
  std::size_t wrong = 0;
  for (std::size_t a = 0; a < f.size(); ++a)
    if (labels[a] * f[a] <= 0.0) ++wrong;
  return static_cast<double>(wrong) / static_cast<double>(f.size());
}

double test_error(const SvmModel& model, const PairStats& ps, std::span<const Index> test_idx) {
  std::vector<double> f(test_idx.size());
  std::vector<int> y(test_idx.size());
  for (std::size_t a = 0; a < test_idx.size(); ++a) {
    f[a] = discriminant(model, ps, test_idx[a]);
    y[a] = ps.dataset().label(test_idx[a]);
  }
  return error_rate(f, y);
}

std::vector<GridPoint> default_grid(KernelKind kind, std::size_t n_features) {
  std::vector<double> cs;
  for (int e = -5; e <= 15; e += 2) cs.push_back(std::ldexp(1.0, e));
  const double inv_m = 1.0 / static_cast<double>(std::max<std::size_t>(n_features, 1));
  std::vector<GridPoint> grid;
  switch (kind) {
    case KernelKind::linear:
      for (double c : cs) grid.push_back({KernelConfig{KernelKind::linear}, c});
      break;
    case KernelKind::polynomial:
      for (double c : cs) grid.push_back({KernelConfig{KernelKind::polynomial, inv_m, 1.0, 3}, c});
      break;
    case KernelKind::gaussian:
      for (int e : {-15, -11, -7, -3, 1})
        for (double c : cs) grid.push_back({KernelConfig{KernelKind::gaussian, std::ldexp(inv_m, e)}, c});
      break;
  }
  return grid;
}

CvResult cv_select(const Dataset& ds, const PairStats& ps, std::span<const Index> train_idx,
                   std::span<const GridPoint> grid, std::uint64_t seed, std::size_t k, const SmoOptions& options) {
  if (grid.empty()) throw ConfigError("hyperparameter grid is empty");
  const auto folds = make_folds(train_idx, k, seed);

  struct FoldSplit {
    IndexList fit;
    IndexList held;
  };
  std::vector<FoldSplit> splits;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    FoldSplit s;
    for (std::size_t o = 0; o < folds.size(); ++o)
      if (o != f) s.fit.insert(s.fit.end(), folds[o].begin(), folds[o].end());
    std::sort(s.fit.begin(), s.fit.end());
    s.held = folds[f];
    if (has_both_classes(ds, s.fit)) splits.push_back(std::move(s));
  }
  if (splits.empty()) throw ConfigError("every cross-validation fold has a single-class training part");

  CvResult result;
  result.mean_accuracy.reserve(grid.size());
  std::size_t best = 0;
  for (std::size_t p = 0; p < grid.size(); ++p) {
    double acc_sum = 0.0;
    for (const auto& s : splits) {
      const SvmModel model = train(ds, s.fit, grid[p].kernel, ps, grid[p].c_param, options);
      std::size_t right = 0;
      for (Index n : s.held)
        if (ds.label(n) * discriminant(model, ps, n) > 0.0) ++right;
      acc_sum += static_cast<double>(right) / static_cast<double>(s.held.size());
    }
    const double mean = acc_sum / static_cast<double>(splits.size());
    result.mean_accuracy.push_back(mean);
    const double best_mean = result.mean_accuracy[best];
    if (mean > best_mean || (mean == best_mean && grid[p].c_param < grid[best].c_param)) best = p;
  }
  result.best = grid[best];
  return result;
}

void write_model(std::ostream& out, const SvmModel& m) {
  fmt::print(out, "mfe-svm-model 1\n");
  fmt::print(out, "kernel {}\ngamma {}\ncoef0 {}\ndegree {}\n", to_string(m.kernel.kind), m.kernel.gamma,
             m.kernel.coef0, m.kernel.degree);
  fmt::print(out, "C {}\nintercept {}\nw_norm_sq {}\nobjective {}\niterations {}\n", m.c_param, m.intercept,
             m.w_norm_sq, m.objective, m.iterations);
  fmt::print(out, "sv_count {}\n", m.n_sv());
  for (std::size_t k = 0; k < m.n_sv(); ++k)
    fmt::print(out, "{} {} {}\n", m.sv_indices[k], m.sv_labels[k], m.multipliers[k]);
}

SvmModel read_model(std::istream& in) {
  auto expect = [&](std::string_view key) {
    std::string got;
    if (!(in >> got) || got != key) throw ParseError(fmt::format("model snapshot: expected '{}', got '{}'", key, got));
  };
  SvmModel m;
  int version = 0;
  expect("mfe-svm-model");
  if (!(in >> version) || version != 1) throw ParseError("model snapshot: unsupported version");
  std::string kind;
  expect("kernel");
  in >> kind;
  m.kernel.kind = parse_kernel_kind(kind);
  expect("gamma");
  in >> m.kernel.gamma;
  expect("coef0");
  in >> m.kernel.coef0;
  expect("degree");
  in >> m.kernel.degree;
  expect("C");
  in >> m.c_param;
  expect("intercept");
  in >> m.intercept;
  expect("w_norm_sq");
  in >> m.w_norm_sq;
  expect("objective");
  in >> m.objective;
  expect("iterations");
  in >> m.iterations;
  std::size_t count = 0;
  expect("sv_count");
  in >> count;
  for (std::size_t k = 0; k < count; ++k) {
    Index idx = 0;
    int label = 0;
    double lambda = 0.0;
    if (!(in >> idx >> label >> lambda)) throw ParseError(fmt::format("model snapshot: truncated at SV {}", k));
    m.sv_indices.push_back(idx);
    m.sv_labels.push_back(label);
    m.multipliers.push_back(lambda);
  }
  if (!in) throw ParseError("model snapshot: malformed");
  return m;
}

}  // namespace mfe
