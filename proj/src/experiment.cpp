#include "mfe/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <limits>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "mfe/error.hpp"
#include "mfe/random.hpp"

namespace mfe {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_list(std::string_view s, char sep = ',') {
  std::vector<std::string_view> out;
  while (true) {
    const auto pos = s.find(sep);
    const auto item = trim(s.substr(0, pos));
    if (!item.empty()) out.push_back(item);
    if (pos == std::string_view::npos) break;
    s.remove_prefix(pos + 1);
  }
  return out;
}

double to_double(std::string_view key, std::string_view v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out))
    throw ConfigError(fmt::format("{}: '{}' is not a number", key, v));
  return out;
}

template <typename T>
T to_integer(std::string_view key, std::string_view v) {
  T out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw ConfigError(fmt::format("{}: '{}' is not a non-negative integer", key, v));
  return out;
}

bool to_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(fmt::format("{}: '{}' is not a boolean", key, v));
}

std::vector<double> to_doubles(std::string_view key, std::string_view v) {
  std::vector<double> out;
  for (auto item : split_list(v)) out.push_back(to_double(key, item));
  return out;
}

std::string join_doubles(const std::vector<double>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) out += fmt::format("{}{}", i ? "," : "", xs[i]);
  return out;
}

std::vector<double> default_c_values() {
  std::vector<double> cs;
  for (int e = -5; e <= 15; e += 2) cs.push_back(std::ldexp(1.0, e));
  return cs;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (n_trials < 1) throw ConfigError("trials must be at least 1");
  if (methods.empty()) throw ConfigError("no elimination method selected");
  if (stop_at < 1) throw ConfigError("stop_at must be at least 1");
  if (cv_folds < 2) throw ConfigError("cv_folds must be at least 2");
  if (poly_degree < 1) throw ConfigError("poly_degree must be at least 1");
  if (!(smo_tolerance > 0.0)) throw ConfigError("smo_tolerance must be positive");
  for (double c : c_grid)
    if (!(c > 0.0)) throw ConfigError(fmt::format("C grid value {} is not positive", c));
  for (double g : gamma_grid)
    if (!(g > 0.0)) throw ConfigError(fmt::format("gamma grid value {} is not positive", g));
}

void apply_setting(ExperimentConfig& cfg, std::string_view key, std::string_view value) {
  key = trim(key);
  value = trim(value);
  if (key == "data") {
    cfg.data = std::string(value);
  } else if (key == "kernel") {
    cfg.kernel = parse_kernel_kind(value);
  } else if (key == "c_grid") {
    cfg.c_grid = to_doubles(key, value);
  } else if (key == "gamma_grid") {
    cfg.gamma_grid = to_doubles(key, value);
  } else if (key == "poly_coef0") {
    cfg.poly_coef0 = to_double(key, value);
  } else if (key == "poly_degree") {
    cfg.poly_degree = to_integer<int>(key, value);
  } else if (key == "trials") {
    cfg.n_trials = to_integer<std::size_t>(key, value);
  } else if (key == "seed") {
    cfg.seed = to_integer<std::uint64_t>(key, value);
  } else if (key == "methods") {
    cfg.methods.clear();
    for (auto name : split_list(value)) cfg.methods.push_back(parse_method(name));
  } else if (key == "stop_at") {
    cfg.stop_at = to_integer<std::size_t>(key, value);
  } else if (key == "keep_only_separable") {
    cfg.keep_only_separable = to_bool(key, value);
  } else if (key == "out") {
    cfg.out_dir = std::string(value);
  } else if (key == "diagnostics") {
    cfg.diagnostics = to_bool(key, value);
  } else if (key == "scale") {
    cfg.scale = to_bool(key, value);
  } else if (key == "cv_folds") {
    cfg.cv_folds = to_integer<std::size_t>(key, value);
  } else if (key == "threads") {
    cfg.threads = to_integer<unsigned>(key, value);
  } else if (key == "radius_space") {
    if (value == "feature") cfg.radius_space = RadiusSpace::feature;
    else if (value == "input") cfg.radius_space = RadiusSpace::input;
    else throw ConfigError(fmt::format("radius_space: expected feature or input, got '{}'", value));
  } else if (key == "vcc_plus_one") {
    cfg.vcc_plus_one = to_bool(key, value);
  } else if (key == "smo_tolerance") {
    cfg.smo_tolerance = to_double(key, value);
  } else {
    throw ConfigError(fmt::format("unknown config key '{}'", key));
  }
}

ExperimentConfig parse_config(std::istream& in, ExperimentConfig base) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view s = line;
    if (const auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
    s = trim(s);
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string_view::npos) throw ConfigError(fmt::format("config line {}: expected key = value", line_no));
    try {
      apply_setting(base, s.substr(0, eq), s.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(fmt::format("config line {}: {}", line_no, e.what()));
    }
  }
  return base;
}

ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config file {}", path.string()));
  return parse_config(in, std::move(base));
}

std::string config_text(const ExperimentConfig& cfg) {
  std::string methods;
  for (std::size_t i = 0; i < cfg.methods.size(); ++i) methods += (i ? "," : "") + method_name(cfg.methods[i]);
  std::string out;
  out += fmt::format("data = {}\n", cfg.data.string());
  out += fmt::format("kernel = {}\n", to_string(cfg.kernel));
  out += fmt::format("c_grid = {}\n", join_doubles(cfg.c_grid));
  out += fmt::format("gamma_grid = {}\n", join_doubles(cfg.gamma_grid));
  out += fmt::format("poly_coef0 = {}\n", cfg.poly_coef0);
  out += fmt::format("poly_degree = {}\n", cfg.poly_degree);
  out += fmt::format("trials = {}\n", cfg.n_trials);
  out += fmt::format("seed = {}\n", cfg.seed);
  out += fmt::format("methods = {}\n", methods);
  out += fmt::format("stop_at = {}\n", cfg.stop_at);
  out += fmt::format("keep_only_separable = {}\n", cfg.keep_only_separable);
  out += fmt::format("out = {}\n", cfg.out_dir.string());
  out += fmt::format("diagnostics = {}\n", cfg.diagnostics);
  out += fmt::format("scale = {}\n", cfg.scale);
  out += fmt::format("cv_folds = {}\n", cfg.cv_folds);
  out += fmt::format("threads = {}\n", cfg.threads);
  out += fmt::format("radius_space = {}\n", cfg.radius_space == RadiusSpace::feature ? "feature" : "input");
  out += fmt::format("vcc_plus_one = {}\n", cfg.vcc_plus_one);
  out += fmt::format("smo_tolerance = {}\n", cfg.smo_tolerance);
  return out;
}

std::vector<GridPoint> build_grid(const ExperimentConfig& cfg, std::size_t n_features) {
  const std::vector<double> cs = cfg.c_grid.empty() ? default_c_values() : cfg.c_grid;
  const double inv_m = 1.0 / static_cast<double>(std::max<std::size_t>(n_features, 1));
  std::vector<GridPoint> grid;
  switch (cfg.kernel) {
    case KernelKind::linear:
      for (double c : cs) grid.push_back({KernelConfig{KernelKind::linear}, c});
      break;
    case KernelKind::polynomial:
      for (double c : cs)
        grid.push_back({KernelConfig{KernelKind::polynomial, inv_m, cfg.poly_coef0, cfg.poly_degree}, c});
      break;
    case KernelKind::gaussian: {
      std::vector<double> gammas = cfg.gamma_grid;
      if (gammas.empty())
        for (int e : {-15, -11, -7, -3, 1}) gammas.push_back(std::ldexp(inv_m, e));
      for (double g : gammas)
        for (double c : cs) grid.push_back({KernelConfig{KernelKind::gaussian, g}, c});
      break;
    }
  }
  return grid;
}

CurveTable aggregate(const std::vector<EliminationTrace>& traces, const std::vector<Method>& methods) {
  CurveTable table;
  for (const Method& m : methods) {
    const std::string name = method_name(m);
    std::map<std::size_t, std::vector<double>, std::greater<>> by_count;
    for (const auto& t : traces) {
      if (t.method != name) continue;
      for (const auto& s : t.steps) by_count[s.retained_count].push_back(s.test_error);
    }
    for (const auto& [count, errors] : by_count) {
      const double n = static_cast<double>(errors.size());
      double sum = 0.0;
      for (double e : errors) sum += e;
      const double mean = sum / n;
      double ss = 0.0;
      for (double e : errors) ss += (e - mean) * (e - mean);
      const double sd = errors.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
      table.rows.push_back({name, count, mean, errors.size(), sd});
    }
  }
  return table;
}

void write_curves_csv(std::ostream& out, const CurveTable& table) {
  fmt::print(out, "method,retained_count,mean_test_error,trial_count,std_test_error\n");
  for (const auto& r : table.rows)
    fmt::print(out, "{},{},{},{},{}\n", r.method, r.retained_count, r.mean_test_error, r.trial_count, r.std_test_error);
}

CurveTable read_curves_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != "method,retained_count,mean_test_error,trial_count,std_test_error")
    throw ParseError("curves.csv: unexpected header");
  CurveTable table;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_list(line);
    if (fields.size() != 5) throw ParseError(fmt::format("curves.csv line {}: expected 5 fields", line_no));
    try {
      table.rows.push_back({std::string(fields[0]), to_integer<std::size_t>("retained_count", fields[1]),
                            to_double("mean_test_error", fields[2]), to_integer<std::size_t>("trial_count", fields[3]),
                            to_double("std_test_error", fields[4])});
    } catch (const ConfigError& e) {
      throw ParseError(fmt::format("curves.csv line {}: {}", line_no, e.what()));
    }
  }
  return table;
}

std::string curves_svg(const CurveTable& table, std::string_view title) {
  constexpr double width = 720.0;
  constexpr double height = 440.0;
  constexpr double left = 60.0;
  constexpr double right = 170.0;
  constexpr double top = 40.0;
  constexpr double bottom = 50.0;
  constexpr const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                     "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

  std::size_t x_min = std::numeric_limits<std::size_t>::max();
  std::size_t x_max = 0;
  double y_max = 0.05;
  std::vector<std::string> order;
  for (const auto& r : table.rows) {
    x_min = std::min(x_min, r.retained_count);
    x_max = std::max(x_max, r.retained_count);
    y_max = std::max(y_max, r.mean_test_error);
    if (std::find(order.begin(), order.end(), r.method) == order.end()) order.push_back(r.method);
  }
  if (table.rows.empty()) x_min = x_max = 0;
  y_max = std::min(1.0, std::ceil(y_max * 1.1 * 20.0) / 20.0);
  const double span_x = x_max > x_min ? static_cast<double>(x_max - x_min) : 1.0;
  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;
  auto px = [&](std::size_t x) { return left + plot_w * static_cast<double>(x - x_min) / span_x; };
  auto py = [&](double y) { return top + plot_h * (1.0 - y / y_max); };

  std::string svg = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\" "
      "font-family=\"sans-serif\" font-size=\"12\">\n",
      width, height);
  svg += fmt::format("<rect width=\"{}\" height=\"{}\" fill=\"white\"/>\n", width, height);
  if (!title.empty())
    svg += fmt::format("<text x=\"{}\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n",
                       left + plot_w / 2.0, title);
  svg += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n", left,
                     top, plot_w, plot_h);
  for (int t = 0; t <= 5; ++t) {
    const double y = y_max * t / 5.0;
    svg += fmt::format("<line x1=\"{0}\" y1=\"{1:.2f}\" x2=\"{2}\" y2=\"{1:.2f}\" stroke=\"#dddddd\"/>\n", left, py(y),
                       left + plot_w);
    svg += fmt::format("<text x=\"{}\" y=\"{:.2f}\" text-anchor=\"end\">{:.3f}</text>\n", left - 6.0, py(y) + 4.0, y);
  }
  for (int t = 0; t <= 5; ++t) {
    const std::size_t x = x_min + static_cast<std::size_t>(std::llround(span_x * t / 5.0));
    if (x > x_max) break;
    svg += fmt::format("<text x=\"{:.2f}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", px(x), top + plot_h + 18.0,
                       x);
  }
  svg += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">retained features</text>\n",
                     left + plot_w / 2.0, height - 10.0);
  svg += fmt::format("<text x=\"16\" y=\"{0}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {0})\">"
                     "mean test error</text>\n",
                     top + plot_h / 2.0);
  for (std::size_t k = 0; k < order.size(); ++k) {
    const char* color = palette[k % std::size(palette)];
    std::string points;
    for (const auto& r : table.rows) {
      if (r.method != order[k]) continue;
      points += fmt::format("{:.2f},{:.2f} ", px(r.retained_count), py(r.mean_test_error));
    }
    svg += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>\n", color,
                       trim(points));
    const double ly = top + 14.0 + 18.0 * static_cast<double>(k);
    svg += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"{3}\" stroke-width=\"2\"/>\n",
                       width - right + 12.0, ly, width - right + 32.0, color);
    svg += fmt::format("<text x=\"{}\" y=\"{}\">{}</text>\n", width - right + 38.0, ly + 4.0, order[k]);
  }
  svg += "</svg>\n";
  return svg;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, std::shared_ptr<const Dataset> ds) {
  cfg.validate();
  if (!ds) throw ConfigError("no dataset");
  ds->validate();
  const SmoOptions smo{cfg.smo_tolerance};
  RunOptions run;
  run.stop_at = cfg.stop_at;
  run.smo = smo;
  run.step.diagnostics = cfg.diagnostics;
  run.step.radius_space = cfg.radius_space;
  run.step.vcc_plus_one = cfg.vcc_plus_one;
  run.step.threads = cfg.threads;

  ExperimentResult result;
  result.n_features = ds->n_features();
  std::size_t kept = 0;
  const std::size_t max_attempts = 10 * cfg.n_trials;
  for (std::size_t attempt = 0; attempt < max_attempts && kept < cfg.n_trials; ++attempt) {
    TrialRecord rec;
    rec.split = make_trial(*ds, derive_seed(cfg.seed, attempt), static_cast<int>(attempt));
    const auto& train_idx = rec.split.train_indices;
    if (!has_both_classes(*ds, train_idx)) {
      rec.note = "training half holds a single class";
      result.trials.push_back(std::move(rec));
      continue;
    }
    auto data = cfg.scale ? std::make_shared<const Dataset>(min_max_scaled(*ds, train_idx)) : ds;
    PairStats ps(data);
    const auto grid = build_grid(cfg, data->n_features());
    const CvResult cv = cv_select(*data, ps, train_idx, grid, derive_seed(rec.split.seed, 1), cfg.cv_folds, smo);
    rec.chosen = cv.best;
    rec.initial_model = std::make_shared<const SvmModel>(train(*data, train_idx, cv.best.kernel, ps, cv.best.c_param, smo));
    rec.initially_separable = margin_view(*rec.initial_model, *data, ps, train_idx).separable;
    if (cfg.keep_only_separable && !rec.initially_separable) {
      rec.note = "initial model does not separate the training half";
      result.trials.push_back(std::move(rec));
      continue;
    }
    rec.kept = true;
    for (const Method& m : cfg.methods) result.traces.push_back(run_elimination(m, ps, rec.split, rec.initial_model, run));
    result.trials.push_back(std::move(rec));
    ++kept;
  }
  if (kept == 0) throw ConfigError(fmt::format("no trial kept after {} attempts", result.trials.size()));
  result.curves = aggregate(result.traces, cfg.methods);
  return result;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  return run_experiment(cfg, std::make_shared<const Dataset>(load_libsvm(cfg.data)));
}

namespace {

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(fmt::format("cannot write {}", path.string()));
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw Error(fmt::format("failed writing {}", path.string()));
}

}  // namespace

void emit_outputs(const ExperimentResult& result, const ExperimentConfig& cfg) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);
  if (ec) throw Error(fmt::format("cannot create {}: {}", cfg.out_dir.string(), ec.message()));

  {
    const fs::path p = cfg.out_dir / "curves.csv";
    auto out = open_output(p);
    write_curves_csv(out, result.curves);
    finish(out, p);
  }
  for (const auto& t : result.traces) {
    const fs::path p = cfg.out_dir / fmt::format("trace_{}_{}.csv", t.trial_id, t.method);
    auto out = open_output(p);
    write_trace_csv(out, t);
    finish(out, p);
    if (cfg.diagnostics) {
      const fs::path dp = cfg.out_dir / fmt::format("diagnostics_{}_{}.csv", t.trial_id, t.method);
      auto dout = open_output(dp);
      fmt::print(dout, "step,feature,criterion_value\n");
      for (std::size_t s = 0; s < t.steps.size(); ++s) {
        if (!t.steps[s].per_candidate) continue;
        for (const auto& [m, v] : *t.steps[s].per_candidate) fmt::print(dout, "{},{},{}\n", s + 1, m + 1, v);
      }
      finish(dout, dp);
    }
  }
  {
    const fs::path p = cfg.out_dir / "config.txt";
    auto out = open_output(p);
    fmt::print(out, "# mfe {}\n", kVersion);
    out << config_text(cfg);
    for (const auto& g : build_grid(cfg, result.n_features))
      fmt::print(out, "# grid kernel {} C {}\n", describe(g.kernel), g.c_param);
    for (const auto& tr : result.trials) {
      fmt::print(out, "# trial {} seed {} {}", tr.split.trial_id, tr.split.seed, tr.kept ? "kept" : "discarded");
      if (tr.chosen)
        fmt::print(out, " kernel {} C {}", describe(tr.chosen->kernel), tr.chosen->c_param);
      if (!tr.note.empty()) fmt::print(out, " ({})", tr.note);
      fmt::print(out, "\n");
    }
    for (const auto& t : result.traces)
      if (t.termination) fmt::print(out, "# trial {} {} stopped: {}\n", t.trial_id, t.method, *t.termination);
    finish(out, p);
  }
  {
    const fs::path p = cfg.out_dir / "curves.svg";
    auto out = open_output(p);
    out << curves_svg(result.curves, fmt::format("{} kernel, {} trials", to_string(cfg.kernel), cfg.n_trials));
    finish(out, p);
  }
}

}  // namespace mfe
