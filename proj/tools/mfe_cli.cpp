#include <cstdio>
#include <exception>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "mfe/error.hpp"
#include "mfe/experiment.hpp"
#include "mfe/synthetic.hpp"

namespace {

struct RunFlags {
  std::string config;
  std::optional<std::string> data, kernel, methods, out, radius_space, c_grid, gamma_grid;
  std::optional<std::size_t> trials, stop_at, cv_folds;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::optional<double> smo_tolerance;
  bool scale = false;
  bool all_trials = false;
  bool diagnostics = false;
  bool vcc_plus_one = false;
};

mfe::ExperimentConfig resolve(const RunFlags& f) {
  mfe::ExperimentConfig cfg;
  if (!f.config.empty()) cfg = mfe::load_config(f.config);
  auto set = [&](const char* key, const auto& value) {
    if (value) mfe::apply_setting(cfg, key, fmt::format("{}", *value));
  };
  set("data", f.data);
  set("kernel", f.kernel);
  set("methods", f.methods);
  set("out", f.out);
  set("radius_space", f.radius_space);
  set("c_grid", f.c_grid);
  set("gamma_grid", f.gamma_grid);
  set("trials", f.trials);
  set("stop_at", f.stop_at);
  set("cv_folds", f.cv_folds);
  set("seed", f.seed);
  set("threads", f.threads);
  set("smo_tolerance", f.smo_tolerance);
  if (f.scale) cfg.scale = true;
  if (f.all_trials) cfg.keep_only_separable = false;
  if (f.diagnostics) cfg.diagnostics = true;
  if (f.vcc_plus_one) cfg.vcc_plus_one = true;
  if (cfg.data.empty()) throw mfe::ConfigError("no dataset given (--data or data = ... in the config file)");
  cfg.validate();
  return cfg;
}

int run(const RunFlags& flags) {
  const mfe::ExperimentConfig cfg = resolve(flags);
  const mfe::ExperimentResult result = mfe::run_experiment(cfg);
  mfe::emit_outputs(result, cfg);
  std::size_t kept = 0;
  for (const auto& t : result.trials) kept += t.kept ? 1 : 0;
  fmt::print("{} of {} attempted trials kept; {} traces written to {}\n", kept, result.trials.size(),
             result.traces.size(), cfg.out_dir.string());
  for (const auto& t : result.traces)
    if (t.termination) fmt::print("trial {} {}: stopped early, {}\n", t.trial_id, t.method, *t.termination);
  return 0;
}

struct SynthFlags {
  mfe::SyntheticSpec spec;
  std::uint64_t seed = 1;
  std::string out;
};

int synth(const SynthFlags& f) {
  const auto data = mfe::make_synthetic(f.spec, f.seed);
  std::FILE* file = std::fopen(f.out.c_str(), "wb");
  if (!file) throw mfe::Error(fmt::format("cannot write {}", f.out));
  const std::string text = mfe::to_libsvm(data.ds);
  const bool ok = std::fwrite(text.data(), 1, text.size(), file) == text.size();
  if (std::fclose(file) != 0 || !ok) throw mfe::Error(fmt::format("failed writing {}", f.out));
  std::string features;
  for (mfe::Index m : data.informative) features += fmt::format(" {}", m + 1);
  fmt::print("wrote {} samples x {} features to {}; informative features:{}\n", data.ds.n_samples(),
             data.ds.n_features(), f.out, features);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Backward feature elimination for kernel SVMs"};
  app.require_subcommand(1);
  RunFlags flags;
  auto* cmd = app.add_subcommand("run", "Run an elimination experiment and write curves, traces and a plot");
  cmd->add_option("--config", flags.config, "key = value config file; flags override it");
  cmd->add_option("--data", flags.data, "LIBSVM-format dataset");
  cmd->add_option("--kernel", flags.kernel, "linear | poly | rbf");
  cmd->add_option("--methods", flags.methods, "comma-separated methods, e.g. BMFE-QPemb,MFE-Slack,RFE-FRsub");
  cmd->add_option("--trials", flags.trials, "number of kept trials");
  cmd->add_option("--seed", flags.seed, "base seed");
  cmd->add_option("--out", flags.out, "output directory");
  cmd->add_option("--stop-at", flags.stop_at, "stop when this many features remain");
  cmd->add_option("--cv-folds", flags.cv_folds, "cross-validation folds");
  cmd->add_option("--threads", flags.threads, "workers for candidate scoring");
  cmd->add_option("--radius-space", flags.radius_space, "feature | input");
  cmd->add_option("--c-grid", flags.c_grid, "comma-separated C values");
  cmd->add_option("--gamma-grid", flags.gamma_grid, "comma-separated RBF gamma values");
  cmd->add_option("--smo-tolerance", flags.smo_tolerance, "SMO stopping gap");
  cmd->add_flag("--scale", flags.scale, "min-max scale features on each training half");
  cmd->add_flag("--all-trials", flags.all_trials, "keep trials whose initial model does not separate");
  cmd->add_flag("--diagnostics", flags.diagnostics, "write every candidate's score per step");
  cmd->add_flag("--vcc-plus-one", flags.vcc_plus_one, "use h = r^2 |w|^2 + 1 in the risk bound");

  SynthFlags synth_flags;
  auto* gen = app.add_subcommand("synth", "Write a synthetic two-class dataset in LIBSVM format");
  gen->add_option("--samples", synth_flags.spec.n_samples, "number of samples")->capture_default_str();
  gen->add_option("--features", synth_flags.spec.n_features, "number of features")->capture_default_str();
  gen->add_option("--informative", synth_flags.spec.n_informative, "features that carry the class signal")
      ->capture_default_str();
  gen->add_option("--shift", synth_flags.spec.shift, "class mean offset on informative features")
      ->capture_default_str();
  gen->add_option("--seed", synth_flags.seed, "seed")->capture_default_str();
  gen->add_option("--out", synth_flags.out, "output file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  try {
    return *gen ? synth(synth_flags) : run(flags);
  } catch (const mfe::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
