// pinnstab command-line harness.
//
//   pinnstab train     --system duffing --ic 0.1,0 --T 15 --regularize --out run/
//   pinnstab benchmark --system pitchfork --ics "0.3" --times 13 --seeds 10 --out bench/
//   pinnstab sweep     --param c0 --values 0.001,0.1,1,10 --out sweep/
//   pinnstab ablation  --system duffing --out ablation/
//   pinnstab heatmap   --times 1:20 --out heatmap/
//   pinnstab portrait  --system vanderpol --out portrait/
//   pinnstab reference --system lotka-volterra --ic 0.1,0 --T 11 --out ref.csv

#include "pinnstab/config.hpp"
#include "pinnstab/harness.hpp"
#include "pinnstab/io.hpp"
#include "pinnstab/network.hpp"
#include "pinnstab/reference.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>

namespace fs = std::filesystem;
using namespace pinnstab;

namespace {

/// Raw flag values; only flags given on the command line are applied on top
/// of the subcommand defaults and the config file.
struct Flags {
  std::string config;
  std::string system;
  std::vector<std::string> ic;
  std::string ics;
  std::string T;
  std::string times;
  int epochs = 0;
  int n_col = 0;
  std::uint64_t seed = 0;
  int seeds = 0;
  double lr = 0.0;
  std::vector<int> hidden;
  bool regularize = false;
  double c0 = 0.0, eps = 0.0, gamma = 0.0;
  bool no_ls = false;
  bool fast = false;
  std::string out;
  int workers = 0;
  double threshold = 0.0;
  bool timing = false;
  bool quiet = false;
};

struct Registered {
  CLI::App* app;
  std::map<std::string, CLI::Option*> opt;
  bool given(const std::string& name) const {
    auto it = opt.find(name);
    return it != opt.end() && it->second->count() > 0;
  }
};

Registered add_common(CLI::App* app, Flags& f) {
  Registered r{app, {}};
  r.opt["config"] = app->add_option("--config", f.config, "JSON settings file; flags override it");
  r.opt["system"] = app->add_option("--system", f.system, "pitchfork | duffing | vanderpol | lotka-volterra");
  r.opt["ic"] = app->add_option("--ic", f.ic, "initial condition, comma-separated (repeatable)");
  r.opt["ics"] = app->add_option("--ics", f.ics, "several ICs, e.g. \"0.1,0;0.2,0\"");
  r.opt["T"] = app->add_option("--T", f.T, "simulation time(s): 13, \"11,12\" or \"1:20\"");
  r.opt["times"] = app->add_option("--times", f.times, "alias of --T");
  r.opt["epochs"] = app->add_option("--epochs", f.epochs, "training epochs")->check(CLI::PositiveNumber);
  r.opt["n_col"] = app->add_option("--n-col", f.n_col, "collocation points per epoch")->check(CLI::PositiveNumber);
  r.opt["seed"] = app->add_option("--seed", f.seed, "master seed");
  r.opt["seeds"] = app->add_option("--seeds", f.seeds, "replicates per cell")->check(CLI::NonNegativeNumber);
  r.opt["lr"] = app->add_option("--lr", f.lr, "Adam learning rate")->check(CLI::PositiveNumber);
  r.opt["hidden"] = app->add_option("--hidden", f.hidden, "hidden layer widths")->delimiter(',');
  r.opt["regularize"] = app->add_flag("--regularize", f.regularize, "enable the stability regularizer");
  r.opt["c0"] = app->add_option("--c0", f.c0, "regularization weight C0");
  r.opt["eps"] = app->add_option("--eps", f.eps, "R_SE width epsilon");
  r.opt["gamma"] = app->add_option("--gamma", f.gamma, "fraction of training with regularization");
  r.opt["no_ls"] = app->add_flag("--no-ls", f.no_ls, "drop the local-stability factor (R_SE only)");
  r.opt["fast"] = app->add_flag("--fast", f.fast, "10k epochs / 512 points profile");
  r.opt["out"] = app->add_option("--out", f.out, "output directory (file for `reference`)");
  r.opt["workers"] = app->add_option("--workers", f.workers, "parallel training runs")->check(CLI::PositiveNumber);
  r.opt["threshold"] = app->add_option("--threshold", f.threshold, "success threshold on the relative error");
  r.opt["timing"] = app->add_flag("--timing", f.timing, "fill wall_seconds in the results CSV");
  r.opt["quiet"] = app->add_flag("-q,--quiet", f.quiet, "no progress output");
  return r;
}

RunSettings resolve(const Registered& r, const Flags& f, RunSettings s) {
  if (r.given("config")) s = load_settings(f.config, s);
  if (r.given("system")) s.system = f.system;
  if (r.given("ic")) {
    s.ics.clear();
    for (const auto& text : f.ic) s.ics.push_back(parse_state(text));
  }
  if (r.given("ics")) s.ics = parse_states(f.ics);
  if (r.given("T")) s.times = parse_list(f.T);
  if (r.given("times")) s.times = parse_list(f.times);
  if (r.given("epochs")) s.epochs = f.epochs;
  if (r.given("n_col")) s.n_col = f.n_col;
  if (r.given("seed")) s.seed = f.seed;
  if (r.given("seeds")) s.seeds = f.seeds;
  if (r.given("lr")) s.learning_rate = f.lr;
  if (r.given("hidden")) s.hidden = f.hidden;
  if (r.given("regularize")) s.regularize = true;
  if (r.given("c0")) s.reg.c0 = f.c0;
  if (r.given("eps")) s.reg.epsilon = f.eps;
  if (r.given("gamma")) s.reg.gamma = f.gamma;
  if (r.given("no_ls")) s.reg.include_ls = false;
  if (r.given("fast")) s.fast = true;
  if (r.given("out")) s.out = f.out;
  if (r.given("workers")) s.workers = f.workers;
  if (r.given("threshold")) s.threshold = f.threshold;
  if (r.given("timing")) s.timing = true;
  s.reg.validate();
  return s;
}

RunProgress progress_printer(bool quiet) {
  if (quiet) return {};
  return [](std::size_t done, std::size_t total, const RunRecord& r) {
    std::fprintf(stderr, "[%zu/%zu] %s ic=%s T=%s %s err=%.4g %s\n", done, total, r.config.system.c_str(),
                 format_state(r.config.x0).c_str(), format_double(r.config.T).c_str(), r.arm.c_str(),
                 r.relative_error, r.diverged ? "diverged" : (r.success ? "ok" : "fail"));
  };
}

void write_records(const fs::path& dir, const std::vector<RunRecord>& records, const RunSettings& s) {
  ExportOptions opt;
  opt.include_wall_time = s.timing;
  if (!records.empty()) export_results(records, dir / "results.csv", ExportFormat::Csv, opt);
  export_results(records, dir / "runs.jsonl", ExportFormat::JsonLines, opt);
}

StateVec default_single_ic(const std::string& system) {
  StateVec ic = table_ics(system).front();
  if (ic.size() == 2 && system == "duffing") ic << 0.01, 0.0;
  return ic;
}

int cmd_train(const RunSettings& s) {
  const TrainingConfig cfg = s.training_config();
  const fs::path dir = s.out;
  std::fprintf(stderr, "train %s ic=%s T=%s epochs=%d n_col=%d %s\n", cfg.system.c_str(),
               format_state(cfg.x0).c_str(), format_double(cfg.T).c_str(), cfg.n_epochs, cfg.n_collocation,
               cfg.regularization ? "regularized" : "unmodified");
  const TrainResult result = train(cfg);
  SuccessCriterion criterion;
  criterion.threshold = s.threshold;
  RunRecord rec = evaluate_run(result, cfg, criterion, true);
  rec.arm = cfg.regularization ? (cfg.regularization->include_ls ? "regularized" : "se-only") : "unmodified";
  save_params(dir / "params.txt", result.params);
  if (rec.trajectory) write_file_atomic(dir / "prediction.csv", trajectory_csv(*rec.trajectory));
  write_file_atomic(dir / "reference.csv",
                    trajectory_csv(reference_solution(cfg.dynamics(), cfg.x0, cfg.T, criterion.spacing)));
  write_records(dir, {rec}, s);
  write_file_atomic(dir / "trajectory.svg", render_records_svg({rec}));
  std::printf("rel_error=%s success=%d diverged=%d nearest_fp=%s dist=%s wall=%.1fs\n",
              format_double(rec.relative_error).c_str(), rec.success, rec.diverged,
              rec.nearest_fp ? format_state(rec.nearest_fp->location).c_str() : "",
              format_double(rec.nearest_fp_dist).c_str(), rec.wall_seconds);
  return 0;
}

int cmd_benchmark(RunSettings s, bool quiet) {
  if (s.ics.empty()) s.ics = table_ics(s.system);
  if (s.times.empty()) s.times = {11, 12, 13, 14, 15};
  const ExperimentSpec spec = s.experiment_spec();
  const ExperimentResult result = run_success_matrix(spec, progress_printer(quiet));
  const fs::path dir = s.out;
  write_records(dir, result.records, s);
  write_file_atomic(dir / "cells.csv", cells_csv(result.cells));
  std::cout << cells_csv(result.cells);
  return 0;
}

int cmd_sweep(RunSettings s, const std::string& param_name, const std::string& values_text, bool quiet) {
  const SweepParam param = parse_sweep_param(param_name);
  std::vector<double> values = parse_list(values_text);
  if (values.empty()) {
    switch (param) {
      case SweepParam::C0: values = {0.001, 0.01, 0.1, 1.0, 10.0, 100.0, 1000.0}; break;
      case SweepParam::Epsilon: values = {0.0001, 0.001, 0.01, 0.1, 1.0}; break;
      case SweepParam::Gamma: values = {0.1, 0.25, 0.5, 0.75, 1.0}; break;
    }
  }
  ExperimentSpec spec = s.experiment_spec();
  const SweepResult result = run_sensitivity_sweep(param, values, spec, s.reg, true, progress_printer(quiet));
  const fs::path dir = s.out;
  write_records(dir, result.records, s);
  write_file_atomic(dir / "sweep.csv", sweep_csv(result));
  std::cout << sweep_csv(result);
  return 0;
}

int cmd_ablation(const RunSettings& s, bool quiet) {
  const ExperimentSpec spec = s.experiment_spec();
  const AblationResult result = run_ablation(spec, default_ablation_grid(), progress_printer(quiet));
  const fs::path dir = s.out;
  write_records(dir, result.records, s);
  write_file_atomic(dir / "ablation.csv", ablation_csv(result));
  std::cout << ablation_csv(result);
  return 0;
}

int cmd_heatmap(RunSettings s, bool quiet) {
  s.system = "pitchfork";
  const ExperimentSpec spec = s.experiment_spec();
  const ExperimentResult result = run_heatmap(spec, progress_printer(quiet));
  const fs::path dir = s.out;
  write_records(dir, result.records, s);
  write_file_atomic(dir / "cells.csv", cells_csv(result.cells));
  write_file_atomic(dir / "heatmap.csv", heatmap_csv(spec, result));
  std::cout << heatmap_csv(spec, result);
  return 0;
}

int cmd_portrait(const RunSettings& s, int n_ics, bool quiet) {
  const bool lv = SystemDynamics::from_name(s.system).kind() == SystemKind::LotkaVolterra;
  IcSampler sampler = lv ? IcSampler::uniform_box(-1.0, 4.0, 50) : IcSampler::gaussian(20);
  if (n_ics > 0) sampler.count = n_ics;
  ExperimentSpec spec = s.experiment_spec();
  const double T = s.times.empty() ? 12.5 : s.times.front();
  const PortraitResult portrait = run_phase_portrait(spec, sampler, T, progress_printer(quiet));
  const fs::path dir = s.out;
  write_records(dir, portrait.records, s);
  write_file_atomic(dir / "vector_field.csv", vector_field_csv(portrait.field));
  write_file_atomic(dir / "portrait.svg", render_portrait_svg(portrait));
  for (std::size_t i = 0; i < portrait.references.size(); ++i)
    write_file_atomic(dir / ("reference_" + std::to_string(i) + ".csv"), trajectory_csv(portrait.references[i]));
  for (std::size_t i = 0; i < portrait.records.size(); ++i) {
    const auto& r = portrait.records[i];
    if (r.trajectory)
      write_file_atomic(dir / ("prediction_" + r.arm + "_" + std::to_string(i % portrait.ics.size()) + ".csv"),
                        trajectory_csv(*r.trajectory));
  }
  for (const char* arm : {"unmodified", "regularized", "se-only"}) {
    bool present = false;
    for (const auto& r : portrait.records) present = present || r.arm == arm;
    if (present) std::printf("%s success=%s\n", arm, format_double(portrait.success_rate(arm)).c_str());
  }
  return 0;
}

int cmd_reference(const RunSettings& s, double spacing) {
  const SystemDynamics sys = SystemDynamics::from_name(s.system);
  if (s.ics.empty()) throw std::invalid_argument("reference: --ic is required");
  const double T = s.times.empty() ? 10.0 : s.times.front();
  const std::string csv = trajectory_csv(reference_solution(sys, s.ics.front(), T, spacing));
  if (s.out == "-" || s.out.empty()) {
    std::cout << csv;
  } else {
    write_file_atomic(s.out, csv);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stability-aware PINN training for ODE initial-value problems"};
  app.require_subcommand(1);

  Flags f;
  std::vector<Registered> subs;
  auto sub = [&](const char* name, const char* help) {
    subs.push_back(add_common(app.add_subcommand(name, help), f));
    return subs.back().app;
  };
  sub("train", "train one network and export parameters and trajectories");
  sub("benchmark", "success-rate matrix over ICs and simulation times");
  CLI::App* sweep = sub("sweep", "hyperparameter sensitivity of the regularizer");
  std::string sweep_param = "c0", sweep_values;
  sweep->add_option("--param", sweep_param, "c0 | epsilon | gamma");
  sweep->add_option("--values", sweep_values, "comma-separated values");
  sub("ablation", "none / R_SE-only / R_SE x R_LS comparison");
  sub("heatmap", "pitchfork success rate over simulation times");
  CLI::App* portrait = sub("portrait", "phase portraits from sampled initial conditions");
  int n_ics = 0;
  portrait->add_option("--n-ics", n_ics, "number of sampled ICs")->check(CLI::PositiveNumber);
  CLI::App* reference = sub("reference", "RK4 / analytic reference trajectory as CSV");
  double spacing = 0.01;
  reference->add_option("--spacing", spacing, "output grid spacing")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    for (const auto& r : subs) {
      if (!r.app->parsed()) continue;
      const std::string name = r.app->get_name();
      RunSettings defaults;
      if (name == "sweep" || name == "ablation") {
        defaults.system = "duffing";
        defaults.seeds = 20;
        defaults.times = {15};
        defaults.reg = {};
      } else if (name == "heatmap") {
        defaults.ics = table_ics("pitchfork");
        for (int T = 1; T <= 20; ++T) defaults.times.push_back(T);
      } else if (name == "train") {
        defaults.times = {10};
      } else if (name == "portrait") {
        defaults.system = "vanderpol";
      } else if (name == "reference") {
        defaults.out = "-";
      }
      RunSettings s = resolve(r, f, defaults);
      if ((name == "sweep" || name == "ablation") && s.ics.empty()) {
        s.ics = {default_single_ic(s.system)};
      }
      if (name == "train" && s.ics.empty()) s.ics = {table_ics(s.system).front()};
      if (name == "train") return cmd_train(s);
      if (name == "benchmark") return cmd_benchmark(s, f.quiet);
      if (name == "sweep") return cmd_sweep(s, sweep_param, sweep_values, f.quiet);
      if (name == "ablation") return cmd_ablation(s, f.quiet);
      if (name == "heatmap") return cmd_heatmap(s, f.quiet);
      if (name == "portrait") return cmd_portrait(s, n_ics, f.quiet);
      if (name == "reference") return cmd_reference(s, spacing);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
