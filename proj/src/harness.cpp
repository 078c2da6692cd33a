#include "pinnstab/harness.hpp"

#include "pinnstab/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

namespace pinnstab {

double relative_l2_error(const Trajectory& pred, const Trajectory& ref) {
  if (pred.times.size() != ref.times.size() || pred.states.rows() != ref.states.rows())
    throw std::invalid_argument("relative_l2_error: trajectories are on different grids");
  for (std::size_t i = 0; i < pred.times.size(); ++i)
    if (std::abs(pred.times[i] - ref.times[i]) > 1e-12)
      throw std::invalid_argument("relative_l2_error: trajectories are on different grids");
  const double denom = ref.states.squaredNorm();
  if (denom == 0.0) throw std::domain_error("relative_l2_error: reference is identically zero");
  return std::sqrt((pred.states - ref.states).squaredNorm() / denom);
}

Trajectory predict_trajectory(const NetworkParams& params, const ConstraintMode& mode, double T, double spacing) {
  Trajectory traj;
  traj.times = equidistant_grid(T, spacing);
  const Eigen::RowVectorXd times =
      Eigen::Map<const Eigen::RowVectorXd>(traj.times.data(), static_cast<Eigen::Index>(traj.times.size()));
  traj.states = predict(params, mode, times);
  return traj;
}

RunRecord evaluate_run(const NetworkParams& params, const TrainingConfig& config, const SuccessCriterion& criterion,
                       bool keep_trajectory) {
  const SystemDynamics system = config.dynamics();
  RunRecord rec;
  rec.config = config;
  Trajectory pred = predict_trajectory(params, config.constraint_mode(), config.T, criterion.spacing);
  const Trajectory ref = reference_solution(system, config.x0, config.T, criterion.spacing);
  rec.relative_error = relative_l2_error(pred, ref);
  rec.final_state = pred.state(pred.size() - 1);
  if (rec.final_state.allFinite()) {
    auto [fp, dist] = nearest_fixed_point(system, rec.final_state);
    rec.nearest_fp = *fp;
    rec.nearest_fp_dist = dist;
  } else {
    rec.nearest_fp_dist = std::numeric_limits<double>::quiet_NaN();
  }
  rec.success = std::isfinite(rec.relative_error) && rec.relative_error < criterion.threshold;
  if (keep_trajectory) rec.trajectory = std::move(pred);
  return rec;
}

RunRecord evaluate_run(const TrainResult& result, const TrainingConfig& config, const SuccessCriterion& criterion,
                       bool keep_trajectory) {
  RunRecord rec;
  if (result.diverged) {
    rec.config = config;
    rec.diverged = true;
    rec.success = false;
    rec.relative_error = std::numeric_limits<double>::quiet_NaN();
    rec.nearest_fp_dist = std::numeric_limits<double>::quiet_NaN();
  } else {
    rec = evaluate_run(result.params, config, criterion, keep_trajectory);
  }
  rec.epochs_completed = result.epochs_completed;
  rec.wall_seconds = result.wall_seconds;
  rec.history = result.history;
  return rec;
}

RunRecord run_one(const TrainingConfig& config, const std::string& arm, const SuccessCriterion& criterion,
                  bool keep_trajectory) {
  RunRecord rec = evaluate_run(train(config), config, criterion, keep_trajectory);
  rec.arm = arm;
  return rec;
}

std::vector<RunRecord> run_jobs(const std::vector<Job>& jobs, int workers, const SuccessCriterion& criterion,
                                bool keep_trajectories, const RunProgress& progress) {
  std::vector<RunRecord> out(jobs.size());
  if (jobs.empty()) return out;
  const auto n_threads = static_cast<std::size_t>(std::clamp<long>(workers, 1, static_cast<long>(jobs.size())));
  std::atomic<std::size_t> next{0};
  std::size_t done = 0;
  std::mutex mutex;
  std::exception_ptr error;

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      {
        std::lock_guard lock(mutex);
        if (error) return;
      }
      try {
        RunRecord rec = run_one(jobs[i].config, jobs[i].arm, criterion, keep_trajectories);
        std::lock_guard lock(mutex);
        out[i] = std::move(rec);
        ++done;
        if (progress) progress(done, jobs.size(), out[i]);
      } catch (...) {
        std::lock_guard lock(mutex);
        if (!error) error = std::current_exception();
      }
    }
  };

  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);
  return out;
}

std::string format_state(const StateVec& x) {
  std::string s;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (i) s += ';';
    s += format_double(x(i));
  }
  return s;
}

std::uint64_t run_seed(std::uint64_t master_seed, const std::string& system, const StateVec& ic, double T,
                       const std::string& arm, int replicate) {
  const std::string descriptor =
      system + '|' + format_state(ic) + '|' + format_double(T) + '|' + arm + '|' + std::to_string(replicate);
  return derive_seed(master_seed, descriptor);
}

void ExperimentSpec::validate() const {
  const SystemDynamics sys = SystemDynamics::from_name(system);
  if (seeds < 0) throw std::invalid_argument("seeds must be >= 0");
  for (const auto& ic : ics)
    if (ic.size() != sys.dimension()) throw std::invalid_argument("IC dimension does not match " + system);
  for (double T : times)
    if (!(T > 0.0)) throw std::invalid_argument("simulation times must be > 0");
  for (const auto& arm : arms)
    if (arm.regularization) arm.regularization->validate();
}

const CellResult& ExperimentResult::cell(const StateVec& ic, double T, const std::string& arm) const {
  for (const auto& c : cells)
    if (c.arm == arm && c.T == T && c.ic.size() == ic.size() && c.ic == ic) return c;
  throw std::out_of_range("no cell for " + format_state(ic) + " T=" + format_double(T) + " arm=" + arm);
}

std::vector<StateVec> table_ics(const std::string& system) {
  auto s2 = [](double a, double b) {
    StateVec v(2);
    v << a, b;
    return v;
  };
  const SystemDynamics sys = SystemDynamics::from_name(system);
  std::vector<StateVec> out;
  switch (sys.kind()) {
    case SystemKind::Pitchfork:
      for (double x : {0.1, 0.2, 0.3, 0.4, 0.5}) out.push_back(StateVec::Constant(1, x));
      break;
    case SystemKind::Duffing:
    case SystemKind::VanDerPol:
      for (double x : {0.1, 0.2, 0.3, 0.4, 0.5}) out.push_back(s2(x, 0.0));
      break;
    case SystemKind::LotkaVolterra:
      out = {s2(0.0, 0.1), s2(0.1, 0.0), s2(0.0, 0.5), s2(0.5, 0.0), s2(1.1, 1.1)};
      break;
  }
  return out;
}

std::vector<Job> expand_jobs(const ExperimentSpec& spec) {
  std::vector<Job> jobs;
  for (const auto& ic : spec.ics)
    for (double T : spec.times)
      for (const auto& arm : spec.arms)
        for (int rep = 0; rep < spec.seeds; ++rep) {
          TrainingConfig cfg = spec.base;
          cfg.system = spec.system;
          cfg.x0 = ic;
          cfg.T = T;
          cfg.seed = run_seed(spec.master_seed, spec.system, ic, T, arm.name, rep);
          cfg.regularization = arm.regularization;
          jobs.push_back({std::move(cfg), arm.name});
        }
  return jobs;
}

std::vector<CellResult> aggregate_cells(const ExperimentSpec& spec, const std::vector<RunRecord>& records) {
  std::vector<CellResult> cells;
  std::size_t k = 0;
  for (const auto& ic : spec.ics)
    for (double T : spec.times)
      for (const auto& arm : spec.arms) {
        CellResult cell{spec.system, ic, T, arm.name, 0, 0};
        for (int rep = 0; rep < spec.seeds; ++rep, ++k) {
          ++cell.runs;
          if (records.at(k).success) ++cell.successes;
        }
        cells.push_back(std::move(cell));
      }
  return cells;
}

ExperimentResult run_success_matrix(const ExperimentSpec& spec, const RunProgress& progress) {
  spec.validate();
  ExperimentResult result;
  if (spec.seeds == 0) return result;
  result.records = run_jobs(expand_jobs(spec), spec.workers, spec.criterion, false, progress);
  result.cells = aggregate_cells(spec, result.records);
  return result;
}

ExperimentResult run_heatmap(ExperimentSpec spec, const RunProgress& progress) {
  spec.system = "pitchfork";
  return run_success_matrix(spec, progress);
}

SweepParam parse_sweep_param(std::string_view name) {
  if (name == "c0") return SweepParam::C0;
  if (name == "epsilon" || name == "eps") return SweepParam::Epsilon;
  if (name == "gamma") return SweepParam::Gamma;
  throw std::invalid_argument("unknown sweep parameter '" + std::string(name) + "' (c0, epsilon, gamma)");
}

std::string_view to_string(SweepParam p) {
  switch (p) {
    case SweepParam::C0: return "c0";
    case SweepParam::Epsilon: return "epsilon";
    case SweepParam::Gamma: return "gamma";
  }
  return "?";
}

namespace {

std::vector<Job> replicate_jobs(const ExperimentSpec& spec, const std::string& arm,
                                const std::optional<RegularizationConfig>& reg) {
  ExperimentSpec one = spec;
  one.ics = {spec.ics.at(0)};
  one.times = {spec.times.at(0)};
  one.arms = {Arm{arm, reg}};
  return expand_jobs(one);
}

int count_successes(const std::vector<RunRecord>& records, std::size_t begin, std::size_t count) {
  int s = 0;
  for (std::size_t i = begin; i < begin + count; ++i) s += records[i].success ? 1 : 0;
  return s;
}

}  // namespace

SweepResult run_sensitivity_sweep(SweepParam param, const std::vector<double>& values, const ExperimentSpec& spec,
                                  RegularizationConfig base_reg, bool include_baseline, const RunProgress& progress) {
  spec.validate();
  if (spec.ics.empty() || spec.times.empty()) throw std::invalid_argument("sweep needs one IC and one T");
  SweepResult result{param, {}, {}};
  std::vector<Job> jobs;
  if (include_baseline) {
    auto j = replicate_jobs(spec, "unmodified", std::nullopt);
    jobs.insert(jobs.end(), j.begin(), j.end());
    result.rows.push_back({"unmodified", std::numeric_limits<double>::quiet_NaN(), spec.seeds, 0});
  }
  for (double v : values) {
    RegularizationConfig reg = base_reg;
    switch (param) {
      case SweepParam::C0: reg.c0 = v; break;
      case SweepParam::Epsilon: reg.epsilon = v; break;
      case SweepParam::Gamma: reg.gamma = v; break;
    }
    reg.validate();
    const std::string label = std::string(to_string(param)) + "=" + format_double(v);
    auto j = replicate_jobs(spec, label, reg);
    jobs.insert(jobs.end(), j.begin(), j.end());
    result.rows.push_back({label, v, spec.seeds, 0});
  }
  result.records = run_jobs(jobs, spec.workers, spec.criterion, false, progress);
  const auto per_row = static_cast<std::size_t>(spec.seeds);
  for (std::size_t r = 0; r < result.rows.size(); ++r)
    result.rows[r].successes = count_successes(result.records, r * per_row, per_row);
  return result;
}

std::vector<RegularizationConfig> default_ablation_grid() {
  return {RegularizationConfig{0.01, 0.1, 0.5, true}, RegularizationConfig{0.01, 1.0, 0.5, true},
          RegularizationConfig{0.01, 10.0, 0.5, true}};
}

const AblationArmResult& AblationResult::arm(std::string_view name) const {
  for (const auto& a : arms)
    if (a.arm == name) return a;
  throw std::out_of_range("no ablation arm " + std::string(name));
}

AblationResult run_ablation(const ExperimentSpec& spec, const std::vector<RegularizationConfig>& grid,
                            const RunProgress& progress) {
  spec.validate();
  if (spec.ics.empty() || spec.times.empty()) throw std::invalid_argument("ablation needs one IC and one T");
  AblationResult result;
  std::vector<Job> jobs = replicate_jobs(spec, "none", std::nullopt);
  result.arms.push_back({"none", {}, {}, 0.0, std::nullopt});
  for (const bool include_ls : {false, true}) {
    AblationArmResult arm{include_ls ? "se-x-ls" : "se-only", {}, {}, 0.0, std::nullopt};
    for (std::size_t g = 0; g < grid.size(); ++g) {
      RegularizationConfig reg = grid[g];
      reg.include_ls = include_ls;
      reg.validate();
      arm.grid.push_back(reg);
      auto j = replicate_jobs(spec, arm.arm + "#" + std::to_string(g), reg);
      jobs.insert(jobs.end(), j.begin(), j.end());
    }
    result.arms.push_back(std::move(arm));
  }
  result.records = run_jobs(jobs, spec.workers, spec.criterion, false, progress);

  const auto per = static_cast<std::size_t>(spec.seeds);
  std::size_t offset = 0;
  for (auto& arm : result.arms) {
    const std::size_t points = arm.grid.empty() ? 1 : arm.grid.size();
    for (std::size_t g = 0; g < points; ++g, offset += per) {
      const double rate = per == 0 ? 0.0 : static_cast<double>(count_successes(result.records, offset, per)) / per;
      arm.rates.push_back(rate);
      if (g == 0 || rate > arm.best_rate) {
        arm.best_rate = rate;
        if (!arm.grid.empty()) arm.best = arm.grid[g];
      }
    }
  }
  return result;
}

// ---- phase portraits --------------------------------------------------------

std::vector<StateVec> IcSampler::sample(Rng& rng, int dimension) const {
  std::vector<StateVec> out;
  out.reserve(static_cast<std::size_t>(count));
  const double sd = std::sqrt(variance);
  for (int i = 0; i < count; ++i) {
    StateVec x(dimension);
    for (int k = 0; k < dimension; ++k) {
      const double c = center.size() > k ? center(k) : 0.0;
      x(k) = kind == Kind::Gaussian ? c + sd * rng.normal() : rng.uniform(lo, hi);
    }
    out.push_back(std::move(x));
  }
  return out;
}

double PortraitResult::success_rate(const std::string& arm) const {
  int runs = 0, ok = 0;
  for (const auto& r : records)
    if (r.arm == arm) {
      ++runs;
      ok += r.success ? 1 : 0;
    }
  return runs == 0 ? 0.0 : static_cast<double>(ok) / runs;
}

std::vector<VectorFieldSample> vector_field_grid(const SystemDynamics& system, double x_min, double x_max,
                                                 double y_min, double y_max, int lattice) {
  if (system.dimension() != 2) throw DimensionError("vector_field_grid: needs a planar system");
  if (lattice < 2) throw std::invalid_argument("vector_field_grid: lattice must be >= 2");
  std::vector<VectorFieldSample> out;
  out.reserve(static_cast<std::size_t>(lattice * lattice));
  for (int j = 0; j < lattice; ++j)
    for (int i = 0; i < lattice; ++i) {
      StateVec p(2);
      p << x_min + (x_max - x_min) * i / (lattice - 1), y_min + (y_max - y_min) * j / (lattice - 1);
      out.push_back({p, system.f(p)});
    }
  return out;
}

PortraitResult run_phase_portrait(const ExperimentSpec& spec, const IcSampler& sampler, double T,
                                  const RunProgress& progress) {
  spec.validate();
  const SystemDynamics system = SystemDynamics::from_name(spec.system);
  if (system.dimension() != 2) throw DimensionError("phase portraits need a planar system");
  PortraitResult result;
  result.system = spec.system;
  result.T = T;

  // ICs whose reference solution blows up within T cannot be scored; they are
  // redrawn.
  Rng rng(derive_seed(spec.master_seed, "portrait|" + spec.system));
  IcSampler one = sampler;
  one.count = 1;
  int attempts = 0;
  while (static_cast<int>(result.ics.size()) < sampler.count) {
    if (++attempts > 1000 * std::max(1, sampler.count))
      throw std::runtime_error("run_phase_portrait: could not draw ICs with bounded reference solutions");
    StateVec ic = one.sample(rng, 2).front();
    try {
      result.references.push_back(reference_solution(system, ic, T, spec.criterion.spacing));
    } catch (const IntegrationBlowup&) {
      continue;
    }
    result.ics.push_back(std::move(ic));
  }

  std::vector<Job> jobs;
  for (const auto& arm : spec.arms)
    for (const auto& ic : result.ics) {
      TrainingConfig cfg = spec.base;
      cfg.system = spec.system;
      cfg.x0 = ic;
      cfg.T = T;
      cfg.seed = run_seed(spec.master_seed, spec.system, ic, T, arm.name, 0);
      cfg.regularization = arm.regularization;
      jobs.push_back({std::move(cfg), arm.name});
    }
  result.records = run_jobs(jobs, spec.workers, spec.criterion, true, progress);

  // Window: ICs, references and fixed points, padded.
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  auto include = [&](double x, double y) {
    x0 = std::min(x0, x);
    x1 = std::max(x1, x);
    y0 = std::min(y0, y);
    y1 = std::max(y1, y);
  };
  for (const auto& ref : result.references)
    for (Eigen::Index i = 0; i < ref.size(); ++i) include(ref.states(0, i), ref.states(1, i));
  for (const auto& fp : system.fixed_points()) include(fp.location(0), fp.location(1));
  const double px = 0.1 * std::max(x1 - x0, 1e-3), py = 0.1 * std::max(y1 - y0, 1e-3);
  result.x_min = x0 - px;
  result.x_max = x1 + px;
  result.y_min = y0 - py;
  result.y_max = y1 + py;
  result.field = vector_field_grid(system, result.x_min, result.x_max, result.y_min, result.y_max, 25);
  return result;
}

// ---- diagnosis and export ---------------------------------------------------

FailureDiagnosis diagnose_failures(const std::vector<RunRecord>& records, double radius) {
  FailureDiagnosis d;
  for (const auto& r : records) {
    if (r.success) continue;
    ++d.failures;
    if (!r.diverged && r.nearest_fp && r.nearest_fp->classification != Stability::AsymptoticallyStable &&
        r.nearest_fp_dist <= radius)
      ++d.near_unstable;
  }
  return d;
}

ExportFormat parse_export_format(std::string_view name) {
  if (name == "csv") return ExportFormat::Csv;
  if (name == "json-lines" || name == "jsonl") return ExportFormat::JsonLines;
  if (name == "svg") return ExportFormat::Svg;
  throw std::invalid_argument("unknown export format '" + std::string(name) + "'");
}

std::string results_csv(const std::vector<RunRecord>& records, const ExportOptions& options) {
  std::ostringstream out;
  out << kResultsCsvHeader << '\n';
  for (const auto& r : records) {
    out << r.config.system << ',' << format_state(r.config.x0) << ',' << format_double(r.config.T) << ',' << r.arm
        << ',' << r.config.seed << ',' << r.epochs_completed << ',' << format_double(r.relative_error) << ','
        << (r.success ? 1 : 0) << ',' << (r.diverged ? 1 : 0) << ','
        << (r.nearest_fp ? format_state(r.nearest_fp->location) : std::string()) << ','
        << format_double(r.nearest_fp_dist) << ',';
    if (options.include_wall_time) out << format_double(r.wall_seconds);
    out << '\n';
  }
  return out.str();
}

namespace {

nlohmann::json state_json(const StateVec& x) {
  nlohmann::json a = nlohmann::json::array();
  for (Eigen::Index i = 0; i < x.size(); ++i) a.push_back(x(i));
  return a;
}

nlohmann::json config_json(const TrainingConfig& c) {
  nlohmann::json j;
  j["system"] = c.system;
  j["x0"] = state_json(c.x0);
  j["T"] = c.T;
  j["n_collocation"] = c.n_collocation;
  j["n_epochs"] = c.n_epochs;
  j["learning_rate"] = c.learning_rate;
  j["seed"] = c.seed;
  j["hidden"] = c.architecture.hidden;
  j["constraint"] = c.constraint_mode().is_hard() ? "hard" : "soft";
  if (c.regularization) {
    j["regularization"] = {{"epsilon", c.regularization->epsilon},
                           {"c0", c.regularization->c0},
                           {"gamma", c.regularization->gamma},
                           {"include_ls", c.regularization->include_ls}};
  } else {
    j["regularization"] = nullptr;
  }
  return j;
}

}  // namespace

std::string results_json_lines(const std::vector<RunRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    nlohmann::json j;
    j["config"] = config_json(r.config);
    j["arm"] = r.arm;
    j["relative_error"] = r.relative_error;
    j["success"] = r.success;
    j["diverged"] = r.diverged;
    if (r.nearest_fp) {
      j["nearest_fp"] = {{"location", state_json(r.nearest_fp->location)},
                         {"classification", std::string(to_string(r.nearest_fp->classification))}};
    } else {
      j["nearest_fp"] = nullptr;
    }
    j["nearest_fp_dist"] = r.nearest_fp_dist;
    j["final_state"] = state_json(r.final_state);
    j["epochs_completed"] = r.epochs_completed;
    j["wall_seconds"] = r.wall_seconds;
    nlohmann::json hist = nlohmann::json::array();
    for (const auto& h : r.history)
      hist.push_back({{"epoch", h.epoch},
                      {"l_ic", h.loss.l_ic},
                      {"l_f", h.loss.l_f},
                      {"r", h.loss.r},
                      {"c", h.loss.c},
                      {"total", h.loss.total}});
    j["milestones"] = std::move(hist);
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::string cells_csv(const std::vector<CellResult>& cells) {
  std::ostringstream out;
  out << "system,ic,T,arm,runs,successes,rate\n";
  for (const auto& c : cells)
    out << c.system << ',' << format_state(c.ic) << ',' << format_double(c.T) << ',' << c.arm << ',' << c.runs << ','
        << c.successes << ',' << format_double(c.rate()) << '\n';
  return out.str();
}

std::string sweep_csv(const SweepResult& result) {
  std::ostringstream out;
  out << "param,label,value,runs,successes,rate\n";
  for (const auto& r : result.rows)
    out << to_string(result.param) << ',' << r.label << ','
        << (std::isnan(r.value) ? std::string() : format_double(r.value)) << ',' << r.runs << ',' << r.successes
        << ',' << format_double(r.rate()) << '\n';
  return out.str();
}

std::string ablation_csv(const AblationResult& result) {
  std::ostringstream out;
  out << "arm,grid_index,epsilon,c0,gamma,rate,best\n";
  for (const auto& a : result.arms) {
    if (a.grid.empty()) {
      out << a.arm << ",,,,," << format_double(a.best_rate) << ",1\n";
      continue;
    }
    for (std::size_t g = 0; g < a.grid.size(); ++g) {
      const auto& reg = a.grid[g];
      const bool best = a.best && *a.best == reg;
      out << a.arm << ',' << g << ',' << format_double(reg.epsilon) << ',' << format_double(reg.c0) << ','
          << format_double(reg.gamma) << ',' << format_double(a.rates[g]) << ',' << (best ? 1 : 0) << '\n';
    }
  }
  return out.str();
}

std::string heatmap_csv(const ExperimentSpec& spec, const ExperimentResult& result) {
  std::ostringstream out;
  out << "arm,ic";
  for (double T : spec.times) out << ",T=" << format_double(T);
  out << '\n';
  if (result.cells.empty()) return out.str();
  for (const auto& arm : spec.arms)
    for (const auto& ic : spec.ics) {
      out << arm.name << ',' << format_state(ic);
      for (double T : spec.times) out << ',' << format_double(result.cell(ic, T, arm.name).rate());
      out << '\n';
    }
  return out.str();
}

std::string vector_field_csv(const std::vector<VectorFieldSample>& field) {
  std::ostringstream out;
  out << "x,y,fx,fy\n";
  for (const auto& s : field)
    out << format_double17(s.at(0)) << ',' << format_double17(s.at(1)) << ',' << format_double17(s.f(0)) << ','
        << format_double17(s.f(1)) << '\n';
  return out.str();
}

void export_results(const std::vector<RunRecord>& records, const std::filesystem::path& path, ExportFormat format,
                    const ExportOptions& options) {
  switch (format) {
    case ExportFormat::Csv:
      if (records.empty()) throw std::invalid_argument("export_results: no records to write");
      write_file_atomic(path, results_csv(records, options));
      break;
    case ExportFormat::JsonLines:
      write_file_atomic(path, results_json_lines(records));
      break;
    case ExportFormat::Svg:
      if (records.empty()) throw std::invalid_argument("export_results: no records to write");
      write_file_atomic(path, render_records_svg(records));
      break;
  }
}

}  // namespace pinnstab
