#pragma once

// Experiment orchestration: success metric, per-run evaluation, the
// success-rate matrix, sensitivity sweeps, ablation, heatmap and phase
// portraits, plus result export.

#include "pinnstab/network.hpp"
#include "pinnstab/reference.hpp"
#include "pinnstab/systems.hpp"
#include "pinnstab/training.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace pinnstab {

struct SuccessCriterion {
  double threshold = 0.15;
  double spacing = 0.01;
};

/// Training budget. `full` is the complete protocol, `fast` the desk-scale
/// one used for quick checks.
struct Profile {
  int n_epochs = 25000;
  int n_collocation = 1024;

  static Profile full() { return {25000, 1024}; }
  static Profile fast() { return {10000, 512}; }
};

/// One training arm: a name and its regularization (none for "unmodified").
struct Arm {
  std::string name;
  std::optional<RegularizationConfig> regularization;

  static Arm unmodified() { return {"unmodified", std::nullopt}; }
  static Arm regularized(RegularizationConfig reg = {}) { return {"regularized", reg}; }
  static Arm se_only(RegularizationConfig reg = {}) {
    reg.include_ls = false;
    return {"se-only", reg};
  }
};

struct RunRecord {
  TrainingConfig config;
  std::string arm;
  double relative_error = 0.0;
  bool success = false;
  bool diverged = false;
  /// Nearest cataloged fixed point to the final-time predicted state.
  std::optional<FixedPoint> nearest_fp;
  double nearest_fp_dist = 0.0;
  StateVec final_state;
  int epochs_completed = 0;
  double wall_seconds = 0.0;
  std::vector<HistoryEntry> history;
  /// Predicted trajectory on the evaluation grid, kept only on request.
  std::optional<Trajectory> trajectory;
};

/// sqrt(sum_i |pred_i - ref_i|^2) / sqrt(sum_i |ref_i|^2).
/// Throws std::invalid_argument on mismatched grids and std::domain_error
/// for an all-zero reference.
double relative_l2_error(const Trajectory& pred, const Trajectory& ref);

/// Candidate evaluated on the equidistant grid over [0, T].
Trajectory predict_trajectory(const NetworkParams& params, const ConstraintMode& mode, double T,
                              double spacing = 0.01);

/// Scores trained parameters against the reference solution.
RunRecord evaluate_run(const NetworkParams& params, const TrainingConfig& config,
                       const SuccessCriterion& criterion = {}, bool keep_trajectory = false);
/// Same for a finished training run; diverged runs are failures.
RunRecord evaluate_run(const TrainResult& result, const TrainingConfig& config,
                       const SuccessCriterion& criterion = {}, bool keep_trajectory = false);

/// Trains and scores a single configuration.
RunRecord run_one(const TrainingConfig& config, const std::string& arm, const SuccessCriterion& criterion = {},
                  bool keep_trajectory = false);

/// Runs `configs` on `workers` threads. Output order matches input order
/// regardless of scheduling.
struct Job {
  TrainingConfig config;
  std::string arm;
};
using RunProgress = std::function<void(std::size_t done, std::size_t total, const RunRecord&)>;
std::vector<RunRecord> run_jobs(const std::vector<Job>& jobs, int workers, const SuccessCriterion& criterion = {},
                                bool keep_trajectories = false, const RunProgress& progress = {});

/// Textual form of an IC, e.g. "0.1;0".
std::string format_state(const StateVec& x);

/// Per-run seed for a cell replicate.
std::uint64_t run_seed(std::uint64_t master_seed, const std::string& system, const StateVec& ic, double T,
                       const std::string& arm, int replicate);

struct ExperimentSpec {
  std::string system = "pitchfork";
  std::vector<StateVec> ics;
  std::vector<double> times;
  int seeds = 10;
  std::vector<Arm> arms = {Arm::unmodified(), Arm::regularized()};
  /// Budget, learning rate and architecture for every run; system, x0, T,
  /// seed and regularization are filled per run.
  TrainingConfig base;
  std::uint64_t master_seed = 0;
  int workers = 1;
  SuccessCriterion criterion;

  void validate() const;
};

struct CellResult {
  std::string system;
  StateVec ic;
  double T = 0.0;
  std::string arm;
  int runs = 0;
  int successes = 0;

  double rate() const { return runs == 0 ? 0.0 : static_cast<double>(successes) / runs; }
};

struct ExperimentResult {
  std::vector<RunRecord> records;
  std::vector<CellResult> cells;

  /// Success rate of the cell (ic, T, arm); throws std::out_of_range if absent.
  const CellResult& cell(const StateVec& ic, double T, const std::string& arm) const;
};

/// Benchmark initial conditions of the success-rate matrix for `system`.
std::vector<StateVec> table_ics(const std::string& system);

/// Jobs for every (ic, T, arm, replicate), in that nesting order.
std::vector<Job> expand_jobs(const ExperimentSpec& spec);
/// Groups records (in expand_jobs order) into cells.
std::vector<CellResult> aggregate_cells(const ExperimentSpec& spec, const std::vector<RunRecord>& records);

ExperimentResult run_success_matrix(const ExperimentSpec& spec, const RunProgress& progress = {});

/// The success-rate grid over simulation times for the pitchfork system.
ExperimentResult run_heatmap(ExperimentSpec spec, const RunProgress& progress = {});

enum class SweepParam { C0, Epsilon, Gamma };
SweepParam parse_sweep_param(std::string_view name);
std::string_view to_string(SweepParam p);

struct SweepRow {
  std::string label;  // "unmodified" or the swept value
  double value = 0.0;
  int runs = 0;
  int successes = 0;
  double rate() const { return runs == 0 ? 0.0 : static_cast<double>(successes) / runs; }
};

struct SweepResult {
  SweepParam param;
  std::vector<SweepRow> rows;  // first row: unmodified baseline (if requested)
  std::vector<RunRecord> records;
};

/// Varies one hyperparameter of `base_reg` over `values`. `spec` supplies the
/// system, the single IC and T, seeds and budget; its arms are ignored.
SweepResult run_sensitivity_sweep(SweepParam param, const std::vector<double>& values, const ExperimentSpec& spec,
                                  RegularizationConfig base_reg = {}, bool include_baseline = true,
                                  const RunProgress& progress = {});

struct AblationArmResult {
  std::string arm;  // "none", "se-only", "se-x-ls"
  /// Per grid point (empty for "none").
  std::vector<RegularizationConfig> grid;
  std::vector<double> rates;
  double best_rate = 0.0;
  std::optional<RegularizationConfig> best;
};

struct AblationResult {
  std::vector<AblationArmResult> arms;
  std::vector<RunRecord> records;

  const AblationArmResult& arm(std::string_view name) const;
};

/// Three points varying c0 around the default regularization.
std::vector<RegularizationConfig> default_ablation_grid();

/// Unregularized, R_SE-only and R_SE x R_LS arms; each regularized arm
/// reports the best success rate over `grid`.
AblationResult run_ablation(const ExperimentSpec& spec, const std::vector<RegularizationConfig>& grid,
                            const RunProgress& progress = {});

// ---- phase portraits --------------------------------------------------------

struct IcSampler {
  enum class Kind { Gaussian, Uniform };
  Kind kind = Kind::Gaussian;
  StateVec center = StateVec::Zero(2);
  double variance = 0.25;     // Gaussian: covariance variance * I
  double lo = -1.0, hi = 4.0;  // Uniform box per axis
  int count = 20;

  static IcSampler gaussian(int count = 20) { return {Kind::Gaussian, StateVec::Zero(2), 0.25, -1.0, 4.0, count}; }
  static IcSampler uniform_box(double lo = -1.0, double hi = 4.0, int count = 50) {
    return {Kind::Uniform, StateVec::Zero(2), 0.25, lo, hi, count};
  }
  std::vector<StateVec> sample(Rng& rng, int dimension) const;
};

struct VectorFieldSample {
  StateVec at;
  StateVec f;
};

struct PortraitResult {
  std::string system;
  double T = 0.0;
  std::vector<StateVec> ics;
  /// Records with kept trajectories, arm-major.
  std::vector<RunRecord> records;
  std::vector<Trajectory> references;  // one per IC
  std::vector<VectorFieldSample> field;
  double x_min = 0.0, x_max = 0.0, y_min = 0.0, y_max = 0.0;

  double success_rate(const std::string& arm) const;
};

/// Vector field on a lattice x lattice grid over the window.
std::vector<VectorFieldSample> vector_field_grid(const SystemDynamics& system, double x_min, double x_max,
                                                 double y_min, double y_max, int lattice = 25);

/// Samples ICs from `sampler` (seeded by spec.master_seed), trains one network
/// per IC and arm with simulation time T.
PortraitResult run_phase_portrait(const ExperimentSpec& spec, const IcSampler& sampler, double T = 12.5,
                                  const RunProgress& progress = {});

// ---- diagnosis and export ---------------------------------------------------

struct FailureDiagnosis {
  int failures = 0;
  /// Failures ending within `radius` of an unstable or saddle fixed point.
  int near_unstable = 0;
  double fraction() const { return failures == 0 ? 1.0 : static_cast<double>(near_unstable) / failures; }
};

FailureDiagnosis diagnose_failures(const std::vector<RunRecord>& records, double radius = 0.1);

enum class ExportFormat { Csv, JsonLines, Svg };
ExportFormat parse_export_format(std::string_view name);

/// Header of the per-run results CSV.
inline constexpr const char* kResultsCsvHeader =
    "system,ic,T,arm,seed,epochs,rel_error,success,diverged,nearest_fp,nearest_fp_dist,wall_seconds";

struct ExportOptions {
  /// Wall-clock seconds vary between invocations; when false the CSV column
  /// is left empty so reruns are byte-identical. JSON-lines always has it.
  bool include_wall_time = false;
};

std::string results_csv(const std::vector<RunRecord>& records, const ExportOptions& options = {});
std::string results_json_lines(const std::vector<RunRecord>& records);
std::string cells_csv(const std::vector<CellResult>& cells);
std::string sweep_csv(const SweepResult& result);
std::string ablation_csv(const AblationResult& result);
/// Rows: arm and IC; columns: simulation times.
std::string heatmap_csv(const ExperimentSpec& spec, const ExperimentResult& result);
std::string vector_field_csv(const std::vector<VectorFieldSample>& field);

/// Writes records atomically. csv/svg require at least one record.
void export_results(const std::vector<RunRecord>& records, const std::filesystem::path& path, ExportFormat format,
                    const ExportOptions& options = {});

// SVG rendering (svg.cpp).

/// Phase-plane plot (or x(t) for scalar systems) of every record carrying a
/// trajectory: one polyline each, green on success, red on failure.
std::string render_records_svg(const std::vector<RunRecord>& records, const std::string& title = {});
/// Portrait with vector-field arrows and fixed points, one panel per arm.
std::string render_portrait_svg(const PortraitResult& portrait);

}  // namespace pinnstab
