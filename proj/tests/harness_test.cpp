#include "pinnstab/config.hpp"
#include "pinnstab/harness.hpp"
#include "pinnstab/io.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace pinnstab;
namespace fs = std::filesystem;

namespace {

StateVec vec(double a) { return StateVec::Constant(1, a); }
StateVec vec(double a, double b) {
  StateVec v(2);
  v << a, b;
  return v;
}

Trajectory scalar_traj(std::vector<double> values) {
  Trajectory t;
  for (std::size_t i = 0; i < values.size(); ++i) t.times.push_back(0.01 * static_cast<double>(i));
  t.states = Eigen::Map<Eigen::RowVectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
  return t;
}

/// Tiny budget so harness plumbing runs in milliseconds.
ExperimentSpec tiny_spec(const std::string& system, StateVec ic, double T) {
  ExperimentSpec spec;
  spec.system = system;
  spec.ics = {std::move(ic)};
  spec.times = {T};
  spec.seeds = 2;
  spec.base.architecture.hidden = {6, 6};
  spec.base.n_collocation = 16;
  spec.base.n_epochs = 5;
  spec.master_seed = 99;
  return spec;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

int count(const std::string& haystack, const std::string& needle) {
  int n = 0;
  for (auto pos = haystack.find(needle); pos != std::string::npos; pos = haystack.find(needle, pos + 1)) ++n;
  return n;
}

fs::path temp_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("pinnstab_test_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST(RelativeError, Examples) {
  const Trajectory ref = scalar_traj({1.0, 2.0, 2.0});
  EXPECT_EQ(relative_l2_error(ref, ref), 0.0);
  EXPECT_DOUBLE_EQ(relative_l2_error(scalar_traj({2.0, 4.0, 4.0}), ref), 1.0);
  // constant offset c: c sqrt(N) / |ref| = 0.5 * sqrt(3) / 3
  EXPECT_DOUBLE_EQ(relative_l2_error(scalar_traj({1.5, 2.5, 2.5}), ref), 0.5 * std::sqrt(3.0) / 3.0);
}

TEST(RelativeError, ScaleInvariant) {
  const Trajectory ref = scalar_traj({0.3, -0.1, 0.7, 1.2});
  const Trajectory pred = scalar_traj({0.2, 0.1, 0.9, 1.0});
  const double e = relative_l2_error(pred, ref);
  for (double k : {-3.0, 1e-4, 250.0}) {
    Trajectory p = pred, r = ref;
    p.states *= k;
    r.states *= k;
    EXPECT_NEAR(relative_l2_error(p, r), e, 1e-14);
  }
}

TEST(RelativeError, Errors) {
  EXPECT_THROW(relative_l2_error(scalar_traj({1.0}), scalar_traj({1.0, 2.0})), std::invalid_argument);
  Trajectory shifted = scalar_traj({1.0, 2.0});
  shifted.times[1] = 0.02;
  EXPECT_THROW(relative_l2_error(shifted, scalar_traj({1.0, 2.0})), std::invalid_argument);
  EXPECT_THROW(relative_l2_error(scalar_traj({1.0, 0.0}), scalar_traj({0.0, 0.0})), std::domain_error);
}

TEST(EvaluateRun, ConstantCandidateAtUnstablePoint) {
  TrainingConfig cfg;
  cfg.system = "duffing";
  cfg.x0 = vec(0.1, 0.0);
  cfg.T = 5.0;
  NetworkParams zero{cfg.network(), Eigen::VectorXd::Zero(cfg.network().parameter_count())};
  const RunRecord rec = evaluate_run(zero, cfg);
  EXPECT_FALSE(rec.success);
  EXPECT_FALSE(rec.diverged);
  ASSERT_TRUE(rec.nearest_fp);
  EXPECT_EQ(rec.nearest_fp->classification, Stability::Saddle);
  EXPECT_EQ(rec.nearest_fp_dist, 0.0);
  EXPECT_EQ(rec.final_state, vec(0.0, 0.0));
}

TEST(EvaluateRun, SuccessIffBelowThreshold) {
  TrainingConfig cfg;
  cfg.system = "pitchfork";
  cfg.x0 = vec(1.0);
  cfg.T = 3.0;
  // Hard constraint with a zero network gives x == x0 == 1, the exact solution.
  NetworkParams zero{cfg.network(), Eigen::VectorXd::Zero(cfg.network().parameter_count())};
  const RunRecord rec = evaluate_run(zero, cfg, {}, true);
  EXPECT_EQ(rec.relative_error, 0.0);
  EXPECT_TRUE(rec.success);
  ASSERT_TRUE(rec.trajectory);
  EXPECT_EQ(rec.trajectory->size(), 301);
  SuccessCriterion strict;
  strict.threshold = 0.0;
  EXPECT_FALSE(evaluate_run(zero, cfg, strict).success);
}

TEST(EvaluateRun, DivergedRunIsFailure) {
  TrainingConfig cfg;
  TrainResult diverged{init_params(cfg.network(), 1), {}, true, 17, 0.5};
  const RunRecord rec = evaluate_run(diverged, cfg);
  EXPECT_TRUE(rec.diverged);
  EXPECT_FALSE(rec.success);
  EXPECT_EQ(rec.epochs_completed, 17);
  EXPECT_TRUE(std::isnan(rec.relative_error));
}

TEST(Seeds, DependOnEveryField) {
  const auto base = run_seed(1, "duffing", vec(0.1, 0.0), 15, "regularized", 0);
  EXPECT_EQ(base, run_seed(1, "duffing", vec(0.1, 0.0), 15, "regularized", 0));
  EXPECT_NE(base, run_seed(2, "duffing", vec(0.1, 0.0), 15, "regularized", 0));
  EXPECT_NE(base, run_seed(1, "vanderpol", vec(0.1, 0.0), 15, "regularized", 0));
  EXPECT_NE(base, run_seed(1, "duffing", vec(0.2, 0.0), 15, "regularized", 0));
  EXPECT_NE(base, run_seed(1, "duffing", vec(0.1, 0.0), 14, "regularized", 0));
  EXPECT_NE(base, run_seed(1, "duffing", vec(0.1, 0.0), 15, "unmodified", 0));
  EXPECT_NE(base, run_seed(1, "duffing", vec(0.1, 0.0), 15, "regularized", 1));
}

TEST(SuccessMatrix, ZeroSeedsMeansNoRuns) {
  ExperimentSpec spec = tiny_spec("pitchfork", vec(0.3), 2.0);
  spec.seeds = 0;
  const auto r = run_success_matrix(spec);
  EXPECT_TRUE(r.records.empty());
  EXPECT_TRUE(r.cells.empty());
}

TEST(SuccessMatrix, EmptyTimeRangeGivesEmptyGrid) {
  ExperimentSpec spec = tiny_spec("pitchfork", vec(0.3), 2.0);
  spec.times.clear();
  const auto r = run_heatmap(spec);
  EXPECT_TRUE(r.cells.empty());
  EXPECT_EQ(heatmap_csv(spec, r), "arm,ic\n");
}

TEST(SuccessMatrix, CellsAndOrdering) {
  ExperimentSpec spec = tiny_spec("pitchfork", vec(0.3), 2.0);
  spec.ics.push_back(vec(0.5));
  spec.times.push_back(3.0);
  const auto r = run_success_matrix(spec);
  ASSERT_EQ(r.records.size(), 2u * 2u * 2u * 2u);
  ASSERT_EQ(r.cells.size(), 8u);
  EXPECT_EQ(r.records[0].config.x0, vec(0.3));
  EXPECT_EQ(r.records[0].config.T, 2.0);
  EXPECT_EQ(r.records[0].arm, "unmodified");
  EXPECT_EQ(r.records[2].arm, "regularized");
  EXPECT_TRUE(r.records[2].config.regularization);
  EXPECT_EQ(r.records[4].config.T, 3.0);
  for (const auto& c : r.cells) {
    EXPECT_EQ(c.runs, 2);
    EXPECT_GE(c.rate(), 0.0);
    EXPECT_LE(c.rate(), 1.0);
    EXPECT_EQ(c.rate(), c.successes / 2.0);
  }
  EXPECT_EQ(r.cell(vec(0.5), 3.0, "regularized").arm, "regularized");
  EXPECT_THROW(r.cell(vec(0.4), 3.0, "regularized"), std::out_of_range);
}

TEST(SuccessMatrix, ReproducibleAcrossWorkerCounts) {
  ExperimentSpec spec = tiny_spec("vanderpol", vec(0.1, 0.0), 2.0);
  const auto a = run_success_matrix(spec);
  spec.workers = 3;
  const auto b = run_success_matrix(spec);
  EXPECT_EQ(results_csv(a.records), results_csv(b.records));
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    EXPECT_EQ(a.records[i].relative_error, b.records[i].relative_error);
    EXPECT_EQ(a.records[i].final_state, b.records[i].final_state);
  }
}

TEST(Sweep, OneRowPerValuePlusBaseline) {
  const ExperimentSpec spec = tiny_spec("duffing", vec(0.01, 0.0), 2.0);
  const auto r = run_sensitivity_sweep(SweepParam::C0, {0.1, 10.0}, spec);
  ASSERT_EQ(r.rows.size(), 3u);
  EXPECT_EQ(r.rows[0].label, "unmodified");
  EXPECT_EQ(r.rows[2].label, "c0=10");
  EXPECT_EQ(r.records.size(), 6u);
  EXPECT_EQ(r.records[4].config.regularization->c0, 10.0);
  EXPECT_EQ(r.records[4].config.regularization->epsilon, 0.01);
  EXPECT_EQ(count(sweep_csv(r), "\n"), 4);
  EXPECT_THROW(run_sensitivity_sweep(SweepParam::Epsilon, {0.0}, spec), std::invalid_argument);
  EXPECT_EQ(parse_sweep_param("eps"), SweepParam::Epsilon);
  EXPECT_THROW(parse_sweep_param("lr"), std::invalid_argument);
}

TEST(Ablation, ArmsAndGrid) {
  ExperimentSpec spec = tiny_spec("duffing", vec(0.01, 0.0), 2.0);
  spec.seeds = 1;
  const auto r = run_ablation(spec, default_ablation_grid());
  ASSERT_EQ(r.arms.size(), 3u);
  EXPECT_EQ(r.arm("none").grid.size(), 0u);
  EXPECT_EQ(r.arm("se-only").rates.size(), 3u);
  EXPECT_FALSE(r.arm("se-only").grid[0].include_ls);
  EXPECT_TRUE(r.arm("se-x-ls").grid[2].include_ls);
  EXPECT_EQ(r.records.size(), 7u);
  EXPECT_THROW(r.arm("other"), std::out_of_range);
  EXPECT_EQ(count(ablation_csv(r), "\n"), 8);
}

TEST(Portrait, SamplesAndField) {
  ExperimentSpec spec = tiny_spec("lotka-volterra", vec(0.1, 0.0), 1.0);
  const auto p = run_phase_portrait(spec, IcSampler::uniform_box(-1.0, 4.0, 3), 1.0);
  ASSERT_EQ(p.ics.size(), 3u);
  EXPECT_EQ(p.records.size(), 6u);
  EXPECT_EQ(p.field.size(), 625u);
  for (const auto& r : p.records) EXPECT_TRUE(r.trajectory);
  EXPECT_LE(p.x_min, 0.0);
  EXPECT_GE(p.x_max, 3.0);
  const std::string svg = render_portrait_svg(p);
  EXPECT_EQ(count(svg, "<polyline"), 6);
  EXPECT_EQ(count(svg, "<circle"), 8);
  EXPECT_THROW(run_phase_portrait(tiny_spec("pitchfork", vec(0.1), 1.0), IcSampler::gaussian(1)), DimensionError);
}

TEST(IcSampler, GaussianMoments) {
  Rng rng(4);
  IcSampler s = IcSampler::gaussian(20000);
  const auto ics = s.sample(rng, 2);
  double m = 0, v = 0;
  for (const auto& x : ics) {
    m += x(0);
    v += x(0) * x(0);
  }
  m /= ics.size();
  v = v / ics.size() - m * m;
  EXPECT_NEAR(m, 0.0, 0.02);
  EXPECT_NEAR(v, 0.25, 0.01);
  const auto box = IcSampler::uniform_box(-1.0, 4.0, 500).sample(rng, 2);
  for (const auto& x : box) {
    EXPECT_GE(x.minCoeff(), -1.0);
    EXPECT_LT(x.maxCoeff(), 4.0);
  }
}

TEST(Diagnosis, CountsFailuresNearUnstablePoints) {
  const SystemDynamics duff(SystemKind::Duffing);
  auto rec = [&](bool success, StateVec end) {
    RunRecord r;
    r.success = success;
    auto [fp, d] = nearest_fixed_point(duff, end);
    r.nearest_fp = *fp;
    r.nearest_fp_dist = d;
    return r;
  };
  std::vector<RunRecord> rs = {rec(true, vec(0.0, 0.0)), rec(false, vec(0.05, 0.0)), rec(false, vec(0.0, 0.2)),
                               rec(false, vec(1.0, 0.0))};
  RunRecord diverged;
  diverged.diverged = true;
  rs.push_back(diverged);
  const auto d = diagnose_failures(rs);
  EXPECT_EQ(d.failures, 4);
  EXPECT_EQ(d.near_unstable, 1);
  EXPECT_DOUBLE_EQ(d.fraction(), 0.25);
  EXPECT_EQ(diagnose_failures({}).fraction(), 1.0);
}

TEST(Export, CsvSchemaAndDeterminism) {
  TrainingConfig cfg;
  cfg.system = "duffing";
  cfg.x0 = vec(0.1, 0.0);
  cfg.T = 2.0;
  NetworkParams zero{cfg.network(), Eigen::VectorXd::Zero(cfg.network().parameter_count())};
  RunRecord rec = evaluate_run(zero, cfg, {}, true);
  rec.arm = "unmodified";
  rec.wall_seconds = 1.25;
  const std::string csv = results_csv({rec});
  EXPECT_EQ(count(csv, "\n"), 2);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), kResultsCsvHeader);
  EXPECT_NE(csv.find("duffing,0.1;0,2,unmodified,0,0,"), std::string::npos);
  EXPECT_EQ(csv.back(), '\n');
  EXPECT_EQ(csv[csv.size() - 2], ',');
  ExportOptions timed;
  timed.include_wall_time = true;
  EXPECT_NE(results_csv({rec}, timed).find(",1.25\n"), std::string::npos);

  const fs::path dir = temp_dir("export");
  export_results({rec}, dir / "a.csv", ExportFormat::Csv);
  export_results({rec}, dir / "b.csv", ExportFormat::Csv);
  EXPECT_EQ(read_file(dir / "a.csv"), read_file(dir / "b.csv"));
  EXPECT_FALSE(fs::exists(dir / "a.csv.tmp"));
  EXPECT_THROW(export_results({}, dir / "c.csv", ExportFormat::Csv), std::invalid_argument);
  EXPECT_THROW(export_results({}, dir / "c.svg", ExportFormat::Svg), std::invalid_argument);

  export_results({rec}, dir / "r.jsonl", ExportFormat::JsonLines);
  const std::string jl = read_file(dir / "r.jsonl");
  EXPECT_EQ(count(jl, "\n"), 1);
  EXPECT_NE(jl.find("\"wall_seconds\":1.25"), std::string::npos);

  export_results({rec, rec}, dir / "r.svg", ExportFormat::Svg);
  const std::string svg = read_file(dir / "r.svg");
  EXPECT_EQ(svg.rfind("<?xml", 0), 0u);
  EXPECT_EQ(count(svg, "<polyline"), 2);
  EXPECT_EQ(count(svg, "<svg"), count(svg, "</svg>"));
  EXPECT_EQ(count(svg, "<g "), count(svg, "</g>"));
  EXPECT_EQ(parse_export_format("jsonl"), ExportFormat::JsonLines);
  EXPECT_THROW(parse_export_format("xml"), std::invalid_argument);
  fs::remove_all(dir);
}

TEST(TableIcs, PublishedRows) {
  EXPECT_EQ(table_ics("pitchfork").size(), 5u);
  EXPECT_EQ(table_ics("vanderpol").front(), vec(0.1, 0.0));
  EXPECT_EQ(table_ics("lotka-volterra")[1], vec(0.1, 0.0));
  EXPECT_EQ(table_ics("lotka-volterra")[4], vec(1.1, 1.1));
}

TEST(Config, FileThenFlags) {
  RunSettings s;
  apply_settings_json(s, R"({"system": "duffing", "ic": [0.01, 0], "T": 15, "seeds": 20, "c0": 10,
                             "regularize": true, "fast": true, "hidden": [8, 8]})");
  EXPECT_EQ(s.system, "duffing");
  EXPECT_EQ(s.ics.front(), vec(0.01, 0.0));
  EXPECT_EQ(s.times, std::vector<double>{15.0});
  EXPECT_EQ(s.reg.c0, 10.0);
  EXPECT_EQ(s.profile().n_epochs, 10000);
  EXPECT_EQ(s.profile().n_collocation, 512);
  s.epochs = 300;
  EXPECT_EQ(s.profile().n_epochs, 300);
  const TrainingConfig cfg = s.training_config();
  EXPECT_EQ(cfg.architecture.hidden, (std::vector<int>{8, 8}));
  ASSERT_TRUE(cfg.regularization);
  EXPECT_EQ(cfg.regularization->c0, 10.0);
  const ExperimentSpec spec = s.experiment_spec();
  EXPECT_EQ(spec.seeds, 20);
  EXPECT_EQ(spec.arms.size(), 2u);
  EXPECT_FALSE(spec.base.regularization);
  EXPECT_THROW(apply_settings_json(s, R"({"sytem": "duffing"})"), std::invalid_argument);
  EXPECT_THROW(apply_settings_json(s, R"({"T": "long"})"), std::invalid_argument);
  EXPECT_THROW(apply_settings_json(s, "[1, 2]"), std::invalid_argument);
  s.reg.include_ls = false;
  EXPECT_EQ(s.experiment_spec().arms[1].name, "se-only");
}

TEST(Config, Parsers) {
  EXPECT_EQ(parse_state("0.1,0"), vec(0.1, 0.0));
  EXPECT_EQ(parse_state("0.3"), vec(0.3));
  EXPECT_THROW(parse_state("0.1,x"), std::invalid_argument);
  EXPECT_THROW(parse_state("1,2,3"), std::invalid_argument);
  EXPECT_EQ(parse_list("1:4"), (std::vector<double>{1, 2, 3, 4}));
  EXPECT_EQ(parse_list("11,12.5"), (std::vector<double>{11, 12.5}));
  EXPECT_TRUE(parse_list("").empty());
  EXPECT_EQ(parse_states("0.1,0;0.2,0").size(), 2u);
}

TEST(Io, AtomicWriteAndFormatting) {
  const fs::path dir = temp_dir("io");
  write_file_atomic(dir / "sub" / "x.txt", "hello\n");
  EXPECT_EQ(read_file(dir / "sub" / "x.txt"), "hello\n");
  write_file_atomic(dir / "sub" / "x.txt", "bye\n");
  EXPECT_EQ(read_file(dir / "sub" / "x.txt"), "bye\n");
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(13.0), "13");
  EXPECT_EQ(format_double17(0.1), "0.10000000000000001");
  fs::remove_all(dir);
}
