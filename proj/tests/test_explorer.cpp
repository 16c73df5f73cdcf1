#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "badc/config.hpp"
#include "badc/error.hpp"
#include "badc/explorer.hpp"
#include "badc/kernels.hpp"
#include "badc/report.hpp"

using namespace badc;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("badc_test_" + name);
  fs::remove_all(p);
  return p;
}

ExperimentConfig toy_config(const std::string& out) {
  ExperimentConfig cfg;
  cfg.seed = 7;
  cfg.adc_bits = 2;
  cfg.dataset.kind = DatasetSpec::Kind::Blobs;
  cfg.dataset.blob_per_class = 60;
  cfg.dataset.blob_features = 4;
  cfg.dataset.synthetic_seed = 3;
  cfg.training.epochs = 60;
  cfg.training.finetune_epochs = 10;
  cfg.ga.population = 20;
  cfg.ga.generations = 10;
  cfg.output_dir = out;
  return cfg;
}

ParetoPoint pt(int id, double acc, long tr) {
  ParetoPoint p;
  p.point_id = id;
  p.accuracy = acc;
  p.transistors = tr;
  return p;
}

}  // namespace

TEST(SelectOperatingPoint, Rules) {
  const std::vector<ParetoPoint> a{pt(0, 0.80, 100), pt(1, 0.77, 40), pt(2, 0.70, 20)};
  EXPECT_EQ(select_operating_point(a, 0.80, 0.05).point_id, 1);
  EXPECT_EQ(select_operating_point(a, 0.80, 1.0).point_id, 2);
  EXPECT_EQ(select_operating_point(a, 0.80, 0.0).point_id, 0);
  try {
    select_operating_point(a, 0.90, 0.0);
    FAIL();
  } catch (const OperatingPointNotFound& e) {
    EXPECT_EQ(e.closest().point_id, 0);
  }
  const std::vector<ParetoPoint> tie{pt(0, 0.70, 20), pt(1, 0.75, 20)};
  EXPECT_EQ(select_operating_point(tie, 0.75, 0.1).point_id, 1);
  EXPECT_THROW(select_operating_point({}, 0.8, 0.1), InvalidArgument);
}

TEST(PrepareData, SplitAndNormalizationUseTrainRowsOnly) {
  auto cfg = toy_config("unused");
  const auto d = prepare_data(cfg);
  EXPECT_EQ(d.split.train.size() + d.split.test.size(), d.raw.size());
  EXPECT_EQ(d.bounds, compute_bounds(d.raw, d.split.train));
  EXPECT_EQ(d.x_eval.rows(), d.split.test.size());
  cfg.training.validation_mode = true;
  const auto v = prepare_data(cfg);
  EXPECT_EQ(v.fit_rows.size() + v.eval_rows.size(), v.split.train.size());
  for (auto r : v.eval_rows) EXPECT_TRUE(std::binary_search(v.split.train.begin(), v.split.train.end(), r));
}

TEST(Baseline, AreasAndDeterminism) {
  const auto cfg = toy_config("unused");
  const auto d = prepare_data(cfg);
  const auto b = train_baseline(cfg, d);
  EXPECT_EQ(b.binary_system.transistors, 4 * binary_full_area(2).transistors);
  EXPECT_EQ(b.flash_system.transistors, 4 * flash_area(2).transistors);
  EXPECT_GE(b.accuracy, 0.9);
  EXPECT_GE(b.dpos, cfg.ga.dpos_min);
  const auto again = train_baseline(cfg, d);
  EXPECT_EQ(again.qat_model.effective, b.qat_model.effective);
  EXPECT_EQ(again.accuracy, b.accuracy);
}

TEST(Baseline, SevenInputSystemAreaIsSevenAdcs) {
  ExperimentConfig cfg;
  cfg.training.epochs = 5;
  cfg.training.dpos = 4;
  const auto d = prepare_data(cfg);
  const auto b = train_baseline(cfg, d);
  EXPECT_EQ(b.binary_system.transistors, 7 * binary_full_area(3).transistors);
}

TEST(Fitness, IdentityAndMinimalMasks) {
  const auto cfg = toy_config("unused");
  const auto d = prepare_data(cfg);
  const auto b = train_baseline(cfg, d);
  const FitnessEvaluator eval(cfg, d, b);

  const auto full = eval.evaluate(full_individual(cfg, 4, b.dpos));
  EXPECT_EQ(full.objectives.f2, static_cast<double>(b.binary_system.transistors));
  EXPECT_NEAR(full.objectives.f1, 1.0 - b.accuracy, 0.01 + 1e-9);

  Individual minimal;
  minimal.dpos = b.dpos;
  long expect = 0;
  const auto tree = build_threshold_tree(2);
  for (int i = 0; i < 4; ++i) {
    minimal.masks.push_back(LevelMask::from_codes(2, {i % 2, 3}));
    expect += pruned_area(prune(tree, minimal.masks.back())).transistors;
  }
  const auto r = eval.evaluate(minimal);
  EXPECT_EQ(r.objectives.f2, static_cast<double>(expect));
  EXPECT_EQ(eval.evaluate(minimal).objectives, r.objectives);

  Individual wrong;
  wrong.masks = {LevelMask::all(2)};
  EXPECT_THROW(eval.evaluate(wrong), ContractViolation);
}

TEST(Explore, ToyRunMeetsDirectionalGainAndWritesArtifacts) {
  const auto dir = scratch_dir("toy");
  const auto cfg = toy_config(dir.string());
  const auto res = explore(cfg);
  ASSERT_FALSE(res.archive.empty());

  bool gain = false;
  for (const auto& p : res.archive) {
    gain = gain || (p.accuracy >= res.baseline.accuracy - 0.01 - 1e-9 &&
                    p.transistors <= res.baseline.binary_system.transistors / 2);
  }
  EXPECT_TRUE(gain);

  for (const auto& a : res.archive) {
    for (const auto& b : res.archive) {
      const bool dom = a.accuracy >= b.accuracy && a.transistors <= b.transistors &&
                       (a.accuracy > b.accuracy || a.transistors < b.transistors);
      EXPECT_FALSE(dom);
    }
  }

  // Objective audit: areas recompute from masks, accuracies from stored models.
  const auto tree = build_threshold_tree(cfg.adc_bits);
  for (const auto& p : res.archive) {
    std::vector<PrunedAdc> adcs;
    std::vector<AdcKind> kinds;
    for (const auto& m : p.masks) {
      adcs.push_back(prune(tree, m));
      kinds.emplace_back(PrunedBinary{adcs.back()});
    }
    EXPECT_EQ(system_area(adcs).transistors, p.transistors);
    const auto model = load_model((dir / p.model_file).string());
    EXPECT_DOUBLE_EQ(evaluate(model, res.data.x_eval, res.data.y_eval, kinds), p.accuracy);
  }

  EXPECT_TRUE(fs::exists(dir / "pareto.csv"));
  EXPECT_TRUE(fs::exists(dir / "summary.json"));
  EXPECT_TRUE(fs::exists(dir / "config.json"));
  const auto csv = slurp(dir / "pareto.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "point_id,generation,accuracy,transistor_count,dpos,mask_x0,mask_x1,mask_x2,mask_x3");

  const auto report = load_report_input(dir.string());
  EXPECT_EQ(report.points.size(), res.archive.size());
  EXPECT_EQ(report.binary_system, res.baseline.binary_system.transistors);
}

TEST(Explore, ByteIdenticalAcrossRunsAndWorkerCounts) {
  const auto d1 = scratch_dir("det1");
  const auto d2 = scratch_dir("det2");
  auto cfg = toy_config(d1.string());
  cfg.ga.generations = 4;
  explore(cfg);
  cfg.output_dir = d2.string();
  cfg.workers = 3;
  explore(cfg);
  EXPECT_EQ(slurp(d1 / "pareto.csv"), slurp(d2 / "pareto.csv"));
  EXPECT_EQ(slurp(d1 / "summary.json"), slurp(d2 / "summary.json"));
  EXPECT_EQ(slurp(d1 / "config.json"), slurp(d2 / "config.json"));
}

TEST(Explore, ScratchModeRuns) {
  const auto dir = scratch_dir("scratch");
  auto cfg = toy_config(dir.string());
  cfg.training.fitness_mode = FitnessMode::Scratch;
  cfg.training.epochs = 20;
  cfg.ga.population = 8;
  cfg.ga.generations = 2;
  const auto res = explore(cfg);
  EXPECT_FALSE(res.archive.empty());
}

TEST(Report, GainArithmetic) {
  const auto g = compute_gains(400, 200, 100);
  EXPECT_DOUBLE_EQ(g.flash_to_pruned, 4.0);
  EXPECT_DOUBLE_EQ(g.flash_to_binary, 2.0);
  EXPECT_DOUBLE_EQ(g.binary_to_pruned, 2.0);
  EXPECT_DOUBLE_EQ(compute_gains(400, 200, 200).binary_to_pruned, 1.0);

  ReportInput in;
  in.baseline_accuracy = 0.8;
  in.flash_system = 400;
  in.binary_system = 200;
  in.points = {pt(0, 0.80, 100)};
  const auto r = make_report(in, 0.05);
  EXPECT_TRUE(r.found);
  EXPECT_DOUBLE_EQ(r.gains.flash_to_pruned, 4.0);
  EXPECT_EQ(plotdata_csv(in),
            "accuracy,normalized_area,label\n0.800000,1.000000,flash\n0.800000,0.500000,binary\n"
            "0.800000,0.250000,pruned_0\n");
  in.baseline_accuracy = 0.9;
  const auto none = make_report(in, 0.0);
  EXPECT_FALSE(none.found);
  EXPECT_NE(none.text.find("no point within bound"), std::string::npos);
}
