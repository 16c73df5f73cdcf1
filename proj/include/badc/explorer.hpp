#pragma once

// End-to-end pipeline: load and split the data, train the full-binary
// baseline, run NSGA-II over per-input level masks plus dpos, and write the
// Pareto archive.

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "badc/area_model.hpp"
#include "badc/dataset.hpp"
#include "badc/mlp_qat.hpp"
#include "badc/nsga2.hpp"

namespace badc {

struct DatasetSpec {
  enum class Kind { Csv, SyntheticSeeds, Blobs };
  Kind kind = Kind::SyntheticSeeds;
  std::string path;  // Csv only
  CsvOptions csv;
  std::uint64_t synthetic_seed = 1;  // SyntheticSeeds / Blobs
  std::size_t blob_per_class = 60;
  std::size_t blob_features = 4;
  double blob_spread = 0.08;
  double train_fraction = 0.7;
};

enum class FitnessMode { FineTune, Scratch };

struct TrainingSpec {
  std::vector<int> hidden;  // empty = default topology
  int weight_bits = 8;
  std::optional<int> dpos;  // unset = pick the best on the training split
  bool pow2_biases = false;
  int epochs = 100;           // baseline budget
  double lr = 0.05;
  int batch = 16;
  int finetune_epochs = 20;   // in-loop budget
  double finetune_lr = 0.01;
  FitnessMode fitness_mode = FitnessMode::FineTune;
  // Fitness accuracy on a validation slice of the training split instead of
  // the test split.
  bool validation_mode = false;
  double validation_fraction = 0.25;
};

struct ExperimentConfig {
  DatasetSpec dataset;
  int adc_bits = 3;
  TrainingSpec training;
  GaConfig ga;
  bool seed_all_ones = true;  // put the unpruned chromosome in generation 0
  CostTable cost;
  bool report_flash = true;
  bool report_binary = true;
  std::string output_dir = "out";
  std::uint64_t seed = 1;
  int workers = 1;

  // Throws ConfigError with the offending field path.
  void validate() const;
};

struct PreparedData {
  Dataset raw;         // as loaded
  Dataset normalized;  // with bounds from the training rows only
  Bounds bounds;
  Split split;
  // Fitness-evaluation rows: the test split, or a validation slice of the
  // training split in validation mode.
  std::vector<std::size_t> fit_rows;
  std::vector<std::size_t> eval_rows;
  FeatureMatrix x_fit, x_eval, x_test;
  std::vector<int> y_fit, y_eval, y_test;
};

PreparedData prepare_data(const ExperimentConfig& cfg);

struct Baseline {
  TrainedModel float_model;
  TrainedModel qat_model;  // full binary ADCs, pow2 weights
  double float_accuracy = 0.0;  // on the fitness-evaluation rows
  double accuracy = 0.0;        // qat_model on the fitness-evaluation rows
  double test_accuracy = 0.0;
  int dpos = 0;
  AreaReport flash_system;
  AreaReport binary_system;
  AreaReport flash_per_adc;
  AreaReport binary_per_adc;
};

// Throws TrainingDiverged.
Baseline train_baseline(const ExperimentConfig& cfg, const PreparedData& data);

struct FitnessResult {
  Objectives objectives;
  double accuracy = 0.0;
  AreaReport area;
  bool diverged = false;
  TrainedModel model;
};

class FitnessEvaluator {
 public:
  FitnessEvaluator(const ExperimentConfig& cfg, const PreparedData& data, const Baseline& baseline)
      : cfg_(cfg), data_(data), baseline_(baseline) {}

  // Pure function of (genes, master seed). Throws ContractViolation for a
  // chromosome of the wrong shape.
  FitnessResult evaluate(const Individual& ind) const;
  Objectives operator()(const Individual& ind) const { return evaluate(ind).objectives; }

  std::vector<PrunedAdc> adcs_for(const Individual& ind) const;

 private:
  const ExperimentConfig& cfg_;
  const PreparedData& data_;
  const Baseline& baseline_;
};

// The all-ones chromosome at the baseline dpos.
Individual full_individual(const ExperimentConfig& cfg, std::size_t inputs, int dpos);

struct ParetoPoint {
  int point_id = 0;
  int generation = 0;
  double accuracy = 0.0;
  long transistors = 0;
  long resistors = 0;
  std::vector<LevelMask> masks;
  int dpos = 0;
  bool diverged = false;
  std::string model_file;  // relative to the output directory
};

struct ExploreResult {
  PreparedData data;
  Baseline baseline;
  std::vector<ParetoPoint> archive;  // by (transistors, -accuracy, point_id)
  int evaluations = 0;
};

struct ExploreHooks {
  std::function<void(int generation, std::size_t archive_size)> on_generation;
};

// Runs the whole pipeline and writes pareto.csv, summary.json, config.json
// and models/ into cfg.output_dir. On failure the archive reached so far is
// written with a failed status before the error propagates.
ExploreResult explore(const ExperimentConfig& cfg, const ExploreHooks& hooks = {});

// Stable 64-bit hash of a chromosome key (FNV-1a).
std::uint64_t chromosome_hash(const std::string& key);

class OperatingPointNotFound : public std::runtime_error {
 public:
  OperatingPointNotFound(ParetoPoint closest, const std::string& what)
      : std::runtime_error(what), closest_(std::move(closest)) {}
  const ParetoPoint& closest() const { return closest_; }

 private:
  ParetoPoint closest_;
};

// Minimal transistor count among points with accuracy >= baseline - drop;
// ties go to higher accuracy, then lower point_id. Throws
// OperatingPointNotFound carrying the most accurate point otherwise.
ParetoPoint select_operating_point(const std::vector<ParetoPoint>& archive,
                                   double baseline_accuracy, double max_drop);

// pareto.csv text for `points` (already ordered).
std::string pareto_csv(const std::vector<ParetoPoint>& points,
                       const std::vector<std::string>& feature_names);
void sort_points(std::vector<ParetoPoint>& points);

}  // namespace badc
