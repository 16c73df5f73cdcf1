#include "badc/explorer.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "badc/config.hpp"
#include "badc/error.hpp"
#include "badc/kernels.hpp"

namespace badc {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

// Stream keys for derive_seed.
constexpr std::uint64_t kSplitStream = 1;
constexpr std::uint64_t kBaselineStream = 2;
constexpr std::uint64_t kGaStream = 3;
constexpr std::uint64_t kFitnessStream = 4;
constexpr std::uint64_t kValidationStream = 5;

// Accuracy comparisons tolerate the rounding of k/n ratios.
constexpr double kAccuracyEps = 1e-9;

Dataset load_dataset(const DatasetSpec& spec) {
  switch (spec.kind) {
    case DatasetSpec::Kind::Csv:
      return load_csv(spec.path, spec.csv);
    case DatasetSpec::Kind::SyntheticSeeds:
      return synthetic_seeds(spec.synthetic_seed);
    case DatasetSpec::Kind::Blobs:
      return gaussian_blobs(spec.blob_per_class, spec.blob_features, spec.blob_spread,
                            spec.synthetic_seed);
  }
  throw ContractViolation("unknown dataset kind");
}

void take_rows(const Dataset& ds, const std::vector<std::size_t>& rows, FeatureMatrix& x,
               std::vector<int>& y) {
  const Dataset sub = subset(ds, rows);
  x = sub.x;
  y = sub.y;
}

MlpTopology topology_for(const ExperimentConfig& cfg, const Dataset& ds) {
  const int inputs = static_cast<int>(ds.features());
  if (cfg.training.hidden.empty()) return default_topology(inputs, ds.n_classes);
  MlpTopology t;
  t.layer_sizes.push_back(inputs);
  t.layer_sizes.insert(t.layer_sizes.end(), cfg.training.hidden.begin(), cfg.training.hidden.end());
  t.layer_sizes.push_back(ds.n_classes);
  return t;
}

QuantConfig quant_for(const ExperimentConfig& cfg, int dpos) {
  QuantConfig q;
  q.weight_bits = cfg.training.weight_bits;
  q.dpos = dpos;
  q.pow2_biases = cfg.training.pow2_biases;
  return q;
}

std::string format_accuracy(double a) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", a);
  return buf;
}

ojson area_json(const AreaReport& r) {
  return ojson{{"transistors", r.transistors},
               {"resistors", r.resistors},
               {"comparators", r.comparators},
               {"inverters", r.inverters},
               {"selection_switches", r.selection_switches}};
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

double ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

ParetoPoint point_from_archive(const ArchivedPoint& a) {
  ParetoPoint p;
  p.point_id = a.point_id;
  p.generation = a.generation;
  p.accuracy = 1.0 - a.individual.objectives->f1;
  p.transistors = static_cast<long>(a.individual.objectives->f2);
  p.masks = a.individual.masks;
  p.dpos = a.individual.dpos;
  return p;
}

}  // namespace

PreparedData prepare_data(const ExperimentConfig& cfg) {
  PreparedData d;
  d.raw = load_dataset(cfg.dataset);
  d.split = stratified_split(d.raw, cfg.dataset.train_fraction, derive_seed(cfg.seed, kSplitStream));
  d.bounds = compute_bounds(d.raw, d.split.train);
  d.normalized = normalize(d.raw, d.bounds);
  if (cfg.training.validation_mode) {
    const Dataset train = subset(d.raw, d.split.train);
    const Split inner = stratified_split(train, 1.0 - cfg.training.validation_fraction,
                                         derive_seed(cfg.seed, kValidationStream));
    for (auto i : inner.train) d.fit_rows.push_back(d.split.train[i]);
    for (auto i : inner.test) d.eval_rows.push_back(d.split.train[i]);
  } else {
    d.fit_rows = d.split.train;
    d.eval_rows = d.split.test;
  }
  take_rows(d.normalized, d.fit_rows, d.x_fit, d.y_fit);
  take_rows(d.normalized, d.eval_rows, d.x_eval, d.y_eval);
  take_rows(d.normalized, d.split.test, d.x_test, d.y_test);
  return d;
}

Baseline train_baseline(const ExperimentConfig& cfg, const PreparedData& data) {
  const int n = cfg.adc_bits;
  const std::size_t inputs = data.normalized.features();
  const std::vector<AdcKind> full(inputs, AdcKind{FullBinary{n}});
  const FeatureMatrix fit = kernels::encode_serial(data.x_fit, full);
  const FeatureMatrix eval = kernels::encode_serial(data.x_eval, full);
  const FeatureMatrix test = kernels::encode_serial(data.x_test, full);
  const MlpTopology topo = topology_for(cfg, data.normalized);
  const std::uint64_t seed = derive_seed(cfg.seed, kBaselineStream);

  Baseline b;
  TrainHyper hyper{cfg.training.epochs, cfg.training.lr, cfg.training.batch, seed};
  b.float_model = train_qat(fit, data.y_fit, topo, quant_for(cfg, cfg.ga.dpos_min), hyper,
                            WeightMode::Float);
  b.float_accuracy = evaluate(b.float_model, eval, data.y_eval);

  std::vector<int> candidates;
  if (cfg.training.dpos) {
    candidates.push_back(*cfg.training.dpos);
  } else {
    for (int d = cfg.ga.dpos_min; d <= cfg.ga.dpos_max; ++d) candidates.push_back(d);
  }
  TrainedModel start = b.float_model;
  start.mode = WeightMode::Pow2;
  bool have = false;
  for (int d : candidates) {
    hyper.seed = derive_seed(seed, static_cast<std::uint64_t>(d) + 1);
    TrainedModel m = fine_tune(start, fit, data.y_fit, quant_for(cfg, d), hyper);
    if (!have || m.metrics.train_accuracy > b.qat_model.metrics.train_accuracy) {
      b.qat_model = std::move(m);
      b.dpos = d;
      have = true;
    }
  }
  b.accuracy = evaluate(b.qat_model, eval, data.y_eval);
  b.test_accuracy = evaluate(b.qat_model, test, data.y_test);
  b.flash_per_adc = flash_area(n, cfg.cost);
  b.binary_per_adc = binary_full_area(n, cfg.cost);
  b.flash_system = system_area(std::vector<AdcKind>(inputs, AdcKind{Flash{n}}), cfg.cost);
  b.binary_system = system_area(full, cfg.cost);
  return b;
}

std::uint64_t chromosome_hash(const std::string& key) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : key) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::vector<PrunedAdc> FitnessEvaluator::adcs_for(const Individual& ind) const {
  const std::size_t inputs = data_.normalized.features();
  if (ind.masks.size() != inputs) {
    throw ContractViolation("chromosome has " + std::to_string(ind.masks.size()) +
                            " masks for " + std::to_string(inputs) + " inputs");
  }
  const ThresholdTree tree = build_threshold_tree(cfg_.adc_bits);
  std::vector<PrunedAdc> adcs;
  adcs.reserve(inputs);
  for (const auto& m : ind.masks) {
    if (m.n_bits() != cfg_.adc_bits) throw ContractViolation("mask bit-width differs from the ADC");
    adcs.push_back(prune(tree, m));
  }
  return adcs;
}

FitnessResult FitnessEvaluator::evaluate(const Individual& ind) const {
  const auto adcs = adcs_for(ind);
  std::vector<AdcKind> kinds;
  kinds.reserve(adcs.size());
  for (const auto& a : adcs) kinds.emplace_back(PrunedBinary{a});

  FitnessResult r;
  r.area = system_area(adcs, cfg_.cost);
  const FeatureMatrix fit = kernels::encode_serial(data_.x_fit, kinds);
  const FeatureMatrix eval = kernels::encode_serial(data_.x_eval, kinds);
  const std::uint64_t seed =
      derive_seed(derive_seed(cfg_.seed, kFitnessStream), chromosome_hash(ind.key()));
  const QuantConfig quant = quant_for(cfg_, ind.dpos);
  try {
    if (cfg_.training.fitness_mode == FitnessMode::FineTune) {
      TrainHyper h{cfg_.training.finetune_epochs, cfg_.training.finetune_lr, cfg_.training.batch,
                   seed};
      r.model = fine_tune(baseline_.qat_model, fit, data_.y_fit, quant, h);
    } else {
      TrainHyper h{cfg_.training.epochs, cfg_.training.lr, cfg_.training.batch, seed};
      r.model = train_qat(fit, data_.y_fit, baseline_.qat_model.topology, quant, h);
    }
    r.accuracy = badc::evaluate(r.model, eval, data_.y_eval);
  } catch (const TrainingDiverged&) {
    r.diverged = true;
    r.accuracy = 0.0;
    r.model = baseline_.qat_model;
  }
  r.objectives = Objectives{1.0 - r.accuracy, static_cast<double>(r.area.transistors)};
  return r;
}

Individual full_individual(const ExperimentConfig& cfg, std::size_t inputs, int dpos) {
  Individual ind;
  ind.masks.assign(inputs, LevelMask::all(cfg.adc_bits));
  ind.dpos = dpos;
  return ind;
}

void sort_points(std::vector<ParetoPoint>& points) {
  std::sort(points.begin(), points.end(), [](const ParetoPoint& a, const ParetoPoint& b) {
    if (a.transistors != b.transistors) return a.transistors < b.transistors;
    if (a.accuracy != b.accuracy) return a.accuracy > b.accuracy;
    return a.point_id < b.point_id;
  });
}

std::string pareto_csv(const std::vector<ParetoPoint>& points,
                       const std::vector<std::string>& feature_names) {
  std::ostringstream out;
  out << "point_id,generation,accuracy,transistor_count,dpos";
  for (const auto& f : feature_names) out << ",mask_" << f;
  out << '\n';
  for (const auto& p : points) {
    out << p.point_id << ',' << p.generation << ',' << format_accuracy(p.accuracy) << ','
        << p.transistors << ',' << p.dpos;
    for (const auto& m : p.masks) out << ',' << m.to_hex();
    out << '\n';
  }
  return out.str();
}

ParetoPoint select_operating_point(const std::vector<ParetoPoint>& archive,
                                   double baseline_accuracy, double max_drop) {
  if (archive.empty()) throw InvalidArgument("archive is empty");
  if (!(max_drop >= 0.0 && max_drop <= 1.0)) throw InvalidArgument("accuracy drop must be in [0, 1]");
  const double floor = baseline_accuracy - max_drop - kAccuracyEps;
  const ParetoPoint* best = nullptr;
  const ParetoPoint* closest = nullptr;
  for (const auto& p : archive) {
    if (!closest || p.accuracy > closest->accuracy ||
        (p.accuracy == closest->accuracy && p.transistors < closest->transistors)) {
      closest = &p;
    }
    if (p.accuracy < floor) continue;
    if (!best || p.transistors < best->transistors ||
        (p.transistors == best->transistors &&
         (p.accuracy > best->accuracy ||
          (p.accuracy == best->accuracy && p.point_id < best->point_id)))) {
      best = &p;
    }
  }
  if (!best) {
    throw OperatingPointNotFound(*closest, "no point within accuracy drop " +
                                               format_accuracy(max_drop) + " of baseline " +
                                               format_accuracy(baseline_accuracy));
  }
  return *best;
}

namespace {

std::string summary_json(const ExperimentConfig& cfg, const PreparedData& data, const Baseline& b,
                         const std::vector<ParetoPoint>& points, int evaluations,
                         const std::string& status, const std::string& error) {
  ojson j;
  j["status"] = status;
  if (!error.empty()) j["error"] = error;
  j["dataset"] = ojson{{"samples", data.raw.size()},
                       {"features", data.raw.features()},
                       {"classes", data.raw.n_classes},
                       {"dropped_rows", data.raw.dropped_rows},
                       {"train_rows", data.split.train.size()},
                       {"test_rows", data.split.test.size()},
                       {"fitness_rows", data.eval_rows.size()},
                       {"feature_names", data.raw.feature_names}};
  j["adc_bits"] = cfg.adc_bits;
  j["baseline"] = ojson{{"float_accuracy", b.float_accuracy},
                        {"accuracy", b.accuracy},
                        {"test_accuracy", b.test_accuracy},
                        {"train_accuracy", b.qat_model.metrics.train_accuracy},
                        {"dpos", b.dpos}};
  ojson areas;
  if (cfg.report_flash) {
    areas["flash_system"] = area_json(b.flash_system);
    areas["flash_per_adc"] = area_json(b.flash_per_adc);
  }
  if (cfg.report_binary) {
    areas["binary_system"] = area_json(b.binary_system);
    areas["binary_per_adc"] = area_json(b.binary_per_adc);
  }
  j["areas"] = areas;

  ojson archive{{"size", points.size()}, {"evaluations", evaluations}};
  if (!points.empty()) {
    long min_tr = points.front().transistors;
    double max_acc = 0.0;
    for (const auto& p : points) {
      min_tr = std::min(min_tr, p.transistors);
      max_acc = std::max(max_acc, p.accuracy);
    }
    archive["min_transistors"] = min_tr;
    archive["max_accuracy"] = max_acc;
  }
  j["archive"] = archive;

  // Operating point: smallest system within one accuracy point of baseline.
  constexpr double kDrop = 0.01;
  if (!points.empty()) {
    try {
      const ParetoPoint op = select_operating_point(points, b.accuracy, kDrop);
      const auto flash_tr = static_cast<double>(b.flash_system.transistors);
      const auto bin_tr = static_cast<double>(b.binary_system.transistors);
      ojson per_adc = ojson::array();
      ojson per_adc_norm = ojson::array();
      const ThresholdTree tree = build_threshold_tree(cfg.adc_bits);
      for (const auto& m : op.masks) {
        const long t = pruned_area(prune(tree, m), cfg.cost).transistors;
        per_adc.push_back(t);
        per_adc_norm.push_back(ratio(static_cast<double>(t),
                                     static_cast<double>(b.flash_per_adc.transistors)));
      }
      j["operating_point"] = ojson{{"max_drop", kDrop},
                                   {"point_id", op.point_id},
                                   {"accuracy", op.accuracy},
                                   {"transistors", op.transistors},
                                   {"normalized_to_flash_system", ratio(op.transistors, flash_tr)},
                                   {"per_adc_transistors", per_adc},
                                   {"per_adc_normalized_to_flash", per_adc_norm}};
      j["gains"] = ojson{{"flash_to_binary", ratio(flash_tr, bin_tr)},
                         {"binary_to_pruned", ratio(bin_tr, static_cast<double>(op.transistors))},
                         {"flash_to_pruned", ratio(flash_tr, static_cast<double>(op.transistors))}};
    } catch (const OperatingPointNotFound&) {
      j["operating_point"] = nullptr;
    }
  }
  return j.dump(2) + "\n";
}

}  // namespace

ExploreResult explore(const ExperimentConfig& cfg, const ExploreHooks& hooks) {
  cfg.validate();
  ExploreResult res;
  res.data = prepare_data(cfg);
  res.baseline = train_baseline(cfg, res.data);
  const PreparedData& data = res.data;
  const Baseline& base = res.baseline;

  const fs::path out(cfg.output_dir);
  fs::create_directories(out / "models");
  write_text(out / "config.json", config_to_json(cfg));

  const FitnessEvaluator evaluator(cfg, data, base);
  GaConfig ga = cfg.ga;
  ga.seed = derive_seed(cfg.seed, kGaStream);
  ga.workers = cfg.workers;
  ChromosomeShape shape{static_cast<int>(data.normalized.features()), cfg.adc_bits};
  std::vector<Individual> seeds;
  if (cfg.seed_all_ones) seeds.push_back(full_individual(cfg, data.normalized.features(), base.dpos));

  std::vector<ParetoPoint> partial;
  int evaluations = 0;
  RunHooks run_hooks;
  run_hooks.on_generation = [&](int gen, const RunResult& state) {
    partial.clear();
    for (const auto& a : state.archive) partial.push_back(point_from_archive(a));
    sort_points(partial);
    evaluations = state.evaluations;
    if (hooks.on_generation) hooks.on_generation(gen, partial.size());
  };

  RunResult run_result;
  try {
    run_result = run(ga, shape, [&](const Individual& ind) { return evaluator(ind); }, seeds,
                     run_hooks);
  } catch (const std::exception& e) {
    write_text(out / "pareto.csv", pareto_csv(partial, data.raw.feature_names));
    write_text(out / "summary.json",
               summary_json(cfg, data, base, partial, evaluations, "failed", e.what()));
    throw;
  }

  std::vector<ParetoPoint> points;
  for (const auto& a : run_result.archive) points.push_back(point_from_archive(a));
  sort_points(points);

  // Re-derive each archived model; evaluation is a pure function of the genes.
  std::vector<TrainedModel> models(points.size());
  kernels::for_each_index(points.size(), cfg.workers, [&](std::size_t i) {
    Individual ind;
    ind.masks = points[i].masks;
    ind.dpos = points[i].dpos;
    FitnessResult r = evaluator.evaluate(ind);
    points[i].resistors = r.area.resistors;
    points[i].diverged = r.diverged;
    models[i] = std::move(r.model);
  });
  for (std::size_t i = 0; i < points.size(); ++i) {
    points[i].model_file = "models/point_" + std::to_string(points[i].point_id) + ".json";
    save_model(models[i], (out / points[i].model_file).string());
  }

  write_text(out / "pareto.csv", pareto_csv(points, data.raw.feature_names));
  write_text(out / "summary.json",
             summary_json(cfg, data, base, points, run_result.evaluations, "ok", ""));
  res.archive = std::move(points);
  res.evaluations = run_result.evaluations;
  return res;
}

}  // namespace badc
