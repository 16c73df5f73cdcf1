// Command-line front end: ADC/area queries, baseline training, exploration
// and Pareto reporting.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "badc/adc_model.hpp"
#include "badc/area_model.hpp"
#include "badc/config.hpp"
#include "badc/error.hpp"
#include "badc/explorer.hpp"
#include "badc/report.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;
constexpr int kExitEmpty = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::uint64_t parse_env_u64(const char* name) {
  const char* v = std::getenv(name);
  std::size_t used = 0;
  unsigned long long x = 0;
  try {
    x = std::stoull(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || v[used] != '\0') throw UsageError(std::string(name) + " must be a non-negative integer");
  return x;
}

badc::AdcKind make_adc(int bits, const std::string& mask) {
  badc::check_adc_bits(bits);
  if (mask.empty()) return badc::FullBinary{bits};
  return badc::PrunedBinary{badc::prune(badc::build_threshold_tree(bits), badc::LevelMask::from_hex(bits, mask))};
}

int cmd_quantize(int bits, const std::string& mask, std::optional<double> value, std::optional<int> sweep) {
  if (value.has_value() == sweep.has_value()) throw UsageError("give exactly one of --value or --sweep");
  const badc::AdcKind adc = make_adc(bits, mask);
  std::vector<double> inputs;
  if (value) {
    inputs.push_back(*value);
  } else {
    if (*sweep < 1) throw UsageError("--sweep needs at least one point");
    for (int i = 0; i < *sweep; ++i) inputs.push_back(*sweep == 1 ? 0.0 : static_cast<double>(i) / (*sweep - 1));
  }
  std::printf("value\tcode\trepr\n");
  for (double v : inputs) {
    const auto q = badc::quantize(adc, v);
    std::printf("%.6f\t%d\t%.6f\n", v, q.code, q.repr);
  }
  return kExitOk;
}

nlohmann::ordered_json report_json(const badc::AreaReport& r) {
  nlohmann::ordered_json j;
  j["transistors"] = r.transistors;
  j["resistors"] = r.resistors;
  j["comparators"] = r.comparators;
  j["single_output_comparators"] = r.single_output_comparators;
  j["inverters"] = r.inverters;
  j["amplifiers"] = r.amplifiers;
  j["selection_switches"] = r.selection_switches;
  j["selection_per_stage"] = r.selection_per_stage;
  j["breakdown"] = {{"comparator_tr", r.breakdown.comparator_tr},
                    {"inverter_tr", r.breakdown.inverter_tr},
                    {"selection_tr", r.breakdown.selection_tr},
                    {"amplifier_tr", r.breakdown.amplifier_tr},
                    {"encoder_tr", r.breakdown.encoder_tr},
                    {"decode_credit_tr", r.breakdown.decode_credit_tr}};
  return j;
}

int cmd_area(int bits, const std::string& kind, const std::string& mask, const std::string& cost_file,
             bool as_json) {
  const badc::CostTable cost = cost_file.empty() ? badc::CostTable{} : badc::load_cost_table(cost_file);
  badc::check_adc_bits(bits);
  badc::AreaReport r;
  if (kind == "pruned") {
    if (mask.empty()) throw UsageError("--kind pruned requires --mask");
    r = badc::adc_area(make_adc(bits, mask), cost);
  } else {
    if (!mask.empty()) throw UsageError("--mask is only valid with --kind pruned");
    r = kind == "flash" ? badc::flash_area(bits, cost) : badc::binary_full_area(bits, cost);
  }
  if (as_json) {
    std::cout << report_json(r).dump(2) << '\n';
  } else {
    std::cout << badc::format_report(r);
  }
  return kExitOk;
}

void apply_overrides(badc::ExperimentConfig& cfg, const std::optional<std::uint64_t>& seed,
                     const std::optional<int>& workers, const std::string& out) {
  if (std::getenv("BADC_SEED")) cfg.seed = parse_env_u64("BADC_SEED");
  if (std::getenv("BADC_WORKERS")) cfg.workers = static_cast<int>(parse_env_u64("BADC_WORKERS"));
  if (seed) cfg.seed = *seed;
  if (workers) cfg.workers = *workers;
  if (!out.empty()) cfg.output_dir = out;
  cfg.validate();
}

int cmd_train(const std::string& config, const std::optional<std::uint64_t>& seed, const std::string& model_out) {
  badc::ExperimentConfig cfg = badc::load_config(config);
  apply_overrides(cfg, seed, std::nullopt, "");
  const auto data = badc::prepare_data(cfg);
  const auto b = badc::train_baseline(cfg, data);
  std::printf("samples %zu, features %zu, classes %d, train %zu, test %zu\n", data.raw.size(),
              data.raw.features(), data.raw.n_classes, data.split.train.size(), data.split.test.size());
  std::printf("float accuracy: %.4f\n", b.float_accuracy);
  std::printf("baseline accuracy (%d-bit binary ADCs, pow2 weights, dpos %d): %.4f\n", cfg.adc_bits,
              b.dpos, b.accuracy);
  std::printf("baseline train accuracy: %.4f\n", b.qat_model.metrics.train_accuracy);
  std::printf("flash system transistors: %ld\n", b.flash_system.transistors);
  std::printf("binary system transistors: %ld\n", b.binary_system.transistors);
  if (!model_out.empty()) badc::save_model(b.qat_model, model_out);
  return kExitOk;
}

int cmd_explore(const std::string& config, const std::string& out, const std::optional<std::uint64_t>& seed,
                const std::optional<int>& workers) {
  badc::ExperimentConfig cfg = badc::load_config(config);
  apply_overrides(cfg, seed, workers, out);
  badc::ExploreHooks hooks;
  hooks.on_generation = [&](int gen, std::size_t archive) {
    std::fprintf(stderr, "generation %d/%d: archive %zu\n", gen, cfg.ga.generations, archive);
  };
  const auto res = badc::explore(cfg, hooks);
  std::printf("baseline accuracy %.4f, binary system %ld transistors, flash system %ld transistors\n",
              res.baseline.accuracy, res.baseline.binary_system.transistors,
              res.baseline.flash_system.transistors);
  std::printf("%d evaluations, %zu archived points written to %s\n", res.evaluations, res.archive.size(),
              cfg.output_dir.c_str());
  return kExitOk;
}

int cmd_pareto_report(const std::string& dir, double drop) {
  if (!(drop >= 0.0 && drop <= 1.0)) throw UsageError("--drop must lie in [0, 1]");
  const badc::ReportInput in = badc::load_report_input(dir);
  const std::string plot = badc::plotdata_csv(in);
  std::ofstream f(dir + "/plotdata.csv", std::ios::binary);
  if (!f) throw std::runtime_error("cannot write plotdata.csv in " + dir);
  f << plot;
  const auto outcome = badc::make_report(in, drop);
  std::cout << outcome.text;
  return outcome.found ? kExitOk : kExitEmpty;
}

int cmd_selftest() {
  int failures = 0;
  auto check = [&](bool ok, const std::string& what) {
    std::printf("%s %s\n", ok ? "ok  " : "FAIL", what.c_str());
    if (!ok) ++failures;
  };
  for (int n = 2; n <= 3; ++n) {
    const auto tree = badc::build_threshold_tree(n);
    const int levels = badc::level_count(n);
    long mismatches = 0;
    for (unsigned long bits = 0; bits < (1ul << levels); ++bits) {
      badc::LevelMask::Bits b(bits);
      if (b.count() < 2) continue;
      const badc::LevelMask mask(n, b);
      const badc::AdcKind adc = badc::PrunedBinary{badc::prune(tree, mask)};
      for (int i = 0; i < 256; ++i) {
        const double v = (i + 0.5) / 256.0;
        if (badc::quantize(adc, v).code != badc::oracle_quantize(tree, mask, v)) ++mismatches;
      }
    }
    check(mismatches == 0, "pruned quantizer matches tree oracle for every " + std::to_string(n) + "-bit mask");
  }
  const auto full3 = badc::binary_full_area(3);
  check(full3.transistors == 45 && full3.comparators == 5 && full3.inverters == 2 &&
            full3.control_transistors() == 9,
        "3-bit binary ADC: 45 transistors, 5 comparators, 2 inverters, 9 control transistors");
  check(badc::flash_area(3).comparators == 7, "3-bit flash ADC has 7 comparators");
  const auto keep23 = badc::adc_area(make_adc(2, "c"));
  check(keep23.comparators == 1, "2-bit ADC keeping codes {2,3} needs one comparator");
  check(badc::quantize(badc::FullBinary{3}, 0.40).code == 3, "3-bit quantize(0.40) = 3");
  check(badc::quantize(make_adc(2, "9"), 0.70).code == 3, "2-bit mask 0x9 quantize(0.70) = 3");
  return failures == 0 ? kExitOk : kExitRuntime;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bespoke pruned binary-search ADC exploration for printed MLP classifiers"};
  app.require_subcommand(1);

  int bits = 3;
  std::string mask;
  std::optional<double> value;
  std::optional<int> sweep;
  auto* q = app.add_subcommand("quantize", "Quantize values through a full or pruned binary ADC");
  q->add_option("--bits", bits, "ADC resolution N")->required();
  q->add_option("--mask", mask, "Hex level mask (bit c keeps code c)");
  q->add_option("--value", value, "Single input in [0, 1]");
  q->add_option("--sweep", sweep, "Number of equally spaced inputs over [0, 1]");

  std::string kind = "binary";
  std::string cost_file;
  bool as_json = false;
  auto* a = app.add_subcommand("area", "Transistor/resistor counts for one ADC");
  a->add_option("--bits", bits, "ADC resolution N")->required();
  a->add_option("--kind", kind, "flash, binary or pruned")
      ->check(CLI::IsMember({"flash", "binary", "pruned"}));
  a->add_option("--mask", mask, "Hex level mask (pruned only)");
  a->add_option("--cost", cost_file, "JSON cost table")->check(CLI::ExistingFile);
  a->add_flag("--json", as_json, "Print JSON");

  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::string model_out;
  auto* t = app.add_subcommand("train", "Train the full-binary baseline and report its accuracy");
  t->add_option("--config", config, "Experiment config (JSON)")->required();
  t->add_option("--seed", seed, "Master seed");
  t->add_option("--model-out", model_out, "Write the baseline model JSON here");

  std::string out;
  auto* e = app.add_subcommand("explore", "Run the NSGA-II level-pruning exploration");
  e->add_option("--config", config, "Experiment config (JSON)")->required();
  e->add_option("--out", out, "Output directory (overrides config)");
  e->add_option("--seed", seed, "Master seed (overrides BADC_SEED and config)");
  e->add_option("--workers", workers, "Evaluation threads (overrides BADC_WORKERS and config)");

  std::string in_dir;
  double drop = 0.05;
  auto* r = app.add_subcommand("pareto-report", "Summarize an exploration directory");
  r->add_option("--in", in_dir, "Directory written by explore")->required();
  r->add_option("--drop", drop, "Maximum accuracy drop from baseline");

  auto* s = app.add_subcommand("selftest", "Spot-check the quantizer and area model");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (q->parsed()) return cmd_quantize(bits, mask, value, sweep);
    if (a->parsed()) return cmd_area(bits, kind, mask, cost_file, as_json);
    if (t->parsed()) return cmd_train(config, seed, model_out);
    if (e->parsed()) return cmd_explore(config, out, seed, workers);
    if (r->parsed()) return cmd_pareto_report(in_dir, drop);
    if (s->parsed()) return cmd_selftest();
  } catch (const badc::ConfigError& err) {
    std::cerr << "config error: " << err.what() << '\n';
    return kExitUsage;
  } catch (const UsageError& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kExitUsage;
  } catch (const badc::InvalidArgument& err) {
    std::cerr << "invalid argument: " << err.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}
