#include "badc/config.hpp"

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include <json.hpp>

#include "badc/error.hpp"

namespace badc {

namespace fs = std::filesystem;
using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

// Reads typed fields out of one JSON object, tracking its dotted path.
class Section {
 public:
  Section(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  void allow(std::initializer_list<const char*> keys) const {
    for (const auto& [k, v] : obj_.items()) {
      bool ok = false;
      for (const char* a : keys) ok = ok || k == a;
      if (!ok) throw ConfigError(join(path_, k), "unknown field");
    }
  }

  bool has(const char* key) const { return obj_.contains(key); }
  const json& at(const char* key) const { return obj_.at(key); }
  std::string field(const char* key) const { return join(path_, key); }

  void get(const char* key, int& out) const {
    if (!has(key)) return;
    const auto& v = at(key);
    if (!v.is_number_integer()) throw ConfigError(field(key), "expected an integer");
    const auto x = v.get<long long>();
    if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) {
      throw ConfigError(field(key), "integer out of range");
    }
    out = static_cast<int>(x);
  }
  void get(const char* key, std::uint64_t& out) const {
    if (!has(key)) return;
    const auto& v = at(key);
    if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<long long>() < 0)) {
      throw ConfigError(field(key), "expected a non-negative integer");
    }
    out = v.get<std::uint64_t>();
  }
  void get(const char* key, double& out) const {
    if (!has(key)) return;
    const auto& v = at(key);
    if (!v.is_number()) throw ConfigError(field(key), "expected a number");
    out = v.get<double>();
  }
  void get(const char* key, bool& out) const {
    if (!has(key)) return;
    const auto& v = at(key);
    if (!v.is_boolean()) throw ConfigError(field(key), "expected true or false");
    out = v.get<bool>();
  }
  void get(const char* key, std::string& out) const {
    if (!has(key)) return;
    const auto& v = at(key);
    if (!v.is_string()) throw ConfigError(field(key), "expected a string");
    out = v.get<std::string>();
  }

 private:
  const json& obj_;
  std::string path_;
};

json parse(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("<root>", std::string("not valid JSON: ") + e.what());
  }
}

std::string read_file(const std::string& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("<file>", std::string("cannot read ") + what + " '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void read_cost(const Section& s, CostTable& c) {
  s.allow({"comp_tr", "comp_noinv_tr", "comp_res", "comp_noinv_res", "inv_tr", "inv_res", "sel_tr",
           "amp_tr", "and_gate_tr", "ladder_res", "encoder_coeff", "encoder_override"});
  s.get("comp_tr", c.comp_tr);
  s.get("comp_noinv_tr", c.comp_noinv_tr);
  s.get("comp_res", c.comp_res);
  s.get("comp_noinv_res", c.comp_noinv_res);
  s.get("inv_tr", c.inv_tr);
  s.get("inv_res", c.inv_res);
  s.get("sel_tr", c.sel_tr);
  s.get("amp_tr", c.amp_tr);
  s.get("and_gate_tr", c.and_gate_tr);
  s.get("ladder_res", c.ladder_res);
  s.get("encoder_coeff", c.encoder_coeff);
  if (s.has("encoder_override")) {
    const auto& v = s.at("encoder_override");
    if (!v.is_array()) throw ConfigError(s.field("encoder_override"), "expected an array of integers");
    c.encoder_override.clear();
    for (const auto& e : v) {
      if (!e.is_number_integer()) {
        throw ConfigError(s.field("encoder_override"), "expected an array of integers");
      }
      c.encoder_override.push_back(e.get<int>());
    }
  }
  try {
    c.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError("cost", e.what());
  }
}

void read_dataset(const Section& s, DatasetSpec& d, const std::string& base_dir) {
  s.allow({"kind", "path", "delimiter", "header", "label_column", "missing", "synthetic_seed",
           "per_class", "features", "spread", "train_fraction"});
  std::string kind = "synthetic_seeds";
  s.get("kind", kind);
  if (kind == "csv") {
    d.kind = DatasetSpec::Kind::Csv;
  } else if (kind == "synthetic_seeds") {
    d.kind = DatasetSpec::Kind::SyntheticSeeds;
  } else if (kind == "blobs") {
    d.kind = DatasetSpec::Kind::Blobs;
  } else {
    throw ConfigError(s.field("kind"), "expected csv, synthetic_seeds or blobs");
  }
  s.get("path", d.path);
  std::string delim = std::string(1, d.csv.delimiter);
  s.get("delimiter", delim);
  if (delim == "\\t" || delim == "tab") delim = "\t";
  if (delim.size() != 1) throw ConfigError(s.field("delimiter"), "expected a single character");
  d.csv.delimiter = delim[0];
  s.get("header", d.csv.header);
  if (s.has("label_column")) {
    const auto& v = s.at("label_column");
    if (v.is_string()) {
      d.csv.label_column = v.get<std::string>();
    } else if (v.is_number_integer()) {
      d.csv.label_column = v.get<int>();
    } else {
      throw ConfigError(s.field("label_column"), "expected a column name or index");
    }
  }
  s.get("missing", d.csv.missing);
  s.get("synthetic_seed", d.synthetic_seed);
  s.get("per_class", d.blob_per_class);
  s.get("features", d.blob_features);
  s.get("spread", d.blob_spread);
  s.get("train_fraction", d.train_fraction);
  if (d.kind == DatasetSpec::Kind::Csv) {
    if (d.path.empty()) throw ConfigError(s.field("path"), "required for csv datasets");
    fs::path p(d.path);
    if (p.is_relative() && !base_dir.empty()) p = fs::path(base_dir) / p;
    if (!fs::is_regular_file(p)) throw ConfigError(s.field("path"), "file not found: " + p.string());
    d.path = p.lexically_normal().string();
  }
}

void read_training(const Section& s, TrainingSpec& t) {
  s.allow({"hidden", "weight_bits", "dpos", "pow2_biases", "epochs", "lr", "batch",
           "finetune_epochs", "finetune_lr", "fitness_mode", "validation_mode",
           "validation_fraction"});
  if (s.has("hidden")) {
    const auto& v = s.at("hidden");
    if (!v.is_array()) throw ConfigError(s.field("hidden"), "expected an array of layer sizes");
    t.hidden.clear();
    for (const auto& e : v) {
      if (!e.is_number_integer() || e.get<long long>() <= 0) {
        throw ConfigError(s.field("hidden"), "layer sizes must be positive integers");
      }
      t.hidden.push_back(e.get<int>());
    }
  }
  s.get("weight_bits", t.weight_bits);
  if (s.has("dpos")) {
    const auto& v = s.at("dpos");
    if (v.is_string() && v.get<std::string>() == "auto") {
      t.dpos.reset();
    } else if (v.is_number_integer()) {
      t.dpos = v.get<int>();
    } else {
      throw ConfigError(s.field("dpos"), "expected an integer or \"auto\"");
    }
  }
  s.get("pow2_biases", t.pow2_biases);
  s.get("epochs", t.epochs);
  s.get("lr", t.lr);
  s.get("batch", t.batch);
  s.get("finetune_epochs", t.finetune_epochs);
  s.get("finetune_lr", t.finetune_lr);
  std::string mode = t.fitness_mode == FitnessMode::FineTune ? "finetune" : "scratch";
  s.get("fitness_mode", mode);
  if (mode == "finetune") {
    t.fitness_mode = FitnessMode::FineTune;
  } else if (mode == "scratch") {
    t.fitness_mode = FitnessMode::Scratch;
  } else {
    throw ConfigError(s.field("fitness_mode"), "expected finetune or scratch");
  }
  s.get("validation_mode", t.validation_mode);
  s.get("validation_fraction", t.validation_fraction);
}

void read_ga(const Section& s, ExperimentConfig& cfg) {
  GaConfig& g = cfg.ga;
  s.allow({"population", "generations", "crossover_prob", "mutation_prob", "rates_in_percent",
           "bit_flip_rate", "tournament", "crossover", "dpos_min", "dpos_max", "seed_all_ones"});
  s.get("population", g.population);
  s.get("generations", g.generations);
  s.get("crossover_prob", g.crossover_prob);
  s.get("mutation_prob", g.mutation_prob);
  s.get("rates_in_percent", g.rates_in_percent);
  if (s.has("bit_flip_rate")) {
    double r = 0.0;
    s.get("bit_flip_rate", r);
    g.bit_flip_rate = r;
  }
  s.get("tournament", g.tournament);
  std::string kind = g.crossover == CrossoverKind::Uniform ? "uniform" : "one_point";
  s.get("crossover", kind);
  if (kind == "uniform") {
    g.crossover = CrossoverKind::Uniform;
  } else if (kind == "one_point") {
    g.crossover = CrossoverKind::OnePoint;
  } else {
    throw ConfigError(s.field("crossover"), "expected uniform or one_point");
  }
  s.get("dpos_min", g.dpos_min);
  s.get("dpos_max", g.dpos_max);
  s.get("seed_all_ones", cfg.seed_all_ones);
}

}  // namespace

void ExperimentConfig::validate() const {
  if (adc_bits < 2 || adc_bits > 4) throw ConfigError("adc_bits", "must be 2, 3 or 4");
  if (!(dataset.train_fraction > 0.0 && dataset.train_fraction < 1.0)) {
    throw ConfigError("dataset.train_fraction", "must lie strictly between 0 and 1");
  }
  if (dataset.kind == DatasetSpec::Kind::Csv && dataset.path.empty()) {
    throw ConfigError("dataset.path", "required for csv datasets");
  }
  if (dataset.kind == DatasetSpec::Kind::Blobs) {
    if (dataset.blob_per_class < 2) throw ConfigError("dataset.per_class", "must be at least 2");
    if (dataset.blob_features < 1) throw ConfigError("dataset.features", "must be at least 1");
    if (!(dataset.blob_spread > 0.0)) throw ConfigError("dataset.spread", "must be positive");
  }
  if (training.epochs < 1) throw ConfigError("training.epochs", "must be at least 1");
  if (training.finetune_epochs < 1) throw ConfigError("training.finetune_epochs", "must be at least 1");
  if (!(training.lr > 0.0)) throw ConfigError("training.lr", "must be positive");
  if (!(training.finetune_lr > 0.0)) throw ConfigError("training.finetune_lr", "must be positive");
  if (training.batch < 1) throw ConfigError("training.batch", "must be at least 1");
  if (!(training.validation_fraction > 0.0 && training.validation_fraction < 1.0)) {
    throw ConfigError("training.validation_fraction", "must lie strictly between 0 and 1");
  }
  try {
    ga.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError("ga", e.what());
  }
  for (int d : {ga.dpos_min, ga.dpos_max}) {
    QuantConfig q;
    q.weight_bits = training.weight_bits;
    q.dpos = d;
    try {
      q.validate();
    } catch (const InvalidArgument& e) {
      throw ConfigError("training.weight_bits", e.what());
    }
  }
  if (training.dpos && (*training.dpos < ga.dpos_min || *training.dpos > ga.dpos_max)) {
    throw ConfigError("training.dpos", "must lie within [ga.dpos_min, ga.dpos_max]");
  }
  try {
    cost.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError("cost", e.what());
  }
  if (workers < 1) throw ConfigError("workers", "must be at least 1");
  if (output_dir.empty()) throw ConfigError("output_dir", "must not be empty");
}

ExperimentConfig config_from_json(const std::string& text, const std::string& base_dir) {
  const json root = parse(text);
  const Section top(root, "");
  top.allow({"seed", "workers", "output_dir", "adc_bits", "dataset", "training", "ga", "cost",
             "baselines"});
  ExperimentConfig cfg;
  top.get("seed", cfg.seed);
  top.get("workers", cfg.workers);
  top.get("output_dir", cfg.output_dir);
  top.get("adc_bits", cfg.adc_bits);
  if (top.has("dataset")) read_dataset(Section(top.at("dataset"), "dataset"), cfg.dataset, base_dir);
  if (top.has("training")) read_training(Section(top.at("training"), "training"), cfg.training);
  if (top.has("ga")) read_ga(Section(top.at("ga"), "ga"), cfg);
  if (top.has("cost")) read_cost(Section(top.at("cost"), "cost"), cfg.cost);
  if (top.has("baselines")) {
    const Section b(top.at("baselines"), "baselines");
    b.allow({"flash", "binary"});
    b.get("flash", cfg.report_flash);
    b.get("binary", cfg.report_binary);
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  const std::string text = read_file(path, "config file");
  return config_from_json(text, fs::path(path).parent_path().string());
}

std::string config_to_json(const ExperimentConfig& cfg) {
  ojson j;
  j["seed"] = cfg.seed;
  j["adc_bits"] = cfg.adc_bits;
  const auto& d = cfg.dataset;
  ojson ds;
  switch (d.kind) {
    case DatasetSpec::Kind::Csv: {
      ds["kind"] = "csv";
      ds["path"] = d.path;
      ds["delimiter"] = std::string(1, d.csv.delimiter);
      ds["header"] = d.csv.header;
      if (const auto* name = std::get_if<std::string>(&d.csv.label_column)) {
        ds["label_column"] = *name;
      } else {
        ds["label_column"] = std::get<int>(d.csv.label_column);
      }
      ds["missing"] = d.csv.missing;
      break;
    }
    case DatasetSpec::Kind::SyntheticSeeds:
      ds["kind"] = "synthetic_seeds";
      ds["synthetic_seed"] = d.synthetic_seed;
      break;
    case DatasetSpec::Kind::Blobs:
      ds["kind"] = "blobs";
      ds["synthetic_seed"] = d.synthetic_seed;
      ds["per_class"] = d.blob_per_class;
      ds["features"] = d.blob_features;
      ds["spread"] = d.blob_spread;
      break;
  }
  ds["train_fraction"] = d.train_fraction;
  j["dataset"] = ds;

  const auto& t = cfg.training;
  ojson tr;
  tr["hidden"] = t.hidden;
  tr["weight_bits"] = t.weight_bits;
  if (t.dpos) {
    tr["dpos"] = *t.dpos;
  } else {
    tr["dpos"] = "auto";
  }
  tr["pow2_biases"] = t.pow2_biases;
  tr["epochs"] = t.epochs;
  tr["lr"] = t.lr;
  tr["batch"] = t.batch;
  tr["finetune_epochs"] = t.finetune_epochs;
  tr["finetune_lr"] = t.finetune_lr;
  tr["fitness_mode"] = t.fitness_mode == FitnessMode::FineTune ? "finetune" : "scratch";
  tr["validation_mode"] = t.validation_mode;
  tr["validation_fraction"] = t.validation_fraction;
  j["training"] = tr;

  const auto& g = cfg.ga;
  ojson ga;
  ga["population"] = g.population;
  ga["generations"] = g.generations;
  ga["crossover_prob"] = g.crossover_prob;
  ga["mutation_prob"] = g.mutation_prob;
  ga["rates_in_percent"] = g.rates_in_percent;
  if (g.bit_flip_rate) ga["bit_flip_rate"] = *g.bit_flip_rate;
  ga["tournament"] = g.tournament;
  ga["crossover"] = g.crossover == CrossoverKind::Uniform ? "uniform" : "one_point";
  ga["dpos_min"] = g.dpos_min;
  ga["dpos_max"] = g.dpos_max;
  ga["seed_all_ones"] = cfg.seed_all_ones;
  j["ga"] = ga;

  const auto& c = cfg.cost;
  j["cost"] = ojson{{"comp_tr", c.comp_tr},         {"comp_noinv_tr", c.comp_noinv_tr},
                    {"comp_res", c.comp_res},       {"comp_noinv_res", c.comp_noinv_res},
                    {"inv_tr", c.inv_tr},           {"inv_res", c.inv_res},
                    {"sel_tr", c.sel_tr},           {"amp_tr", c.amp_tr},
                    {"and_gate_tr", c.and_gate_tr}, {"ladder_res", c.ladder_res},
                    {"encoder_coeff", c.encoder_coeff}, {"encoder_override", c.encoder_override}};
  j["baselines"] = ojson{{"flash", cfg.report_flash}, {"binary", cfg.report_binary}};
  return j.dump(2) + "\n";
}

CostTable cost_table_from_json(const std::string& text) {
  const json root = parse(text);
  CostTable c;
  // Accept either a bare table or a full config's "cost" section.
  if (root.is_object() && root.contains("cost")) {
    read_cost(Section(root.at("cost"), "cost"), c);
  } else {
    read_cost(Section(root, "cost"), c);
  }
  return c;
}

CostTable load_cost_table(const std::string& path) {
  return cost_table_from_json(read_file(path, "cost file"));
}

}  // namespace badc
