#include "badc/mlp_qat.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "badc/error.hpp"
#include "badc/kernels.hpp"
#include "badc/rng.hpp"

namespace badc {

using nlohmann::json;

void MlpTopology::validate() const {
  if (layer_sizes.size() < 2) throw InvalidArgument("MLP topology needs at least two layers");
  for (int s : layer_sizes) {
    if (s <= 0) throw InvalidArgument("MLP layer sizes must be positive");
  }
}

MlpTopology default_topology(int inputs, int classes) {
  return MlpTopology{{inputs, std::max(3, classes), classes}};
}

void QuantConfig::validate() const {
  if (weight_bits < 2 || weight_bits > 16) throw InvalidArgument("weight_bits must be in [2, 16]");
  if (dpos < kMinDpos || dpos > weight_bits - 1) {
    throw InvalidArgument("dpos must be in [0, weight_bits - 1], got " + std::to_string(dpos));
  }
}

double quantize_weight_pow2(double w, const QuantConfig& cfg) {
  if (std::isnan(w)) throw InvalidArgument("cannot quantize NaN weight");
  const double mag = std::fabs(w);
  const double smallest = std::ldexp(1.0, cfg.min_exponent());
  if (mag < 0.5 * smallest) return 0.0;
  int k;
  if (std::isinf(mag)) {
    k = cfg.max_exponent();
  } else {
    // ceil(e - 0.5) rounds to nearest with exact halves going down.
    k = static_cast<int>(std::ceil(std::log2(mag) - 0.5));
    k = std::clamp(k, cfg.min_exponent(), cfg.max_exponent());
  }
  return std::copysign(std::ldexp(1.0, k), w);
}

double quantize_bias_fixed(double b, const QuantConfig& cfg) {
  if (std::isnan(b)) throw InvalidArgument("cannot quantize NaN bias");
  const double hi = std::ldexp(1.0, cfg.weight_bits - 1) - 1.0;
  const double lo = -std::ldexp(1.0, cfg.weight_bits - 1);
  const double m = std::clamp(std::round(std::ldexp(b, cfg.dpos)), lo, hi);
  return std::ldexp(m, -cfg.dpos);
}

void TrainedModel::requantize() {
  effective = shadow;
  if (mode == WeightMode::Float) return;
  for (auto& layer : effective) {
    for (auto& w : layer.weights) w = quantize_weight_pow2(w, quant);
    for (auto& b : layer.biases) {
      b = quant.pow2_biases ? quantize_weight_pow2(b, quant) : quantize_bias_fixed(b, quant);
    }
  }
}

TrainedModel init_model(const MlpTopology& topology, const QuantConfig& quant, WeightMode mode,
                        std::uint64_t seed) {
  topology.validate();
  quant.validate();
  TrainedModel m;
  m.topology = topology;
  m.quant = quant;
  m.mode = mode;
  m.seed = seed;
  Rng rng(derive_seed(seed, 0x1417));
  const auto& sizes = topology.layer_sizes;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    DenseLayer layer;
    layer.in = sizes[l];
    layer.out = sizes[l + 1];
    const bool last = l + 2 == sizes.size();
    // A small output layer keeps early gradients from killing hidden units.
    const double bound = last ? 0.1 * std::sqrt(6.0 / (layer.in + layer.out)) : std::sqrt(6.0 / layer.in);
    layer.weights.resize(static_cast<std::size_t>(layer.in * layer.out));
    for (auto& w : layer.weights) w = bound * (2.0 * uniform01(rng) - 1.0);
    layer.biases.assign(static_cast<std::size_t>(layer.out), 0.0);
    if (!last) {
      // Inputs live in [0, 1]: start each hidden hyperplane through the cube
      // centre so no unit begins dead on every sample.
      for (int o = 0; o < layer.out; ++o) {
        double s = 0.0;
        for (int i = 0; i < layer.in; ++i) s += layer.weights[static_cast<std::size_t>(o * layer.in + i)];
        layer.biases[static_cast<std::size_t>(o)] = -0.5 * s;
      }
    }
    m.shadow.push_back(std::move(layer));
  }
  m.requantize();
  return m;
}

namespace {

void check_input_dim(const TrainedModel& model, std::size_t n) {
  if (static_cast<int>(n) != model.topology.inputs()) {
    throw InvalidArgument("input has " + std::to_string(n) + " features, model expects " +
                          std::to_string(model.topology.inputs()));
  }
}

// Forward pass keeping every layer's post-activation output.
void forward_layers(const std::vector<DenseLayer>& layers, std::span<const double> x,
                    std::vector<std::vector<double>>& acts) {
  acts.resize(layers.size() + 1);
  acts[0].assign(x.begin(), x.end());
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& L = layers[l];
    auto& out = acts[l + 1];
    out.assign(static_cast<std::size_t>(L.out), 0.0);
    const bool hidden = l + 1 < layers.size();
    for (int o = 0; o < L.out; ++o) {
      double s = L.biases[static_cast<std::size_t>(o)];
      const double* wr = L.weights.data() + static_cast<std::size_t>(o * L.in);
      for (int i = 0; i < L.in; ++i) s += wr[i] * acts[l][static_cast<std::size_t>(i)];
      out[static_cast<std::size_t>(o)] = hidden ? std::max(0.0, s) : s;
    }
  }
}

// Stable log-softmax cross-entropy; fills dlogits = softmax - onehot.
double softmax_xent(std::span<const double> logits, int label, std::vector<double>& dlogits) {
  const double mx = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (double v : logits) z += std::exp(v - mx);
  const double logz = mx + std::log(z);
  dlogits.resize(logits.size());
  for (std::size_t c = 0; c < logits.size(); ++c) {
    dlogits[c] = std::exp(logits[c] - logz) - (static_cast<int>(c) == label ? 1.0 : 0.0);
  }
  return logz - logits[static_cast<std::size_t>(label)];
}

std::vector<DenseLayer> zero_like(const std::vector<DenseLayer>& layers) {
  auto g = layers;
  for (auto& l : g) {
    std::fill(l.weights.begin(), l.weights.end(), 0.0);
    std::fill(l.biases.begin(), l.biases.end(), 0.0);
  }
  return g;
}

void check_training_data(const FeatureMatrix& x, std::span<const int> labels,
                         const MlpTopology& topology) {
  if (x.rows() == 0) throw InvalidArgument("training set is empty");
  if (x.rows() != labels.size()) throw InvalidArgument("feature/label row count mismatch");
  if (static_cast<int>(x.cols()) != topology.inputs()) {
    throw InvalidArgument("feature count does not match topology input size");
  }
  for (int y : labels) {
    if (y < 0 || y >= topology.classes()) throw InvalidArgument("label outside class range");
  }
}

void run_sgd(TrainedModel& m, const FeatureMatrix& x, std::span<const int> labels,
             const TrainHyper& hyper) {
  if (hyper.epochs < 0 || hyper.batch <= 0 || !(hyper.lr > 0.0)) {
    throw InvalidArgument("invalid training hyperparameters");
  }
  Rng rng(derive_seed(hyper.seed, 0x5eed));
  std::vector<std::size_t> order(x.rows());
  std::iota(order.begin(), order.end(), std::size_t{0});
  // Clipped straight-through estimator: shadow weights stay within twice the
  // largest representable magnitude.
  const double clip = m.mode == WeightMode::Pow2 ? std::ldexp(2.0, m.quant.max_exponent()) : 0.0;
  m.metrics.epoch_loss.clear();
  for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
    shuffle(std::span<std::size_t>(order), rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(hyper.batch)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(hyper.batch));
      std::span<const std::size_t> rows(order.data() + start, end - start);
      const auto lg = loss_and_gradient(m.effective, x, labels, rows);
      if (!std::isfinite(lg.loss)) {
        throw TrainingDiverged("non-finite loss at epoch " + std::to_string(epoch));
      }
      epoch_loss += lg.loss * static_cast<double>(rows.size());
      for (std::size_t l = 0; l < m.shadow.size(); ++l) {
        auto& s = m.shadow[l];
        const auto& g = lg.grad[l];
        for (std::size_t i = 0; i < s.weights.size(); ++i) {
          s.weights[i] -= hyper.lr * g.weights[i];
          if (clip > 0.0) s.weights[i] = std::clamp(s.weights[i], -clip, clip);
        }
        for (std::size_t i = 0; i < s.biases.size(); ++i) s.biases[i] -= hyper.lr * g.biases[i];
      }
      m.requantize();
    }
    epoch_loss /= static_cast<double>(order.size());
    if (!std::isfinite(epoch_loss)) {
      throw TrainingDiverged("non-finite loss at epoch " + std::to_string(epoch));
    }
    m.metrics.epoch_loss.push_back(epoch_loss);
  }
  m.metrics.final_loss = m.metrics.epoch_loss.empty() ? 0.0 : m.metrics.epoch_loss.back();
  m.metrics.train_accuracy = evaluate(m, x, labels);
}

}  // namespace

std::vector<double> forward(const TrainedModel& model, std::span<const double> x) {
  check_input_dim(model, x.size());
  std::vector<std::vector<double>> acts;
  forward_layers(model.effective, x, acts);
  return std::move(acts.back());
}

int argmax(std::span<const double> logits) {
  if (logits.empty()) throw InvalidArgument("argmax of empty logits");
  int best = 0;
  for (std::size_t c = 1; c < logits.size(); ++c) {
    if (logits[c] > logits[static_cast<std::size_t>(best)]) best = static_cast<int>(c);
  }
  return best;
}

int predict(const TrainedModel& model, std::span<const double> x) {
  const auto logits = forward(model, x);
  return argmax(logits);
}

LossGradient loss_and_gradient(const std::vector<DenseLayer>& layers, const FeatureMatrix& x,
                               std::span<const int> labels, std::span<const std::size_t> rows) {
  LossGradient out;
  out.grad = zero_like(layers);
  if (rows.empty()) return out;
  std::vector<std::vector<double>> acts;
  std::vector<double> delta, prev_delta;
  for (std::size_t r : rows) {
    forward_layers(layers, x.row(r), acts);
    out.loss += softmax_xent(acts.back(), labels[r], delta);
    for (std::size_t l = layers.size(); l-- > 0;) {
      const auto& L = layers[l];
      auto& G = out.grad[l];
      const auto& input = acts[l];
      for (int o = 0; o < L.out; ++o) {
        const double d = delta[static_cast<std::size_t>(o)];
        if (d == 0.0) continue;
        G.biases[static_cast<std::size_t>(o)] += d;
        double* gr = G.weights.data() + static_cast<std::size_t>(o * L.in);
        for (int i = 0; i < L.in; ++i) gr[i] += d * input[static_cast<std::size_t>(i)];
      }
      if (l == 0) break;
      prev_delta.assign(static_cast<std::size_t>(L.in), 0.0);
      for (int o = 0; o < L.out; ++o) {
        const double d = delta[static_cast<std::size_t>(o)];
        if (d == 0.0) continue;
        const double* wr = L.weights.data() + static_cast<std::size_t>(o * L.in);
        for (int i = 0; i < L.in; ++i) prev_delta[static_cast<std::size_t>(i)] += d * wr[i];
      }
      // ReLU derivative of the layer below (its output is `input`).
      for (int i = 0; i < L.in; ++i) {
        if (input[static_cast<std::size_t>(i)] <= 0.0) prev_delta[static_cast<std::size_t>(i)] = 0.0;
      }
      delta.swap(prev_delta);
    }
  }
  const double inv = 1.0 / static_cast<double>(rows.size());
  out.loss *= inv;
  for (auto& g : out.grad) {
    for (auto& w : g.weights) w *= inv;
    for (auto& b : g.biases) b *= inv;
  }
  return out;
}

TrainedModel train_qat(const FeatureMatrix& x, std::span<const int> labels,
                       const MlpTopology& topology, const QuantConfig& quant,
                       const TrainHyper& hyper, WeightMode mode) {
  topology.validate();
  check_training_data(x, labels, topology);
  TrainedModel m = init_model(topology, quant, mode, hyper.seed);
  run_sgd(m, x, labels, hyper);
  return m;
}

TrainedModel fine_tune(const TrainedModel& start, const FeatureMatrix& x,
                       std::span<const int> labels, const QuantConfig& quant,
                       const TrainHyper& hyper) {
  check_training_data(x, labels, start.topology);
  quant.validate();
  TrainedModel m = start;
  m.quant = quant;
  m.seed = hyper.seed;
  m.requantize();
  run_sgd(m, x, labels, hyper);
  return m;
}

TrainedModel train_qat(const FeatureMatrix& raw, std::span<const int> labels,
                       const MlpTopology& topology, const QuantConfig& quant,
                       const std::vector<AdcKind>& adcs, const TrainHyper& hyper) {
  return train_qat(kernels::encode_serial(raw, adcs), labels, topology, quant, hyper);
}

double evaluate(const TrainedModel& model, const FeatureMatrix& x, std::span<const int> labels) {
  if (x.rows() == 0) throw InvalidArgument("test set is empty");
  if (x.rows() != labels.size()) throw InvalidArgument("feature/label row count mismatch");
  return static_cast<double>(kernels::count_correct_serial(model, x, labels)) /
         static_cast<double>(x.rows());
}

double evaluate(const TrainedModel& model, const FeatureMatrix& raw, std::span<const int> labels,
                const std::vector<AdcKind>& adcs) {
  return evaluate(model, kernels::encode_serial(raw, adcs), labels);
}

Pow2Code encode_pow2(double q) {
  if (q == 0.0) return {0, 0};
  int exp = 0;
  const double frac = std::frexp(std::fabs(q), &exp);
  if (frac != 0.5) throw InvalidArgument("value is not a power of two");
  return {q < 0 ? -1 : 1, exp - 1};
}

double decode_pow2(Pow2Code c) {
  if (c.sign == 0) return 0.0;
  return c.sign * std::ldexp(1.0, c.exponent);
}

bool is_pow2_or_zero(double q, const QuantConfig& cfg) {
  if (q == 0.0) return true;
  int exp = 0;
  if (std::frexp(std::fabs(q), &exp) != 0.5) return false;
  return exp - 1 >= cfg.min_exponent() && exp - 1 <= cfg.max_exponent();
}

namespace {

json layer_to_json(const DenseLayer& l, const TrainedModel& m) {
  json j;
  j["in"] = l.in;
  j["out"] = l.out;
  if (m.mode == WeightMode::Pow2) {
    json w = json::array();
    for (double v : l.weights) {
      const auto c = encode_pow2(v);
      w.push_back(json::array({c.sign, c.exponent}));
    }
    j["weights"] = std::move(w);
    json b = json::array();
    for (double v : l.biases) b.push_back(static_cast<long long>(std::ldexp(v, m.quant.dpos)));
    j["bias_mantissas"] = std::move(b);
  } else {
    j["weights"] = l.weights;
    j["biases"] = l.biases;
  }
  return j;
}

}  // namespace

std::string model_to_json(const TrainedModel& model, int indent) {
  json j;
  j["format"] = "badc-mlp/1";
  j["mode"] = model.mode == WeightMode::Pow2 ? "pow2" : "float";
  j["topology"] = model.topology.layer_sizes;
  j["weight_bits"] = model.quant.weight_bits;
  j["dpos"] = model.quant.dpos;
  j["pow2_biases"] = model.quant.pow2_biases;
  j["seed"] = model.seed;
  j["metrics"] = {{"train_accuracy", model.metrics.train_accuracy},
                  {"final_loss", model.metrics.final_loss}};
  json layers = json::array();
  for (const auto& l : model.effective) layers.push_back(layer_to_json(l, model));
  j["layers"] = std::move(layers);
  return j.dump(indent);
}

TrainedModel model_from_json(const std::string& text) {
  TrainedModel m;
  try {
    const json j = json::parse(text);
    if (j.at("format").get<std::string>() != "badc-mlp/1") {
      throw InvalidArgument("unsupported model format");
    }
    m.mode = j.at("mode").get<std::string>() == "pow2" ? WeightMode::Pow2 : WeightMode::Float;
    m.topology.layer_sizes = j.at("topology").get<std::vector<int>>();
    m.topology.validate();
    m.quant.weight_bits = j.at("weight_bits").get<int>();
    m.quant.dpos = j.at("dpos").get<int>();
    m.quant.pow2_biases = j.at("pow2_biases").get<bool>();
    m.quant.validate();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.metrics.train_accuracy = j.at("metrics").at("train_accuracy").get<double>();
    m.metrics.final_loss = j.at("metrics").at("final_loss").get<double>();
    for (const auto& jl : j.at("layers")) {
      DenseLayer l;
      l.in = jl.at("in").get<int>();
      l.out = jl.at("out").get<int>();
      if (m.mode == WeightMode::Pow2) {
        for (const auto& c : jl.at("weights")) {
          l.weights.push_back(decode_pow2({c.at(0).get<int>(), c.at(1).get<int>()}));
        }
        for (const auto& b : jl.at("bias_mantissas")) {
          l.biases.push_back(std::ldexp(static_cast<double>(b.get<long long>()), -m.quant.dpos));
        }
      } else {
        l.weights = jl.at("weights").get<std::vector<double>>();
        l.biases = jl.at("biases").get<std::vector<double>>();
      }
      if (l.weights.size() != static_cast<std::size_t>(l.in * l.out) ||
          l.biases.size() != static_cast<std::size_t>(l.out)) {
        throw InvalidArgument("layer shape does not match its weight count");
      }
      m.effective.push_back(std::move(l));
    }
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("malformed model file: ") + e.what());
  }
  if (m.effective.size() + 1 != m.topology.layer_sizes.size()) {
    throw InvalidArgument("model layer count does not match topology");
  }
  m.shadow = m.effective;
  return m;
}

void save_model(const TrainedModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write model file " + path);
  out << model_to_json(model) << '\n';
}

TrainedModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read model file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return model_from_json(ss.str());
}

}  // namespace badc
