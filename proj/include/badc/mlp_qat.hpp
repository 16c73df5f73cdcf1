#pragma once

// Small MLP classifier trained with quantization-aware training: the forward
// pass uses power-of-2 weights and ADC-quantized inputs, the backward pass
// treats the weight quantizer as identity (straight-through) and updates
// float shadow weights.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "badc/adc_model.hpp"
#include "badc/matrix.hpp"

namespace badc {

struct MlpTopology {
  std::vector<int> layer_sizes;  // inputs, hidden..., classes

  int inputs() const { return layer_sizes.front(); }
  int classes() const { return layer_sizes.back(); }
  // Throws InvalidArgument for fewer than two layers or non-positive sizes.
  void validate() const;
  bool operator==(const MlpTopology&) const = default;
};

// One hidden layer of max(3, classes) neurons.
MlpTopology default_topology(int inputs, int classes);

struct QuantConfig {
  int weight_bits = 8;
  int dpos = 4;             // fractional bits of the fixed-point format
  bool pow2_biases = false; // biases are plain 8-bit fixed point otherwise

  // Power-of-2 magnitudes 2^k with min_exponent() <= k <= max_exponent().
  int min_exponent() const { return -dpos; }
  int max_exponent() const { return weight_bits - 2 - dpos; }
  void validate() const;
  bool operator==(const QuantConfig&) const = default;
};

inline constexpr int kMinDpos = 0;
inline constexpr int kMaxDpos = 7;

// 0 below half the smallest magnitude, else sign(w) * 2^round(log2|w|) with
// ties toward the smaller exponent, clamped to the representable range.
double quantize_weight_pow2(double w, const QuantConfig& cfg);
// Round-to-nearest signed fixed point with weight_bits bits and dpos
// fractional bits, saturating.
double quantize_bias_fixed(double b, const QuantConfig& cfg);

struct DenseLayer {
  int in = 0;
  int out = 0;
  std::vector<double> weights;  // row-major [out][in]
  std::vector<double> biases;

  double w(int o, int i) const { return weights[static_cast<std::size_t>(o * in + i)]; }
  bool operator==(const DenseLayer&) const = default;
};

enum class WeightMode { Float, Pow2 };

struct TrainHyper {
  int epochs = 100;
  double lr = 0.05;
  int batch = 16;
  std::uint64_t seed = 1;
};

struct TrainMetrics {
  double train_accuracy = 0.0;
  double final_loss = 0.0;
  std::vector<double> epoch_loss;
  bool operator==(const TrainMetrics&) const = default;
};

struct TrainedModel {
  MlpTopology topology;
  QuantConfig quant;
  WeightMode mode = WeightMode::Pow2;
  std::vector<DenseLayer> shadow;     // float master weights
  std::vector<DenseLayer> effective;  // what forward() uses
  std::uint64_t seed = 0;
  TrainMetrics metrics;

  // Re-derives `effective` from `shadow` for the current mode and quant.
  void requantize();
};

TrainedModel init_model(const MlpTopology& topology, const QuantConfig& quant, WeightMode mode,
                        std::uint64_t seed);

std::vector<double> forward(const TrainedModel& model, std::span<const double> x);
// Argmax with lowest-index tie-break.
int argmax(std::span<const double> logits);
int predict(const TrainedModel& model, std::span<const double> x);

// Mean softmax cross-entropy over `rows` and its gradient w.r.t. every weight
// and bias of `layers` (same layout). This is the backward pass used in
// training; the straight-through estimator applies it to shadow weights.
struct LossGradient {
  double loss = 0.0;
  std::vector<DenseLayer> grad;
};
LossGradient loss_and_gradient(const std::vector<DenseLayer>& layers, const FeatureMatrix& x,
                               std::span<const int> labels, std::span<const std::size_t> rows);

// Inputs must already be ADC-encoded (see encode_inputs). Throws
// InvalidArgument on empty/mismatched data and TrainingDiverged when the
// loss becomes non-finite.
TrainedModel train_qat(const FeatureMatrix& x, std::span<const int> labels,
                       const MlpTopology& topology, const QuantConfig& quant,
                       const TrainHyper& hyper, WeightMode mode = WeightMode::Pow2);

// Continues training from `start`'s shadow weights at `quant`.
TrainedModel fine_tune(const TrainedModel& start, const FeatureMatrix& x,
                       std::span<const int> labels, const QuantConfig& quant,
                       const TrainHyper& hyper);

// Convenience overload: encodes raw normalized features through `adcs` first.
TrainedModel train_qat(const FeatureMatrix& raw, std::span<const int> labels,
                       const MlpTopology& topology, const QuantConfig& quant,
                       const std::vector<AdcKind>& adcs, const TrainHyper& hyper);

double evaluate(const TrainedModel& model, const FeatureMatrix& x, std::span<const int> labels);
double evaluate(const TrainedModel& model, const FeatureMatrix& raw, std::span<const int> labels,
                const std::vector<AdcKind>& adcs);

// Representation of a quantized weight: sign in {-1, 0, +1} and exponent.
struct Pow2Code {
  int sign = 0;
  int exponent = 0;
  bool operator==(const Pow2Code&) const = default;
};
Pow2Code encode_pow2(double q);
double decode_pow2(Pow2Code c);
bool is_pow2_or_zero(double q, const QuantConfig& cfg);

// JSON text file: topology, dpos, quantized weights as (sign, exponent)
// tuples, fixed-point biases as integer mantissas, seed and metrics.
std::string model_to_json(const TrainedModel& model, int indent = 1);
TrainedModel model_from_json(const std::string& text);
void save_model(const TrainedModel& model, const std::string& path);
TrainedModel load_model(const std::string& path);

}  // namespace badc
