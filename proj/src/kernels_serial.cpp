#include "badc/error.hpp"
#include "badc/kernels.hpp"
#include "badc/mlp_qat.hpp"

namespace badc::kernels {

void check_encode_shape(const FeatureMatrix& raw, const std::vector<AdcKind>& adcs) {
  if (raw.cols() != adcs.size()) {
    throw InvalidArgument("need one ADC per feature: " + std::to_string(raw.cols()) +
                          " features, " + std::to_string(adcs.size()) + " ADCs");
  }
}

FeatureMatrix encode_serial(const FeatureMatrix& raw, const std::vector<AdcKind>& adcs) {
  check_encode_shape(raw, adcs);
  FeatureMatrix out(raw.rows(), raw.cols());
  for (std::size_t r = 0; r < raw.rows(); ++r) {
    for (std::size_t c = 0; c < raw.cols(); ++c) out(r, c) = quantize(adcs[c], raw(r, c)).repr;
  }
  return out;
}

std::size_t count_correct_serial(const TrainedModel& model, const FeatureMatrix& x,
                                 std::span<const int> labels) {
  std::size_t correct = 0;
  for (std::size_t r = 0; r < x.rows(); ++r) {
    if (predict(model, x.row(r)) == labels[r]) ++correct;
  }
  return correct;
}

void for_each_index_serial(std::size_t n, const std::function<void(std::size_t)>& task) {
  for (std::size_t i = 0; i < n; ++i) task(i);
}

}  // namespace badc::kernels
