#include <omp.h>

#include <algorithm>
#include <cmath>

#include "badc/error.hpp"
#include "badc/kernels.hpp"
#include "badc/mlp_qat.hpp"

namespace badc::kernels {

void check_encode_shape(const FeatureMatrix& raw, const std::vector<AdcKind>& adcs);

namespace {

int clamp_workers(int workers) { return std::max(1, workers); }

}  // namespace

FeatureMatrix encode_parallel(const FeatureMatrix& raw, const std::vector<AdcKind>& adcs,
                              int workers) {
  check_encode_shape(raw, adcs);
  FeatureMatrix out(raw.rows(), raw.cols());
  const auto rows = static_cast<std::ptrdiff_t>(raw.rows());
  const std::size_t cols = raw.cols();
  // quantize() only throws on NaN, which the dataset loader already rejects;
  // NaNs are pre-checked here so nothing throws inside the parallel region.
  for (double v : raw.data()) {
    if (std::isnan(v)) throw InvalidArgument("ADC input is NaN");
  }
#pragma omp parallel for num_threads(clamp_workers(workers)) schedule(static)
  for (std::ptrdiff_t r = 0; r < rows; ++r) {
    const auto ur = static_cast<std::size_t>(r);
    for (std::size_t c = 0; c < cols; ++c) out(ur, c) = quantize(adcs[c], raw(ur, c)).repr;
  }
  return out;
}

std::size_t count_correct_parallel(const TrainedModel& model, const FeatureMatrix& x,
                                   std::span<const int> labels, int workers) {
  if (x.cols() != static_cast<std::size_t>(model.topology.inputs())) {
    throw InvalidArgument("feature count does not match model input size");
  }
  const auto rows = static_cast<std::ptrdiff_t>(x.rows());
  std::size_t correct = 0;
#pragma omp parallel for num_threads(clamp_workers(workers)) reduction(+ : correct) schedule(static)
  for (std::ptrdiff_t r = 0; r < rows; ++r) {
    const auto ur = static_cast<std::size_t>(r);
    if (predict(model, x.row(ur)) == labels[ur]) ++correct;
  }
  return correct;
}

void for_each_index_parallel(std::size_t n, int workers,
                             const std::function<void(std::size_t)>& task) {
  std::vector<std::exception_ptr> errors(n);
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for num_threads(clamp_workers(workers)) schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      task(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace badc::kernels
