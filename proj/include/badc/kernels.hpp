#pragma once

// Data-parallel hot loops. Each kernel has a serial reference (kept for
// testing and as the single-worker path) and an OpenMP version that must
// produce bit-identical results for any worker count.

#include <cstddef>
#include <exception>
#include <functional>
#include <span>
#include <vector>

#include "badc/adc_model.hpp"
#include "badc/matrix.hpp"

namespace badc {
struct TrainedModel;
}

namespace badc::kernels {

// Replaces every feature value with its ADC representation value
// (one ADC per column).
FeatureMatrix encode_serial(const FeatureMatrix& raw, const std::vector<AdcKind>& adcs);
FeatureMatrix encode_parallel(const FeatureMatrix& raw, const std::vector<AdcKind>& adcs,
                              int workers);

std::size_t count_correct_serial(const TrainedModel& model, const FeatureMatrix& x,
                                 std::span<const int> labels);
std::size_t count_correct_parallel(const TrainedModel& model, const FeatureMatrix& x,
                                   std::span<const int> labels, int workers);

// Runs task(i) for i in [0, n). The exception surfaced is always the one from
// the lowest failing index, so callers see the same error for any worker
// count.
void for_each_index_serial(std::size_t n, const std::function<void(std::size_t)>& task);
void for_each_index_parallel(std::size_t n, int workers,
                             const std::function<void(std::size_t)>& task);

inline void for_each_index(std::size_t n, int workers,
                           const std::function<void(std::size_t)>& task) {
  if (workers <= 1) {
    for_each_index_serial(n, task);
  } else {
    for_each_index_parallel(n, workers, task);
  }
}

}  // namespace badc::kernels
