// Serial reference kernels against their OpenMP versions.

#include <benchmark/benchmark.h>

#include <cmath>

#include "badc/dataset.hpp"
#include "badc/kernels.hpp"
#include "badc/mlp_qat.hpp"

using namespace badc;

namespace {

const Dataset& data() {
  static const Dataset ds = gaussian_blobs(5000, 7, 0.1, 11);
  return ds;
}

std::vector<AdcKind> adcs() {
  const auto tree = build_threshold_tree(3);
  std::vector<AdcKind> out;
  for (int i = 0; i < 7; ++i) out.emplace_back(PrunedBinary{prune(tree, LevelMask::from_codes(3, {0, 2, 5, 7}))});
  return out;
}

const TrainedModel& model() {
  static const TrainedModel m =
      init_model(MlpTopology{{7, 16, 2}}, QuantConfig{}, WeightMode::Pow2, 3);
  return m;
}

void BM_EncodeSerial(benchmark::State& st) {
  const auto a = adcs();
  for (auto _ : st) benchmark::DoNotOptimize(kernels::encode_serial(data().x, a));
}

void BM_EncodeParallel(benchmark::State& st) {
  const auto a = adcs();
  for (auto _ : st) benchmark::DoNotOptimize(kernels::encode_parallel(data().x, a, static_cast<int>(st.range(0))));
}

void BM_CountCorrectSerial(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(kernels::count_correct_serial(model(), data().x, data().y));
}

void BM_CountCorrectParallel(benchmark::State& st) {
  for (auto _ : st) {
    benchmark::DoNotOptimize(
        kernels::count_correct_parallel(model(), data().x, data().y, static_cast<int>(st.range(0))));
  }
}

void busy(std::size_t i) {
  double acc = 0.0;
  for (int k = 0; k < 20000; ++k) acc += std::sin(static_cast<double>(i + k));
  benchmark::DoNotOptimize(acc);
}

void BM_ForEachSerial(benchmark::State& st) {
  for (auto _ : st) kernels::for_each_index_serial(64, busy);
}

void BM_ForEachParallel(benchmark::State& st) {
  for (auto _ : st) kernels::for_each_index_parallel(64, static_cast<int>(st.range(0)), busy);
}

}  // namespace

BENCHMARK(BM_EncodeSerial);
BENCHMARK(BM_EncodeParallel)->Arg(1)->Arg(2)->Arg(4);
BENCHMARK(BM_CountCorrectSerial);
BENCHMARK(BM_CountCorrectParallel)->Arg(1)->Arg(2)->Arg(4);
BENCHMARK(BM_ForEachSerial);
BENCHMARK(BM_ForEachParallel)->Arg(1)->Arg(2)->Arg(4);

BENCHMARK_MAIN();
