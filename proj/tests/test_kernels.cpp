#include <gtest/gtest.h>

#include <atomic>
#include <stdexcept>

#include "badc/dataset.hpp"
#include "badc/kernels.hpp"
#include "badc/mlp_qat.hpp"
#include "badc/rng.hpp"

using namespace badc;

namespace {

std::vector<AdcKind> mixed_adcs(std::size_t n) {
  const auto tree = build_threshold_tree(3);
  std::vector<AdcKind> adcs;
  for (std::size_t i = 0; i < n; ++i) {
    if (i % 3 == 0) adcs.emplace_back(FullBinary{3});
    if (i % 3 == 1) adcs.emplace_back(Flash{3});
    if (i % 3 == 2) adcs.emplace_back(PrunedBinary{prune(tree, LevelMask::from_codes(3, {0, 2, 5}))});
  }
  return adcs;
}

}  // namespace

TEST(Kernels, EncodeParallelMatchesSerial) {
  const auto ds = gaussian_blobs(300, 7, 0.2, 1);
  const auto adcs = mixed_adcs(7);
  const auto ref = kernels::encode_serial(ds.x, adcs);
  for (int w : {1, 2, 3, 8}) EXPECT_EQ(kernels::encode_parallel(ds.x, adcs, w), ref);
  // Every encoded value is the representation of the raw value's code.
  for (std::size_t r = 0; r < ds.size(); ++r) {
    for (std::size_t c = 0; c < 7; ++c) EXPECT_EQ(ref(r, c), quantize(adcs[c], ds.x(r, c)).repr);
  }
}

TEST(Kernels, EncodeRejectsShapeMismatchAndNan) {
  FeatureMatrix x(2, 2, 0.5);
  EXPECT_THROW(kernels::encode_serial(x, mixed_adcs(3)), std::exception);
  EXPECT_THROW(kernels::encode_parallel(x, mixed_adcs(3), 2), std::exception);
  x(1, 1) = std::nan("");
  EXPECT_THROW(kernels::encode_serial(x, mixed_adcs(2)), std::exception);
  EXPECT_THROW(kernels::encode_parallel(x, mixed_adcs(2), 2), std::exception);
}

TEST(Kernels, CountCorrectParallelMatchesSerial) {
  const auto ds = gaussian_blobs(200, 4, 0.15, 3);
  const auto m = init_model(default_topology(4, 2), QuantConfig{}, WeightMode::Pow2, 5);
  const auto ref = kernels::count_correct_serial(m, ds.x, ds.y);
  for (int w : {1, 2, 4}) EXPECT_EQ(kernels::count_correct_parallel(m, ds.x, ds.y, w), ref);
}

TEST(Kernels, ForEachIndexVisitsAllAndRethrowsLowestFailure) {
  for (int w : {1, 2, 4}) {
    std::vector<int> hit(100, 0);
    kernels::for_each_index(100, w, [&](std::size_t i) { hit[i] += 1; });
    for (int h : hit) EXPECT_EQ(h, 1);
    try {
      kernels::for_each_index(100, w, [&](std::size_t i) {
        if (i == 17 || i == 60) throw std::runtime_error("fail " + std::to_string(i));
      });
      FAIL();
    } catch (const std::runtime_error& e) {
      EXPECT_STREQ(e.what(), "fail 17");
    }
  }
}
