#include <array>
#include <string>

#include "badc/dataset.hpp"
#include "badc/error.hpp"
#include "badc/rng.hpp"

namespace badc {

namespace {

struct FeatureStats {
  const char* name;
  std::array<double, 3> mean;
  std::array<double, 3> sd;
  double size_loading;  // share of variance driven by a per-sample size factor
};

// Per-class means and standard deviations for Kama, Rosa and Canadian wheat
// kernels. The size loading reproduces the strong correlation between the
// geometric features of the real measurements.
constexpr std::array<FeatureStats, 7> kSeedsStats{{
    {"area", {14.33, 18.33, 11.87}, {1.22, 1.44, 0.72}, 0.95},
    {"perimeter", {14.29, 16.14, 13.25}, {0.58, 0.62, 0.34}, 0.95},
    {"compactness", {0.880, 0.884, 0.849}, {0.016, 0.016, 0.022}, 0.3},
    {"kernel_length", {5.51, 6.15, 5.23}, {0.23, 0.27, 0.14}, 0.85},
    {"kernel_width", {3.24, 3.68, 2.85}, {0.18, 0.19, 0.15}, 0.85},
    {"asymmetry", {2.67, 3.64, 4.79}, {1.17, 1.18, 1.34}, 0.0},
    {"groove_length", {5.09, 6.02, 5.12}, {0.26, 0.25, 0.16}, 0.6},
}};

}  // namespace

Dataset synthetic_seeds(std::uint64_t seed) {
  constexpr int kPerClass = 70;
  Rng rng(derive_seed(seed, 0x5eed5u));
  Dataset ds;
  for (const auto& f : kSeedsStats) ds.feature_names.emplace_back(f.name);
  ds.class_names = {"1", "2", "3"};
  ds.n_classes = 3;
  std::vector<double> row(kSeedsStats.size());
  for (int c = 0; c < 3; ++c) {
    for (int i = 0; i < kPerClass; ++i) {
      const double size = standard_normal(rng);
      for (std::size_t k = 0; k < kSeedsStats.size(); ++k) {
        const auto& f = kSeedsStats[k];
        const double a = f.size_loading;
        const double z = a * size + std::sqrt(1.0 - a * a) * standard_normal(rng);
        row[k] = f.mean[static_cast<std::size_t>(c)] + f.sd[static_cast<std::size_t>(c)] * z;
      }
      ds.x.append_row(row);
      ds.y.push_back(c);
    }
  }
  return ds;
}

Dataset gaussian_blobs(std::size_t per_class, std::size_t features, double spread,
                       std::uint64_t seed) {
  if (per_class == 0 || features == 0) throw InvalidArgument("gaussian_blobs needs samples and features");
  if (!(spread > 0.0)) throw InvalidArgument("gaussian_blobs spread must be positive");
  Rng rng(derive_seed(seed, 0xb10bu));
  Dataset ds;
  for (std::size_t k = 0; k < features; ++k) ds.feature_names.push_back("x" + std::to_string(k));
  ds.class_names = {"0", "1"};
  ds.n_classes = 2;
  std::vector<double> row(features);
  for (int c = 0; c < 2; ++c) {
    const double centre = c == 0 ? 0.3 : 0.7;
    for (std::size_t i = 0; i < per_class; ++i) {
      for (auto& v : row) v = centre + spread * standard_normal(rng);
      ds.x.append_row(row);
      ds.y.push_back(c);
    }
  }
  return ds;
}

}  // namespace badc
