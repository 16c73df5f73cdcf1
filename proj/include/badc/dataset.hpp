#pragma once

#include <cstdint>
#include <istream>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "badc/matrix.hpp"

namespace badc {

struct Dataset {
  FeatureMatrix x;
  std::vector<int> y;  // dense labels in [0, n_classes)
  std::vector<std::string> feature_names;
  std::vector<std::string> class_names;  // original label token per class
  int n_classes = 0;
  int dropped_rows = 0;  // rows removed for missing values at load time

  std::size_t size() const { return y.size(); }
  std::size_t features() const { return x.cols(); }
};

struct CsvOptions {
  char delimiter = ',';
  bool header = true;
  // Column name, or index (negative counts from the end; -1 = last column).
  std::variant<std::string, int> label_column = -1;
  std::string missing = "?";
};

// Rows containing the missing-value token (or an empty cell) are dropped.
// Labels are re-indexed densely in sorted order (numerically when every label
// parses as a number). Throws DatasetError.
Dataset load_csv(const std::string& path, const CsvOptions& opts = {});
Dataset parse_csv(std::istream& in, const CsvOptions& opts = {});

struct Bounds {
  std::vector<double> min;
  std::vector<double> max;
  bool operator==(const Bounds&) const = default;
};

// Per-feature (min, max) over `rows` only.
Bounds compute_bounds(const Dataset& ds, std::span<const std::size_t> rows);
Bounds identity_bounds(std::size_t features);

// x' = (x - min) / (max - min), clamped to [0, 1]; constant features map to 0.
Dataset normalize(const Dataset& ds, const Bounds& bounds);

struct Split {
  std::vector<std::size_t> train;  // ascending
  std::vector<std::size_t> test;   // ascending
  std::uint64_t seed = 0;
  std::vector<int> train_per_class;
  std::vector<int> test_per_class;
};

// Per class floor(frac * n_c) go to train; the slots left to reach
// floor(frac * N) go to classes by descending fractional part (ties: lower
// class index). Members are drawn per class with a seeded shuffle. Throws
// StratificationError when a class has fewer than two samples.
Split stratified_split(const Dataset& ds, double train_frac, std::uint64_t seed);

Dataset subset(const Dataset& ds, std::span<const std::size_t> rows);

// Bundled stand-in for the UCI Seeds data: 210 samples, 7 features, three
// balanced classes drawn from per-class Gaussians with the published
// per-class feature statistics.
Dataset synthetic_seeds(std::uint64_t seed);

// Two isotropic Gaussian blobs in `features` dimensions, linearly separable
// with high probability at the default spread.
Dataset gaussian_blobs(std::size_t per_class, std::size_t features, double spread,
                       std::uint64_t seed);

void write_csv(const Dataset& ds, std::ostream& out);

}  // namespace badc
