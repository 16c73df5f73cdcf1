#pragma once

// Behavioral models of full and pruned N-bit binary-search ADCs and the Flash
// baseline, as monotone quantizers over a normalized input in [0, 1].
//
// Positions: threshold position t in {1, ..., 2^N - 1} sits at t / 2^N of full
// scale and separates code t-1 (below) from code t (at or above). Code c owns
// the half-open interval [c/2^N, (c+1)/2^N); the top code also owns 1.0.

#include <bitset>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace badc {

inline constexpr int kMinAdcBits = 2;
inline constexpr int kMaxAdcBits = 8;

// Throws InvalidArgument unless kMinAdcBits <= n_bits <= kMaxAdcBits.
void check_adc_bits(int n_bits);

inline int level_count(int n_bits) { return 1 << n_bits; }

// Balanced tree of the 2^N - 1 comparison thresholds. Stage k (1-indexed)
// holds the 2^(k-1) positions with exactly N-k trailing zero bits, listed in
// descending order (the order the reference ladder is usually drawn).
class ThresholdTree {
 public:
  explicit ThresholdTree(int n_bits);

  int n_bits() const { return n_bits_; }
  int levels() const { return level_count(n_bits_); }
  int root() const { return levels() / 2; }
  int stage_count() const { return n_bits_; }
  std::span<const int> stage(int k) const;

  // 0 for the root, N-1 for the last stage.
  int depth(int position) const;
  double value(int position) const { return static_cast<double>(position) / levels(); }
  bool is_leaf(int position) const { return (position & 1) != 0; }
  int left_child(int position) const;
  int right_child(int position) const;

  std::vector<int> in_order() const;

 private:
  int n_bits_;
  std::vector<std::vector<int>> stages_;
};

ThresholdTree build_threshold_tree(int n_bits);

// Keep/prune bit per output code. Always has at least two kept codes.
class LevelMask {
 public:
  static constexpr int kMaxLevels = 1 << kMaxAdcBits;
  using Bits = std::bitset<kMaxLevels>;

  // Throws InvalidArgument for bad n_bits or bits set beyond 2^N, and
  // DegenerateMask when fewer than two codes are kept.
  LevelMask(int n_bits, const Bits& bits);

  static LevelMask all(int n_bits);
  static LevelMask from_codes(int n_bits, std::span<const int> codes);
  static LevelMask from_codes(int n_bits, std::initializer_list<int> codes) {
    return from_codes(n_bits, std::span<const int>(codes.begin(), codes.size()));
  }
  // Bit c of the hex integer keeps code c. Accepts an optional 0x prefix and
  // any number of digits as long as no bit beyond 2^N is set.
  static LevelMask from_hex(int n_bits, std::string_view hex);

  int n_bits() const { return n_bits_; }
  int levels() const { return level_count(n_bits_); }
  int kept_count() const { return static_cast<int>(bits_.count()); }
  bool kept(int code) const { return bits_.test(static_cast<std::size_t>(code)); }
  const Bits& bits() const { return bits_; }
  std::vector<int> kept_codes() const;
  bool all_kept() const { return kept_count() == levels(); }

  // Fixed width: max(1, 2^N / 4) lowercase hex digits, no prefix.
  std::string to_hex() const;

  bool operator==(const LevelMask&) const = default;

 private:
  int n_bits_;
  Bits bits_;
};

// An ADC with a subset of its quantization levels (and the comparator tree
// nodes that only served the removed levels) pruned away.
class PrunedAdc {
 public:
  const LevelMask& mask() const { return mask_; }
  int n_bits() const { return mask_.n_bits(); }
  std::span<const int> kept_codes() const { return kept_codes_; }
  // Surviving threshold positions, strictly increasing, one fewer than codes.
  std::span<const int> boundaries() const { return boundaries_; }
  std::span<const double> repr_values() const { return repr_values_; }

 private:
  friend PrunedAdc prune(const ThresholdTree& tree, const LevelMask& mask);
  explicit PrunedAdc(LevelMask mask) : mask_(std::move(mask)) {}

  LevelMask mask_;
  std::vector<int> kept_codes_;
  std::vector<int> boundaries_;
  std::vector<double> repr_values_;
};

// Boundary between consecutive kept codes lo < hi: the unique position in
// (lo, hi] with the most trailing zeros, i.e. the shallowest separating node.
int shallowest_separator(int lo, int hi);

PrunedAdc prune(const ThresholdTree& tree, const LevelMask& mask);

struct FullBinary {
  int n_bits;
};
struct PrunedBinary {
  PrunedAdc adc;
};
struct Flash {
  int n_bits;
};
using AdcKind = std::variant<FullBinary, PrunedBinary, Flash>;

int adc_bits(const AdcKind& adc);

struct Quantized {
  int code;
  double repr;
};

// Out-of-range inputs are clamped to [0, 1]; NaN throws InvalidArgument.
Quantized quantize(const AdcKind& adc, double v);

// Midpoint of the (possibly merged) input interval owned by `code`.
double representation_value(const PrunedAdc& adc, int code);

// Reference quantizer: walks the full threshold tree, where a comparator whose
// subtree has kept codes on only one side is absent and forwards the search
// to that side. Independent of the boundary list built by prune().
int oracle_quantize(const ThresholdTree& tree, const LevelMask& mask, double v);

}  // namespace badc
