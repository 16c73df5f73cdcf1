#include "badc/adc_model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cctype>

#include "badc/error.hpp"

namespace badc {

namespace {

double clamp_input(double v) {
  if (std::isnan(v)) throw InvalidArgument("ADC input is NaN");
  return std::clamp(v, 0.0, 1.0);
}

// Input scaled to code units. Multiplying by a power of two is exact, so the
// comparisons against integer positions below are exact as well.
double scaled(double v, int n_bits) { return clamp_input(v) * level_count(n_bits); }

int hex_digit(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  const char l = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (l >= 'a' && l <= 'f') return l - 'a' + 10;
  return -1;
}

}  // namespace

void check_adc_bits(int n_bits) {
  if (n_bits < kMinAdcBits || n_bits > kMaxAdcBits) {
    throw InvalidArgument("ADC bit-width must be in [" + std::to_string(kMinAdcBits) + ", " +
                          std::to_string(kMaxAdcBits) + "], got " + std::to_string(n_bits));
  }
}

ThresholdTree::ThresholdTree(int n_bits) : n_bits_(n_bits) {
  check_adc_bits(n_bits);
  stages_.resize(static_cast<std::size_t>(n_bits));
  for (int k = 1; k <= n_bits; ++k) {
    const int step = 1 << (n_bits - k);
    auto& st = stages_[static_cast<std::size_t>(k - 1)];
    for (int t = levels() - step; t > 0; t -= 2 * step) st.push_back(t);
  }
}

std::span<const int> ThresholdTree::stage(int k) const {
  if (k < 1 || k > n_bits_) throw InvalidArgument("stage index out of range");
  return stages_[static_cast<std::size_t>(k - 1)];
}

int ThresholdTree::depth(int position) const {
  if (position < 1 || position >= levels()) throw InvalidArgument("threshold position out of range");
  return n_bits_ - 1 - std::countr_zero(static_cast<unsigned>(position));
}

int ThresholdTree::left_child(int position) const {
  const int tz = std::countr_zero(static_cast<unsigned>(position));
  if (tz == 0) throw InvalidArgument("leaf threshold has no children");
  return position - (1 << (tz - 1));
}

int ThresholdTree::right_child(int position) const {
  const int tz = std::countr_zero(static_cast<unsigned>(position));
  if (tz == 0) throw InvalidArgument("leaf threshold has no children");
  return position + (1 << (tz - 1));
}

std::vector<int> ThresholdTree::in_order() const {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(levels() - 1));
  auto walk = [&](auto&& self, int pos) -> void {
    if (!is_leaf(pos)) self(self, left_child(pos));
    out.push_back(pos);
    if (!is_leaf(pos)) self(self, right_child(pos));
  };
  walk(walk, root());
  return out;
}

ThresholdTree build_threshold_tree(int n_bits) { return ThresholdTree(n_bits); }

LevelMask::LevelMask(int n_bits, const Bits& bits) : n_bits_(n_bits), bits_(bits) {
  check_adc_bits(n_bits);
  if (levels() < kMaxLevels && (bits_ >> static_cast<std::size_t>(levels())).any()) {
    throw InvalidArgument("mask sets codes beyond 2^" + std::to_string(n_bits));
  }
  if (bits_.count() < 2) {
    throw DegenerateMask("level mask keeps " + std::to_string(bits_.count()) +
                         " level(s); at least 2 are required");
  }
}

LevelMask LevelMask::all(int n_bits) {
  check_adc_bits(n_bits);
  Bits b;
  for (int c = 0; c < level_count(n_bits); ++c) b.set(static_cast<std::size_t>(c));
  return LevelMask(n_bits, b);
}

LevelMask LevelMask::from_codes(int n_bits, std::span<const int> codes) {
  check_adc_bits(n_bits);
  Bits b;
  for (int c : codes) {
    if (c < 0 || c >= level_count(n_bits)) throw InvalidArgument("code out of range");
    b.set(static_cast<std::size_t>(c));
  }
  return LevelMask(n_bits, b);
}

LevelMask LevelMask::from_hex(int n_bits, std::string_view hex) {
  check_adc_bits(n_bits);
  if (hex.size() >= 2 && hex[0] == '0' && (hex[1] == 'x' || hex[1] == 'X')) hex.remove_prefix(2);
  if (hex.empty()) throw InvalidArgument("empty mask hex string");
  Bits b;
  const std::size_t n = hex.size();
  for (std::size_t i = 0; i < n; ++i) {
    const int d = hex_digit(hex[n - 1 - i]);
    if (d < 0) throw InvalidArgument("invalid hex digit in mask '" + std::string(hex) + "'");
    for (int j = 0; j < 4; ++j) {
      if (((d >> j) & 1) == 0) continue;
      const std::size_t bit = i * 4 + static_cast<std::size_t>(j);
      if (bit >= static_cast<std::size_t>(level_count(n_bits))) {
        throw InvalidArgument("mask '" + std::string(hex) + "' sets codes beyond 2^" +
                              std::to_string(n_bits));
      }
      b.set(bit);
    }
  }
  return LevelMask(n_bits, b);
}

std::vector<int> LevelMask::kept_codes() const {
  std::vector<int> out;
  for (int c = 0; c < levels(); ++c)
    if (kept(c)) out.push_back(c);
  return out;
}

std::string LevelMask::to_hex() const {
  static constexpr char kDigits[] = "0123456789abcdef";
  const int width = std::max(1, levels() / 4);
  std::string out(static_cast<std::size_t>(width), '0');
  for (int i = 0; i < width; ++i) {
    int d = 0;
    for (int j = 0; j < 4; ++j) {
      const int bit = i * 4 + j;
      if (bit < levels() && kept(bit)) d |= 1 << j;
    }
    out[static_cast<std::size_t>(width - 1 - i)] = kDigits[d];
  }
  return out;
}

int shallowest_separator(int lo, int hi) {
  if (lo < 0 || hi <= lo) throw InvalidArgument("separator needs lo < hi");
  // Highest differing bit k: hi with its low k bits cleared lies in (lo, hi]
  // and is the only multiple of 2^k there.
  const int k = std::bit_width(static_cast<unsigned>(lo ^ hi)) - 1;
  return (hi >> k) << k;
}

PrunedAdc prune(const ThresholdTree& tree, const LevelMask& mask) {
  if (mask.n_bits() != tree.n_bits()) {
    throw InvalidArgument("mask is " + std::to_string(mask.n_bits()) + "-bit but tree is " +
                          std::to_string(tree.n_bits()) + "-bit");
  }
  PrunedAdc adc(mask);
  adc.kept_codes_ = mask.kept_codes();
  const auto& kept = adc.kept_codes_;
  for (std::size_t i = 0; i + 1 < kept.size(); ++i) {
    adc.boundaries_.push_back(shallowest_separator(kept[i], kept[i + 1]));
  }
  const double full = tree.levels();
  for (std::size_t i = 0; i < kept.size(); ++i) {
    const double lower = i == 0 ? 0.0 : adc.boundaries_[i - 1] / full;
    const double upper = i + 1 == kept.size() ? 1.0 : adc.boundaries_[i] / full;
    adc.repr_values_.push_back(0.5 * (lower + upper));
  }
  return adc;
}

int adc_bits(const AdcKind& adc) {
  return std::visit(
      [](const auto& a) -> int {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, PrunedBinary>) {
          return a.adc.n_bits();
        } else {
          return a.n_bits;
        }
      },
      adc);
}

namespace {

// Successive approximation down the threshold tree: one comparison per stage,
// MSB first.
int binary_search_code(double x, int n_bits) {
  int code = 0;
  for (int k = n_bits - 1; k >= 0; --k) {
    const int trial = code | (1 << k);
    if (x >= trial) code = trial;
  }
  return code;
}

// Thermometer count over all 2^N - 1 parallel comparators.
int flash_code(double x, int n_bits) {
  int fired = 0;
  for (int t = 1; t < level_count(n_bits); ++t) fired += x >= t ? 1 : 0;
  return fired;
}

double code_center(int code, int n_bits) {
  return (code + 0.5) / level_count(n_bits);
}

}  // namespace

Quantized quantize(const AdcKind& adc, double v) {
  return std::visit(
      [v](const auto& a) -> Quantized {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, FullBinary>) {
          check_adc_bits(a.n_bits);
          const int c = binary_search_code(scaled(v, a.n_bits), a.n_bits);
          return {c, code_center(c, a.n_bits)};
        } else if constexpr (std::is_same_v<T, Flash>) {
          check_adc_bits(a.n_bits);
          const int c = flash_code(scaled(v, a.n_bits), a.n_bits);
          return {c, code_center(c, a.n_bits)};
        } else {
          const PrunedAdc& p = a.adc;
          const double x = scaled(v, p.n_bits());
          const auto b = p.boundaries();
          const auto idx = static_cast<std::size_t>(
              std::upper_bound(b.begin(), b.end(), x,
                               [](double lhs, int rhs) { return lhs < rhs; }) -
              b.begin());
          return {p.kept_codes()[idx], p.repr_values()[idx]};
        }
      },
      adc);
}

double representation_value(const PrunedAdc& adc, int code) {
  const auto kept = adc.kept_codes();
  const auto it = std::lower_bound(kept.begin(), kept.end(), code);
  if (it == kept.end() || *it != code) {
    throw InvalidArgument("code " + std::to_string(code) + " is not kept by this ADC");
  }
  return adc.repr_values()[static_cast<std::size_t>(it - kept.begin())];
}

int oracle_quantize(const ThresholdTree& tree, const LevelMask& mask, double v) {
  if (mask.n_bits() != tree.n_bits()) throw InvalidArgument("mask/tree bit-width mismatch");
  const double x = scaled(v, tree.n_bits());
  auto any_kept = [&](int lo, int hi) {
    for (int c = lo; c <= hi; ++c)
      if (mask.kept(c)) return true;
    return false;
  };
  // Subtree of node `pos` covers codes [pos - half, pos + half - 1].
  int pos = tree.root();
  int half = tree.levels() / 2;
  while (true) {
    const bool left = any_kept(pos - half, pos - 1);
    const bool right = any_kept(pos, pos + half - 1);
    bool go_right;
    if (left && right) {
      go_right = x >= pos;
    } else {
      go_right = right;
    }
    if (half == 1) return go_right ? pos : pos - 1;
    half /= 2;
    pos = go_right ? pos + half : pos - half;
  }
}

}  // namespace badc
