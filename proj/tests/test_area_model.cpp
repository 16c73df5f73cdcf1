#include <gtest/gtest.h>

#include <vector>

#include "badc/area_model.hpp"
#include "badc/error.hpp"
#include "badc/rng.hpp"
#include "oracles/area_oracle.hpp"

using namespace badc;

namespace {

PrunedAdc pruned(int n, std::initializer_list<int> codes) {
  return prune(build_threshold_tree(n), LevelMask::from_codes(n, codes));
}

std::vector<bool> kept_vector(const LevelMask& m) {
  std::vector<bool> k(static_cast<std::size_t>(m.levels()));
  for (int c = 0; c < m.levels(); ++c) k[static_cast<std::size_t>(c)] = m.kept(c);
  return k;
}

}  // namespace

TEST(BinaryFullArea, ThreeBitComponentCounts) {
  const auto r = binary_full_area(3);
  EXPECT_EQ(r.comparators, 5);
  EXPECT_EQ(r.single_output_comparators, 1);
  EXPECT_EQ(r.inverters, 2);
  EXPECT_EQ(r.control_transistors(), 9);
  EXPECT_EQ(r.transistors, 4 * 7 + 1 * 6 + 2 * 1 + 9);
  EXPECT_EQ(r.transistors, 45);
  ASSERT_EQ(r.selection_per_stage.size(), 3u);
  EXPECT_EQ(r.selection_per_stage[2], 6);
  EXPECT_EQ(r.breakdown.decode_credit_tr, 0);
}

TEST(BinaryFullArea, LastStageSelectionIsTwoToNMinusTwo) {
  for (int n = 2; n <= 8; ++n) {
    const auto r = binary_full_area(n);
    EXPECT_EQ(r.selection_per_stage.back(), (1 << n) - 2) << n;
  }
}

TEST(BinaryFullArea, ComparatorOnlyCostCountsComparators) {
  CostTable c;
  c.comp_tr = 1;
  c.comp_noinv_tr = 0;
  c.inv_tr = 0;
  c.sel_tr = 0;
  c.amp_tr = 0;
  c.and_gate_tr = 0;
  // A single-output comparator is still a comparator, but its cost is
  // comp_noinv_tr, so only the four full comparators contribute here.
  EXPECT_EQ(binary_full_area(3, c).comparators, 5);
  c.comp_noinv_tr = 1;
  EXPECT_EQ(binary_full_area(3, c).transistors, 5);
}

TEST(BinaryFullArea, SmallWidthsByHand) {
  // N=2: two data comparators, no enable comparators, 2 last-stage switches.
  EXPECT_EQ(binary_full_area(2).transistors, 2 * 7 + 2);
  // N=4: 4 data comparators, enable comparators on 6 intermediate nodes (3
  // upper: 6+2+1, 3 lower: 7), selection 2 + 6 + 14.
  EXPECT_EQ(binary_full_area(4).transistors, 4 * 7 + 3 * 9 + 3 * 7 + 2 + 6 + 14);
}

TEST(FlashArea, DefaultCosts) {
  const auto r3 = flash_area(3);
  EXPECT_EQ(r3.comparators, 7);
  EXPECT_EQ(r3.transistors, 7 * 7 + 4 * 3 * 4);
  EXPECT_EQ(r3.transistors, 97);
  EXPECT_EQ(flash_area(4).comparators, 15);
  CostTable c;
  c.encoder_coeff = 0;
  EXPECT_EQ(flash_area(3, c).transistors, 49);
  c.encoder_override = {-1, -1, -1, 10};
  EXPECT_EQ(flash_area(3, c).transistors, 59);
}

TEST(PrunedArea, AllOnesEqualsFull) {
  for (int n = 2; n <= 6; ++n) {
    EXPECT_EQ(pruned_area(prune(build_threshold_tree(n), LevelMask::all(n))), binary_full_area(n));
  }
}

TEST(PrunedArea, UpperHalfTwoBitNeedsOneComparator) {
  const auto r = pruned_area(pruned(2, {2, 3}));
  EXPECT_EQ(r.comparators, 1);
  EXPECT_EQ(r.transistors, 7);
}

TEST(PrunedArea, SevenLevelExample) {
  const auto r = pruned_area(pruned(3, {0, 1, 2, 3, 4, 6, 7}));
  CostTable c;
  EXPECT_EQ(r.transistors, 45 - c.sel_tr - c.and_gate_tr);
  EXPECT_EQ(r.transistors, 41);
}

TEST(PrunedArea, MatchesStructuralOracleOnEveryMask) {
  CostTable odd;  // distinct primes expose mis-attributed terms
  odd.comp_tr = 11;
  odd.comp_noinv_tr = 7;
  odd.inv_tr = 2;
  odd.sel_tr = 3;
  odd.amp_tr = 5;
  odd.and_gate_tr = 13;
  for (const CostTable& cost : {CostTable{}, odd}) {
    for (int n = 2; n <= 4; ++n) {
      const auto tree = build_threshold_tree(n);
      const int levels = 1 << n;
      Rng rng(5);
      const unsigned long total = 1ul << levels;
      for (unsigned long i = 0; i < std::min(total, 4000ul); ++i) {
        const unsigned long bits = total <= 4000 ? i : (rng() & (total - 1));
        const LevelMask::Bits b(bits);
        if (b.count() < 2) continue;
        const LevelMask mask(n, b);
        int comps = 0;
        const long expect = oracle::binary_transistors(n, kept_vector(mask), cost, &comps);
        const auto r = pruned_area(prune(tree, mask), cost);
        ASSERT_EQ(r.transistors, expect) << "N=" << n << " mask=" << mask.to_hex();
        ASSERT_EQ(r.comparators, comps) << "N=" << n << " mask=" << mask.to_hex();
      }
    }
  }
}

TEST(PrunedArea, TwoLevelMasksUseOneComparator) {
  for (int n = 2; n <= 5; ++n) {
    const auto tree = build_threshold_tree(n);
    for (int lo = 0; lo < (1 << n); ++lo) {
      for (int hi = lo + 1; hi < (1 << n); ++hi) {
        const auto r = pruned_area(prune(tree, LevelMask::from_codes(n, {lo, hi})));
        EXPECT_EQ(r.comparators, 1);
      }
    }
  }
}

TEST(SystemArea, SumsAdcs) {
  const std::vector<AdcKind> seven(7, AdcKind{FullBinary{3}});
  EXPECT_EQ(system_area(seven).transistors, 315);
  const std::vector<AdcKind> one{FullBinary{3}};
  EXPECT_EQ(system_area(one), binary_full_area(3));
  const std::vector<AdcKind> mixed{FullBinary{3}, Flash{3}, PrunedBinary{pruned(2, {2, 3})}};
  EXPECT_EQ(system_area(mixed).transistors, 45 + 97 + 7);
  EXPECT_EQ(system_area(mixed).comparators, 5 + 7 + 1);
  EXPECT_THROW(system_area(std::vector<AdcKind>{}), InvalidArgument);
}

TEST(CostTable, RejectsNegativeCosts) {
  CostTable c;
  c.sel_tr = -1;
  EXPECT_THROW(binary_full_area(3, c), InvalidArgument);
}

TEST(FormatReport, MentionsTotals) {
  const auto text = format_report(binary_full_area(3));
  EXPECT_NE(text.find("transistors          45"), std::string::npos);
}
