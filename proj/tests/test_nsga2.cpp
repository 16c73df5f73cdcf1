#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <set>

#include "badc/error.hpp"
#include "badc/nsga2.hpp"
#include "oracles/sort_oracle.hpp"

using namespace badc;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Individual ranked(int rank, double crowding) {
  Individual ind;
  ind.masks = {LevelMask::all(2)};
  ind.objectives = Objectives{0.0, 0.0};
  ind.rank = rank;
  ind.crowding = crowding;
  return ind;
}

std::vector<Objectives> random_objectives(Rng& rng, std::size_t n) {
  std::vector<Objectives> pts(n);
  for (auto& p : pts) {
    // Coarse grid so ties and duplicates are common.
    p.f1 = static_cast<double>(uniform_below(rng, 8)) / 8.0;
    p.f2 = static_cast<double>(uniform_below(rng, 12));
  }
  return pts;
}

}  // namespace

TEST(Dominates, Basics) {
  EXPECT_TRUE(dominates({0.1, 5}, {0.2, 5}));
  EXPECT_FALSE(dominates({0.1, 5}, {0.1, 5}));
  EXPECT_FALSE(dominates({0.1, 6}, {0.2, 5}));
}

TEST(FastNonDominatedSort, HandExample) {
  const std::vector<Objectives> pts{{0.1, 10}, {0.2, 5}, {0.3, 20}};
  EXPECT_EQ(fast_non_dominated_sort(pts), (std::vector<std::vector<int>>{{0, 1}, {2}}));
  EXPECT_EQ(fast_non_dominated_sort(std::vector<Objectives>{{0.5, 1}}), (std::vector<std::vector<int>>{{0}}));
  const std::vector<Objectives> dup{{0.5, 1}, {0.5, 1}};
  EXPECT_EQ(fast_non_dominated_sort(dup), (std::vector<std::vector<int>>{{0, 1}}));
  EXPECT_TRUE(fast_non_dominated_sort(std::vector<Objectives>{}).empty());
}

TEST(FastNonDominatedSort, MatchesBruteForceOnRandomPopulations) {
  Rng rng(1234);
  for (int trial = 0; trial < 500; ++trial) {
    const auto n = 1 + static_cast<std::size_t>(uniform_below(rng, 64));
    const auto pts = random_objectives(rng, n);
    ASSERT_EQ(fast_non_dominated_sort(pts), oracle::pareto_fronts(pts)) << "trial " << trial;
  }
}

TEST(CrowdingDistance, HandExamples) {
  const auto two = crowding_distance(std::vector<Objectives>{{0, 1}, {1, 0}});
  EXPECT_EQ(two[0], kInf);
  EXPECT_EQ(two[1], kInf);
  const auto three = crowding_distance(std::vector<Objectives>{{0, 2}, {1, 1}, {2, 0}});
  EXPECT_EQ(three[0], kInf);
  EXPECT_DOUBLE_EQ(three[1], 2.0);
  EXPECT_EQ(three[2], kInf);
  const auto same = crowding_distance(std::vector<Objectives>{{1, 1}, {1, 1}, {1, 1}, {1, 1}});
  int finite = 0;
  for (double d : same) {
    if (!std::isinf(d)) {
      EXPECT_EQ(d, 0.0);
      ++finite;
    }
  }
  EXPECT_EQ(finite, 2);
}

TEST(CrowdingDistance, BoundaryPointsInfiniteOnRandomFronts) {
  Rng rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    // A strictly decreasing trade-off front.
    const auto n = 3 + static_cast<std::size_t>(uniform_below(rng, 30));
    std::vector<Objectives> front;
    double f1 = 0.0, f2 = 1000.0;
    for (std::size_t i = 0; i < n; ++i) {
      f1 += 0.01 + uniform01(rng);
      f2 -= 1.0 + 10.0 * uniform01(rng);
      front.push_back({f1, f2});
    }
    const auto d = crowding_distance(front);
    EXPECT_EQ(d.front(), kInf);
    EXPECT_EQ(d.back(), kInf);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double expect = (front[i + 1].f1 - front[i - 1].f1) / (front.back().f1 - front.front().f1) +
                            (front[i - 1].f2 - front[i + 1].f2) / (front.front().f2 - front.back().f2);
      EXPECT_NEAR(d[i], expect, 1e-12);
    }
  }
}

TEST(TournamentSelect, RankThenCrowding) {
  GaConfig cfg;
  Rng rng(1);
  const std::vector<Individual> a{ranked(0, 0.1), ranked(1, kInf)};
  for (int i = 0; i < 20; ++i) EXPECT_EQ(tournament_select(a, cfg, rng).rank, 0);
  const std::vector<Individual> b{ranked(0, 0.3), ranked(0, kInf)};
  for (int i = 0; i < 20; ++i) EXPECT_EQ(tournament_select(b, cfg, rng).crowding, kInf);
}

TEST(TournamentSelect, FairCoinOnTies) {
  GaConfig cfg;
  Rng rng(2024);
  const std::vector<Individual> pop{ranked(0, 1.0), ranked(0, 1.0)};
  int first = 0;
  const int trials = 10000;
  for (int i = 0; i < trials; ++i) first += &tournament_select(pop, cfg, rng) == &pop[0];
  EXPECT_NEAR(static_cast<double>(first) / trials, 0.5, 0.02);
}

TEST(TournamentSelect, RequiresRankedContestants) {
  GaConfig cfg;
  Rng rng(1);
  std::vector<Individual> pop{ranked(0, 1.0), ranked(0, 1.0)};
  pop[1].rank = -1;
  EXPECT_THROW(
      {
        for (int i = 0; i < 10; ++i) tournament_select(pop, cfg, rng);
      },
      ContractViolation);
}

TEST(Crossover, ZeroProbabilityClones) {
  GaConfig cfg;
  cfg.crossover_prob = 0.0;
  Rng rng(1);
  Individual a, b;
  a.masks = {LevelMask::from_codes(3, {0, 1, 2})};
  a.dpos = 2;
  b.masks = {LevelMask::from_codes(3, {5, 7})};
  b.dpos = 6;
  const auto [c1, c2] = crossover(a, b, cfg, rng);
  EXPECT_TRUE(c1.same_genes(a));
  EXPECT_TRUE(c2.same_genes(b));
}

TEST(Crossover, AllOnesIsClosed) {
  GaConfig cfg;
  cfg.crossover_prob = 1.0;
  Rng rng(1);
  Individual a;
  a.masks = {LevelMask::all(3), LevelMask::all(3)};
  a.dpos = 4;
  for (int i = 0; i < 50; ++i) {
    const auto [c1, c2] = crossover(a, a, cfg, rng);
    EXPECT_TRUE(c1.same_genes(a));
    EXPECT_TRUE(c2.same_genes(a));
  }
}

TEST(Crossover, ComplementaryParentsChildrenCoverBoth) {
  for (CrossoverKind kind : {CrossoverKind::Uniform, CrossoverKind::OnePoint}) {
    GaConfig cfg;
    cfg.crossover_prob = 1.0;
    cfg.crossover = kind;
    Rng rng(7);
    Individual a, b;
    a.masks = {LevelMask::from_hex(3, "0f"), LevelMask::from_hex(3, "55")};
    b.masks = {LevelMask::from_hex(3, "f0"), LevelMask::from_hex(3, "aa")};
    for (int t = 0; t < 1000; ++t) {
      const auto [c1, c2] = crossover(a, b, cfg, rng);
      for (std::size_t m = 0; m < 2; ++m) {
        const auto either = c1.masks[m].bits() | c2.masks[m].bits();
        const auto parents = a.masks[m].bits() | b.masks[m].bits();
        EXPECT_EQ(either & parents, parents);
        EXPECT_GE(c1.masks[m].kept_count(), 2);
      }
    }
  }
}

TEST(Mutate, ZeroProbabilityIsIdentity) {
  GaConfig cfg;
  cfg.mutation_prob = 0.0;
  Rng rng(3);
  Individual a;
  a.masks = {LevelMask::from_codes(3, {1, 4, 6})};
  a.dpos = 3;
  for (int i = 0; i < 50; ++i) EXPECT_TRUE(mutate(a, cfg, rng).same_genes(a));
}

TEST(Mutate, FullFlipComplementsThenRepairs) {
  GaConfig cfg;
  cfg.mutation_prob = 1.0;
  cfg.bit_flip_rate = 1.0;
  Rng rng(3);
  Individual a;
  a.masks = {LevelMask::from_hex(3, "3c")};
  EXPECT_EQ(mutate(a, cfg, rng).masks[0].to_hex(), "c3");
  // Complement of {0..6} is {7}; repair adds code 0.
  a.masks = {LevelMask::from_hex(3, "7f")};
  EXPECT_EQ(mutate(a, cfg, rng).masks[0], LevelMask::from_codes(3, {0, 7}));
}

TEST(Repair, Rules) {
  EXPECT_EQ(repair(2, LevelMask::Bits(0)), LevelMask::from_codes(2, {0, 1}));
  EXPECT_EQ(repair(2, LevelMask::Bits(0b1000)), LevelMask::from_codes(2, {0, 3}));
  EXPECT_EQ(repair(2, LevelMask::Bits(0b0110)), LevelMask::from_codes(2, {1, 2}));
  // The level the mutation removed is restored when it is the smallest.
  EXPECT_EQ(repair(3, LevelMask::Bits(0b10000000)), LevelMask::from_codes(3, {0, 7}));
}

TEST(Run, MinimalPopcountConverges) {
  GaConfig cfg;
  cfg.population = 20;
  cfg.generations = 25;
  cfg.seed = 5;
  const ChromosomeShape shape{2, 3};
  const auto res = run(cfg, shape, [](const Individual& ind) {
    int kept = 0;
    for (const auto& m : ind.masks) kept += m.kept_count();
    return Objectives{static_cast<double>(kept) / 16.0, 1.0};
  });
  ASSERT_FALSE(res.archive.empty());
  for (const auto& p : res.archive) {
    for (const auto& m : p.individual.masks) EXPECT_EQ(m.kept_count(), 2);
  }
}

TEST(Run, TradeOffFrontSpansAllKeptCounts) {
  GaConfig cfg;
  cfg.population = 40;
  cfg.generations = 40;
  cfg.seed = 11;
  const ChromosomeShape shape{1, 3};
  const auto res = run(cfg, shape, [](const Individual& ind) {
    const double k = ind.masks[0].kept_count();
    return Objectives{k / 8.0, (8.0 - k) / 8.0};
  });
  std::set<int> counts;
  for (const auto& p : res.archive) counts.insert(p.individual.masks[0].kept_count());
  EXPECT_GE(static_cast<int>(counts.size()), (1 << 3) - 1);
}

TEST(Run, DeterministicAndWorkerIndependent) {
  const ChromosomeShape shape{3, 3};
  auto eval = [](const Individual& ind) {
    double a = 0.0, b = 0.0;
    for (const auto& m : ind.masks) {
      a += m.kept_count();
      b += m.kept(0) + m.kept(7) + 0.1 * ind.dpos;
    }
    return Objectives{a / 24.0, 30.0 - b};
  };
  GaConfig cfg;
  cfg.population = 16;
  cfg.generations = 8;
  const auto r1 = run(cfg, shape, eval);
  cfg.workers = 4;
  const auto r2 = run(cfg, shape, eval);
  ASSERT_EQ(r1.archive.size(), r2.archive.size());
  for (std::size_t i = 0; i < r1.archive.size(); ++i) {
    EXPECT_EQ(r1.archive[i].individual.key(), r2.archive[i].individual.key());
    EXPECT_EQ(r1.archive[i].point_id, r2.archive[i].point_id);
  }
  EXPECT_EQ(r1.evaluations, r2.evaluations);
}

TEST(Run, ArchiveIsMutuallyNonDominated) {
  GaConfig cfg;
  cfg.population = 20;
  cfg.generations = 10;
  const auto res = run(cfg, ChromosomeShape{2, 2}, [](const Individual& ind) {
    return Objectives{ind.masks[0].kept_count() / 4.0, static_cast<double>(ind.masks[1].kept_count() + ind.dpos)};
  });
  for (const auto& a : res.archive) {
    for (const auto& b : res.archive) {
      EXPECT_FALSE(dominates(*a.individual.objectives, *b.individual.objectives));
    }
  }
}

TEST(Run, SeedsEnterInitialPopulation) {
  GaConfig cfg;
  cfg.population = 4;
  cfg.generations = 0;
  Individual seed;
  seed.masks = {LevelMask::all(2)};
  seed.dpos = 3;
  const auto res = run(
      cfg, ChromosomeShape{1, 2}, [](const Individual&) { return Objectives{0.5, 1.0}; }, {seed});
  ASSERT_FALSE(res.archive.empty());
  EXPECT_TRUE(res.archive.front().individual.same_genes(seed));
  EXPECT_EQ(res.archive.front().point_id, 0);
}

TEST(Run, EvaluatorFailureCarriesChromosome) {
  GaConfig cfg;
  cfg.population = 4;
  cfg.generations = 1;
  try {
    run(cfg, ChromosomeShape{1, 2}, [](const Individual&) -> Objectives { throw std::runtime_error("boom"); });
    FAIL();
  } catch (const EvaluationError& e) {
    EXPECT_FALSE(e.chromosome().empty());
  }
}

TEST(GaConfig, PercentRates) {
  GaConfig cfg;
  cfg.rates_in_percent = true;
  cfg.crossover_prob = 70;
  cfg.mutation_prob = 20;
  EXPECT_DOUBLE_EQ(cfg.pc(), 0.7);
  EXPECT_DOUBLE_EQ(cfg.pm(), 0.2);
  EXPECT_NO_THROW(cfg.validate());
  cfg.population = 3;
  EXPECT_THROW(cfg.validate(), InvalidArgument);
}
