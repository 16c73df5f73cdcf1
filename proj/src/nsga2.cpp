#include "badc/nsga2.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

#include "badc/error.hpp"
#include "badc/kernels.hpp"

namespace badc {

bool dominates(const Objectives& a, const Objectives& b) {
  return a.f1 <= b.f1 && a.f2 <= b.f2 && (a.f1 < b.f1 || a.f2 < b.f2);
}

std::vector<std::vector<int>> fast_non_dominated_sort(std::span<const Objectives> objs) {
  const int n = static_cast<int>(objs.size());
  std::vector<std::vector<int>> fronts;
  if (n == 0) return fronts;
  std::vector<std::vector<int>> dominated(static_cast<std::size_t>(n));
  std::vector<int> dom_count(static_cast<std::size_t>(n), 0);
  std::vector<int> current;
  for (int p = 0; p < n; ++p) {
    for (int q = 0; q < n; ++q) {
      if (p == q) continue;
      if (dominates(objs[static_cast<std::size_t>(p)], objs[static_cast<std::size_t>(q)])) {
        dominated[static_cast<std::size_t>(p)].push_back(q);
      } else if (dominates(objs[static_cast<std::size_t>(q)], objs[static_cast<std::size_t>(p)])) {
        ++dom_count[static_cast<std::size_t>(p)];
      }
    }
    if (dom_count[static_cast<std::size_t>(p)] == 0) current.push_back(p);
  }
  while (!current.empty()) {
    std::vector<int> next;
    for (int p : current) {
      for (int q : dominated[static_cast<std::size_t>(p)]) {
        if (--dom_count[static_cast<std::size_t>(q)] == 0) next.push_back(q);
      }
    }
    fronts.push_back(std::move(current));
    std::sort(next.begin(), next.end());
    current = std::move(next);
  }
  return fronts;
}

std::vector<double> crowding_distance(std::span<const Objectives> front) {
  const std::size_t n = front.size();
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(n, 0.0);
  if (n <= 2) {
    std::fill(dist.begin(), dist.end(), kInf);
    return dist;
  }
  std::vector<std::size_t> idx(n);
  for (int m = 0; m < 2; ++m) {
    auto value = [&](std::size_t i) { return m == 0 ? front[i].f1 : front[i].f2; };
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return value(a) < value(b); });
    dist[idx.front()] = kInf;
    dist[idx.back()] = kInf;
    const double range = value(idx.back()) - value(idx.front());
    if (range <= 0.0) continue;
    for (std::size_t k = 1; k + 1 < n; ++k) {
      if (std::isinf(dist[idx[k]])) continue;
      dist[idx[k]] += (value(idx[k + 1]) - value(idx[k - 1])) / range;
    }
  }
  return dist;
}

std::string Individual::key() const {
  std::string k;
  for (std::size_t i = 0; i < masks.size(); ++i) {
    if (i) k += '-';
    k += masks[i].to_hex();
  }
  k += ':' + std::to_string(dpos);
  return k;
}

void GaConfig::validate() const {
  if (population < 2 || population % 2 != 0) {
    throw InvalidArgument("population must be even and at least 2");
  }
  if (generations < 0) throw InvalidArgument("generations must be non-negative");
  if (pc() < 0.0 || pc() > 1.0 || pm() < 0.0 || pm() > 1.0) {
    throw InvalidArgument("crossover/mutation probabilities must lie in [0, 1]");
  }
  if (bit_flip_rate && (*bit_flip_rate < 0.0 || *bit_flip_rate > 1.0)) {
    throw InvalidArgument("bit flip rate must lie in [0, 1]");
  }
  if (tournament < 2) throw InvalidArgument("tournament size must be at least 2");
  if (dpos_min < 0 || dpos_max < dpos_min || dpos_max > 7) {
    throw InvalidArgument("dpos range must satisfy 0 <= dpos_min <= dpos_max <= 7");
  }
  if (workers < 1) throw InvalidArgument("workers must be at least 1");
}

LevelMask repair(int n_bits, LevelMask::Bits bits) {
  check_adc_bits(n_bits);
  const int levels = level_count(n_bits);
  for (int c = levels; c < LevelMask::kMaxLevels; ++c) bits.reset(static_cast<std::size_t>(c));
  for (int c = 0; c < levels && bits.count() < 2; ++c) bits.set(static_cast<std::size_t>(c));
  return LevelMask(n_bits, bits);
}

namespace {

int draw_dpos(const GaConfig& cfg, Rng& rng) {
  return cfg.dpos_min +
         static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(cfg.dpos_max - cfg.dpos_min + 1)));
}

void check_shape(const Individual& a, const Individual& b) {
  bool ok = a.masks.size() == b.masks.size();
  for (std::size_t i = 0; ok && i < a.masks.size(); ++i) ok = a.masks[i].n_bits() == b.masks[i].n_bits();
  if (!ok) throw InvalidArgument("crossover parents have different chromosome shapes");
}

Individual unevaluated_copy(const Individual& ind) {
  Individual out;
  out.masks = ind.masks;
  out.dpos = ind.dpos;
  return out;
}

}  // namespace

Individual random_individual(const ChromosomeShape& shape, const GaConfig& cfg, Rng& rng) {
  Individual ind;
  for (int m = 0; m < shape.n_masks; ++m) {
    LevelMask::Bits bits;
    for (int c = 0; c < level_count(shape.n_bits); ++c) {
      if (coin(rng)) bits.set(static_cast<std::size_t>(c));
    }
    ind.masks.push_back(repair(shape.n_bits, bits));
  }
  ind.dpos = draw_dpos(cfg, rng);
  return ind;
}

const Individual& tournament_select(std::span<const Individual> population, const GaConfig& cfg,
                                    Rng& rng) {
  if (population.empty()) throw ContractViolation("tournament on an empty population");
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(cfg.tournament), population.size());
  // k distinct contestants (partial Fisher-Yates over indices).
  std::vector<std::size_t> idx(population.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < k; ++i) {
    const auto j = i + static_cast<std::size_t>(uniform_below(rng, idx.size() - i));
    std::swap(idx[i], idx[j]);
  }
  for (std::size_t i = 0; i < k; ++i) {
    const auto& ind = population[idx[i]];
    if (!ind.objectives || ind.rank < 0) {
      throw ContractViolation("tournament contestant has not been evaluated and ranked");
    }
  }
  auto better = [&](const Individual& a, const Individual& b) {
    if (a.rank != b.rank) return a.rank < b.rank;
    return a.crowding > b.crowding;
  };
  std::vector<std::size_t> best{idx[0]};
  for (std::size_t i = 1; i < k; ++i) {
    const auto& cand = population[idx[i]];
    const auto& cur = population[best.front()];
    if (better(cand, cur)) {
      best.assign(1, idx[i]);
    } else if (!better(cur, cand)) {
      best.push_back(idx[i]);
    }
  }
  if (best.size() == 1) return population[best.front()];
  return population[best[static_cast<std::size_t>(uniform_below(rng, best.size()))]];
}

std::pair<Individual, Individual> crossover(const Individual& a, const Individual& b,
                                            const GaConfig& cfg, Rng& rng) {
  check_shape(a, b);
  Individual c1 = unevaluated_copy(a);
  Individual c2 = unevaluated_copy(b);
  if (!bernoulli(rng, cfg.pc())) return {std::move(c1), std::move(c2)};

  std::vector<LevelMask::Bits> bits1, bits2;
  for (std::size_t m = 0; m < a.masks.size(); ++m) {
    bits1.push_back(a.masks[m].bits());
    bits2.push_back(b.masks[m].bits());
  }
  std::size_t total = 0;
  for (const auto& m : a.masks) total += static_cast<std::size_t>(m.levels());
  const std::size_t cut =
      cfg.crossover == CrossoverKind::OnePoint && total > 1
          ? 1 + static_cast<std::size_t>(uniform_below(rng, total - 1))
          : 0;
  std::size_t pos = 0;
  for (std::size_t m = 0; m < a.masks.size(); ++m) {
    for (int c = 0; c < a.masks[m].levels(); ++c, ++pos) {
      const bool swap_bit = cfg.crossover == CrossoverKind::Uniform ? coin(rng) : pos >= cut;
      if (swap_bit) {
        const auto uc = static_cast<std::size_t>(c);
        const bool t = bits1[m][uc];
        bits1[m][uc] = bits2[m][uc];
        bits2[m][uc] = t;
      }
    }
  }
  for (std::size_t m = 0; m < a.masks.size(); ++m) {
    c1.masks[m] = repair(a.masks[m].n_bits(), bits1[m]);
    c2.masks[m] = repair(b.masks[m].n_bits(), bits2[m]);
  }
  if (coin(rng)) std::swap(c1.dpos, c2.dpos);
  return {std::move(c1), std::move(c2)};
}

Individual mutate(const Individual& ind, const GaConfig& cfg, Rng& rng) {
  Individual out = unevaluated_copy(ind);
  if (!bernoulli(rng, cfg.pm())) return out;
  int genes = 1;
  for (const auto& m : ind.masks) genes += m.levels();
  const double rate = cfg.bit_flip_rate.value_or(1.0 / genes);
  for (auto& mask : out.masks) {
    LevelMask::Bits bits = mask.bits();
    for (int c = 0; c < mask.levels(); ++c) {
      if (bernoulli(rng, rate)) bits.flip(static_cast<std::size_t>(c));
    }
    mask = repair(mask.n_bits(), bits);
  }
  if (bernoulli(rng, rate)) out.dpos = draw_dpos(cfg, rng);
  return out;
}

void assign_rank_and_crowding(std::vector<Individual>& pop) {
  std::vector<Objectives> objs;
  objs.reserve(pop.size());
  for (const auto& ind : pop) {
    if (!ind.objectives) throw ContractViolation("ranking an unevaluated individual");
    objs.push_back(*ind.objectives);
  }
  const auto fronts = fast_non_dominated_sort(objs);
  for (std::size_t r = 0; r < fronts.size(); ++r) {
    std::vector<Objectives> fo;
    for (int i : fronts[r]) fo.push_back(objs[static_cast<std::size_t>(i)]);
    const auto cd = crowding_distance(fo);
    for (std::size_t j = 0; j < fronts[r].size(); ++j) {
      auto& ind = pop[static_cast<std::size_t>(fronts[r][j])];
      ind.rank = static_cast<int>(r);
      ind.crowding = cd[j];
    }
  }
}

std::vector<Individual> environmental_selection(std::vector<Individual> pool, std::size_t size) {
  assign_rank_and_crowding(pool);
  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (pool[a].rank != pool[b].rank) return pool[a].rank < pool[b].rank;
    return pool[a].crowding > pool[b].crowding;
  });
  std::vector<Individual> out;
  out.reserve(size);
  for (std::size_t i = 0; i < order.size() && out.size() < size; ++i) out.push_back(pool[order[i]]);
  return out;
}

bool archive_insert(std::vector<ArchivedPoint>& archive, const ArchivedPoint& candidate) {
  const Objectives& c = *candidate.individual.objectives;
  for (const auto& a : archive) {
    if (dominates(*a.individual.objectives, c) || a.individual.same_genes(candidate.individual)) {
      return false;
    }
  }
  std::erase_if(archive, [&](const ArchivedPoint& a) { return dominates(c, *a.individual.objectives); });
  archive.push_back(candidate);
  return true;
}

namespace {

class EvaluationCache {
 public:
  EvaluationCache(const Evaluator& evaluator, int workers) : evaluator_(evaluator), workers_(workers) {}

  // Fills objectives for every member of `batch`, evaluating each unseen
  // chromosome once (in first-appearance order) and archiving it.
  void evaluate(std::vector<Individual>& batch, int generation, RunResult& state) {
    std::vector<std::size_t> todo;
    std::unordered_map<std::string, std::size_t> pending;
    for (std::size_t i = 0; i < batch.size(); ++i) {
      const auto key = batch[i].key();
      if (cache_.contains(key) || pending.contains(key)) continue;
      pending.emplace(key, todo.size());
      todo.push_back(i);
    }
    std::vector<Objectives> results(todo.size());
    kernels::for_each_index(todo.size(), workers_, [&](std::size_t j) {
      const Individual& ind = batch[todo[j]];
      Objectives o;
      try {
        o = evaluator_(ind);
      } catch (const EvaluationError&) {
        throw;
      } catch (const std::exception& e) {
        throw EvaluationError(ind.key(), e.what());
      }
      if (!std::isfinite(o.f1) || !std::isfinite(o.f2) || o.f1 < 0.0 || o.f1 > 1.0 || o.f2 < 0.0) {
        throw EvaluationError(ind.key(), "objectives out of range");
      }
      results[j] = o;
    });
    for (std::size_t j = 0; j < todo.size(); ++j) {
      const Individual& ind = batch[todo[j]];
      cache_.emplace(ind.key(), results[j]);
      ArchivedPoint p;
      p.individual = unevaluated_copy(ind);
      p.individual.objectives = results[j];
      p.point_id = state.evaluations++;
      p.generation = generation;
      archive_insert(state.archive, p);
    }
    for (auto& ind : batch) ind.objectives = cache_.at(ind.key());
  }

 private:
  const Evaluator& evaluator_;
  int workers_;
  std::unordered_map<std::string, Objectives> cache_;
};

}  // namespace

RunResult run(const GaConfig& cfg, const ChromosomeShape& shape, const Evaluator& evaluator,
              std::vector<Individual> seeds, const RunHooks& hooks) {
  cfg.validate();
  check_adc_bits(shape.n_bits);
  if (shape.n_masks < 1) throw InvalidArgument("chromosome needs at least one mask");
  Rng rng(derive_seed(cfg.seed, 0x6a5));
  const auto pop_size = static_cast<std::size_t>(cfg.population);

  RunResult state;
  std::vector<Individual> pop;
  for (auto& s : seeds) {
    if (pop.size() == pop_size) break;
    if (static_cast<int>(s.masks.size()) != shape.n_masks) {
      throw InvalidArgument("seed individual has the wrong number of masks");
    }
    Individual ind;
    for (const auto& m : s.masks) ind.masks.push_back(repair(shape.n_bits, m.bits()));
    ind.dpos = std::clamp(s.dpos, cfg.dpos_min, cfg.dpos_max);
    pop.push_back(std::move(ind));
  }
  while (pop.size() < pop_size) pop.push_back(random_individual(shape, cfg, rng));

  EvaluationCache cache(evaluator, cfg.workers);
  cache.evaluate(pop, 0, state);
  assign_rank_and_crowding(pop);
  state.population = pop;
  if (hooks.on_generation) hooks.on_generation(0, state);

  for (int gen = 1; gen <= cfg.generations; ++gen) {
    std::vector<Individual> offspring;
    offspring.reserve(pop_size);
    while (offspring.size() < pop_size) {
      const Individual& p1 = tournament_select(pop, cfg, rng);
      const Individual& p2 = tournament_select(pop, cfg, rng);
      auto [c1, c2] = crossover(p1, p2, cfg, rng);
      offspring.push_back(mutate(c1, cfg, rng));
      if (offspring.size() < pop_size) offspring.push_back(mutate(c2, cfg, rng));
    }
    cache.evaluate(offspring, gen, state);
    std::vector<Individual> pool = std::move(pop);
    pool.insert(pool.end(), std::make_move_iterator(offspring.begin()),
                std::make_move_iterator(offspring.end()));
    pop = environmental_selection(std::move(pool), pop_size);
    assign_rank_and_crowding(pop);
    state.population = pop;
    if (hooks.on_generation) hooks.on_generation(gen, state);
  }
  return state;
}

}  // namespace badc
