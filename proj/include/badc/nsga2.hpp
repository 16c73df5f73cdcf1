#pragma once

// NSGA-II over chromosomes made of one LevelMask per classifier input plus a
// decimal-point position, minimizing (1 - accuracy, transistor count).

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "badc/adc_model.hpp"
#include "badc/rng.hpp"

namespace badc {

struct Objectives {
  double f1 = 0.0;  // 1 - accuracy
  double f2 = 0.0;  // transistor count
  bool operator==(const Objectives&) const = default;
};

// Pareto domination for minimization on both axes.
bool dominates(const Objectives& a, const Objectives& b);

// Fronts of indices into `objs`; front 0 is the non-dominated set. Indices
// inside a front are ascending.
std::vector<std::vector<int>> fast_non_dominated_sort(std::span<const Objectives> objs);

// Boundary points on each objective get +infinity; interior points sum their
// neighbour gaps normalized by the objective's range (zero range adds 0).
std::vector<double> crowding_distance(std::span<const Objectives> front);

struct Individual {
  std::vector<LevelMask> masks;
  int dpos = 0;
  std::optional<Objectives> objectives;
  int rank = -1;
  double crowding = 0.0;

  // Canonical chromosome text: "<hex>-<hex>-...:<dpos>". Identical
  // chromosomes have identical keys.
  std::string key() const;
  bool same_genes(const Individual& o) const { return masks == o.masks && dpos == o.dpos; }
};

enum class CrossoverKind { Uniform, OnePoint };

struct GaConfig {
  int population = 50;
  int generations = 25;
  double crossover_prob = 0.7;
  double mutation_prob = 0.2;  // per individual
  // When set, crossover_prob / mutation_prob are read as percentages.
  bool rates_in_percent = false;
  // Per-gene flip rate once mutation triggers; default 1 / chromosome length.
  std::optional<double> bit_flip_rate;
  int tournament = 2;
  CrossoverKind crossover = CrossoverKind::Uniform;
  int dpos_min = 0;
  int dpos_max = 7;
  std::uint64_t seed = 1;
  int workers = 1;

  double pc() const { return rates_in_percent ? crossover_prob / 100.0 : crossover_prob; }
  double pm() const { return rates_in_percent ? mutation_prob / 100.0 : mutation_prob; }
  // Throws InvalidArgument.
  void validate() const;
};

struct ChromosomeShape {
  int n_masks = 1;
  int n_bits = 3;
  int gene_count() const { return n_masks * level_count(n_bits) + 1; }
};

// Sets the lowest-index unset bits until at least two codes are kept.
LevelMask repair(int n_bits, LevelMask::Bits bits);

Individual random_individual(const ChromosomeShape& shape, const GaConfig& cfg, Rng& rng);

// Throws ContractViolation if either candidate lacks objectives or rank.
const Individual& tournament_select(std::span<const Individual> population, const GaConfig& cfg,
                                    Rng& rng);

std::pair<Individual, Individual> crossover(const Individual& a, const Individual& b,
                                            const GaConfig& cfg, Rng& rng);

Individual mutate(const Individual& ind, const GaConfig& cfg, Rng& rng);

// Assigns rank and crowding to every member of `pop` (all must be evaluated).
void assign_rank_and_crowding(std::vector<Individual>& pop);

// Elitist truncation of `pool` to `size` by (rank, -crowding), stable.
std::vector<Individual> environmental_selection(std::vector<Individual> pool, std::size_t size);

// Evaluator failure, carrying the offending chromosome.
class EvaluationError : public std::runtime_error {
 public:
  EvaluationError(std::string chromosome, const std::string& what)
      : std::runtime_error("evaluation of " + chromosome + " failed: " + what),
        chromosome_(std::move(chromosome)) {}
  const std::string& chromosome() const { return chromosome_; }

 private:
  std::string chromosome_;
};

struct ArchivedPoint {
  Individual individual;
  int point_id = 0;    // order of first evaluation
  int generation = 0;  // generation of first evaluation
};

struct RunResult {
  std::vector<Individual> population;
  std::vector<ArchivedPoint> archive;  // mutually non-dominated, by point_id
  int evaluations = 0;                 // distinct chromosomes evaluated
};

// Must be a pure function of the individual's genes.
using Evaluator = std::function<Objectives(const Individual&)>;

struct RunHooks {
  // Called after each generation (0 = initial population).
  std::function<void(int generation, const RunResult& state)> on_generation;
};

// Standard generational NSGA-II. `seeds` (repaired, at most `population`)
// replace the first random initial individuals. Evaluations inside a
// generation run on cfg.workers threads; results are memoized per chromosome.
RunResult run(const GaConfig& cfg, const ChromosomeShape& shape, const Evaluator& evaluator,
              std::vector<Individual> seeds = {}, const RunHooks& hooks = {});

// Inserts `candidate` into a non-dominated archive, dropping members it
// dominates. Returns false if the candidate is dominated (or its genes are
// already archived).
bool archive_insert(std::vector<ArchivedPoint>& archive, const ArchivedPoint& candidate);

}  // namespace badc
