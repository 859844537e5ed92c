#pragma once

#include "modsat/codesign_env.hpp"
#include "modsat/morphology.hpp"
#include "modsat/td3.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <vector>

namespace modsat {

/// Direct encoding: one module-type code per grid cell, flattened in
/// storage order.
using Genome = std::vector<std::uint8_t>;

struct GaConfig {
  int population = 16;
  double survivor_fraction = 0.25;
  double mutation_prob = 0.1;
  int generations = 5;

  void validate() const;
  int survivors() const;
};

Genome random_genome(int dims, std::mt19937_64& rng);
Genome encode(const Morphology& m);
/// Decodes with the same repair rules as the end of the design phase.
Morphology decode(const Genome& g, int dims);

/// Each gene independently resampled uniformly from {0, 1, 2} with
/// probability p_m (the draw may reproduce the old value).
Genome mutate(const Genome& g, double p_m, std::mt19937_64& rng);

struct Individual {
  Genome genome;
  double fitness = 0.0;
};

/// Top ceil(f P) genomes survive unchanged; the remaining slots are mutated
/// copies of uniformly chosen survivors. Survivors come first, best first.
std::vector<Genome> next_generation(const std::vector<Individual>& population, const GaConfig& cfg,
                                    std::mt19937_64& rng);

struct FitnessResult {
  double fitness = 0.0;
  EvalResult eval;
  long env_steps = 0;
  Morphology morphology;
  Td3Networks networks;
};

/// Decodes the genome, trains a control-only TD3 policy on the frozen
/// morphology for `budget` env steps and returns the mean return of the
/// evaluation episodes.
FitnessResult evaluate_fitness(const Genome& genome, const EpisodeConfig& episode, const TrainerConfig& trainer,
                               long budget, std::uint64_t seed);

/// Warmup used for a per-genome training run of `budget` steps.
long ga_warmup_steps(const TrainerConfig& trainer, long budget);

struct GaHooks {
  std::function<void(int generation, const CurvePoint&, const FitnessResult& best)> on_generation;
  std::function<bool()> should_stop;
};

struct GaResult {
  Genome best_genome;
  FitnessResult best;
  std::vector<CurvePoint> curve;
  std::vector<double> all_fitness;
  long env_steps = 0;
  int evaluations = 0;
  bool interrupted = false;
};

long per_genome_budget(const GaConfig& cfg, long total_budget);

/// Generation loop; the curve holds one point per generation with the
/// best-so-far fitness against cumulative training env steps.
GaResult run_ga(const GaConfig& cfg, const EpisodeConfig& episode, const TrainerConfig& trainer, long total_budget,
                std::uint64_t seed, const GaHooks& hooks = {});

}  // namespace modsat
