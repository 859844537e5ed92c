#include "modsat/ga.hpp"

#include "modsat/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace modsat {

void GaConfig::validate() const {
  if (population < 1) throw std::invalid_argument("invalid GA config: population must be positive");
  if (!(survivor_fraction > 0.0 && survivor_fraction < 1.0)) {
    throw std::invalid_argument("invalid GA config: survivor_fraction must be in (0, 1)");
  }
  if (!(mutation_prob >= 0.0 && mutation_prob <= 1.0)) {
    throw std::invalid_argument("invalid GA config: mutation_prob must be in [0, 1]");
  }
  if (generations < 1) throw std::invalid_argument("invalid GA config: generations must be positive");
}

int GaConfig::survivors() const {
  return std::clamp(static_cast<int>(std::ceil(survivor_fraction * population - 1e-12)), 1, population);
}

Genome random_genome(int dims, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> type(0, 2);
  Genome g(static_cast<std::size_t>(dims) * dims * dims);
  for (auto& v : g) v = static_cast<std::uint8_t>(type(rng));
  return g;
}

Genome encode(const Morphology& m) {
  Genome g;
  g.reserve(m.size());
  for (auto t : m.cells()) g.push_back(static_cast<std::uint8_t>(t));
  return g;
}

Morphology decode(const Genome& g, int dims) {
  std::vector<ModuleType> cells;
  cells.reserve(g.size());
  for (auto v : g) cells.push_back(module_type_from_int(v));
  return repair(Morphology(dims, std::move(cells)));
}

Genome mutate(const Genome& g, double p_m, std::mt19937_64& rng) {
  std::bernoulli_distribution hit(p_m);
  std::uniform_int_distribution<int> type(0, 2);
  Genome out = g;
  for (auto& v : out) {
    if (hit(rng)) v = static_cast<std::uint8_t>(type(rng));
  }
  return out;
}

std::vector<Genome> next_generation(const std::vector<Individual>& population, const GaConfig& cfg,
                                    std::mt19937_64& rng) {
  if (static_cast<int>(population.size()) != cfg.population) {
    throw std::invalid_argument("population size does not match GA config");
  }
  std::vector<std::size_t> order(population.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return population[a].fitness > population[b].fitness; });

  const int keep = cfg.survivors();
  std::vector<Genome> next;
  next.reserve(population.size());
  for (int s = 0; s < keep; ++s) next.push_back(population[order[static_cast<std::size_t>(s)]].genome);
  std::uniform_int_distribution<int> parent(0, keep - 1);
  while (static_cast<int>(next.size()) < cfg.population) {
    const Genome& p = next[static_cast<std::size_t>(parent(rng))];
    next.push_back(mutate(p, cfg.mutation_prob, rng));
  }
  return next;
}

long ga_warmup_steps(const TrainerConfig& trainer, long budget) {
  return std::min(trainer.warmup_steps, budget / 4);
}

FitnessResult evaluate_fitness(const Genome& genome, const EpisodeConfig& episode, const TrainerConfig& trainer,
                               long budget, std::uint64_t seed) {
  EpisodeConfig env_cfg = episode;
  const int dims = static_cast<int>(std::lround(std::cbrt(static_cast<double>(genome.size()))));
  if (static_cast<std::size_t>(dims) * dims * dims != genome.size()) throw std::invalid_argument("genome is not a cube");
  env_cfg.dims = dims;
  if (env_cfg.torque_scale <= 0.0) env_cfg.torque_scale = default_torque_scale(dims);
  env_cfg.fixed_morphology = decode(genome, dims);

  TrainerConfig tcfg = trainer;
  tcfg.warmup_steps = ga_warmup_steps(trainer, budget);
  Td3Trainer td3([env_cfg] { return CodesignEnv(env_cfg); }, tcfg, seed);
  TrainHooks hooks;
  hooks.evaluate = false;
  const TrainResult tr = td3.train(budget, hooks);

  FitnessResult out;
  out.env_steps = tr.env_steps;
  out.eval = td3.evaluate();
  out.fitness = out.eval.mean_return;
  out.morphology = *env_cfg.fixed_morphology;
  out.networks = td3.agent().networks();
  return out;
}

long per_genome_budget(const GaConfig& cfg, long total_budget) {
  return total_budget / (static_cast<long>(cfg.population) * cfg.generations);
}

GaResult run_ga(const GaConfig& cfg, const EpisodeConfig& episode, const TrainerConfig& trainer, long total_budget,
                std::uint64_t seed, const GaHooks& hooks) {
  cfg.validate();
  const long budget = per_genome_budget(cfg, total_budget);
  if (budget < 1) throw std::invalid_argument("total budget too small for population x generations");

  auto rng = substream(seed, "ga");
  const std::uint64_t fitness_root = derive_seed(seed, "ga-fitness");
  std::vector<Genome> genomes;
  for (int p = 0; p < cfg.population; ++p) genomes.push_back(random_genome(episode.dims, rng));

  GaResult result;
  bool have_best = false;
  for (int gen = 0; gen < cfg.generations; ++gen) {
    std::vector<Individual> population;
    for (int p = 0; p < cfg.population; ++p) {
      if (hooks.should_stop && hooks.should_stop()) {
        result.interrupted = true;
        return result;
      }
      const auto& g = genomes[static_cast<std::size_t>(p)];
      const std::uint64_t s = derive_seed(fitness_root, std::to_string(gen) + ":" + std::to_string(p));
      FitnessResult fr = evaluate_fitness(g, episode, trainer, budget, s);
      result.env_steps += fr.env_steps;
      ++result.evaluations;
      result.all_fitness.push_back(fr.fitness);
      population.push_back({g, fr.fitness});
      if (!have_best || fr.fitness > result.best.fitness) {
        result.best = std::move(fr);
        result.best_genome = g;
        have_best = true;
      }
    }
    CurvePoint point{result.env_steps, result.best.fitness, result.best.eval.std_return,
                     result.best.eval.mean_final_theta_err_deg};
    result.curve.push_back(point);
    if (hooks.on_generation) hooks.on_generation(gen, point, result.best);
    if (gen + 1 < cfg.generations) genomes = next_generation(population, cfg, rng);
  }
  return result;
}

}  // namespace modsat
