#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "restore/gnn_policy.hpp"
#include "restore/net_core.hpp"
#include "restore/rng.hpp"

namespace restore {

struct GaConfig {
  int generations = 100;
  int population = 50;
  double elite_ratio = 0.01;
  double crossover_prob = 0.5;
  double mutation_prob = 0.1;
  double mutation_sigma = 0.1;
  double init_sigma = 0.5;
  int tournament_size = 2;
  int repeats = 8;  // episodes per environment per evaluation
  std::vector<int> hidden{8, 8};
  int threads = 0;  // 0: RESTORE_THREADS or hardware concurrency

  int elite_count() const;
  // Throws ConfigError listing the first broken invariant.
  void validate() const;
};

GaConfig ga_config_from_kv(const std::map<std::string, std::string>& kv, const std::string& origin);
GaConfig load_ga_config(const std::string& path);

using EnvSet = std::vector<std::shared_ptr<const Scenario>>;

struct FitnessRecord {
  std::size_t genome_id = 0;
  double mean = 0.0;
  std::vector<double> per_env;  // mean over repeats
};

// Episode seed shared by every genome evaluated against (seed_base, env, repeat).
std::uint64_t episode_seed(std::uint64_t seed_base, std::size_t env_index, std::size_t repeat);

FitnessRecord evaluate_genome(const PolicyGenome& genome, const EnvSet& envs, int repeats, std::uint64_t seed_base);

// Uniform crossover. Throws ContractError on length mismatch.
std::vector<double> crossover(std::span<const double> a, std::span<const double> b, Rng& rng);
// Adds N(0, sigma) to each gene with probability `prob`.
void mutate(std::vector<double>& genes, double prob, double sigma, Rng& rng);

struct GenerationStats {
  int generation = 0;
  double best_fitness = 0.0;  // best so far
  double mean_fitness = 0.0;  // population mean this generation
};

struct EvolutionResult {
  PolicyGenome best;
  double best_fitness = 0.0;
  std::vector<GenerationStats> history;
};

using GenerationCallback = std::function<void(const GenerationStats&)>;

// Generational GA: elitism, size-k tournament on fitness, uniform crossover,
// per-gene Gaussian mutation. Every generation scores against the same
// episode seeds, so elite fitness carries over unchanged.
EvolutionResult evolve(const GaConfig& config, const EnvSet& envs, Rng& rng, const GenerationCallback& on_generation = {});

void write_history_csv(std::ostream& os, const std::vector<GenerationStats>& history);

// Runs fn(i) for i in [0, n) on `threads` workers. Results must be written by
// index so that scheduling cannot change them.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);
int resolve_threads(int requested);

}  // namespace restore
