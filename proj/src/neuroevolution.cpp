#include "restore/neuroevolution.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>

#include "restore/environment.hpp"
#include "restore/error.hpp"
#include "restore/scenario_io.hpp"

namespace restore {

int GaConfig::elite_count() const {
  return std::max(1, static_cast<int>(std::lround(elite_ratio * population)));
}

void GaConfig::validate() const {
  auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (population < 2) throw ConfigError("ga config: population must be at least 2");
  if (generations < 1) throw ConfigError("ga config: generations must be at least 1");
  if (!prob(elite_ratio) || !prob(crossover_prob) || !prob(mutation_prob)) {
    throw ConfigError("ga config: ratios and probabilities must lie in [0, 1]");
  }
  if (elite_count() >= population) throw ConfigError("ga config: elites fill the whole population");
  if (tournament_size < 1) throw ConfigError("ga config: tournament_size must be at least 1");
  if (repeats < 1) throw ConfigError("ga config: repeats must be at least 1");
  if (!(mutation_sigma >= 0.0) || !(init_sigma >= 0.0)) throw ConfigError("ga config: sigmas must be non-negative");
  if (hidden.empty()) throw ConfigError("ga config: need at least one hidden layer");
}

GaConfig ga_config_from_kv(const std::map<std::string, std::string>& kv, const std::string& origin) {
  GaConfig c;
  auto num = [&](const std::string& key, const std::string& v, auto& out) {
    std::istringstream is(v);
    is >> out;
    if (!is || !is.eof()) throw ParseError(origin + ": bad value for '" + key + "': " + v);
  };
  for (const auto& [k, v] : kv) {
    if (k == "generations") num(k, v, c.generations);
    else if (k == "population") num(k, v, c.population);
    else if (k == "elite_ratio") num(k, v, c.elite_ratio);
    else if (k == "crossover_prob") num(k, v, c.crossover_prob);
    else if (k == "mutation_prob") num(k, v, c.mutation_prob);
    else if (k == "mutation_sigma") num(k, v, c.mutation_sigma);
    else if (k == "init_sigma") num(k, v, c.init_sigma);
    else if (k == "tournament_size") num(k, v, c.tournament_size);
    else if (k == "repeats") num(k, v, c.repeats);
    else if (k == "threads") num(k, v, c.threads);
    else if (k == "hidden") {
      c.hidden.clear();
      std::string s = v;
      std::replace(s.begin(), s.end(), ',', ' ');
      s.erase(std::remove_if(s.begin(), s.end(), [](char ch) { return ch == '[' || ch == ']'; }), s.end());
      std::istringstream is(s);
      int h;
      while (is >> h) c.hidden.push_back(h);
      if (!is.eof()) throw ParseError(origin + ": bad value for 'hidden': " + v);
    } else {
      throw ParseError(origin + ": unknown key '" + k + "'");
    }
  }
  c.validate();
  return c;
}

GaConfig load_ga_config(const std::string& path) {
  return ga_config_from_kv(parse_key_values(read_text_file(path), path), path);
}

std::uint64_t episode_seed(std::uint64_t seed_base, std::size_t env_index, std::size_t repeat) {
  return derive_seed(seed_base, {env_index, repeat});
}

FitnessRecord evaluate_genome(const PolicyGenome& genome, const EnvSet& envs, int repeats, std::uint64_t seed_base) {
  ActorGnn actor(genome.layout);
  actor.set_genome(genome);
  Policy policy = [&actor](const ObservationGraph& obs) { return actor.forward(obs); };
  FitnessRecord rec;
  rec.per_env.reserve(envs.size());
  double sum = 0.0;
  for (std::size_t e = 0; e < envs.size(); ++e) {
    double env_sum = 0.0;
    for (int r = 0; r < repeats; ++r) {
      EnvState s = reset(envs[e], episode_seed(seed_base, e, static_cast<std::size_t>(r)));
      env_sum += run_episode(s, policy);
    }
    rec.per_env.push_back(env_sum / repeats);
    sum += rec.per_env.back();
  }
  rec.mean = envs.empty() ? 0.0 : sum / static_cast<double>(envs.size());
  return rec;
}

std::vector<double> crossover(std::span<const double> a, std::span<const double> b, Rng& rng) {
  if (a.size() != b.size()) throw ContractError("crossover: genome lengths differ");
  std::bernoulli_distribution coin(0.5);
  std::vector<double> child(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) child[i] = coin(rng) ? a[i] : b[i];
  return child;
}

void mutate(std::vector<double>& genes, double prob, double sigma, Rng& rng) {
  if (prob <= 0.0) return;
  std::bernoulli_distribution hit(prob);
  std::normal_distribution<double> noise(0.0, sigma);
  for (double& g : genes) {
    if (hit(rng)) g += noise(rng);
  }
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("RESTORE_THREADS")) {
    int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
  auto workers = static_cast<std::size_t>(std::max(1, threads));
  workers = std::min(workers, n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n && !failed; i = next++) {
        try {
          fn(i);
        } catch (...) {
          if (!failed.exchange(true)) error = std::current_exception();
        }
      }
    });
  }
  pool.clear();
  if (error) std::rethrow_exception(error);
}

EvolutionResult evolve(const GaConfig& config, const EnvSet& envs, Rng& rng, const GenerationCallback& on_generation) {
  config.validate();
  const GenomeLayout layout{kNodeInputDim, config.hidden};
  const std::size_t genes = layout.parameter_count();
  const auto pop = static_cast<std::size_t>(config.population);
  const auto elites = static_cast<std::size_t>(config.elite_count());
  const int threads = resolve_threads(config.threads);
  const std::uint64_t seed_base = rng();

  std::normal_distribution<double> init(0.0, config.init_sigma);
  std::vector<std::vector<double>> population(pop, std::vector<double>(genes));
  for (auto& g : population) {
    for (double& v : g) v = init(rng);
  }
  std::vector<double> fitness(pop, 0.0);
  std::vector<char> known(pop, 0);

  EvolutionResult result;
  result.best.layout = layout;
  result.best_fitness = -std::numeric_limits<double>::infinity();

  for (int gen = 0; gen < config.generations; ++gen) {
    parallel_for(pop, threads, [&](std::size_t i) {
      if (known[i]) return;
      fitness[i] = evaluate_genome(PolicyGenome{layout, population[i]}, envs, config.repeats, seed_base).mean;
    });

    // Rank by fitness, index breaks ties.
    std::vector<std::size_t> order(pop);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fitness[a] > fitness[b]; });

    if (fitness[order[0]] > result.best_fitness) {
      result.best_fitness = fitness[order[0]];
      result.best.params = population[order[0]];
    }
    GenerationStats stats;
    stats.generation = gen;
    stats.best_fitness = result.best_fitness;
    stats.mean_fitness = std::accumulate(fitness.begin(), fitness.end(), 0.0) / static_cast<double>(pop);
    result.history.push_back(stats);
    if (on_generation) on_generation(stats);
    if (gen + 1 == config.generations) break;

    std::vector<std::size_t> rank_of(pop);
    for (std::size_t r = 0; r < pop; ++r) rank_of[order[r]] = r;
    std::uniform_int_distribution<std::size_t> any(0, pop - 1);
    auto tournament = [&]() {
      std::size_t best = any(rng);
      for (int k = 1; k < config.tournament_size; ++k) {
        std::size_t c = any(rng);
        if (rank_of[c] < rank_of[best]) best = c;
      }
      return best;
    };
    std::bernoulli_distribution do_cross(config.crossover_prob);

    std::vector<std::vector<double>> next;
    std::vector<double> next_fitness;
    std::vector<char> next_known;
    next.reserve(pop);
    for (std::size_t e = 0; e < elites; ++e) {
      next.push_back(population[order[e]]);
      next_fitness.push_back(fitness[order[e]]);
      next_known.push_back(1);
    }
    while (next.size() < pop) {
      const auto& a = population[tournament()];
      const auto& b = population[tournament()];
      std::vector<double> child = do_cross(rng) ? crossover(a, b, rng) : a;
      mutate(child, config.mutation_prob, config.mutation_sigma, rng);
      next.push_back(std::move(child));
      next_fitness.push_back(0.0);
      next_known.push_back(0);
    }
    population = std::move(next);
    fitness = std::move(next_fitness);
    known = std::move(next_known);
  }
  return result;
}

void write_history_csv(std::ostream& os, const std::vector<GenerationStats>& history) {
  os << "generation,best_fitness,mean_fitness\n";
  auto old = os.precision(17);
  for (const GenerationStats& g : history) os << g.generation << ',' << g.best_fitness << ',' << g.mean_fitness << '\n';
  os.precision(old);
}

}  // namespace restore
