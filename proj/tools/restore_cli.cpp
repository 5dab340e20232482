#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <json.hpp>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "restore/baselines.hpp"
#include "restore/environment.hpp"
#include "restore/error.hpp"
#include "restore/gnn_policy.hpp"
#include "restore/neuroevolution.hpp"
#include "restore/scenario_io.hpp"

namespace fs = std::filesystem;
using namespace restore;

namespace {

constexpr const char* kVersion = "1.0.0";

const char* kEvaluateSchema = R"(
Output CSV (--out): scenario,episode,seed,reward
  one row per episode, reward is the cumulative episode reward in [0, 1].
Trace CSV (--trace, one file per episode in the given directory):
  step,p_current_kw,reward,cumulative_reward,n_repaired
A summary line (policy, episodes, mean, std) is printed to stdout.)";

const char* kTrainSchema = R"(
Convergence CSV (--history, default <out>.convergence.csv):
  generation,best_fitness,mean_fitness
  best_fitness is the best seen so far and never decreases.)";

const char* kPlanSchema = R"(
Output CSV (--out): method,reward,compute_seconds
  exact first, then greedy, random and (with --policy) trained.
  compute_seconds is wall-clock and is the only non-deterministic column.)";

struct LoadedPolicy {
  std::string kind;  // random | greedy | checkpoint
  std::optional<PolicyGenome> genome;
};

LoadedPolicy load_policy(const std::string& spec) {
  if (spec == "random" || spec == "greedy") return {spec, std::nullopt};
  return {"checkpoint", load_genome(spec)};
}

// Fresh policy closure for one episode. Random draws from the episode's
// policy stream so results do not depend on evaluation order.
Policy episode_policy(const LoadedPolicy& p, std::uint64_t seed, std::shared_ptr<ActorGnn>& actor_slot) {
  if (p.kind == "greedy") return greedy_policy;
  if (p.kind == "random") {
    auto rng = std::make_shared<Rng>(make_stream(seed, Stream::policy));
    return [rng](const ObservationGraph& obs) { return random_policy(obs, *rng); };
  }
  if (!actor_slot) {
    actor_slot = std::make_shared<ActorGnn>(p.genome->layout);
    actor_slot->set_genome(*p.genome);
  }
  auto actor = actor_slot;
  return [actor](const ObservationGraph& obs) { return actor->forward(obs); };
}

std::vector<std::shared_ptr<const Scenario>> load_dir(const fs::path& dir) {
  auto files = list_scenarios(dir);
  if (files.empty()) throw ConfigError("no scenario files in " + dir.string());
  std::vector<std::shared_ptr<const Scenario>> out;
  for (const auto& f : files) out.push_back(std::make_shared<const Scenario>(load_scenario(f)));
  return out;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

int cmd_generate(const std::string& preset_name, std::uint64_t seed, const fs::path& out, std::optional<int> crews,
                 std::optional<int> depots, std::optional<int> damaged, int count) {
  ScenarioParams params = fs::is_regular_file(preset_name)
                              ? scenario_params_from_kv(parse_key_values(read_text_file(preset_name), preset_name),
                                                        preset_name)
                              : preset(preset_name);
  if (crews) params.config.n_crews = *crews;
  if (depots) params.config.n_depots = *depots;
  if (damaged) params.config.n_damaged = *damaged;
  fs::create_directories(out);
  nlohmann::json manifest;
  manifest["tool"] = "restore";
  manifest["version"] = kVersion;
  manifest["preset"] = preset_name;
  manifest["seed"] = seed;
  manifest["n_crews"] = params.config.n_crews;
  manifest["n_depots"] = params.config.n_depots;
  manifest["n_damaged"] = params.config.n_damaged;
  manifest["files"] = nlohmann::json::array();
  for (int i = 0; i < count; ++i) {
    const std::uint64_t s = count == 1 ? seed : derive_seed(seed, {static_cast<std::uint64_t>(i)});
    Scenario sc = generate_scenario(params, s);
    char name[32];
    std::snprintf(name, sizeof name, "scenario_%03d.json", i);
    save_scenario(sc, out / name);
    manifest["files"].push_back({{"file", name}, {"seed", s}});
  }
  write_text_file_atomic(out / "manifest.json", manifest.dump(2) + "\n");
  std::cout << "wrote " << count << " scenario(s) to " << out.string() << "\n";
  return 0;
}

int cmd_train(const fs::path& scenarios, const fs::path& config_path, const fs::path& out, std::uint64_t seed,
              std::string history, int threads) {
  GaConfig cfg = config_path.empty() ? GaConfig{} : load_ga_config(config_path);
  if (threads > 0) cfg.threads = threads;
  auto envs = load_dir(scenarios);
  Rng rng(seed);
  auto result = evolve(cfg, envs, rng, [](const GenerationStats& g) {
    std::cout << "generation " << g.generation << " best " << fmt(g.best_fitness) << " mean " << fmt(g.mean_fitness)
              << "\n"
              << std::flush;
  });
  save_genome(result.best, out);
  if (history.empty()) history = fs::path(out).replace_extension().string() + ".convergence.csv";
  std::ostringstream csv;
  write_history_csv(csv, result.history);
  write_text_file_atomic(history, csv.str());
  std::cout << "best fitness " << fmt(result.best_fitness) << "\n";
  return 0;
}

int cmd_evaluate(const std::string& policy_spec, const fs::path& scenarios, int episodes, const fs::path& out,
                 std::uint64_t seed, const std::string& trace_dir, bool deterministic) {
  LoadedPolicy policy = load_policy(policy_spec);
  auto envs = load_dir(scenarios);
  if (!trace_dir.empty()) fs::create_directories(trace_dir);
  std::ostringstream csv;
  csv << "scenario,episode,seed,reward\n";
  csv.precision(17);
  std::vector<double> rewards;
  std::shared_ptr<ActorGnn> actor;
  for (std::size_t e = 0; e < envs.size(); ++e) {
    for (int k = 0; k < episodes; ++k) {
      const std::uint64_t s = derive_seed(seed, {e, static_cast<std::uint64_t>(k)});
      EnvState st = reset(envs[e], s, EnvOptions{deterministic});
      std::vector<TraceRow> trace;
      double r = run_episode(st, episode_policy(policy, s, actor), trace_dir.empty() ? nullptr : &trace);
      rewards.push_back(r);
      csv << e << ',' << k << ',' << s << ',' << r << '\n';
      if (!trace_dir.empty()) {
        char name[48];
        std::snprintf(name, sizeof name, "trace_s%03zu_e%03d.csv", e, k);
        std::ostringstream t;
        write_trace_csv(t, trace);
        write_text_file_atomic(fs::path(trace_dir) / name, t.str());
      }
    }
  }
  write_text_file_atomic(out, csv.str());
  double mean = 0.0;
  for (double r : rewards) mean += r;
  mean /= static_cast<double>(rewards.size());
  double var = 0.0;
  for (double r : rewards) var += (r - mean) * (r - mean);
  double sd = rewards.size() > 1 ? std::sqrt(var / static_cast<double>(rewards.size() - 1)) : 0.0;
  std::cout << "policy " << policy_spec << " episodes " << rewards.size() << " mean " << fmt(mean) << " std " << fmt(sd)
            << "\n";
  return 0;
}

int cmd_plan_exact(const fs::path& scenario_path, std::uint64_t seed, const fs::path& out,
                   const std::string& policy_ckpt, const std::string& plan_out) {
  auto sc = std::make_shared<const Scenario>(load_scenario(scenario_path));
  EnvState base = reset(sc, seed, EnvOptions{true});
  using Clock = std::chrono::steady_clock;

  std::ostringstream csv;
  csv << "method,reward,compute_seconds\n";
  csv.precision(17);

  auto t0 = Clock::now();
  ExactResult exact = exact_plan(base);
  double exact_s = std::chrono::duration<double>(Clock::now() - t0).count();
  csv << "exact," << exact.reward << ',' << exact_s << '\n';
  if (!plan_out.empty()) write_text_file_atomic(plan_out, plan_to_json(exact.plan, base) + "\n");

  std::vector<LoadedPolicy> methods{load_policy("greedy"), load_policy("random")};
  if (!policy_ckpt.empty()) methods.push_back(load_policy(policy_ckpt));
  for (const auto& m : methods) {
    std::shared_ptr<ActorGnn> actor;
    EnvState st = base;
    Policy p = episode_policy(m, seed, actor);
    auto t1 = Clock::now();
    double r = run_episode(st, p);
    double secs = std::chrono::duration<double>(Clock::now() - t1).count();
    csv << (m.kind == "checkpoint" ? "trained" : m.kind) << ',' << r << ',' << secs << '\n';
  }
  write_text_file_atomic(out, csv.str());
  std::cout << csv.str();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Power-network restoration simulator: scenario generation, policy training and evaluation"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.footer("Environment: RESTORE_THREADS overrides the worker thread count.");

  std::string preset_name, out, scenarios, config, policy = "greedy", trace, history, scenario, ckpt, plan_out;
  std::uint64_t seed = 0;
  std::optional<int> crews, depots, damaged;
  int count = 1, episodes = 1, threads = 0;
  bool deterministic = false;

  auto* gen = app.add_subcommand("generate", "Generate scenario files and a manifest");
  gen->add_option("--preset", preset_name, "Preset name or preset .cfg file")->required();
  gen->add_option("--seed", seed, "Base seed")->required();
  gen->add_option("--out", out, "Output directory")->required();
  gen->add_option("--crews", crews, "Override crew count");
  gen->add_option("--depots", depots, "Override depot count");
  gen->add_option("--damaged", damaged, "Override damaged node count");
  gen->add_option("--count", count, "Number of scenarios")->check(CLI::PositiveNumber);

  auto* train = app.add_subcommand("train", "Evolve a GNN policy");
  train->footer(kTrainSchema);
  train->add_option("--scenarios", scenarios, "Scenario directory")->required();
  train->add_option("--config", config, "GA config (key = value)");
  train->add_option("--out", out, "Checkpoint path")->required();
  train->add_option("--seed", seed, "Seed");
  train->add_option("--history", history, "Convergence CSV path");
  train->add_option("--threads", threads, "Worker threads");

  auto* eval = app.add_subcommand("evaluate", "Evaluate a policy over scenario episodes");
  eval->footer(kEvaluateSchema);
  eval->add_option("--policy", policy, "Checkpoint path, 'random' or 'greedy'")->required();
  eval->add_option("--scenarios", scenarios, "Scenario directory")->required();
  eval->add_option("--episodes", episodes, "Episodes per scenario")->check(CLI::PositiveNumber);
  eval->add_option("--out", out, "Per-episode CSV")->required();
  eval->add_option("--seed", seed, "Seed");
  eval->add_option("--trace", trace, "Directory for per-step traces");
  eval->add_flag("--deterministic", deterministic, "Freeze budgets at their mean");

  auto* plan = app.add_subcommand("plan-exact", "Compare the exact planner with policies on a determinized instance");
  plan->footer(kPlanSchema);
  plan->add_option("--scenario", scenario, "Scenario file")->required();
  plan->add_option("--seed", seed, "Episode seed");
  plan->add_option("--out", out, "Comparison CSV")->required();
  plan->add_option("--policy", ckpt, "Trained checkpoint to include");
  plan->add_option("--plan-out", plan_out, "Write the exact plan as JSON");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) return cmd_generate(preset_name, seed, out, crews, depots, damaged, count);
    if (*train) return cmd_train(scenarios, config, out, seed, history, threads);
    if (*eval) return cmd_evaluate(policy, scenarios, episodes, out, seed, trace, deterministic);
    if (*plan) return cmd_plan_exact(scenario, seed, out, ckpt, plan_out);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
