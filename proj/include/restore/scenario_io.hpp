#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "restore/net_core.hpp"
#include "restore/rng.hpp"

namespace restore {

struct FeederParams {
  double extent_km = 40.0;
  double load_min_kw = 10.0;
  double load_max_kw = 200.0;
};

struct RoadParams {
  double extent_km = 40.0;
  double speed_min_kmh = 30.0;
  double speed_max_kmh = 60.0;
  double deletion_fraction = 0.05;
  double jitter = 0.25;  // of the lattice spacing
};

// Random radial tree: source (id 0) at the centre of the square, every other
// node hooked to its nearest already-connected node in order of distance from
// the source. Throws ConfigError if n_nodes < 2.
PowerNetwork generate_feeder(int n_nodes, Rng& rng, const FeederParams& params = {});

// Jittered lattice with a directed edge each way per segment. One-way
// deletions are kept only while the graph stays strongly connected.
TransportNetwork generate_roads(int grid_w, int grid_h, Rng& rng, const RoadParams& params = {});

struct ScenarioParams {
  EpisodeConfig config;
  int feeder_nodes = 60;
  int grid_w = 10;
  int grid_h = 10;
  FeederParams feeder;
  RoadParams roads;
};

// Feeder, roads and depots from independent streams of `seed`.
Scenario generate_scenario(const ScenarioParams& params, std::uint64_t seed);

// Named environment sizes: train, eval-a .. eval-d, eval-oa, eval-ob, plus the
// desk-scale sets desk and desk-2x.
std::vector<std::string> preset_names();
ScenarioParams preset(const std::string& name);

// `key = value` lines, '#' comments. Keys are returned verbatim.
std::map<std::string, std::string> parse_key_values(const std::string& text, const std::string& origin);
std::string read_text_file(const std::filesystem::path& path);
void write_text_file_atomic(const std::filesystem::path& path, const std::string& text);

ScenarioParams scenario_params_from_kv(const std::map<std::string, std::string>& kv, const std::string& origin);
std::string scenario_params_to_kv(const std::string& name, const ScenarioParams& p);

std::string scenario_to_json(const Scenario& s);
Scenario scenario_from_json(const std::string& text, const std::string& origin);
void save_scenario(const Scenario& s, const std::filesystem::path& path);
// Throws ParseError on malformed input, ConfigError listing violations.
Scenario load_scenario(const std::filesystem::path& path);

// Scenario files in a directory, sorted by name (manifest.json excluded).
std::vector<std::filesystem::path> list_scenarios(const std::filesystem::path& dir);

}  // namespace restore
