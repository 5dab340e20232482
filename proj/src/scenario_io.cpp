#include "restore/scenario_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <numeric>
#include <sstream>

#include "restore/error.hpp"

namespace restore {

using nlohmann::json;

PowerNetwork generate_feeder(int n_nodes, Rng& rng, const FeederParams& params) {
  if (n_nodes < 2) throw ConfigError("generate_feeder: need at least 2 nodes");
  std::uniform_real_distribution<double> coord(0.0, params.extent_km);
  std::uniform_real_distribution<double> load(params.load_min_kw, params.load_max_kw);
  std::vector<PowerNode> nodes;
  nodes.reserve(static_cast<std::size_t>(n_nodes));
  nodes.push_back({0, params.extent_km / 2, params.extent_km / 2, 0.0, true});
  for (int i = 1; i < n_nodes; ++i) {
    double x = coord(rng);
    double y = coord(rng);
    nodes.push_back({i, x, y, load(rng), false});
  }
  auto d2 = [&](int a, int b) {
    double dx = nodes[static_cast<std::size_t>(a)].x - nodes[static_cast<std::size_t>(b)].x;
    double dy = nodes[static_cast<std::size_t>(a)].y - nodes[static_cast<std::size_t>(b)].y;
    return dx * dx + dy * dy;
  };
  std::vector<int> order(static_cast<std::size_t>(n_nodes) - 1);
  std::iota(order.begin(), order.end(), 1);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return d2(a, 0) < d2(b, 0); });
  std::vector<int> connected{0};
  std::vector<PowerEdge> edges;
  for (int v : order) {
    int best = connected.front();
    for (int c : connected) {
      if (d2(v, c) < d2(v, best)) best = c;
    }
    edges.push_back({best, v});
    connected.push_back(v);
  }
  return PowerNetwork(std::move(nodes), std::move(edges));
}

TransportNetwork generate_roads(int grid_w, int grid_h, Rng& rng, const RoadParams& params) {
  if (grid_w < 2 || grid_h < 2) throw ConfigError("generate_roads: grid must be at least 2x2");
  const double spacing = params.extent_km / static_cast<double>(std::max(grid_w, grid_h) - 1);
  std::uniform_real_distribution<double> jitter(-params.jitter * spacing, params.jitter * spacing);
  std::uniform_real_distribution<double> speed(params.speed_min_kmh, params.speed_max_kmh);
  std::vector<RoadNode> nodes;
  for (int y = 0; y < grid_h; ++y) {
    for (int x = 0; x < grid_w; ++x) {
      double jx = jitter(rng);
      double jy = jitter(rng);
      nodes.push_back({y * grid_w + x, x * spacing + jx, y * spacing + jy});
    }
  }
  std::vector<RoadEdge> edges;
  auto segment = [&](int a, int b) {
    const RoadNode& na = nodes[static_cast<std::size_t>(a)];
    const RoadNode& nb = nodes[static_cast<std::size_t>(b)];
    double len = std::hypot(na.x - nb.x, na.y - nb.y);
    double v = speed(rng);
    edges.push_back({a, b, len / v, len, v});
    edges.push_back({b, a, len / v, len, v});
  };
  for (int y = 0; y < grid_h; ++y) {
    for (int x = 0; x < grid_w; ++x) {
      int id = y * grid_w + x;
      if (x + 1 < grid_w) segment(id, id + 1);
      if (y + 1 < grid_h) segment(id, id + grid_w);
    }
  }
  const auto want = static_cast<std::size_t>(std::floor(params.deletion_fraction * static_cast<double>(edges.size())));
  if (want > 0) {
    std::vector<std::size_t> order(edges.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<char> keep(edges.size(), 1);
    std::size_t removed = 0;
    for (std::size_t k : order) {
      if (removed == want) break;
      keep[k] = 0;
      std::vector<RoadEdge> trial;
      for (std::size_t e = 0; e < edges.size(); ++e) {
        if (keep[e]) trial.push_back(edges[e]);
      }
      if (TransportNetwork(nodes, trial).strongly_connected()) {
        ++removed;
      } else {
        keep[k] = 1;
      }
    }
    std::vector<RoadEdge> kept;
    for (std::size_t e = 0; e < edges.size(); ++e) {
      if (keep[e]) kept.push_back(edges[e]);
    }
    edges = std::move(kept);
  }
  return TransportNetwork(std::move(nodes), std::move(edges));
}

Scenario generate_scenario(const ScenarioParams& params, std::uint64_t seed) {
  Rng feeder_rng{derive_seed(seed, {1})};
  Rng road_rng{derive_seed(seed, {2})};
  Rng depot_rng{derive_seed(seed, {3})};
  if (params.config.n_damaged > params.feeder_nodes - 1) {
    throw ConfigError("n_damaged=" + std::to_string(params.config.n_damaged) + " exceeds the " +
                      std::to_string(params.feeder_nodes - 1) + " non-source nodes of the feeder");
  }
  PowerNetwork power = generate_feeder(params.feeder_nodes, feeder_rng, params.feeder);
  TransportNetwork roads = generate_roads(params.grid_w, params.grid_h, road_rng, params.roads);
  if (params.config.n_depots < 1 || static_cast<std::size_t>(params.config.n_depots) > roads.size()) {
    throw ConfigError("n_depots must be between 1 and the road node count");
  }
  std::vector<int> ids;
  for (const RoadNode& n : roads.nodes()) ids.push_back(n.id);
  std::vector<int> depots;
  for (int k = 0; k < params.config.n_depots; ++k) {
    std::uniform_int_distribution<std::size_t> pick(static_cast<std::size_t>(k), ids.size() - 1);
    std::swap(ids[static_cast<std::size_t>(k)], ids[pick(depot_rng)]);
    depots.push_back(ids[static_cast<std::size_t>(k)]);
  }
  EpisodeConfig cfg = params.config;
  cfg.seed = seed;
  return make_scenario(std::move(power), std::move(roads), std::move(depots), cfg);
}

namespace {

struct PresetRow {
  const char* name;
  int crews, depots, damaged, feeder, grid;
  double extent;
};

// Crew/depot/damaged counts per named size. Feeder, grid and extent are
// desk-scale; the extent keeps a cross-region trip near half the horizon.
constexpr PresetRow kPresets[] = {
    {"train", 8, 4, 96, 480, 22, 1000.0},   {"eval-a", 4, 2, 48, 240, 16, 1000.0},
    {"eval-b", 8, 4, 96, 480, 22, 1000.0},  {"eval-c", 16, 8, 192, 960, 31, 1000.0},
    {"eval-d", 32, 16, 384, 1920, 44, 1000.0}, {"eval-oa", 2, 3, 5, 60, 10, 1000.0},
    {"eval-ob", 2, 3, 17, 60, 10, 1000.0},  {"desk", 4, 2, 12, 60, 10, 1000.0},
    {"desk-2x", 8, 4, 24, 120, 14, 1000.0},
};

}  // namespace

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const PresetRow& r : kPresets) names.emplace_back(r.name);
  return names;
}

ScenarioParams preset(const std::string& name) {
  for (const PresetRow& r : kPresets) {
    if (name != r.name) continue;
    ScenarioParams p;
    p.config.n_crews = r.crews;
    p.config.n_depots = r.depots;
    p.config.n_damaged = r.damaged;
    p.feeder_nodes = r.feeder;
    p.grid_w = p.grid_h = r.grid;
    p.feeder.extent_km = p.roads.extent_km = r.extent;
    return p;
  }
  throw ConfigError("unknown preset '" + name + "'");
}

std::map<std::string, std::string> parse_key_values(const std::string& text, const std::string& origin) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  auto trim = [](std::string s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string{};
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty() || line.front() == '[') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError(origin + ":" + std::to_string(lineno) + ": expected key = value");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    if (key.empty()) throw ParseError(origin + ":" + std::to_string(lineno) + ": empty key");
    kv[key] = value;
  }
  return kv;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ParseError("cannot open " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void write_text_file_atomic(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary);
    if (!os) throw ConfigError("cannot write " + path.string());
    os << text;
    if (!os) throw ConfigError("failed writing " + path.string());
  }
  std::filesystem::rename(tmp, path);
}

namespace {

template <class T>
T parse_number(const std::string& value, const std::string& key, const std::string& origin) {
  std::istringstream is(value);
  T out{};
  is >> out;
  if (!is || !is.eof()) throw ParseError(origin + ": bad value for '" + key + "': " + value);
  return out;
}

}  // namespace

ScenarioParams scenario_params_from_kv(const std::map<std::string, std::string>& kv, const std::string& origin) {
  ScenarioParams p;
  for (const auto& [k, v] : kv) {
    if (k == "crews") p.config.n_crews = parse_number<int>(v, k, origin);
    else if (k == "depots") p.config.n_depots = parse_number<int>(v, k, origin);
    else if (k == "damaged") p.config.n_damaged = parse_number<int>(v, k, origin);
    else if (k == "horizon_steps") p.config.horizon_steps = parse_number<int>(v, k, origin);
    else if (k == "step_hours") p.config.step_hours = parse_number<double>(v, k, origin);
    else if (k == "crew_capacity") p.config.crew_capacity = parse_number<int>(v, k, origin);
    else if (k == "feeder_nodes") p.feeder_nodes = parse_number<int>(v, k, origin);
    else if (k == "grid_w") p.grid_w = parse_number<int>(v, k, origin);
    else if (k == "grid_h") p.grid_h = parse_number<int>(v, k, origin);
    else if (k == "extent_km") p.feeder.extent_km = p.roads.extent_km = parse_number<double>(v, k, origin);
    else if (k == "load_min_kw") p.feeder.load_min_kw = parse_number<double>(v, k, origin);
    else if (k == "load_max_kw") p.feeder.load_max_kw = parse_number<double>(v, k, origin);
    else if (k == "speed_min_kmh") p.roads.speed_min_kmh = parse_number<double>(v, k, origin);
    else if (k == "speed_max_kmh") p.roads.speed_max_kmh = parse_number<double>(v, k, origin);
    else if (k == "deletion_fraction") p.roads.deletion_fraction = parse_number<double>(v, k, origin);
    else if (k == "name") continue;
    else throw ParseError(origin + ": unknown key '" + k + "'");
  }
  return p;
}

std::string scenario_params_to_kv(const std::string& name, const ScenarioParams& p) {
  std::ostringstream os;
  os << "# environment preset\n"
     << "name = " << name << '\n'
     << "crews = " << p.config.n_crews << '\n'
     << "depots = " << p.config.n_depots << '\n'
     << "damaged = " << p.config.n_damaged << '\n'
     << "horizon_steps = " << p.config.horizon_steps << '\n'
     << "step_hours = " << p.config.step_hours << '\n'
     << "crew_capacity = " << p.config.crew_capacity << '\n'
     << "feeder_nodes = " << p.feeder_nodes << '\n'
     << "grid_w = " << p.grid_w << '\n'
     << "grid_h = " << p.grid_h << '\n'
     << "extent_km = " << p.roads.extent_km << '\n'
     << "load_min_kw = " << p.feeder.load_min_kw << '\n'
     << "load_max_kw = " << p.feeder.load_max_kw << '\n'
     << "speed_min_kmh = " << p.roads.speed_min_kmh << '\n'
     << "speed_max_kmh = " << p.roads.speed_max_kmh << '\n'
     << "deletion_fraction = " << p.roads.deletion_fraction << '\n';
  return os.str();
}

std::string scenario_to_json(const Scenario& s) {
  json j;
  json pn = json::array();
  for (const PowerNode& n : s.power.nodes()) {
    pn.push_back({{"id", n.id}, {"x", n.x}, {"y", n.y}, {"load_kw", n.load_kw}, {"is_source", n.is_source}});
  }
  json pe = json::array();
  for (const PowerEdge& e : s.power.edges()) pe.push_back({{"from", e.from}, {"to", e.to}});
  json rn = json::array();
  for (const RoadNode& n : s.roads.nodes()) rn.push_back({{"id", n.id}, {"x", n.x}, {"y", n.y}});
  json re = json::array();
  for (const RoadEdge& e : s.roads.edges()) {
    json edge = {{"from", e.from}, {"to", e.to}, {"travel_time_h", e.travel_time_h}};
    if (e.length_km > 0.0 && e.speed_kmh > 0.0) {
      edge["length_km"] = e.length_km;
      edge["speed_kmh"] = e.speed_kmh;
    }
    re.push_back(std::move(edge));
  }
  const EpisodeConfig& c = s.config;
  j["power_nodes"] = std::move(pn);
  j["power_edges"] = std::move(pe);
  j["road_nodes"] = std::move(rn);
  j["road_edges"] = std::move(re);
  j["depots"] = s.depots;
  j["config"] = {{"n_crews", c.n_crews},         {"n_depots", c.n_depots},
                 {"n_damaged", c.n_damaged},     {"horizon_steps", c.horizon_steps},
                 {"step_hours", c.step_hours},   {"crew_capacity", c.crew_capacity},
                 {"seed", c.seed}};
  return j.dump(1) + "\n";
}

namespace {

template <class T>
T field(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(where + "." + key + ": missing");
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw ParseError(where + "." + key + ": wrong type");
  }
}

const json& array_field(const json& obj, const char* key, const std::string& origin) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_array()) throw ParseError(origin + ": '" + key + "' must be an array");
  return *it;
}

}  // namespace

Scenario scenario_from_json(const std::string& text, const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(origin + ": " + e.what());
  }
  if (!j.is_object()) throw ParseError(origin + ": top level must be an object");

  std::vector<PowerNode> pnodes;
  const json& pn = array_field(j, "power_nodes", origin);
  for (std::size_t i = 0; i < pn.size(); ++i) {
    std::string w = origin + ": power_nodes[" + std::to_string(i) + "]";
    PowerNode n;
    n.id = field<int>(pn[i], "id", w);
    n.x = field<double>(pn[i], "x", w);
    n.y = field<double>(pn[i], "y", w);
    n.load_kw = field<double>(pn[i], "load_kw", w);
    n.is_source = pn[i].contains("is_source") ? field<bool>(pn[i], "is_source", w) : false;
    pnodes.push_back(n);
  }
  std::vector<PowerEdge> pedges;
  const json& pe = array_field(j, "power_edges", origin);
  for (std::size_t i = 0; i < pe.size(); ++i) {
    std::string w = origin + ": power_edges[" + std::to_string(i) + "]";
    pedges.push_back({field<int>(pe[i], "from", w), field<int>(pe[i], "to", w)});
  }
  std::vector<RoadNode> rnodes;
  const json& rn = array_field(j, "road_nodes", origin);
  for (std::size_t i = 0; i < rn.size(); ++i) {
    std::string w = origin + ": road_nodes[" + std::to_string(i) + "]";
    rnodes.push_back({field<int>(rn[i], "id", w), field<double>(rn[i], "x", w), field<double>(rn[i], "y", w)});
  }
  std::vector<RoadEdge> redges;
  const json& re = array_field(j, "road_edges", origin);
  for (std::size_t i = 0; i < re.size(); ++i) {
    std::string w = origin + ": road_edges[" + std::to_string(i) + "]";
    RoadEdge e;
    e.from = field<int>(re[i], "from", w);
    e.to = field<int>(re[i], "to", w);
    bool has_len = re[i].contains("length_km") && re[i].contains("speed_kmh");
    if (has_len) {
      e.length_km = field<double>(re[i], "length_km", w);
      e.speed_kmh = field<double>(re[i], "speed_kmh", w);
      if (!(e.speed_kmh > 0.0)) throw ParseError(w + ".speed_kmh: must be positive");
    }
    if (re[i].contains("travel_time_h")) {
      e.travel_time_h = field<double>(re[i], "travel_time_h", w);
    } else if (has_len) {
      e.travel_time_h = e.length_km / e.speed_kmh;
    } else {
      throw ParseError(w + ": needs travel_time_h or length_km + speed_kmh");
    }
    redges.push_back(e);
  }
  auto depots = [&] {
    const json& d = array_field(j, "depots", origin);
    try {
      return d.get<std::vector<int>>();
    } catch (const json::exception&) {
      throw ParseError(origin + ": depots must be integer ids");
    }
  }();
  auto cit = j.find("config");
  if (cit == j.end() || !cit->is_object()) throw ParseError(origin + ": 'config' must be an object");
  const json& cj = *cit;
  std::string w = origin + ": config";
  EpisodeConfig cfg;
  cfg.n_crews = field<int>(cj, "n_crews", w);
  cfg.n_depots = field<int>(cj, "n_depots", w);
  cfg.n_damaged = field<int>(cj, "n_damaged", w);
  if (cj.contains("horizon_steps")) cfg.horizon_steps = field<int>(cj, "horizon_steps", w);
  if (cj.contains("step_hours")) cfg.step_hours = field<double>(cj, "step_hours", w);
  if (cj.contains("crew_capacity")) cfg.crew_capacity = field<int>(cj, "crew_capacity", w);
  if (cj.contains("seed")) cfg.seed = field<std::uint64_t>(cj, "seed", w);

  try {
    return make_scenario(PowerNetwork(std::move(pnodes), std::move(pedges)),
                         TransportNetwork(std::move(rnodes), std::move(redges)), std::move(depots), cfg);
  } catch (const ConfigError& e) {
    throw ConfigError(origin + ": " + e.what());
  }
}

void save_scenario(const Scenario& s, const std::filesystem::path& path) {
  write_text_file_atomic(path, scenario_to_json(s));
}

Scenario load_scenario(const std::filesystem::path& path) {
  return scenario_from_json(read_text_file(path), path.string());
}

std::vector<std::filesystem::path> list_scenarios(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> out;
  if (!std::filesystem::is_directory(dir)) throw ConfigError("not a directory: " + dir.string());
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const auto& p = entry.path();
    if (entry.is_regular_file() && p.extension() == ".json" && p.filename() != "manifest.json") out.push_back(p);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace restore
