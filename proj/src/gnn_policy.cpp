#include "restore/gnn_policy.hpp"

#include <cmath>
#include <fstream>
#include <json.hpp>

#include "restore/error.hpp"

namespace restore {

Matrix<double> graph_conv_forward(const GraphConvLayer& layer, const Matrix<double>& features,
                                  std::span<const WeightedEdge> edges) {
  const std::size_t n = features.rows();
  const std::size_t din = layer.in_dim();
  const std::size_t dout = layer.out_dim();
  if (features.cols() != din || layer.w_neighbor.cols() != din || layer.w_neighbor.rows() != dout) {
    throw ContractError("graph_conv_forward: dimension mismatch");
  }
  Matrix<double> agg(n, din, 0.0);
  for (const WeightedEdge& e : edges) {
    if (e.src < 0 || e.dst < 0 || static_cast<std::size_t>(e.src) >= n || static_cast<std::size_t>(e.dst) >= n) {
      throw ContractError("graph_conv_forward: edge endpoint out of range");
    }
    auto s = static_cast<std::size_t>(e.src);
    auto d = static_cast<std::size_t>(e.dst);
    for (std::size_t k = 0; k < din; ++k) agg(d, k) += e.weight * features(s, k);
  }
  Matrix<double> out(n, dout, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t o = 0; o < dout; ++o) {
      double acc = 0.0;
      for (std::size_t k = 0; k < din; ++k) acc += layer.w_self(o, k) * features(i, k);
      double nb = 0.0;
      for (std::size_t k = 0; k < din; ++k) nb += layer.w_neighbor(o, k) * agg(i, k);
      out(i, o) = acc + nb;
    }
  }
  return out;
}

Matrix<double> encode_nodes(const ObservationGraph& obs) {
  Matrix<double> x(obs.nodes.size(), kNodeInputDim, 0.0);
  const double hours = obs.episode_hours;
  const double pmax = obs.p_max > 0.0 ? obs.p_max : 1.0;
  const double cap = obs.crew_capacity;
  for (std::size_t i = 0; i < obs.nodes.size(); ++i) {
    const ObsNode& n = obs.nodes[i];
    x(i, static_cast<std::size_t>(n.kind)) = 1.0;
    const auto& f = n.features;
    switch (n.kind) {
      case NodeKind::relation:
        x(i, 4) = f[0] / hours;
        break;
      case NodeKind::crew:
        x(i, 4) = f[0] / cap;
        break;
      case NodeKind::depot:
        x(i, 4) = f[0];
        break;
      case NodeKind::damaged:
        x(i, 4) = f[0];
        x(i, 5) = f[1] / cap;
        x(i, 6) = f[2] / hours;
        x(i, 7) = f[3] / pmax;
        x(i, 8) = f[4];
        break;
    }
  }
  return x;
}

std::size_t GenomeLayout::parameter_count() const {
  std::size_t total = 0;
  int in = input_dim;
  for (int h : hidden) {
    total += 2 * static_cast<std::size_t>(h) * static_cast<std::size_t>(in);
    in = h;
  }
  return total + static_cast<std::size_t>(in) + 1;
}

ActorGnn::ActorGnn(GenomeLayout layout) : layout_(std::move(layout)) {
  if (layout_.input_dim != kNodeInputDim || layout_.hidden.empty()) {
    throw ContractError("ActorGnn: layout needs input_dim 9 and at least one hidden layer");
  }
  int in = layout_.input_dim;
  for (int h : layout_.hidden) {
    if (h < 1) throw ContractError("ActorGnn: hidden width must be positive");
    auto hu = static_cast<std::size_t>(h);
    auto iu = static_cast<std::size_t>(in);
    layers_.push_back({Matrix<double>(hu, iu, 0.0), Matrix<double>(hu, iu, 0.0)});
    in = h;
  }
  head_w_.assign(static_cast<std::size_t>(in), 0.0);
}

PolicyGenome ActorGnn::genome() const {
  PolicyGenome g;
  g.layout = layout_;
  g.params.reserve(layout_.parameter_count());
  for (const GraphConvLayer& l : layers_) {
    g.params.insert(g.params.end(), l.w_self.data().begin(), l.w_self.data().end());
    g.params.insert(g.params.end(), l.w_neighbor.data().begin(), l.w_neighbor.data().end());
  }
  g.params.insert(g.params.end(), head_w_.begin(), head_w_.end());
  g.params.push_back(head_b_);
  return g;
}

void ActorGnn::set_genome(const PolicyGenome& g) {
  if (!(g.layout == layout_)) throw ContractError("set_genome: layout mismatch");
  if (g.params.size() != layout_.parameter_count()) {
    throw ContractError("set_genome: expected " + std::to_string(layout_.parameter_count()) + " parameters, got " +
                        std::to_string(g.params.size()));
  }
  auto it = g.params.begin();
  auto take = [&it](std::vector<double>& dst) {
    std::copy(it, it + static_cast<std::ptrdiff_t>(dst.size()), dst.begin());
    it += static_cast<std::ptrdiff_t>(dst.size());
  };
  for (GraphConvLayer& l : layers_) {
    take(l.w_self.data());
    take(l.w_neighbor.data());
  }
  take(head_w_);
  head_b_ = *it;
}

IncentiveMatrix ActorGnn::forward(const ObservationGraph& obs) const {
  const std::size_t n = obs.nodes.size();
  // Undirected observation edges carry messages both ways with unit weight.
  std::vector<WeightedEdge> edges;
  edges.reserve(obs.edges.size() * 2);
  std::vector<int> rel_crew(n, -1), rel_target(n, -1);
  for (auto [a, b] : obs.edges) {
    if (a < 0 || b < 0 || static_cast<std::size_t>(a) >= n || static_cast<std::size_t>(b) >= n) {
      throw ContractError("policy_forward: edge endpoint out of range");
    }
    edges.push_back({a, b, 1.0});
    edges.push_back({b, a, 1.0});
    for (auto [r, o] : {std::pair{a, b}, std::pair{b, a}}) {
      const ObsNode& rn = obs.nodes[static_cast<std::size_t>(r)];
      const ObsNode& on = obs.nodes[static_cast<std::size_t>(o)];
      if (rn.kind != NodeKind::relation) continue;
      if (on.kind == NodeKind::crew) rel_crew[static_cast<std::size_t>(r)] = on.entity;
      if (on.kind == NodeKind::depot || on.kind == NodeKind::damaged) rel_target[static_cast<std::size_t>(r)] = on.entity;
    }
  }

  Matrix<double> h = encode_nodes(obs);
  for (const GraphConvLayer& l : layers_) {
    h = graph_conv_forward(l, h, edges);
    for (double& v : h.data()) v = std::tanh(v);
  }

  IncentiveMatrix omega(static_cast<std::size_t>(obs.n_crews), static_cast<std::size_t>(obs.n_targets), 0.0);
  std::size_t seen = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (obs.nodes[i].kind != NodeKind::relation) continue;
    int c = rel_crew[i];
    int t = rel_target[i];
    if (c < 0 || t < 0 || c >= obs.n_crews || t >= obs.n_targets) {
      throw ContractError("policy_forward: relation node " + std::to_string(i) + " lacks crew/target edges");
    }
    double out = head_b_;
    for (std::size_t k = 0; k < head_w_.size(); ++k) out += head_w_[k] * h(i, k);
    omega(static_cast<std::size_t>(c), static_cast<std::size_t>(t)) = out;
    ++seen;
  }
  if (seen != obs.n_relations()) throw ContractError("policy_forward: relation count differs from n_crews x n_targets");
  return omega;
}

void save_genome(const PolicyGenome& genome, const std::filesystem::path& path) {
  nlohmann::json j;
  j["format"] = "restore-genome";
  j["version"] = 1;
  j["layout"] = {{"input_dim", genome.layout.input_dim}, {"hidden", genome.layout.hidden}};
  j["params"] = genome.params;
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp);
    if (!os) throw ConfigError("save_genome: cannot write " + path.string());
    os << j.dump(1) << '\n';
  }
  std::filesystem::rename(tmp, path);
}

PolicyGenome load_genome(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ParseError("load_genome: cannot open " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(is);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != "restore-genome") throw ParseError(path.string() + ": not a genome file");
    if (j.at("version").get<int>() != 1) throw ParseError(path.string() + ": unsupported genome version");
    PolicyGenome g;
    g.layout.input_dim = j.at("layout").at("input_dim").get<int>();
    g.layout.hidden = j.at("layout").at("hidden").get<std::vector<int>>();
    g.params = j.at("params").get<std::vector<double>>();
    if (g.params.size() != g.layout.parameter_count()) {
      throw ParseError(path.string() + ": parameter count does not match layout");
    }
    return g;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

}  // namespace restore
