#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "restore/environment.hpp"
#include "restore/matrix.hpp"

namespace restore {

// Type one-hot (relation, crew, depot, damaged) + five feature slots.
inline constexpr int kNodeInputDim = 9;

struct WeightedEdge {
  int src = 0;
  int dst = 0;
  double weight = 1.0;
};

// x'_i = W1 x_i + W2 * sum_{j in N(i)} e_ji x_j
struct GraphConvLayer {
  Matrix<double> w_self;      // d_out x d_in
  Matrix<double> w_neighbor;  // d_out x d_in

  std::size_t in_dim() const { return w_self.cols(); }
  std::size_t out_dim() const { return w_self.rows(); }
};

// `features` is N x d_in (one row per node). Throws ContractError on
// dimension mismatch or an edge endpoint out of range.
Matrix<double> graph_conv_forward(const GraphConvLayer& layer, const Matrix<double>& features,
                                  std::span<const WeightedEdge> edges);

// Per-node input rows: one-hot kind, then normalized feature slots (times over
// the episode length, power over p_max, resources over crew capacity).
Matrix<double> encode_nodes(const ObservationGraph& obs);

struct GenomeLayout {
  int input_dim = kNodeInputDim;
  std::vector<int> hidden{8, 8};

  std::size_t parameter_count() const;
  bool operator==(const GenomeLayout&) const = default;
};

// Flat parameter vector: per layer W1 then W2 (row-major), then head weights
// and head bias.
struct PolicyGenome {
  GenomeLayout layout;
  std::vector<double> params;
};

class ActorGnn {
 public:
  explicit ActorGnn(GenomeLayout layout = {});

  const GenomeLayout& layout() const { return layout_; }
  const std::vector<GraphConvLayer>& layers() const { return layers_; }

  PolicyGenome genome() const;
  // Throws ContractError if the layout or length differ.
  void set_genome(const PolicyGenome& genome);

  // One scalar per relation node, scattered to (crew row, target column).
  // Throws ContractError on a relation node without crew and target edges.
  IncentiveMatrix forward(const ObservationGraph& obs) const;

 private:
  GenomeLayout layout_;
  std::vector<GraphConvLayer> layers_;
  std::vector<double> head_w_;
  double head_b_ = 0.0;
};

inline PolicyGenome genome_get(const ActorGnn& actor) { return actor.genome(); }
inline void genome_set(ActorGnn& actor, const PolicyGenome& g) { actor.set_genome(g); }

// JSON with a format tag, version and layout descriptor.
void save_genome(const PolicyGenome& genome, const std::filesystem::path& path);
PolicyGenome load_genome(const std::filesystem::path& path);

}  // namespace restore
