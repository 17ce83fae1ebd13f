#pragma once

// Multiplex network model: one shared node set, several undirected layers.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mplex/rng.hpp"

namespace mplex {

// Malformed or unusable input data.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using NodeId = std::uint32_t;

// Undirected edge stored with u < v.
struct Edge {
  NodeId u = 0;
  NodeId v = 0;

  friend auto operator<=>(const Edge&, const Edge&) = default;
};

inline Edge make_edge(NodeId a, NodeId b) { return a < b ? Edge{a, b} : Edge{b, a}; }

// Sorted, duplicate-free edge set of one layer.
using EdgeList = std::vector<Edge>;

bool contains(const EdgeList& edges, Edge e);

// Edges of a that are also in b. Both sorted.
EdgeList intersection(const EdgeList& a, const EdgeList& b);

// All node pairs of [0, num_nodes) missing from `edges`, in sorted order.
EdgeList non_edges(const EdgeList& edges, std::size_t num_nodes);

class MultiplexNetwork {
 public:
  // Layers are sorted and deduplicated here. Throws DataError on self-loops,
  // out-of-range endpoints, fewer than two layers, or a label count that does
  // not match num_nodes.
  MultiplexNetwork(std::size_t num_nodes, std::vector<EdgeList> layers,
                   std::vector<std::string> node_labels = {});

  std::size_t num_layers() const { return layers_.size(); }
  std::size_t num_nodes() const { return num_nodes_; }
  const EdgeList& layer(std::size_t i) const { return layers_.at(i); }
  std::span<const EdgeList> layers() const { return layers_; }
  // Undirected edges summed over layers.
  std::size_t total_edges() const;
  bool has_edge(std::size_t layer, NodeId a, NodeId b) const;
  const std::string& node_label(NodeId id) const { return labels_.at(id); }
  std::span<const std::string> node_labels() const { return labels_; }

  friend bool operator==(const MultiplexNetwork&, const MultiplexNetwork&) = default;

 private:
  std::size_t num_nodes_ = 0;
  std::vector<EdgeList> layers_;
  std::vector<std::string> labels_;
};

struct LoadOptions {
  // Layer indices above this are rejected. Unset: the largest index seen
  // defines the layer count.
  std::optional<std::size_t> max_layer;
};

struct LoadResult {
  MultiplexNetwork network;
  // Distinct (layer, src, dst) records, self-loops excluded. This is the
  // edge count edge-list datasets usually publish.
  std::size_t edge_records = 0;
  std::size_t self_loops_dropped = 0;

  std::size_t layers() const { return network.num_layers(); }
  std::size_t nodes() const { return network.num_nodes(); }
};

// Whitespace-separated `layer src dst [weight]` lines, layers 1-indexed;
// blank lines and `#` comments are skipped. Node labels are arbitrary tokens
// and map to dense ids in sorted label order (numeric when every label is an
// integer).
LoadResult parse_edge_list(std::istream& in, const LoadOptions& opts = {});
LoadResult load_edge_list(const std::filesystem::path& path, const LoadOptions& opts = {});

void write_edge_list(std::ostream& out, const MultiplexNetwork& net);
void save_edge_list(const std::filesystem::path& path, const MultiplexNetwork& net);

// Number of base edges kept at similarity s: ceil(s * m), robust to the
// representation error of s.
std::size_t retained_edge_count(std::size_t base_size, double similarity);

// Layer with |base| edges sharing exactly retained_edge_count(|base|, s) of
// them with base; the rest are drawn uniformly from base's non-edges.
EdgeList similar_layer(const EdgeList& base, std::size_t num_nodes, double similarity, Rng& rng);

// Stochastic block model layer: nodes are assigned to communities round-robin
// and each pair is linked with p_in inside a community, p_out across.
EdgeList planted_partition(std::size_t num_nodes, std::size_t communities, double p_in, double p_out, Rng& rng);

enum class SyntheticKind { RandInternship, Small3Layers };

SyntheticKind parse_synthetic_kind(std::string_view name);
std::string_view to_string(SyntheticKind kind);
// Similarities of the generated layers to the base layer, base excluded.
std::span<const double> synthetic_similarities(SyntheticKind kind);

// Base layer is the source's first layer, restricted to the nodes it touches.
MultiplexNetwork build_synthetic(SyntheticKind kind, const MultiplexNetwork& source, std::uint64_t seed);

struct LayerSplit {
  std::vector<EdgeList> folds;      // positives, partitioned
  std::vector<EdgeList> negatives;  // per fold, same size as the fold
};

struct EdgeSplit {
  std::size_t num_folds = 0;
  std::uint64_t seed = 0;
  std::vector<LayerSplit> layers;

  const EdgeList& test_positives(std::size_t layer, std::size_t fold) const {
    return layers.at(layer).folds.at(fold);
  }
  const EdgeList& test_negatives(std::size_t layer, std::size_t fold) const {
    return layers.at(layer).negatives.at(fold);
  }
  // Positives of every other fold, sorted.
  EdgeList train_positives(std::size_t layer, std::size_t fold) const;
};

EdgeSplit make_split(const MultiplexNetwork& net, std::size_t num_folds, std::uint64_t trial_seed);

}  // namespace mplex
