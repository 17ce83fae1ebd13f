#include "mplex/multiplex.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <tuple>
#include <unordered_map>

namespace mplex {

bool contains(const EdgeList& edges, Edge e) {
  return std::binary_search(edges.begin(), edges.end(), e);
}

EdgeList intersection(const EdgeList& a, const EdgeList& b) {
  EdgeList out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

EdgeList non_edges(const EdgeList& edges, std::size_t num_nodes) {
  EdgeList out;
  auto it = edges.begin();
  for (NodeId u = 0; u < num_nodes; ++u) {
    for (NodeId v = u + 1; v < num_nodes; ++v) {
      const Edge e{u, v};
      while (it != edges.end() && *it < e) ++it;
      if (it != edges.end() && *it == e) continue;
      out.push_back(e);
    }
  }
  return out;
}

MultiplexNetwork::MultiplexNetwork(std::size_t num_nodes, std::vector<EdgeList> layers,
                                   std::vector<std::string> node_labels)
    : num_nodes_(num_nodes), layers_(std::move(layers)), labels_(std::move(node_labels)) {
  if (layers_.size() < 2) {
    throw DataError("a multiplex network needs at least 2 layers, got " + std::to_string(layers_.size()));
  }
  for (auto& layer : layers_) {
    for (const Edge& e : layer) {
      if (e.u == e.v) throw DataError("self-loop on node " + std::to_string(e.u));
      if (e.u > e.v) throw DataError("edge endpoints must be ordered");
      if (e.v >= num_nodes_) throw DataError("edge endpoint " + std::to_string(e.v) + " out of range");
    }
    std::sort(layer.begin(), layer.end());
    layer.erase(std::unique(layer.begin(), layer.end()), layer.end());
  }
  if (labels_.empty()) {
    labels_.reserve(num_nodes_);
    for (std::size_t i = 0; i < num_nodes_; ++i) labels_.push_back(std::to_string(i + 1));
  } else if (labels_.size() != num_nodes_) {
    throw DataError("node label count does not match node count");
  }
}

std::size_t MultiplexNetwork::total_edges() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += l.size();
  return n;
}

bool MultiplexNetwork::has_edge(std::size_t layer, NodeId a, NodeId b) const {
  return a != b && contains(layers_.at(layer), make_edge(a, b));
}

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

template <class T>
bool parse_number(std::string_view s, T& out) {
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

struct RawRecord {
  std::size_t layer;
  std::string src;
  std::string dst;
};

DataError line_error(std::size_t line_no, const std::string& what) {
  return DataError("line " + std::to_string(line_no) + ": " + what);
}

}  // namespace

LoadResult parse_edge_list(std::istream& in, const LoadOptions& opts) {
  std::vector<RawRecord> records;
  std::size_t self_loops = 0;
  std::size_t max_layer = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view(line);
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    const auto tok = split_ws(view);
    if (tok.empty()) continue;
    if (tok.size() < 3 || tok.size() > 4) {
      throw line_error(line_no, "expected 'layer src dst [weight]', got " + std::to_string(tok.size()) + " fields");
    }
    std::size_t layer = 0;
    if (!parse_number(tok[0], layer)) throw line_error(line_no, "bad layer index '" + std::string(tok[0]) + "'");
    if (layer == 0) throw line_error(line_no, "layer indices are 1-based");
    if (opts.max_layer && layer > *opts.max_layer) {
      throw line_error(line_no, "layer " + std::to_string(layer) + " exceeds declared maximum " +
                                    std::to_string(*opts.max_layer));
    }
    if (tok.size() == 4) {
      double w = 0.0;
      if (!parse_number(tok[3], w)) throw line_error(line_no, "bad weight '" + std::string(tok[3]) + "'");
    }
    if (tok[1] == tok[2]) {
      ++self_loops;
      continue;
    }
    max_layer = std::max(max_layer, layer);
    records.push_back({layer, std::string(tok[1]), std::string(tok[2])});
  }
  const std::size_t num_layers = opts.max_layer ? *opts.max_layer : max_layer;

  std::vector<std::string> labels;
  for (const auto& r : records) {
    labels.push_back(r.src);
    labels.push_back(r.dst);
  }
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  const bool numeric = std::all_of(labels.begin(), labels.end(), [](const std::string& s) {
    long long v = 0;
    return parse_number(std::string_view(s), v);
  });
  if (numeric) {
    std::sort(labels.begin(), labels.end(), [](const std::string& a, const std::string& b) {
      return std::stoll(a) < std::stoll(b);
    });
  }
  std::unordered_map<std::string, NodeId> id_of;
  for (std::size_t i = 0; i < labels.size(); ++i) id_of.emplace(labels[i], static_cast<NodeId>(i));

  std::vector<std::tuple<std::size_t, NodeId, NodeId>> directed;
  std::vector<EdgeList> layers(num_layers);
  for (const auto& r : records) {
    const NodeId a = id_of.at(r.src);
    const NodeId b = id_of.at(r.dst);
    directed.emplace_back(r.layer, a, b);
    layers[r.layer - 1].push_back(make_edge(a, b));
  }
  std::sort(directed.begin(), directed.end());
  const std::size_t distinct =
      static_cast<std::size_t>(std::unique(directed.begin(), directed.end()) - directed.begin());

  const std::size_t num_nodes = labels.size();
  return LoadResult{MultiplexNetwork(num_nodes, std::move(layers), std::move(labels)), distinct, self_loops};
}

LoadResult load_edge_list(const std::filesystem::path& path, const LoadOptions& opts) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open edge list '" + path.string() + "'");
  try {
    return parse_edge_list(in, opts);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_edge_list(std::ostream& out, const MultiplexNetwork& net) {
  out << "# layer src dst\n";
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    for (const Edge& e : net.layer(l)) {
      out << (l + 1) << ' ' << net.node_label(e.u) << ' ' << net.node_label(e.v) << '\n';
    }
  }
}

void save_edge_list(const std::filesystem::path& path, const MultiplexNetwork& net) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  write_edge_list(out, net);
  if (!out) throw DataError("write failed for '" + path.string() + "'");
}

std::size_t retained_edge_count(std::size_t base_size, double similarity) {
  const double exact = similarity * static_cast<double>(base_size);
  const double nearest = std::round(exact);
  if (std::abs(exact - nearest) < 1e-9 * std::max(1.0, exact)) return static_cast<std::size_t>(nearest);
  return static_cast<std::size_t>(std::ceil(exact));
}

// k distinct items drawn uniformly from pool (partial Fisher-Yates).
static EdgeList draw_without_replacement(EdgeList pool, std::size_t k, Rng& rng) {
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + rng.below(pool.size() - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  return pool;
}

EdgeList similar_layer(const EdgeList& base, std::size_t num_nodes, double similarity, Rng& rng) {
  if (base.empty()) throw DataError("similar_layer needs a nonempty base layer");
  if (!(similarity >= 0.0 && similarity <= 1.0)) throw DataError("similarity must lie in [0, 1]");
  const std::size_t keep = retained_edge_count(base.size(), similarity);
  const std::size_t fresh = base.size() - keep;
  EdgeList out = draw_without_replacement(base, keep, rng);
  if (fresh > 0) {
    EdgeList pool = non_edges(base, num_nodes);
    if (pool.size() < fresh) {
      throw DataError("not enough non-edges (" + std::to_string(pool.size()) + ") to add " +
                      std::to_string(fresh) + " new edges");
    }
    EdgeList added = draw_without_replacement(std::move(pool), fresh, rng);
    out.insert(out.end(), added.begin(), added.end());
  }
  std::sort(out.begin(), out.end());
  return out;
}

EdgeList planted_partition(std::size_t num_nodes, std::size_t communities, double p_in, double p_out, Rng& rng) {
  if (communities == 0) throw DataError("need at least one community");
  if (!(p_in >= 0.0 && p_in <= 1.0 && p_out >= 0.0 && p_out <= 1.0)) {
    throw DataError("edge probabilities must lie in [0, 1]");
  }
  EdgeList out;
  for (NodeId u = 0; u < num_nodes; ++u) {
    for (NodeId v = u + 1; v < num_nodes; ++v) {
      const double p = (u % communities) == (v % communities) ? p_in : p_out;
      if (rng.uniform() < p) out.push_back({u, v});
    }
  }
  return out;
}

SyntheticKind parse_synthetic_kind(std::string_view name) {
  if (name == "rand-internship") return SyntheticKind::RandInternship;
  if (name == "small-3-layers") return SyntheticKind::Small3Layers;
  throw DataError("unknown synthetic network '" + std::string(name) + "'");
}

std::string_view to_string(SyntheticKind kind) {
  return kind == SyntheticKind::RandInternship ? "rand-internship" : "small-3-layers";
}

std::span<const double> synthetic_similarities(SyntheticKind kind) {
  static constexpr double kRandInternship[] = {0.9, 0.1, 0.1, 0.05, 0.01};
  static constexpr double kSmall3Layers[] = {0.9, 0.1};
  if (kind == SyntheticKind::RandInternship) return kRandInternship;
  return kSmall3Layers;
}

MultiplexNetwork build_synthetic(SyntheticKind kind, const MultiplexNetwork& source, std::uint64_t seed) {
  const EdgeList& src = source.layer(0);
  if (src.empty()) throw DataError("source network has an empty first layer");

  std::vector<NodeId> touched;
  for (const Edge& e : src) {
    touched.push_back(e.u);
    touched.push_back(e.v);
  }
  std::sort(touched.begin(), touched.end());
  touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
  std::map<NodeId, NodeId> remap;
  std::vector<std::string> labels;
  for (NodeId old : touched) {
    remap.emplace(old, static_cast<NodeId>(labels.size()));
    labels.push_back(source.node_label(old));
  }
  EdgeList base;
  for (const Edge& e : src) base.push_back(make_edge(remap.at(e.u), remap.at(e.v)));
  std::sort(base.begin(), base.end());

  const std::size_t num_nodes = labels.size();
  std::vector<EdgeList> layers{base};
  const auto sims = synthetic_similarities(kind);
  for (std::size_t k = 0; k < sims.size(); ++k) {
    Rng rng(Rng::derive(seed, k + 1));
    layers.push_back(similar_layer(base, num_nodes, sims[k], rng));
  }
  return MultiplexNetwork(num_nodes, std::move(layers), std::move(labels));
}

EdgeList EdgeSplit::train_positives(std::size_t layer, std::size_t fold) const {
  EdgeList out;
  const auto& folds = layers.at(layer).folds;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    if (f != fold) out.insert(out.end(), folds[f].begin(), folds[f].end());
  }
  std::sort(out.begin(), out.end());
  return out;
}

EdgeSplit make_split(const MultiplexNetwork& net, std::size_t num_folds, std::uint64_t trial_seed) {
  if (num_folds < 2) throw DataError("cross-validation needs at least 2 folds");
  EdgeSplit split;
  split.num_folds = num_folds;
  split.seed = trial_seed;
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    const EdgeList& edges = net.layer(l);
    if (edges.size() < num_folds) {
      throw DataError("layer " + std::to_string(l + 1) + " has " + std::to_string(edges.size()) +
                      " edges, fewer than " + std::to_string(num_folds) + " folds");
    }
    Rng rng(Rng::derive(trial_seed, l));
    EdgeList order = edges;
    rng.shuffle(std::span<Edge>(order));
    LayerSplit ls;
    ls.folds.resize(num_folds);
    for (std::size_t k = 0; k < order.size(); ++k) ls.folds[k % num_folds].push_back(order[k]);
    const EdgeList pool = non_edges(edges, net.num_nodes());
    for (auto& fold : ls.folds) {
      std::sort(fold.begin(), fold.end());
      if (pool.size() < fold.size()) {
        throw DataError("layer " + std::to_string(l + 1) + " has too few non-edges for negative sampling");
      }
      EdgeList neg = draw_without_replacement(pool, fold.size(), rng);
      std::sort(neg.begin(), neg.end());
      ls.negatives.push_back(std::move(neg));
    }
    split.layers.push_back(std::move(ls));
  }
  return split;
}

}  // namespace mplex
