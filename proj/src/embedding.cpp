#include "mplex/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace mplex {

LossMetric parse_metric(std::string_view name) {
  if (name == "euclidean") return LossMetric::Euclidean;
  if (name == "cosine") return LossMetric::Cosine;
  throw std::invalid_argument("unknown metric '" + std::string(name) + "'");
}

SamplerKind parse_sampler(std::string_view name) {
  if (name == "bandit") return SamplerKind::Bandit;
  if (name == "uniform") return SamplerKind::Uniform;
  throw std::invalid_argument("unknown sampler '" + std::string(name) + "'");
}

LayerPooling parse_pooling(std::string_view name) {
  if (name == "flatten") return LayerPooling::Flatten;
  if (name == "mean") return LayerPooling::Mean;
  throw std::invalid_argument("unknown pooling '" + std::string(name) + "'");
}

std::string_view to_string(LossMetric m) { return m == LossMetric::Euclidean ? "euclidean" : "cosine"; }
std::string_view to_string(SamplerKind s) { return s == SamplerKind::Bandit ? "bandit" : "uniform"; }
std::string_view to_string(LayerPooling p) { return p == LayerPooling::Flatten ? "flatten" : "mean"; }

static void check_dims(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("embedding dimension mismatch: " + std::to_string(a.size()) + " vs " +
                                std::to_string(b.size()));
  }
}

double euclidean_loss(std::span<const double> a, std::span<const double> b) {
  check_dims(a, b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

double cosine_loss(std::span<const double> a, std::span<const double> b, std::size_t* zero_vector_count) {
  check_dims(a, b);
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  if (aa == 0.0 || bb == 0.0) {
    if (zero_vector_count) ++*zero_vector_count;
    return 1.0;
  }
  const double cos = ab / (std::sqrt(aa) * std::sqrt(bb));
  return std::clamp(1.0 - cos, 0.0, 2.0);
}

double layer_loss(LossMetric metric, std::span<const double> a, std::span<const double> b,
                  std::size_t* zero_vector_count) {
  return metric == LossMetric::Euclidean ? euclidean_loss(a, b) : cosine_loss(a, b, zero_vector_count);
}

EmbeddingTable::EmbeddingTable(std::size_t num_layers, std::size_t num_nodes, std::size_t dim)
    : num_layers_(num_layers), num_nodes_(num_nodes), dim_(dim), data_(num_layers * num_nodes * dim, 0.0) {
  if (dim == 0) throw std::invalid_argument("embedding dimension must be positive");
}

EmbeddingTable EmbeddingTable::random(std::size_t num_layers, std::size_t num_nodes, std::size_t dim,
                                      std::uint64_t seed) {
  EmbeddingTable t(num_layers, num_nodes, dim);
  Rng rng(seed);
  const double half = 0.5 / static_cast<double>(dim);
  std::vector<double> init(num_nodes * dim);
  for (double& x : init) x = (2.0 * rng.uniform() - 1.0) * half;
  for (std::size_t l = 0; l < num_layers; ++l) std::copy(init.begin(), init.end(), t.layer_block(l).begin());
  return t;
}

std::span<double> EmbeddingTable::node(std::size_t layer, NodeId u) {
  return {data_.data() + (layer * num_nodes_ + u) * dim_, dim_};
}

std::span<const double> EmbeddingTable::node(std::size_t layer, NodeId u) const {
  return {data_.data() + (layer * num_nodes_ + u) * dim_, dim_};
}

std::span<double> EmbeddingTable::layer_block(std::size_t layer) {
  return {data_.data() + layer * num_nodes_ * dim_, num_nodes_ * dim_};
}

std::span<const double> EmbeddingTable::layer_block(std::size_t layer) const {
  return {data_.data() + layer * num_nodes_ * dim_, num_nodes_ * dim_};
}

std::vector<double> EmbeddingTable::layer_mean(std::size_t layer) const {
  std::vector<double> mean(dim_, 0.0);
  for (NodeId u = 0; u < num_nodes_; ++u) {
    const auto v = node(layer, u);
    for (std::size_t k = 0; k < dim_; ++k) mean[k] += v[k];
  }
  for (double& x : mean) x /= static_cast<double>(num_nodes_);
  return mean;
}

std::vector<double> EmbeddingTable::layer_embedding(std::size_t layer, LayerPooling pooling) const {
  if (pooling == LayerPooling::Mean) return layer_mean(layer);
  const auto block = layer_block(layer);
  return {block.begin(), block.end()};
}

bool EmbeddingTable::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
}

void TrainConfig::validate() const {
  if (dim == 0) throw std::invalid_argument("dim must be positive");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning rate must be positive");
  if (!(l2 >= 0.0)) throw std::invalid_argument("l2 must be >= 0");
  if (epochs == 0) throw std::invalid_argument("epochs must be >= 1");
  if (negatives == 0) throw std::invalid_argument("negatives per positive must be >= 1");
}

double auc(std::span<const double> pos_scores, std::span<const double> neg_scores) {
  if (pos_scores.empty() || neg_scores.empty()) throw std::invalid_argument("AUC needs positives and negatives");
  // Mann-Whitney U with mid-ranks for ties.
  struct Item {
    double score;
    bool pos;
  };
  std::vector<Item> all;
  all.reserve(pos_scores.size() + neg_scores.size());
  for (double s : pos_scores) all.push_back({s, true});
  for (double s : neg_scores) all.push_back({s, false});
  std::sort(all.begin(), all.end(), [](const Item& a, const Item& b) { return a.score < b.score; });
  double pos_rank_sum = 0.0;
  for (std::size_t i = 0; i < all.size();) {
    std::size_t j = i;
    while (j < all.size() && all[j].score == all[i].score) ++j;
    const double mid = 0.5 * static_cast<double>(i + 1 + j);  // mean of ranks i+1..j
    for (std::size_t k = i; k < j; ++k) {
      if (all[k].pos) pos_rank_sum += mid;
    }
    i = j;
  }
  const double np = static_cast<double>(pos_scores.size());
  const double nn = static_cast<double>(neg_scores.size());
  return (pos_rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

std::size_t neighbor_of_arm(std::size_t layer, std::size_t arm) { return arm < layer ? arm : arm + 1; }

namespace {

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

EdgeList set_difference(const EdgeList& a, const EdgeList& b) {
  EdgeList out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

}  // namespace

MultiplexTrainer::MultiplexTrainer(const MultiplexNetwork& net, const EdgeSplit& split, std::size_t fold,
                                   TrainConfig config)
    : net_(net),
      config_(config),
      tables_(EmbeddingTable::random(net.num_layers(), net.num_nodes(), config.dim,
                                     Rng::derive(config.seed, 0x1417))) {
  config_.validate();
  const std::size_t L = net.num_layers();
  if (split.layers.size() != L) throw DataError("split does not match the network's layer count");
  if (fold >= split.num_folds) throw DataError("fold index out of range");
  for (std::size_t l = 0; l < L; ++l) {
    LayerData d;
    d.train_pos = split.train_positives(l, fold);
    d.test_pos = split.test_positives(l, fold);
    d.test_neg = split.test_negatives(l, fold);
    if (d.test_pos.empty() || d.test_neg.empty()) throw DataError("empty test fold");
    EdgeList held = d.test_pos;
    held.insert(held.end(), d.test_neg.begin(), d.test_neg.end());
    std::sort(held.begin(), held.end());
    d.neg_pool = set_difference(non_edges(net.layer(l), net.num_nodes()), held);
    if (d.neg_pool.empty()) throw DataError("layer " + std::to_string(l + 1) + " has no training negatives");
    Rng pick(Rng::derive(config_.seed, 0x7e57 + l));
    const std::size_t k = std::min(d.train_pos.size(), d.neg_pool.size());
    for (std::size_t i = 0; i < k; ++i) d.train_neg.push_back(d.neg_pool[pick.below(d.neg_pool.size())]);
    data_.push_back(std::move(d));
    bandits_.emplace_back(L - 1);
    rngs_.emplace_back(Rng::derive(config_.seed, l + 1));
    last_neighbor_.push_back(neighbor_of_arm(l, 0));
  }
}

ProbDist MultiplexTrainer::sampling_distribution(std::size_t layer) const {
  if (config_.sampler == SamplerKind::Bandit) return distribution(bandits_.at(layer));
  const std::size_t n = net_.num_layers() - 1;
  return ProbDist{std::vector<double>(n, 1.0 / static_cast<double>(n))};
}

std::vector<double> MultiplexTrainer::pooled(std::size_t layer) const {
  return tables_.layer_embedding(layer, config_.pooling);
}

void MultiplexTrainer::train_layer(std::size_t layer, std::size_t neighbor, const EmbeddingTable& snapshot,
                                   Rng& rng) {
  const LayerData& d = data_[layer];
  const std::size_t dim = config_.dim;
  const double lr = config_.learning_rate;
  const double decay = 1.0 - lr * config_.l2;
  std::vector<double> rx(dim), ry(dim);

  auto sgd = [&](Edge e, double label) {
    auto ux = tables_.node(layer, e.u);
    auto uy = tables_.node(layer, e.v);
    const auto sx = snapshot.node(neighbor, e.u);
    const auto sy = snapshot.node(neighbor, e.v);
    double score = 0.0;
    for (std::size_t k = 0; k < dim; ++k) {
      rx[k] = 0.5 * (ux[k] + sx[k]);
      ry[k] = 0.5 * (uy[k] + sy[k]);
      score += rx[k] * ry[k];
    }
    // d(log-likelihood)/d(score); d(score)/d(U_i[x]) = r(y) / 2.
    const double g = lr * (label - sigmoid(score)) * 0.5;
    for (std::size_t k = 0; k < dim; ++k) {
      ux[k] = decay * ux[k] + g * ry[k];
      uy[k] = decay * uy[k] + g * rx[k];
    }
  };

  std::vector<std::size_t> order(d.train_pos.size());
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(std::span<std::size_t>(order));
  for (std::size_t idx : order) {
    sgd(d.train_pos[idx], 1.0);
    for (std::size_t k = 0; k < config_.negatives; ++k) sgd(d.neg_pool[rng.below(d.neg_pool.size())], 0.0);
  }
}

EpochResult MultiplexTrainer::train_epoch() {
  std::vector<std::size_t> order(net_.num_layers());
  std::iota(order.begin(), order.end(), 0);
  return train_epoch(order);
}

EpochResult MultiplexTrainer::train_epoch(std::span<const std::size_t> layer_order) {
  {
    std::vector<std::size_t> check(layer_order.begin(), layer_order.end());
    std::sort(check.begin(), check.end());
    for (std::size_t i = 0; i < check.size(); ++i) {
      if (check[i] != i) throw std::invalid_argument("layer order is not a permutation");
    }
    if (check.size() != net_.num_layers()) throw std::invalid_argument("layer order is not a permutation");
  }
  const EmbeddingTable snapshot = tables_;
  EpochResult res;
  res.epoch = ++epoch_;
  res.layers.resize(net_.num_layers());

  struct Pending {
    ProbDist dist;
    std::size_t arm;
    double eta;
  };
  std::vector<Pending> pending(net_.num_layers());

  for (std::size_t layer : layer_order) {
    Rng& rng = rngs_.at(layer);
    Pending p;
    p.eta = config_.sampler == SamplerKind::Bandit ? learning_rate(bandits_[layer]) : 0.0;
    p.dist = sampling_distribution(layer);
    p.arm = sample(p.dist, rng);
    const std::size_t nb = neighbor_of_arm(layer, p.arm);
    train_layer(layer, nb, snapshot, rng);
    last_neighbor_[layer] = nb;
    pending[layer] = std::move(p);
  }

  for (std::size_t layer = 0; layer < net_.num_layers(); ++layer) {
    Pending& p = pending[layer];
    LayerEpoch& out = res.layers[layer];
    out.neighbor = neighbor_of_arm(layer, p.arm);
    const double loss = layer_loss(config_.metric, pooled(layer), pooled(out.neighbor), &out.zero_vector_losses);
    RoundTrace& tr = out.trace;
    tr.round = res.epoch;
    tr.arm = p.arm;
    tr.observed_loss = loss;
    tr.eta = p.eta;
    BanditState& b = bandits_[layer];
    if (config_.sampler == SamplerKind::Bandit) {
      const EstLossVector est = estimate_loss(p.dist, p.arm, loss);
      tr.est_loss = est.values[p.arm];
      b.update(est, p.dist);
    }
    tr.dist = std::move(p.dist);
    tr.loss_range = b.loss_range();
    tr.cum_variance = b.cum_variance();
  }
  res.eval = evaluate();
  return res;
}

EvalReport MultiplexTrainer::evaluate() const {
  EvalReport rep;
  const std::size_t dim = config_.dim;
  for (std::size_t layer = 0; layer < net_.num_layers(); ++layer) {
    const LayerData& d = data_[layer];
    const std::size_t nb = last_neighbor_[layer];
    auto score = [&](Edge e) {
      const auto ux = tables_.node(layer, e.u), uy = tables_.node(layer, e.v);
      const auto sx = tables_.node(nb, e.u), sy = tables_.node(nb, e.v);
      double s = 0.0;
      for (std::size_t k = 0; k < dim; ++k) s += 0.25 * (ux[k] + sx[k]) * (uy[k] + sy[k]);
      return sigmoid(s);
    };
    auto scores = [&](const EdgeList& edges) {
      std::vector<double> out;
      out.reserve(edges.size());
      for (Edge e : edges) out.push_back(score(e));
      return out;
    };
    auto accuracy = [](const std::vector<double>& pos, const std::vector<double>& neg) {
      std::size_t hit = 0;
      for (double s : pos) hit += s > 0.5;
      for (double s : neg) hit += s <= 0.5;
      return static_cast<double>(hit) / static_cast<double>(pos.size() + neg.size());
    };
    const auto tp = scores(d.test_pos), tn = scores(d.test_neg);
    const auto rp = scores(d.train_pos), rn = scores(d.train_neg);
    LayerMetrics m;
    m.test_acc = accuracy(tp, tn);
    m.train_acc = rn.empty() ? 0.0 : accuracy(rp, rn);
    m.auc = auc(tp, tn);
    rep.mean_train_acc += m.train_acc;
    rep.mean_test_acc += m.test_acc;
    rep.mean_auc += m.auc;
    rep.layers.push_back(m);
  }
  const double L = static_cast<double>(rep.layers.size());
  rep.mean_train_acc /= L;
  rep.mean_test_acc /= L;
  rep.mean_auc /= L;
  return rep;
}

}  // namespace mplex
