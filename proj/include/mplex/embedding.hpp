#pragma once

// Per-layer node embeddings trained for link prediction, with one bandit per
// layer choosing which neighboring layer to borrow vectors from each epoch.

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "mplex/bandit.hpp"
#include "mplex/multiplex.hpp"
#include "mplex/rng.hpp"

namespace mplex {

enum class LossMetric { Euclidean, Cosine };
enum class SamplerKind { Bandit, Uniform };
// How a layer's node table is reduced to the single vector the losses compare.
enum class LayerPooling { Flatten, Mean };

LossMetric parse_metric(std::string_view name);
SamplerKind parse_sampler(std::string_view name);
LayerPooling parse_pooling(std::string_view name);
std::string_view to_string(LossMetric m);
std::string_view to_string(SamplerKind s);
std::string_view to_string(LayerPooling p);

// ||a - b||. Throws std::invalid_argument on a length mismatch.
double euclidean_loss(std::span<const double> a, std::span<const double> b);

// 1 - cos(a, b), in [0, 2]. A zero vector makes the cosine undefined; the
// loss is then 1 and *zero_vector_count (if given) is incremented.
double cosine_loss(std::span<const double> a, std::span<const double> b,
                   std::size_t* zero_vector_count = nullptr);

double layer_loss(LossMetric metric, std::span<const double> a, std::span<const double> b,
                  std::size_t* zero_vector_count = nullptr);

class EmbeddingTable {
 public:
  EmbeddingTable(std::size_t num_layers, std::size_t num_nodes, std::size_t dim);

  // Node vectors i.i.d. uniform in [-0.5/dim, 0.5/dim]. Every layer starts
  // from the same draw, so layers differ only through training.
  static EmbeddingTable random(std::size_t num_layers, std::size_t num_nodes, std::size_t dim,
                               std::uint64_t seed);

  std::size_t num_layers() const { return num_layers_; }
  std::size_t num_nodes() const { return num_nodes_; }
  std::size_t dim() const { return dim_; }

  std::span<double> node(std::size_t layer, NodeId u);
  std::span<const double> node(std::size_t layer, NodeId u) const;
  // All node vectors of a layer, back to back.
  std::span<double> layer_block(std::size_t layer);
  std::span<const double> layer_block(std::size_t layer) const;

  std::vector<double> layer_mean(std::size_t layer) const;
  std::vector<double> layer_embedding(std::size_t layer, LayerPooling pooling) const;

  bool all_finite() const;

 private:
  std::size_t num_layers_;
  std::size_t num_nodes_;
  std::size_t dim_;
  std::vector<double> data_;
};

struct TrainConfig {
  std::size_t dim = 32;
  double learning_rate = 0.05;
  double l2 = 0.0;
  std::size_t epochs = 200;
  std::size_t negatives = 1;
  LossMetric metric = LossMetric::Cosine;
  SamplerKind sampler = SamplerKind::Bandit;
  LayerPooling pooling = LayerPooling::Flatten;
  std::uint64_t seed = 1;

  void validate() const;
};

// Area under the ROC curve: P(pos > neg) + P(pos == neg) / 2.
double auc(std::span<const double> pos_scores, std::span<const double> neg_scores);

struct LayerMetrics {
  double train_acc = 0.0;
  double test_acc = 0.0;
  double auc = 0.0;
};

struct EvalReport {
  std::vector<LayerMetrics> layers;
  double mean_train_acc = 0.0;
  double mean_test_acc = 0.0;
  double mean_auc = 0.0;
};

struct LayerEpoch {
  std::size_t neighbor = 0;  // layer index borrowed from this epoch
  RoundTrace trace;          // arm = neighbor in this layer's arm numbering
  std::size_t zero_vector_losses = 0;
};

struct EpochResult {
  std::size_t epoch = 0;
  std::vector<LayerEpoch> layers;
  EvalReport eval;
};

// Arm a of layer i's bandit refers to layer a (a < i) or a + 1 (a >= i).
std::size_t neighbor_of_arm(std::size_t layer, std::size_t arm);

// One cross-validation fold of a multiplex network under training.
//
// Each epoch, every layer i draws a neighbor layer j from its sampler, then
// runs one pass of logistic link prediction over its training edges in which
// node u is represented by (U_i[u] + U_j[u]) / 2 and only U_i is updated.
// Neighbor vectors are read from a snapshot taken at the start of the epoch,
// so layers do not observe each other's updates within an epoch. After all
// layers are trained, the loss between layer i's and layer j's pooled
// embeddings is fed back to layer i's bandit (uniform sampling ignores it).
class MultiplexTrainer {
 public:
  MultiplexTrainer(const MultiplexNetwork& net, const EdgeSplit& split, std::size_t fold,
                   TrainConfig config);

  EpochResult train_epoch();
  // Same epoch with layers visited in the given order, which must be a
  // permutation of all layers. The result does not depend on the order.
  EpochResult train_epoch(std::span<const std::size_t> layer_order);

  // Scores use the same averaged representation as training, paired with the
  // neighbor each layer trained with most recently.
  EvalReport evaluate() const;

  std::size_t epochs_done() const { return epoch_; }
  const EmbeddingTable& tables() const { return tables_; }
  const TrainConfig& config() const { return config_; }
  const BanditState& bandit(std::size_t layer) const { return bandits_.at(layer); }
  // Current sampling distribution of a layer (uniform for the baseline).
  ProbDist sampling_distribution(std::size_t layer) const;

 private:
  struct LayerData {
    EdgeList train_pos;
    EdgeList test_pos;
    EdgeList test_neg;
    EdgeList neg_pool;   // pairs usable as training negatives
    EdgeList train_neg;  // fixed sample for train accuracy
  };

  void train_layer(std::size_t layer, std::size_t neighbor, const EmbeddingTable& snapshot, Rng& rng);
  std::vector<double> pooled(std::size_t layer) const;

  const MultiplexNetwork& net_;
  TrainConfig config_;
  EmbeddingTable tables_;
  std::vector<LayerData> data_;
  std::vector<BanditState> bandits_;
  std::vector<Rng> rngs_;
  std::vector<std::size_t> last_neighbor_;
  std::size_t epoch_ = 0;
};

}  // namespace mplex
