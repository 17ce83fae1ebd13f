#pragma once

// Parameter-free exponential-weights bandit (Exp3 with an adaptive learning
// rate driven by a power-of-two loss range and the cumulative variance of the
// importance-weighted loss estimates).

#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "mplex/rng.hpp"

namespace mplex {

class BanditError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A probability distribution over the arms of one bandit.
struct ProbDist {
  std::vector<double> probs;

  std::size_t size() const { return probs.size(); }
  double operator[](std::size_t i) const { return probs[i]; }
};

// Importance-weighted loss estimate: nonzero only at the sampled arm.
struct EstLossVector {
  std::vector<double> values;
  std::size_t sampled_arm = 0;
};

// Online-learning state of one bandit instance.
class BanditState {
 public:
  explicit BanditState(std::size_t num_arms);

  // Rebuilds a state from its raw fields (checkpoints, tests). Throws
  // BanditError when an invariant does not hold.
  static BanditState restore(std::size_t round, std::vector<double> cum_est_loss,
                             double loss_range, double cum_variance);

  std::size_t num_arms() const { return cum_est_loss_.size(); }
  // The round about to be played, starting at 1.
  std::size_t round() const { return round_; }
  std::span<const double> cum_est_loss() const { return cum_est_loss_; }
  double loss_range() const { return loss_range_; }
  double cum_variance() const { return cum_variance_; }

  // Folds one round's estimate into the state and advances the round counter.
  void update(const EstLossVector& est, const ProbDist& dist);

 private:
  BanditState() = default;

  std::size_t round_ = 1;
  std::vector<double> cum_est_loss_;
  double loss_range_ = 1.0;
  double cum_variance_ = 0.0;
};

// 0 on the first round, else min(1/E, sqrt(log n / V)) with the square root
// read as +inf while V is still 0.
double learning_rate(const BanditState& state);

// Normalized weights exp(-eta * (L_i - min L)) over all arms.
ProbDist exp_weights(std::span<const double> cum_loss, double eta);
ProbDist distribution(const BanditState& state);

// Inverse-CDF draw in arm-index order.
std::size_t sample(const ProbDist& dist, Rng& rng);

EstLossVector estimate_loss(const ProbDist& dist, std::size_t sampled_arm, double observed_loss);

// Largest pairwise gap of an estimate vector.
double loss_gap(const EstLossVector& est);

// Smallest power of two that is >= gap; gap must be positive and finite.
double power_of_two_ceil(double gap);

// Variance of the estimate under dist: <est^2, p> - <est, p>^2.
double estimate_variance(const EstLossVector& est, const ProbDist& dist);

struct RoundTrace {
  std::size_t round = 0;
  ProbDist dist;
  std::size_t arm = 0;
  double observed_loss = 0.0;
  double est_loss = 0.0;
  double eta = 0.0;
  double loss_range = 1.0;
  double cum_variance = 0.0;
  // Full loss vector when the caller knows it (simulations); empty otherwise.
  std::vector<double> true_losses;
};

using LossOracle = std::function<double(std::size_t arm)>;

// One full round: distribution, draw, observe the drawn arm only, estimate,
// update.
RoundTrace step(BanditState& state, Rng& rng, const LossOracle& loss_of_arm);

}  // namespace mplex
