#pragma once

// Full-information evaluation of a bandit run: regret against the best fixed
// arm in hindsight and the variance-dependent regret bound.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "mplex/bandit.hpp"

namespace mplex {

// One round as seen by a simulator that knows every arm's loss.
struct FullInfoRound {
  std::vector<double> losses;
  std::vector<double> probs;
  std::size_t arm = 0;
};

// Validated sequence of full-information rounds.
class FullInfoTrace {
 public:
  FullInfoTrace() = default;
  explicit FullInfoTrace(std::vector<FullInfoRound> rounds);

  // Builds from bandit round traces that carry true losses.
  static FullInfoTrace from_round_traces(std::span<const RoundTrace> traces);

  void push_back(FullInfoRound round);

  std::size_t num_arms() const { return num_arms_; }
  std::size_t horizon() const { return rounds_.size(); }
  bool empty() const { return rounds_.empty(); }
  std::span<const FullInfoRound> rounds() const { return rounds_; }

 private:
  void check(const FullInfoRound& r) const;

  std::size_t num_arms_ = 0;
  std::vector<FullInfoRound> rounds_;
};

struct BestArm {
  std::size_t arm = 0;
  double cum_loss = 0.0;
};

// Arm with the least cumulative true loss (lowest index on ties).
BestArm best_fixed_arm(const FullInfoTrace& trace);

// sum_t <p_t, l_t> - min_i sum_t l_{t,i}
double expected_regret(const FullInfoTrace& trace);

// Diagnostic: sum_t l_{t, i_t} - min_i sum_t l_{t,i}. Not the quantity the
// bound controls.
double realized_regret(const FullInfoTrace& trace);

// sum_t sum_i p_{t,i} (l_{t,i} - <l_t, p_t>)^2 on true losses.
double cumulative_variance(const FullInfoTrace& trace);

// max_t max_{i,j} |l_{t,i} - l_{t,j}|
double max_loss_gap(const FullInfoTrace& trace);

struct BoundReport {
  double regret = 0.0;
  double bound = 0.0;
  double variance = 0.0;  // V_T on true losses
  double max_gap = 0.0;   // M
  std::size_t num_arms = 0;
  std::size_t horizon = 0;
  // V_T of the bandit's own estimates, when the run recorded it.
  std::optional<double> estimated_variance;
};

// 6 sqrt(V log n) + 10 M log n
double regret_bound(double variance, double max_gap, std::size_t num_arms);

BoundReport theorem_bound(const FullInfoTrace& trace,
                          std::optional<double> estimated_variance = std::nullopt);

}  // namespace mplex
