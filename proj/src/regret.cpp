#include "mplex/regret.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mplex {

FullInfoTrace::FullInfoTrace(std::vector<FullInfoRound> rounds) {
  for (auto& r : rounds) push_back(std::move(r));
}

FullInfoTrace FullInfoTrace::from_round_traces(std::span<const RoundTrace> traces) {
  FullInfoTrace out;
  for (const auto& t : traces) {
    if (t.true_losses.empty()) {
      throw std::invalid_argument("round " + std::to_string(t.round) + " has no true loss vector");
    }
    out.push_back({t.true_losses, t.dist.probs, t.arm});
  }
  return out;
}

void FullInfoTrace::check(const FullInfoRound& r) const {
  if (r.losses.empty()) throw std::invalid_argument("empty loss vector");
  if (num_arms_ != 0 && r.losses.size() != num_arms_) {
    throw std::invalid_argument("inconsistent arm count across rounds");
  }
  if (r.probs.size() != r.losses.size()) throw std::invalid_argument("distribution length mismatch");
  if (r.arm >= r.losses.size()) throw std::invalid_argument("sampled arm out of range");
  for (double l : r.losses) {
    if (!(l >= 0.0) || !std::isfinite(l)) throw std::invalid_argument("losses must be finite and >= 0");
  }
}

void FullInfoTrace::push_back(FullInfoRound round) {
  check(round);
  num_arms_ = round.losses.size();
  rounds_.push_back(std::move(round));
}

static void require_nonempty(const FullInfoTrace& trace) {
  if (trace.empty()) throw std::invalid_argument("empty trace");
}

BestArm best_fixed_arm(const FullInfoTrace& trace) {
  require_nonempty(trace);
  std::vector<double> cum(trace.num_arms(), 0.0);
  for (const auto& r : trace.rounds()) {
    for (std::size_t i = 0; i < cum.size(); ++i) cum[i] += r.losses[i];
  }
  const auto it = std::min_element(cum.begin(), cum.end());
  return {static_cast<std::size_t>(it - cum.begin()), *it};
}

static double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double expected_regret(const FullInfoTrace& trace) {
  const BestArm best = best_fixed_arm(trace);
  double played = 0.0;
  for (const auto& r : trace.rounds()) played += dot(r.probs, r.losses);
  return played - best.cum_loss;
}

double realized_regret(const FullInfoTrace& trace) {
  const BestArm best = best_fixed_arm(trace);
  double played = 0.0;
  for (const auto& r : trace.rounds()) played += r.losses[r.arm];
  return played - best.cum_loss;
}

double cumulative_variance(const FullInfoTrace& trace) {
  double v = 0.0;
  for (const auto& r : trace.rounds()) {
    const double mean = dot(r.probs, r.losses);
    for (std::size_t i = 0; i < r.losses.size(); ++i) {
      const double d = r.losses[i] - mean;
      v += r.probs[i] * d * d;
    }
  }
  return v;
}

double max_loss_gap(const FullInfoTrace& trace) {
  double m = 0.0;
  for (const auto& r : trace.rounds()) {
    const auto [lo, hi] = std::minmax_element(r.losses.begin(), r.losses.end());
    m = std::max(m, *hi - *lo);
  }
  return m;
}

double regret_bound(double variance, double max_gap, std::size_t num_arms) {
  const double log_n = std::log(static_cast<double>(num_arms));
  return 6.0 * std::sqrt(variance * log_n) + 10.0 * max_gap * log_n;
}

BoundReport theorem_bound(const FullInfoTrace& trace, std::optional<double> estimated_variance) {
  require_nonempty(trace);
  BoundReport rep;
  rep.regret = expected_regret(trace);
  rep.variance = cumulative_variance(trace);
  rep.max_gap = max_loss_gap(trace);
  rep.num_arms = trace.num_arms();
  rep.horizon = trace.horizon();
  rep.bound = regret_bound(rep.variance, rep.max_gap, rep.num_arms);
  rep.estimated_variance = estimated_variance;
  return rep;
}

}  // namespace mplex
