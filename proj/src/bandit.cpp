#include "mplex/bandit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace mplex {

namespace {

bool is_power_of_two_at_least_one(double x) {
  if (!(x >= 1.0) || !std::isfinite(x)) return false;
  int exp = 0;
  return std::frexp(x, &exp) == 0.5;
}

}  // namespace

BanditState::BanditState(std::size_t num_arms) : cum_est_loss_(num_arms, 0.0) {
  if (num_arms == 0) throw BanditError("bandit needs at least one arm");
}

BanditState BanditState::restore(std::size_t round, std::vector<double> cum_est_loss,
                                 double loss_range, double cum_variance) {
  if (cum_est_loss.empty()) throw BanditError("bandit needs at least one arm");
  if (round == 0) throw BanditError("round counter starts at 1");
  for (double l : cum_est_loss) {
    if (!(l >= 0.0) || !std::isfinite(l)) throw BanditError("cumulative loss must be finite and >= 0");
  }
  if (!is_power_of_two_at_least_one(loss_range)) {
    throw BanditError("loss range must be a power of two >= 1, got " + std::to_string(loss_range));
  }
  if (!(cum_variance >= 0.0) || !std::isfinite(cum_variance)) {
    throw BanditError("cumulative variance must be finite and >= 0");
  }
  BanditState s;
  s.round_ = round;
  s.cum_est_loss_ = std::move(cum_est_loss);
  s.loss_range_ = loss_range;
  s.cum_variance_ = cum_variance;
  return s;
}

void BanditState::update(const EstLossVector& est, const ProbDist& dist) {
  for (std::size_t i = 0; i < cum_est_loss_.size(); ++i) cum_est_loss_[i] += est.values[i];
  const double gap = loss_gap(est);
  // A zero-range round carries no range information.
  if (gap > 0.0) loss_range_ = std::max(loss_range_, power_of_two_ceil(gap));
  cum_variance_ += estimate_variance(est, dist);
  ++round_;
}

double learning_rate(const BanditState& state) {
  if (state.round() < 2) return 0.0;
  const double inv_range = 1.0 / state.loss_range();
  if (state.cum_variance() == 0.0) return inv_range;
  const double n = static_cast<double>(state.num_arms());
  return std::min(inv_range, std::sqrt(std::log(n) / state.cum_variance()));
}

ProbDist exp_weights(std::span<const double> cum_loss, double eta) {
  ProbDist out;
  out.probs.resize(cum_loss.size());
  const double lo = *std::min_element(cum_loss.begin(), cum_loss.end());
  double total = 0.0;
  for (std::size_t i = 0; i < cum_loss.size(); ++i) {
    // eta == 0 must give exactly uniform weights, even for huge losses.
    const double w = eta == 0.0 ? 1.0 : std::exp(-eta * (cum_loss[i] - lo));
    out.probs[i] = w;
    total += w;
  }
  // total >= 1: the minimizing arm has weight exactly 1.
  for (double& p : out.probs) p /= total;
  return out;
}

ProbDist distribution(const BanditState& state) {
  return exp_weights(state.cum_est_loss(), learning_rate(state));
}

std::size_t sample(const ProbDist& dist, Rng& rng) {
  const double u = rng.uniform();
  double cum = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    if (dist[i] <= 0.0) continue;
    cum += dist[i];
    last_positive = i;
    if (u < cum) return i;
  }
  // Rounding left the total just under u.
  return last_positive;
}

EstLossVector estimate_loss(const ProbDist& dist, std::size_t sampled_arm, double observed_loss) {
  if (sampled_arm >= dist.size()) throw BanditError("sampled arm out of range");
  if (!(observed_loss >= 0.0) || !std::isfinite(observed_loss)) {
    throw BanditError("observed loss must be finite and >= 0, got " + std::to_string(observed_loss));
  }
  const double p = dist[sampled_arm];
  if (!(p > 0.0)) throw BanditError("sampled arm has zero probability");
  EstLossVector est;
  est.values.assign(dist.size(), 0.0);
  est.values[sampled_arm] = observed_loss / p;
  est.sampled_arm = sampled_arm;
  return est;
}

double loss_gap(const EstLossVector& est) {
  const auto [lo, hi] = std::minmax_element(est.values.begin(), est.values.end());
  return *hi - *lo;
}

double power_of_two_ceil(double gap) {
  int exp = 0;
  const double mant = std::frexp(gap, &exp);  // gap = mant * 2^exp, mant in [0.5, 1)
  const int k = mant == 0.5 ? exp - 1 : exp;
  return std::ldexp(1.0, k);
}

double estimate_variance(const EstLossVector& est, const ProbDist& dist) {
  // With a one-hot estimate x = l/p at the sampled arm:
  // <x^2, p> - <x, p>^2 = l^2/p - l^2 = l^2 (1 - p) / p.
  // This form is nonnegative in floating point and does not square l/p.
  const std::size_t a = est.sampled_arm;
  const bool one_hot = std::all_of(est.values.begin(), est.values.end(), [&](double x) {
    return x == 0.0 || &x == &est.values[a];
  });
  if (one_hot) {
    const double p = dist[a];
    const double l = est.values[a] * p;
    if (l == 0.0) return 0.0;
    return l * (l * ((1.0 - p) / p));
  }
  double mean = 0.0;
  for (std::size_t i = 0; i < est.values.size(); ++i) mean += dist[i] * est.values[i];
  double var = 0.0;
  for (std::size_t i = 0; i < est.values.size(); ++i) {
    const double d = est.values[i] - mean;
    var += dist[i] * d * d;
  }
  return var;
}

RoundTrace step(BanditState& state, Rng& rng, const LossOracle& loss_of_arm) {
  RoundTrace tr;
  tr.round = state.round();
  tr.eta = learning_rate(state);
  tr.dist = exp_weights(state.cum_est_loss(), tr.eta);
  tr.arm = sample(tr.dist, rng);
  tr.observed_loss = loss_of_arm(tr.arm);
  const EstLossVector est = estimate_loss(tr.dist, tr.arm, tr.observed_loss);
  tr.est_loss = est.values[tr.arm];
  state.update(est, tr.dist);
  tr.loss_range = state.loss_range();
  tr.cum_variance = state.cum_variance();
  return tr;
}

}  // namespace mplex
