#pragma once

// Loss-generating adversaries for exercising a bandit without a graph.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mplex/bandit.hpp"

namespace mplex {

class EnvironmentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class EnvKind { IidBernoulli, IidScaled, Drifting, FromCallback };

std::string_view to_string(EnvKind kind);
EnvKind parse_env_kind(std::string_view name);

struct DriftPoint {
  std::size_t round = 0;  // first round where `means` applies
  std::vector<double> means;
};

// Losses for round t are a pure function of (environment, t):
// - IidBernoulli: l_i ~ Bernoulli(mean_i), values in {0, 1}
// - IidScaled:    l_i = range * Bernoulli(mean_i), values in {0, range}
// - Drifting:     Bernoulli with means switched at each drift point
// - FromCallback: whatever the callback returns (checked >= 0)
class Environment {
 public:
  using Callback = std::function<std::vector<double>(std::size_t round)>;

  static Environment iid_bernoulli(std::vector<double> means, std::uint64_t seed);
  static Environment iid_scaled(std::vector<double> means, double range, std::uint64_t seed);
  static Environment drifting(std::vector<double> means, std::vector<DriftPoint> schedule,
                              std::uint64_t seed);
  static Environment from_callback(std::size_t num_arms, Callback cb);

  EnvKind kind() const { return kind_; }
  std::size_t num_arms() const { return means_.size(); }
  double range() const { return range_; }
  std::uint64_t seed() const { return seed_; }
  const std::vector<double>& initial_means() const { return means_; }
  const std::vector<DriftPoint>& schedule() const { return schedule_; }

  // Same environment with a different seed.
  Environment with_seed(std::uint64_t seed) const;

  // Bernoulli means in force at round t.
  const std::vector<double>& means_at(std::size_t t) const;

  std::vector<double> losses(std::size_t t) const;

 private:
  Environment() = default;
  void validate() const;

  EnvKind kind_ = EnvKind::IidBernoulli;
  std::vector<double> means_;
  double range_ = 1.0;
  std::vector<DriftPoint> schedule_;
  std::uint64_t seed_ = 0;
  Callback callback_;
};

// Runs a fresh bandit against env for `horizon` rounds. Every returned trace
// carries the full loss vector of its round.
std::vector<RoundTrace> simulate(const Environment& env, std::size_t horizon, std::uint64_t bandit_seed);

}  // namespace mplex
