#include "mplex/environment.hpp"

#include <cmath>

#include "mplex/rng.hpp"

namespace mplex {

std::string_view to_string(EnvKind kind) {
  switch (kind) {
    case EnvKind::IidBernoulli: return "iid-bernoulli";
    case EnvKind::IidScaled: return "iid-scaled";
    case EnvKind::Drifting: return "drifting";
    case EnvKind::FromCallback: return "from-callback";
  }
  return "unknown";
}

EnvKind parse_env_kind(std::string_view name) {
  if (name == "iid-bernoulli") return EnvKind::IidBernoulli;
  if (name == "iid-scaled") return EnvKind::IidScaled;
  if (name == "drifting") return EnvKind::Drifting;
  if (name == "from-callback") return EnvKind::FromCallback;
  throw EnvironmentError("unknown environment kind '" + std::string(name) + "'");
}

static void check_means(const std::vector<double>& means) {
  if (means.empty()) throw EnvironmentError("environment needs at least one arm");
  for (double m : means) {
    if (!(m >= 0.0 && m <= 1.0)) {
      throw EnvironmentError("arm means must lie in [0, 1], got " + std::to_string(m));
    }
  }
}

void Environment::validate() const {
  if (kind_ == EnvKind::FromCallback) {
    if (means_.empty()) throw EnvironmentError("environment needs at least one arm");
    if (!callback_) throw EnvironmentError("callback environment without a callback");
    return;
  }
  check_means(means_);
  if (!(range_ > 0.0) || !std::isfinite(range_)) throw EnvironmentError("range must be positive");
  if (kind_ == EnvKind::Drifting) {
    if (schedule_.empty()) throw EnvironmentError("drifting environment needs a schedule");
    std::size_t prev = 1;
    for (const auto& dp : schedule_) {
      if (dp.round <= prev) throw EnvironmentError("drift rounds must be increasing and > 1");
      if (dp.means.size() != means_.size()) throw EnvironmentError("drift means have the wrong arm count");
      check_means(dp.means);
      prev = dp.round;
    }
  }
}

Environment Environment::iid_bernoulli(std::vector<double> means, std::uint64_t seed) {
  Environment env;
  env.kind_ = EnvKind::IidBernoulli;
  env.means_ = std::move(means);
  env.seed_ = seed;
  env.validate();
  return env;
}

Environment Environment::iid_scaled(std::vector<double> means, double range, std::uint64_t seed) {
  Environment env;
  env.kind_ = EnvKind::IidScaled;
  env.means_ = std::move(means);
  env.range_ = range;
  env.seed_ = seed;
  env.validate();
  return env;
}

Environment Environment::drifting(std::vector<double> means, std::vector<DriftPoint> schedule,
                                  std::uint64_t seed) {
  Environment env;
  env.kind_ = EnvKind::Drifting;
  env.means_ = std::move(means);
  env.schedule_ = std::move(schedule);
  env.seed_ = seed;
  env.validate();
  return env;
}

Environment Environment::from_callback(std::size_t num_arms, Callback cb) {
  Environment env;
  env.kind_ = EnvKind::FromCallback;
  env.means_.assign(num_arms, 0.0);
  env.callback_ = std::move(cb);
  env.validate();
  return env;
}

Environment Environment::with_seed(std::uint64_t seed) const {
  Environment env = *this;
  env.seed_ = seed;
  return env;
}

const std::vector<double>& Environment::means_at(std::size_t t) const {
  const std::vector<double>* cur = &means_;
  for (const auto& dp : schedule_) {
    if (t < dp.round) break;
    cur = &dp.means;
  }
  return *cur;
}

std::vector<double> Environment::losses(std::size_t t) const {
  if (t == 0) throw EnvironmentError("rounds start at 1");
  if (kind_ == EnvKind::FromCallback) {
    std::vector<double> out = callback_(t);
    if (out.size() != num_arms()) throw EnvironmentError("callback returned the wrong arm count");
    for (double l : out) {
      if (!(l >= 0.0) || !std::isfinite(l)) throw EnvironmentError("callback returned a negative loss");
    }
    return out;
  }
  Rng rng(Rng::derive(seed_, t));
  const auto& means = means_at(t);
  const double scale = kind_ == EnvKind::IidScaled ? range_ : 1.0;
  std::vector<double> out(means.size());
  for (std::size_t i = 0; i < means.size(); ++i) {
    out[i] = rng.uniform() < means[i] ? scale : 0.0;
  }
  return out;
}

std::vector<RoundTrace> simulate(const Environment& env, std::size_t horizon, std::uint64_t bandit_seed) {
  BanditState state(env.num_arms());
  Rng rng(bandit_seed);
  std::vector<RoundTrace> out;
  out.reserve(horizon);
  for (std::size_t t = 1; t <= horizon; ++t) {
    std::vector<double> losses = env.losses(t);
    RoundTrace tr = step(state, rng, [&](std::size_t arm) { return losses[arm]; });
    tr.true_losses = std::move(losses);
    out.push_back(std::move(tr));
  }
  return out;
}

}  // namespace mplex
