#include "mplex/bandit.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

namespace mplex {
namespace {

TEST(LearningRate, FirstRoundIsZero) {
  BanditState s(4);
  EXPECT_EQ(learning_rate(s), 0.0);
  auto big = BanditState::restore(1, {5.0, 1.0, 0.0, 2.0}, 8.0, 3.0);
  EXPECT_EQ(learning_rate(big), 0.0);
}

TEST(LearningRate, ZeroVarianceFallsBackToInverseRange) {
  auto s = BanditState::restore(2, {0, 0, 0, 0}, 1.0, 0.0);
  EXPECT_EQ(learning_rate(s), 1.0);
  auto s4 = BanditState::restore(7, {0, 0, 0, 0}, 4.0, 0.0);
  EXPECT_EQ(learning_rate(s4), 0.25);
}

TEST(LearningRate, BothOperandsAgree) {
  // sqrt(log 4 / (4 log 4)) = 0.5 = 1/E.
  const double v = 4.0 * std::log(4.0);
  auto s = BanditState::restore(2, {0, 0, 0, 0}, 2.0, v);
  EXPECT_NEAR(learning_rate(s), 0.5, 1e-15);
  EXPECT_NEAR(std::sqrt(std::log(4.0) / v), 0.5, 1e-15);
}

TEST(LearningRate, VarianceTermWins) {
  auto s = BanditState::restore(3, {0, 0}, 1.0, 100.0);
  EXPECT_DOUBLE_EQ(learning_rate(s), std::sqrt(std::log(2.0) / 100.0));
}

TEST(Distribution, FirstRoundUniform) {
  BanditState s(5);
  const auto d = distribution(s);
  for (double p : d.probs) EXPECT_EQ(p, 0.2);
}

TEST(Distribution, HandEvaluatedTwoArms) {
  const std::vector<double> L{0.0, std::log(3.0)};
  const auto d = exp_weights(L, 1.0);
  EXPECT_NEAR(d[0], 0.75, 1e-15);
  EXPECT_NEAR(d[1], 0.25, 1e-15);
}

TEST(Distribution, ShiftInvariant) {
  for (double c : {0.0, 1.0, 17.5, 1e6}) {
    const std::vector<double> L{c, c + std::log(3.0)};
    const auto d = exp_weights(L, 1.0);
    EXPECT_NEAR(d[0], 0.75, 1e-9) << "c=" << c;
    EXPECT_NEAR(d[1], 0.25, 1e-9) << "c=" << c;
  }
}

TEST(Distribution, LowerLossGetsMoreMass) {
  const std::vector<double> L{3.0, 1.0, 2.0};
  const auto d = exp_weights(L, 0.5);
  EXPECT_GT(d[1], d[2]);
  EXPECT_GT(d[2], d[0]);
}

TEST(Distribution, LargeCumulativeLossesStayNormalized) {
  const std::vector<double> L{1e12, 1e12 + 3.0, 1e12 + 1e9};
  const auto d = exp_weights(L, 0.01);
  EXPECT_NEAR(std::accumulate(d.probs.begin(), d.probs.end(), 0.0), 1.0, 1e-12);
  EXPECT_GT(d[0], 0.0);
  EXPECT_GT(d[1], 0.0);
}

TEST(Sample, DegenerateDistribution) {
  const ProbDist d{{1.0, 0.0}};
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    EXPECT_EQ(sample(d, rng), 0u);
  }
  const ProbDist d2{{0.0, 0.0, 1.0}};
  Rng rng(3);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(sample(d2, rng), 2u);
}

TEST(Sample, FairCoinFrequency) {
  const ProbDist d{{0.5, 0.5}};
  Rng rng(2024);
  const int draws = 100000;
  int zeros = 0;
  for (int i = 0; i < draws; ++i) zeros += sample(d, rng) == 0;
  EXPECT_NEAR(static_cast<double>(zeros) / draws, 0.5, 0.01);
}

TEST(Sample, MatchesProbabilitiesWithinThreeSigma) {
  const ProbDist d{{0.1, 0.2, 0.3, 0.4}};
  Rng rng(99);
  const int draws = 200000;
  std::vector<int> counts(4, 0);
  for (int i = 0; i < draws; ++i) ++counts[sample(d, rng)];
  for (std::size_t i = 0; i < 4; ++i) {
    const double sigma = std::sqrt(d[i] * (1 - d[i]) / draws);
    EXPECT_NEAR(static_cast<double>(counts[i]) / draws, d[i], 3 * sigma);
  }
}

TEST(Sample, Deterministic) {
  const ProbDist d{{0.3, 0.3, 0.4}};
  Rng a(7), b(7);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(sample(d, a), sample(d, b));
}

TEST(EstimateLoss, ImportanceWeighted) {
  const auto est = estimate_loss(ProbDist{{0.5, 0.5}}, 0, 1.0);
  EXPECT_EQ(est.values, (std::vector<double>{2.0, 0.0}));
  EXPECT_EQ(est.sampled_arm, 0u);
}

TEST(EstimateLoss, ZeroLoss) {
  const auto est = estimate_loss(ProbDist{{0.25, 0.75}}, 1, 0.0);
  EXPECT_EQ(est.values, (std::vector<double>{0.0, 0.0}));
}

TEST(EstimateLoss, RejectsBadInput) {
  EXPECT_THROW(estimate_loss(ProbDist{{0.5, 0.5}}, 0, -0.1), BanditError);
  EXPECT_THROW(estimate_loss(ProbDist{{1.0, 0.0}}, 1, 1.0), BanditError);
  EXPECT_THROW(estimate_loss(ProbDist{{0.5, 0.5}}, 2, 1.0), BanditError);
  EXPECT_THROW(estimate_loss(ProbDist{{0.5, 0.5}}, 0, std::nan("")), BanditError);
}

TEST(EstimateLoss, UnbiasedMonteCarlo) {
  const ProbDist d{{0.1, 0.6, 0.3}};
  const std::vector<double> loss{2.0, 0.5, 7.0};
  Rng rng(5);
  const int N = 100000;
  std::vector<double> sum(3, 0.0), sumsq(3, 0.0);
  for (int k = 0; k < N; ++k) {
    const std::size_t a = sample(d, rng);
    const auto est = estimate_loss(d, a, loss[a]);
    for (std::size_t i = 0; i < 3; ++i) {
      sum[i] += est.values[i];
      sumsq[i] += est.values[i] * est.values[i];
    }
  }
  for (std::size_t i = 0; i < 3; ++i) {
    const double mean = sum[i] / N;
    const double sd = std::sqrt(sumsq[i] / N - mean * mean);
    EXPECT_NEAR(mean, loss[i], 3 * sd / std::sqrt(N)) << "arm " << i;
  }
}

TEST(PowerOfTwoCeil, IntegerLogTable) {
  // Oracle: smallest 2^k >= x by doubling.
  auto oracle = [](double x) {
    double p = 1.0;
    while (p < x) p *= 2.0;
    while (p / 2.0 >= x) p /= 2.0;
    return p;
  };
  for (double x : {0.001, 0.3, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 4.0, 4.0001, 1023.0, 1024.0, 1025.0, 1e6}) {
    EXPECT_EQ(power_of_two_ceil(x), oracle(x)) << x;
  }
}

TEST(Update, ZeroLossRoundKeepsRangeAndVariance) {
  auto s = BanditState::restore(3, {1.0, 2.0}, 4.0, 2.5);
  const ProbDist d{{0.3, 0.7}};
  s.update(EstLossVector{{0.0, 0.0}, 1}, d);
  EXPECT_EQ(s.loss_range(), 4.0);
  EXPECT_EQ(s.cum_variance(), 2.5);
  EXPECT_EQ(s.round(), 4u);
  EXPECT_EQ(s.cum_est_loss()[0], 1.0);
}

TEST(Update, RangeRoundsUpToPowerOfTwo) {
  BanditState s(2);
  s.update(EstLossVector{{3.0, 0.0}, 0}, ProbDist{{0.5, 0.5}});
  EXPECT_EQ(s.loss_range(), 4.0);
  EXPECT_EQ(s.cum_est_loss()[0], 3.0);
}

TEST(Update, RangeNeverShrinks) {
  auto s = BanditState::restore(2, {0, 0}, 16.0, 0.0);
  s.update(EstLossVector{{3.0, 0.0}, 0}, ProbDist{{0.5, 0.5}});
  EXPECT_EQ(s.loss_range(), 16.0);
}

TEST(Update, VarianceIncrementHandEvaluated) {
  BanditState s(2);
  s.update(EstLossVector{{2.0, 0.0}, 0}, ProbDist{{0.5, 0.5}});
  // 0.5 * 4 - (0.5 * 2)^2 = 1
  EXPECT_DOUBLE_EQ(s.cum_variance(), 1.0);
}

TEST(EstimateVariance, MatchesDefinitionOnOneHot) {
  Rng rng(11);
  for (int k = 0; k < 200; ++k) {
    std::vector<double> p(4);
    double total = 0;
    for (double& x : p) total += (x = rng.uniform() + 0.01);
    for (double& x : p) x /= total;
    const ProbDist d{p};
    const std::size_t arm = rng.below(4);
    const auto est = estimate_loss(d, arm, 10.0 * rng.uniform());
    double m1 = 0, m2 = 0;
    for (std::size_t i = 0; i < 4; ++i) {
      m1 += p[i] * est.values[i];
      m2 += p[i] * est.values[i] * est.values[i];
    }
    EXPECT_NEAR(estimate_variance(est, d), m2 - m1 * m1, 1e-9 * std::max(1.0, m2));
    EXPECT_GE(estimate_variance(est, d), 0.0);
  }
}

TEST(EstimateVariance, GeneralVector) {
  const EstLossVector est{{1.0, 3.0}, 0};
  // p = (0.5, 0.5): mean 2, variance 1.
  EXPECT_DOUBLE_EQ(estimate_variance(est, ProbDist{{0.5, 0.5}}), 1.0);
}

TEST(Restore, ValidatesInvariants) {
  EXPECT_THROW(BanditState::restore(1, {0, 0}, 3.0, 0.0), BanditError);
  EXPECT_THROW(BanditState::restore(1, {0, 0}, 0.5, 0.0), BanditError);
  EXPECT_THROW(BanditState::restore(1, {-1, 0}, 1.0, 0.0), BanditError);
  EXPECT_THROW(BanditState::restore(1, {0, 0}, 1.0, -1.0), BanditError);
  EXPECT_THROW(BanditState::restore(0, {0, 0}, 1.0, 0.0), BanditError);
  EXPECT_THROW(BanditState::restore(1, {}, 1.0, 0.0), BanditError);
  EXPECT_NO_THROW(BanditState::restore(9, {0, 2}, 1024.0, 5.0));
  EXPECT_THROW(BanditState(0), BanditError);
}

TEST(Step, ConcentratesOnZeroLossArm) {
  // Threshold 0.9 checked against a separate reference loop over 20 seeds
  // before freezing; the smallest final mass observed there was well above it.
  for (std::uint64_t seed : {1u, 2u, 3u, 42u}) {
    BanditState s(2);
    Rng rng(seed);
    for (int t = 0; t < 1000; ++t) step(s, rng, [](std::size_t arm) { return arm == 0 ? 0.0 : 1.0; });
    EXPECT_GT(distribution(s)[0], 0.9) << "seed " << seed;
  }
}

TEST(Step, ZeroLossesStayUniform) {
  BanditState s(3);
  Rng rng(8);
  for (int t = 0; t < 500; ++t) {
    const auto tr = step(s, rng, [](std::size_t) { return 0.0; });
    for (double p : tr.dist.probs) ASSERT_DOUBLE_EQ(p, 1.0 / 3.0);
  }
  EXPECT_EQ(s.loss_range(), 1.0);
  EXPECT_EQ(s.cum_variance(), 0.0);
}

TEST(Step, DeterministicTraces) {
  auto run = [] {
    BanditState s(4);
    Rng rng(1234);
    std::vector<RoundTrace> out;
    for (int t = 0; t < 300; ++t) {
      out.push_back(step(s, rng, [t](std::size_t arm) { return static_cast<double>((arm * 7 + t) % 5); }));
    }
    return out;
  };
  const auto a = run(), b = run();
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].arm, b[i].arm);
    EXPECT_EQ(a[i].dist.probs, b[i].dist.probs);
    EXPECT_EQ(a[i].cum_variance, b[i].cum_variance);
  }
}

TEST(Step, TraceRecordsRoundState) {
  BanditState s(2);
  Rng rng(3);
  const auto t1 = step(s, rng, [](std::size_t) { return 5.0; });
  EXPECT_EQ(t1.round, 1u);
  EXPECT_EQ(t1.eta, 0.0);
  EXPECT_EQ(t1.observed_loss, 5.0);
  EXPECT_DOUBLE_EQ(t1.est_loss, 10.0);
  EXPECT_EQ(t1.loss_range, 16.0);
  const auto t2 = step(s, rng, [](std::size_t) { return 5.0; });
  EXPECT_EQ(t2.round, 2u);
  EXPECT_EQ(t2.eta, std::min(1.0 / 16.0, std::sqrt(std::log(2.0) / t1.cum_variance)));
}

TEST(Step, PropagatesNegativeLoss) {
  BanditState s(2);
  Rng rng(1);
  EXPECT_THROW(step(s, rng, [](std::size_t) { return -1.0; }), BanditError);
}

TEST(Step, SingleArm) {
  BanditState s(1);
  Rng rng(1);
  for (int t = 0; t < 20; ++t) {
    const auto tr = step(s, rng, [](std::size_t) { return 3.0; });
    EXPECT_EQ(tr.arm, 0u);
    EXPECT_EQ(tr.dist[0], 1.0);
  }
}

// Random rounds with losses up to 1e6 keep every state invariant.
TEST(Step, InvariantFuzz) {
  Rng gen(77);
  for (int run = 0; run < 20; ++run) {
    const std::size_t n = 2 + gen.below(9);
    BanditState s(n);
    Rng rng(gen.next());
    double prev_range = s.loss_range(), prev_var = s.cum_variance();
    const double scale = std::pow(10.0, static_cast<double>(gen.below(7)));
    for (int t = 0; t < 2000; ++t) {
      const auto tr = step(s, rng, [&](std::size_t) { return scale * gen.uniform(); });
      const double gap = tr.est_loss;
      ASSERT_TRUE(std::isfinite(s.loss_range()));
      ASSERT_TRUE(std::isfinite(s.cum_variance()));
      int e = 0;
      ASSERT_EQ(std::frexp(s.loss_range(), &e), 0.5);
      ASSERT_GE(s.loss_range(), prev_range);
      if (gap > 0) ASSERT_GE(s.loss_range(), gap);
      ASSERT_GE(s.cum_variance(), prev_var);
      ASSERT_NEAR(std::accumulate(tr.dist.probs.begin(), tr.dist.probs.end(), 0.0), 1.0, 1e-9);
      for (double l : s.cum_est_loss()) ASSERT_TRUE(std::isfinite(l) && l >= 0);
      prev_range = s.loss_range();
      prev_var = s.cum_variance();
    }
  }
}

}  // namespace
}  // namespace mplex
