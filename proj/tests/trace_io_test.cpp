#include "mplex/trace_io.hpp"

#include <gtest/gtest.h>

#include <sstream>

#include <json.hpp>

#include "mplex/environment.hpp"
#include "mplex/multiplex.hpp"

namespace mplex {
namespace {

TEST(TraceCsv, RoundTripIsExact) {
  const auto env = Environment::iid_scaled({0.3, 0.5, 0.7}, 123.456, 2);
  const auto traces = simulate(env, 200, 8);
  std::stringstream ss;
  write_trace_csv(ss, traces);
  const auto back = read_trace_csv(ss);
  ASSERT_EQ(back.size(), traces.size());
  for (std::size_t t = 0; t < traces.size(); ++t) {
    EXPECT_EQ(back[t].round, traces[t].round);
    EXPECT_EQ(back[t].arm, traces[t].arm);
    EXPECT_EQ(back[t].observed_loss, traces[t].observed_loss);
    EXPECT_EQ(back[t].est_loss, traces[t].est_loss);
    EXPECT_EQ(back[t].eta, traces[t].eta);
    EXPECT_EQ(back[t].loss_range, traces[t].loss_range);
    EXPECT_EQ(back[t].cum_variance, traces[t].cum_variance);
    EXPECT_EQ(back[t].dist.probs, traces[t].dist.probs);
    EXPECT_EQ(back[t].true_losses, traces[t].true_losses);
  }
  EXPECT_EQ(theorem_bound(FullInfoTrace::from_round_traces(back)).regret,
            theorem_bound(FullInfoTrace::from_round_traces(traces)).regret);
}

TEST(TraceCsv, HeaderLayout) {
  const auto traces = simulate(Environment::iid_bernoulli({0.5, 0.5}, 1), 3, 1);
  std::stringstream ss;
  write_trace_csv(ss, traces);
  std::string header;
  std::getline(ss, header);
  EXPECT_EQ(header, "round,arm,observed_loss,est_loss,eta,loss_range,cum_variance,p_0,p_1,l_0,l_1");
}

TEST(TraceCsv, WithoutLossColumns) {
  RoundTrace t;
  t.round = 1;
  t.dist.probs = {0.25, 0.75};
  t.arm = 1;
  t.observed_loss = 2;
  std::stringstream ss;
  write_trace_csv(ss, std::vector<RoundTrace>{t});
  const auto back = read_trace_csv(ss);
  ASSERT_EQ(back.size(), 1u);
  EXPECT_TRUE(back[0].true_losses.empty());
  EXPECT_EQ(back[0].dist.probs, t.dist.probs);
}

TEST(TraceCsv, MalformedInput) {
  std::istringstream empty("");
  EXPECT_THROW(read_trace_csv(empty), DataError);
  std::istringstream wrong("a,b,c\n1,2,3\n");
  EXPECT_THROW(read_trace_csv(wrong), DataError);
  std::istringstream short_row("round,arm,observed_loss,est_loss,eta,loss_range,cum_variance,p_0,p_1\n1,0,1\n");
  EXPECT_THROW(read_trace_csv(short_row), DataError);
  std::istringstream bad_num("round,arm,observed_loss,est_loss,eta,loss_range,cum_variance,p_0,p_1\n1,0,x,0,0,1,0,0.5,0.5\n");
  EXPECT_THROW(read_trace_csv(bad_num), DataError);
  std::istringstream bad_arm("round,arm,observed_loss,est_loss,eta,loss_range,cum_variance,p_0,p_1\n1,2,1,0,0,1,0,0.5,0.5\n");
  EXPECT_THROW(read_trace_csv(bad_arm), DataError);
}

TEST(BoundReport, CsvAndJson) {
  BoundReport rep;
  rep.regret = 1.5;
  rep.bound = 10.25;
  rep.variance = 0.5;
  rep.max_gap = 1;
  rep.num_arms = 3;
  rep.horizon = 40;
  EXPECT_EQ(bound_report_csv_header(), "label,n,T,regret,bound,V_T,M,V_hat");
  EXPECT_EQ(bound_report_csv_row("x", rep), "x,3,40,1.5,10.25,0.5,1,");
  rep.estimated_variance = 2.0;
  EXPECT_EQ(bound_report_csv_row("x", rep), "x,3,40,1.5,10.25,0.5,1,2");
  const auto j = nlohmann::json::parse(bound_report_json("x", rep));
  EXPECT_EQ(j["n"], 3);
  EXPECT_EQ(j["T"], 40);
  EXPECT_EQ(j["bound"], 10.25);
  EXPECT_EQ(j["V_hat"], 2.0);
}

TEST(FormatDouble, ShortestRoundTrip) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(3.0), "3");
  const double x = 1.0 / 3.0;
  EXPECT_EQ(std::stod(format_double(x)), x);
}

TEST(EpochMetrics, OneRowPerLayer) {
  Rng rng(3);
  const EdgeList base = planted_partition(18, 2, 0.7, 0.05, rng);
  const auto net = build_synthetic(SyntheticKind::Small3Layers, MultiplexNetwork(18, {base, base}), 1);
  const auto split = make_split(net, 5, 1);
  MultiplexTrainer tr(net, split, 0, TrainConfig{});
  const auto res = tr.train_epoch();
  const std::string rows = epoch_metrics_csv_rows(2, 0, res, SamplerKind::Bandit, LossMetric::Cosine);
  std::istringstream in(rows);
  std::string line;
  std::size_t count = 0;
  const std::size_t cols = 13;
  while (std::getline(in, line)) {
    ++count;
    EXPECT_EQ(static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1, cols) << line;
    EXPECT_EQ(line.rfind("2,0,1," + std::to_string(count) + ",bandit,cosine,", 0), 0u) << line;
  }
  EXPECT_EQ(count, 3u);
  const std::string header = epoch_metrics_csv_header();
  EXPECT_EQ(static_cast<std::size_t>(std::count(header.begin(), header.end(), ',')) + 1, cols);
}

}  // namespace
}  // namespace mplex
