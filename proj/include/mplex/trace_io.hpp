#pragma once

// CSV persistence for round traces, bound reports and epoch metrics.
//
// Round trace CSV (one file per run), header:
//   round,arm,observed_loss,est_loss,eta,loss_range,cum_variance,p_0..p_{n-1}[,l_0..l_{n-1}]
// The l_* columns hold the full loss vector and are present only when every
// round carries it.
//
// Bound report CSV header:
//   label,n,T,regret,bound,V_T,M,V_hat
//
// Epoch metrics CSV header:
//   trial,fold,epoch,layer,sampler,metric,train_acc,test_acc,auc,sampled_arm,neighbor_layer,bandit_loss,p_neighbor

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "mplex/bandit.hpp"
#include "mplex/embedding.hpp"
#include "mplex/regret.hpp"

namespace mplex {

void write_trace_csv(std::ostream& out, std::span<const RoundTrace> traces);
// Throws DataError on malformed input.
std::vector<RoundTrace> read_trace_csv(std::istream& in);

std::string bound_report_csv_header();
std::string bound_report_csv_row(const std::string& label, const BoundReport& rep);
std::string bound_report_json(const std::string& label, const BoundReport& rep);

std::string epoch_metrics_csv_header();
// One row per layer of the epoch. Layer numbers are written 1-based.
std::string epoch_metrics_csv_rows(std::size_t trial, std::size_t fold, const EpochResult& epoch,
                                   SamplerKind sampler, LossMetric metric);

// Shortest representation that reads back to the same double.
std::string format_double(double x);

}  // namespace mplex
