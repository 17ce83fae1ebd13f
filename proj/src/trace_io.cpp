#include "mplex/trace_io.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "mplex/multiplex.hpp"

namespace mplex {

std::string format_double(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, ptr);
}

void write_trace_csv(std::ostream& out, std::span<const RoundTrace> traces) {
  const std::size_t n = traces.empty() ? 0 : traces.front().dist.size();
  bool with_losses = !traces.empty();
  for (const auto& t : traces) {
    if (t.dist.size() != n) throw std::invalid_argument("traces mix different arm counts");
    with_losses = with_losses && t.true_losses.size() == n;
  }
  out << "round,arm,observed_loss,est_loss,eta,loss_range,cum_variance";
  for (std::size_t i = 0; i < n; ++i) out << ",p_" << i;
  if (with_losses) {
    for (std::size_t i = 0; i < n; ++i) out << ",l_" << i;
  }
  out << '\n';
  for (const auto& t : traces) {
    out << t.round << ',' << t.arm << ',' << format_double(t.observed_loss) << ',' << format_double(t.est_loss)
        << ',' << format_double(t.eta) << ',' << format_double(t.loss_range) << ','
        << format_double(t.cum_variance);
    for (double p : t.dist.probs) out << ',' << format_double(p);
    if (with_losses) {
      for (double l : t.true_losses) out << ',' << format_double(l);
    }
    out << '\n';
  }
}

namespace {

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

template <class T>
T parse_cell(const std::string& s, std::size_t line_no) {
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw DataError("trace line " + std::to_string(line_no) + ": bad value '" + s + "'");
  }
  return v;
}

}  // namespace

std::vector<RoundTrace> read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty trace file");
  const auto header = split_commas(line);
  constexpr std::size_t kFixed = 7;
  if (header.size() < kFixed + 1 || header[0] != "round" || header[6] != "cum_variance") {
    throw DataError("not a round trace CSV header");
  }
  std::size_t n = 0;
  while (kFixed + n < header.size() && header[kFixed + n].rfind("p_", 0) == 0) ++n;
  const std::size_t extra = header.size() - kFixed - n;
  if (extra != 0 && extra != n) throw DataError("trace header has a partial loss vector");
  const bool with_losses = extra == n;

  std::vector<RoundTrace> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split_commas(line);
    if (cells.size() != header.size()) {
      throw DataError("trace line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                      " fields, got " + std::to_string(cells.size()));
    }
    RoundTrace t;
    t.round = parse_cell<std::size_t>(cells[0], line_no);
    t.arm = parse_cell<std::size_t>(cells[1], line_no);
    t.observed_loss = parse_cell<double>(cells[2], line_no);
    t.est_loss = parse_cell<double>(cells[3], line_no);
    t.eta = parse_cell<double>(cells[4], line_no);
    t.loss_range = parse_cell<double>(cells[5], line_no);
    t.cum_variance = parse_cell<double>(cells[6], line_no);
    for (std::size_t i = 0; i < n; ++i) t.dist.probs.push_back(parse_cell<double>(cells[kFixed + i], line_no));
    if (with_losses) {
      for (std::size_t i = 0; i < n; ++i) t.true_losses.push_back(parse_cell<double>(cells[kFixed + n + i], line_no));
    }
    if (t.arm >= n) throw DataError("trace line " + std::to_string(line_no) + ": arm out of range");
    out.push_back(std::move(t));
  }
  return out;
}

std::string bound_report_csv_header() { return "label,n,T,regret,bound,V_T,M,V_hat"; }

std::string bound_report_csv_row(const std::string& label, const BoundReport& rep) {
  std::ostringstream os;
  os << label << ',' << rep.num_arms << ',' << rep.horizon << ',' << format_double(rep.regret) << ','
     << format_double(rep.bound) << ',' << format_double(rep.variance) << ',' << format_double(rep.max_gap) << ',';
  if (rep.estimated_variance) os << format_double(*rep.estimated_variance);
  return os.str();
}

std::string bound_report_json(const std::string& label, const BoundReport& rep) {
  nlohmann::json j = {{"label", label},           {"n", rep.num_arms},    {"T", rep.horizon},
                      {"regret", rep.regret},     {"bound", rep.bound},   {"V_T", rep.variance},
                      {"M", rep.max_gap}};
  j["V_hat"] = rep.estimated_variance ? nlohmann::json(*rep.estimated_variance) : nlohmann::json(nullptr);
  return j.dump();
}

std::string epoch_metrics_csv_header() {
  return "trial,fold,epoch,layer,sampler,metric,train_acc,test_acc,auc,sampled_arm,neighbor_layer,bandit_loss,"
         "p_neighbor";
}

std::string epoch_metrics_csv_rows(std::size_t trial, std::size_t fold, const EpochResult& epoch,
                                   SamplerKind sampler, LossMetric metric) {
  std::ostringstream os;
  for (std::size_t l = 0; l < epoch.layers.size(); ++l) {
    const LayerEpoch& le = epoch.layers[l];
    const LayerMetrics& m = epoch.eval.layers.at(l);
    os << trial << ',' << fold << ',' << epoch.epoch << ',' << (l + 1) << ',' << to_string(sampler) << ','
       << to_string(metric) << ',' << format_double(m.train_acc) << ',' << format_double(m.test_acc) << ','
       << format_double(m.auc) << ',' << le.trace.arm << ',' << (le.neighbor + 1) << ','
       << format_double(le.trace.observed_loss) << ',' << format_double(le.trace.dist[le.trace.arm]) << '\n';
  }
  return os.str();
}

}  // namespace mplex
