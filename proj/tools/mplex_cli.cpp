// mplex: experiment driver for the multiplex layer-sampling bandit.
//
// Subcommands:
//   bandit-sim     simulate the bandit against a synthetic loss environment
//   train          bandit vs uniform layer sampling on a multiplex network
//   gen-synthetic  write a similar-layer synthetic network as an edge list
//   eval-trace     recompute regret and bound from saved round traces
//   inspect        print layer/node/edge counts of an edge-list file
//
// Exit codes: 0 success, 2 usage error, 3 data error.

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "mplex/embedding.hpp"
#include "mplex/environment.hpp"
#include "mplex/multiplex.hpp"
#include "mplex/regret.hpp"
#include "mplex/trace_io.hpp"

namespace fs = std::filesystem;
using namespace mplex;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

const char* kSchemas = R"(
CSV schemas:
  bandit-sim  OUT/traces/seed_<k>.csv
    round,arm,observed_loss,est_loss,eta,loss_range,cum_variance,p_0..p_{n-1},l_0..l_{n-1}
  bandit-sim  OUT/bound_report.csv (one row per seed, then a "mean" row), eval-trace
    label,n,T,regret,bound,V_T,M,V_hat
  train       OUT/epoch_metrics.csv (layers and layer numbers are 1-based)
    trial,fold,epoch,layer,sampler,metric,train_acc,test_acc,auc,sampled_arm,neighbor_layer,bandit_loss,p_neighbor
  train       OUT/summary.csv (final epoch, averaged over folds and layers)
    trial,sampler,metric,test_acc,auc
  Edge lists: one "layer src dst [weight]" record per line, layers 1-based, '#' comments.

Environment:
  MPLEX_BANDIT_THREADS  maximum worker threads (default: hardware concurrency)
)";

std::size_t thread_cap() {
  std::size_t cap = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("MPLEX_BANDIT_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1) {
      throw UsageError(std::string("MPLEX_BANDIT_THREADS must be a positive integer, got '") + env + "'");
    }
    cap = static_cast<std::size_t>(v);
  }
  return cap;
}

// Runs job(0..count-1) on up to thread_cap() workers. Jobs write to their own
// slots; the caller serializes output afterwards, so results do not depend on
// scheduling.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& job) {
  const std::size_t workers = std::min(thread_cap(), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          job(i);
        } catch (...) {
          std::lock_guard lock(error_mu);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

std::vector<double> parse_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      std::size_t pos = 0;
      out.push_back(std::stod(cell, &pos));
      if (pos != cell.size()) throw std::invalid_argument(cell);
    } catch (const std::exception&) {
      throw UsageError("bad number '" + cell + "' in " + what);
    }
  }
  if (out.empty()) throw UsageError(what + " is empty");
  return out;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

// ---------------------------------------------------------------- bandit-sim

struct SimArgs {
  std::string env = "iid-bernoulli";
  std::string means;
  double range = 100.0;
  std::vector<std::string> drift;
  std::size_t horizon = 1000;
  std::size_t seeds = 100;
  std::uint64_t seed = 0;
  std::string out;
  bool no_traces = false;
};

std::vector<DriftPoint> parse_drift(const std::vector<std::string>& specs, std::size_t horizon) {
  std::vector<DriftPoint> out;
  for (const auto& spec : specs) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos) throw UsageError("--drift expects ROUND=m1,m2,..., got '" + spec + "'");
    const std::string round = spec.substr(0, eq);
    DriftPoint p;
    if (round == "half") {
      p.round = horizon / 2 + 1;
    } else {
      try {
        std::size_t pos = 0;
        p.round = std::stoul(round, &pos);
        if (pos != round.size()) throw std::invalid_argument(round);
      } catch (const std::exception&) {
        throw UsageError("bad drift round '" + round + "'");
      }
    }
    p.means = parse_list(spec.substr(eq + 1), "--drift means");
    out.push_back(std::move(p));
  }
  return out;
}

Environment make_env(const SimArgs& a) {
  const EnvKind kind = parse_env_kind(a.env);
  const auto means = parse_list(a.means, "--means");
  switch (kind) {
    case EnvKind::IidBernoulli:
      return Environment::iid_bernoulli(means, a.seed);
    case EnvKind::IidScaled:
      return Environment::iid_scaled(means, a.range, a.seed);
    case EnvKind::Drifting:
      return Environment::drifting(means, parse_drift(a.drift, a.horizon), a.seed);
    case EnvKind::FromCallback:
      break;
  }
  throw UsageError("environment '" + a.env + "' cannot be built from flags");
}

int run_bandit_sim(const SimArgs& a) {
  if (a.horizon == 0) throw UsageError("--horizon must be >= 1");
  if (a.seeds == 0) throw UsageError("--seeds must be >= 1");
  Environment env = [&] {
    try {
      return make_env(a);
    } catch (const EnvironmentError& e) {
      throw UsageError(e.what());
    }
  }();

  std::vector<BoundReport> reports(a.seeds);
  const fs::path out(a.out);
  parallel_for(a.seeds, [&](std::size_t k) {
    const auto traces = simulate(env.with_seed(a.seed + k), a.horizon, a.seed + 1000 + k);
    double v_hat = traces.back().cum_variance;
    reports[k] = theorem_bound(FullInfoTrace::from_round_traces(traces), v_hat);
    if (!a.no_traces) {
      auto f = open_out(out / "traces" / ("seed_" + std::to_string(k) + ".csv"));
      write_trace_csv(f, traces);
    }
  });

  BoundReport mean;
  mean.num_arms = env.num_arms();
  mean.horizon = a.horizon;
  double v_hat = 0;
  for (const auto& r : reports) {
    mean.regret += r.regret;
    mean.bound += r.bound;
    mean.variance += r.variance;
    mean.max_gap += r.max_gap;
    v_hat += *r.estimated_variance;
  }
  const double s = static_cast<double>(a.seeds);
  mean.regret /= s;
  mean.bound /= s;
  mean.variance /= s;
  mean.max_gap /= s;
  mean.estimated_variance = v_hat / s;

  auto csv = open_out(out / "bound_report.csv");
  auto json = open_out(out / "bound_report.jsonl");
  csv << bound_report_csv_header() << '\n';
  for (std::size_t k = 0; k < reports.size(); ++k) {
    const std::string label = "seed_" + std::to_string(k);
    csv << bound_report_csv_row(label, reports[k]) << '\n';
    json << bound_report_json(label, reports[k]) << '\n';
  }
  csv << bound_report_csv_row("mean", mean) << '\n';
  json << bound_report_json("mean", mean) << '\n';

  std::cout << a.env << " n=" << mean.num_arms << " T=" << a.horizon << " seeds=" << a.seeds
            << " mean_regret=" << format_double(mean.regret) << " mean_bound=" << format_double(mean.bound)
            << (mean.regret <= mean.bound ? " within" : " EXCEEDS") << " bound\n";
  return 0;
}

// ---------------------------------------------------------------- train

struct TrainArgs {
  std::string dataset;
  std::string synthetic;
  std::string source;
  std::string metric = "cosine";
  std::string sampler = "both";
  std::string pooling = "flatten";
  std::size_t epochs = 200;
  std::size_t trials = 10;
  std::size_t folds = 5;
  std::size_t dim = 32;
  double lr = 0.05;
  double l2 = 0.0;
  std::size_t negatives = 1;
  std::uint64_t seed = 0;
  std::string out;
};

struct TrainJob {
  std::size_t trial, fold;
  SamplerKind sampler;
};

struct JobOutput {
  std::string rows;
  double test_acc = 0.0;
  double auc = 0.0;
};

int run_train(const TrainArgs& a) {
  if (a.dataset.empty() == a.synthetic.empty()) throw UsageError("give exactly one of --dataset or --synthetic");
  if (!a.synthetic.empty() && a.source.empty()) throw UsageError("--synthetic needs --source");
  if (a.trials == 0 || a.folds < 2) throw UsageError("--trials must be >= 1 and --folds >= 2");

  TrainConfig base;
  std::vector<SamplerKind> samplers;
  std::optional<SyntheticKind> kind;
  try {
    base.metric = parse_metric(a.metric);
    base.pooling = parse_pooling(a.pooling);
    if (a.sampler == "both") {
      samplers = {SamplerKind::Bandit, SamplerKind::Uniform};
    } else {
      samplers = {parse_sampler(a.sampler)};
    }
    if (!a.synthetic.empty()) kind = parse_synthetic_kind(a.synthetic);
    base.epochs = a.epochs;
    base.dim = a.dim;
    base.learning_rate = a.lr;
    base.l2 = a.l2;
    base.negatives = a.negatives;
    base.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  } catch (const DataError& e) {
    throw UsageError(e.what());
  }

  const MultiplexNetwork loaded = load_edge_list(kind ? a.source : a.dataset).network;
  std::vector<MultiplexNetwork> nets;
  std::vector<EdgeSplit> splits;
  for (std::size_t t = 0; t < a.trials; ++t) {
    const std::uint64_t trial_seed = Rng::derive(a.seed, t);
    nets.push_back(kind ? build_synthetic(*kind, loaded, trial_seed) : loaded);
    splits.push_back(make_split(nets.back(), a.folds, trial_seed));
  }
  std::cerr << "network: L=" << nets.front().num_layers() << " N=" << nets.front().num_nodes()
            << " edges=" << nets.front().total_edges() << " arms/bandit=" << nets.front().num_layers() - 1 << '\n';

  std::vector<TrainJob> jobs;
  for (SamplerKind s : samplers) {
    for (std::size_t t = 0; t < a.trials; ++t) {
      for (std::size_t f = 0; f < a.folds; ++f) jobs.push_back({t, f, s});
    }
  }
  std::vector<JobOutput> outputs(jobs.size());
  parallel_for(jobs.size(), [&](std::size_t j) {
    const TrainJob& job = jobs[j];
    TrainConfig cfg = base;
    cfg.sampler = job.sampler;
    cfg.seed = Rng::derive(Rng::derive(a.seed, job.trial), job.fold);
    MultiplexTrainer trainer(nets[job.trial], splits[job.trial], job.fold, cfg);
    std::string rows;
    EvalReport last;
    for (std::size_t e = 0; e < cfg.epochs; ++e) {
      const EpochResult res = trainer.train_epoch();
      rows += epoch_metrics_csv_rows(job.trial, job.fold, res, job.sampler, cfg.metric);
      last = res.eval;
    }
    outputs[j] = {std::move(rows), last.mean_test_acc, last.mean_auc};
  });

  const fs::path out(a.out);
  auto metrics = open_out(out / "epoch_metrics.csv");
  metrics << epoch_metrics_csv_header() << '\n';
  for (const auto& o : outputs) metrics << o.rows;

  auto summary = open_out(out / "summary.csv");
  summary << "trial,sampler,metric,test_acc,auc\n";
  std::vector<double> mean_auc(samplers.size(), 0.0);
  for (std::size_t si = 0; si < samplers.size(); ++si) {
    for (std::size_t t = 0; t < a.trials; ++t) {
      double acc = 0, auc_sum = 0;
      for (std::size_t f = 0; f < a.folds; ++f) {
        const JobOutput& o = outputs[(si * a.trials + t) * a.folds + f];
        acc += o.test_acc;
        auc_sum += o.auc;
      }
      const double k = static_cast<double>(a.folds);
      summary << t << ',' << to_string(samplers[si]) << ',' << a.metric << ',' << format_double(acc / k) << ','
              << format_double(auc_sum / k) << '\n';
      mean_auc[si] += auc_sum / k / static_cast<double>(a.trials);
    }
  }
  for (std::size_t si = 0; si < samplers.size(); ++si) {
    std::cout << to_string(samplers[si]) << " mean_test_auc=" << format_double(mean_auc[si]) << '\n';
  }
  return 0;
}

// ---------------------------------------------------------------- others

int run_gen_synthetic(const std::string& name, const std::string& source, std::uint64_t seed,
                      const std::string& out) {
  SyntheticKind kind;
  try {
    kind = parse_synthetic_kind(name);
  } catch (const DataError& e) {
    throw UsageError(e.what());
  }
  const MultiplexNetwork net = build_synthetic(kind, load_edge_list(source).network, seed);
  save_edge_list(out, net);
  if (!(load_edge_list(out).network == net)) throw DataError("round-trip check failed for " + out);
  std::cout << "wrote " << out << ": L=" << net.num_layers() << " N=" << net.num_nodes()
            << " edges=" << net.total_edges() << '\n';
  return 0;
}

int run_eval_trace(const std::vector<std::string>& files, bool json) {
  std::cout << (json ? "" : bound_report_csv_header() + "\n");
  for (const auto& file : files) {
    std::ifstream in(file);
    if (!in) throw DataError("cannot open " + file);
    std::vector<RoundTrace> traces;
    try {
      traces = read_trace_csv(in);
    } catch (const DataError& e) {
      throw DataError(file + ": " + e.what());
    }
    if (traces.empty()) throw DataError(file + ": no rounds");
    const BoundReport rep =
        theorem_bound(FullInfoTrace::from_round_traces(traces), traces.back().cum_variance);
    std::cout << (json ? bound_report_json(file, rep) : bound_report_csv_row(file, rep)) << '\n';
  }
  return 0;
}

int run_inspect(const std::string& path, std::optional<std::size_t> max_layer) {
  LoadOptions opts;
  opts.max_layer = max_layer;
  const LoadResult res = load_edge_list(path, opts);
  std::cout << "layers=" << res.layers() << " nodes=" << res.nodes() << " edge_records=" << res.edge_records
            << " undirected_edges=" << res.network.total_edges() << " self_loops_dropped=" << res.self_loops_dropped
            << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bandit layer sampling for multiplex network embeddings"};
  app.footer(kSchemas);
  app.require_subcommand(1);

  SimArgs sim;
  auto* sim_cmd = app.add_subcommand("bandit-sim", "Run the bandit against a loss environment over many seeds");
  sim_cmd->add_option("--env", sim.env, "iid-bernoulli | iid-scaled | drifting")->capture_default_str();
  sim_cmd->add_option("--means", sim.means, "Comma-separated per-arm Bernoulli means")->required();
  sim_cmd->add_option("--range", sim.range, "Loss scale for iid-scaled")->capture_default_str();
  sim_cmd->add_option("--drift", sim.drift, "ROUND=m1,m2,... change point (ROUND may be 'half' for T/2+1); repeatable");
  sim_cmd->add_option("-T,--horizon", sim.horizon, "Rounds per run")->capture_default_str();
  sim_cmd->add_option("--seeds", sim.seeds, "Number of seeded runs")->capture_default_str();
  sim_cmd->add_option("--seed", sim.seed, "Run k uses environment seed S+k and bandit seed S+1000+k")
      ->capture_default_str();
  sim_cmd->add_option("--out", sim.out, "Output directory")->required();
  sim_cmd->add_flag("--no-traces", sim.no_traces, "Skip per-seed trace files");

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "Train embeddings with bandit and/or uniform layer sampling");
  auto* ds = train_cmd->add_option("--dataset", tr.dataset, "Edge-list file of a multiplex network");
  auto* syn = train_cmd->add_option("--synthetic", tr.synthetic, "rand-internship | small-3-layers");
  ds->excludes(syn);
  train_cmd->add_option("--source", tr.source, "Edge list whose layer 1 seeds the synthetic network");
  train_cmd->add_option("--metric", tr.metric, "euclidean | cosine")->capture_default_str();
  train_cmd->add_option("--sampler", tr.sampler, "bandit | uniform | both")->capture_default_str();
  train_cmd->add_option("--pooling", tr.pooling, "flatten | mean")->capture_default_str();
  train_cmd->add_option("--epochs", tr.epochs)->capture_default_str();
  train_cmd->add_option("--trials", tr.trials)->capture_default_str();
  train_cmd->add_option("--folds", tr.folds)->capture_default_str();
  train_cmd->add_option("--dim", tr.dim)->capture_default_str();
  train_cmd->add_option("--lr", tr.lr)->capture_default_str();
  train_cmd->add_option("--l2", tr.l2)->capture_default_str();
  train_cmd->add_option("--negatives", tr.negatives, "Negatives per positive edge")->capture_default_str();
  train_cmd->add_option("--seed", tr.seed)->capture_default_str();
  train_cmd->add_option("--out", tr.out, "Output directory")->required();

  std::string gen_name, gen_source, gen_out;
  std::uint64_t gen_seed = 0;
  auto* gen_cmd = app.add_subcommand("gen-synthetic", "Write a similar-layer synthetic network");
  gen_cmd->add_option("--name", gen_name, "rand-internship | small-3-layers")->required();
  gen_cmd->add_option("--source", gen_source, "Edge list whose layer 1 is the base layer")->required();
  gen_cmd->add_option("--seed", gen_seed)->capture_default_str();
  gen_cmd->add_option("--out", gen_out, "Output edge-list file")->required();

  std::vector<std::string> trace_files;
  bool trace_json = false;
  auto* eval_cmd = app.add_subcommand("eval-trace", "Regret and bound report for saved round traces");
  eval_cmd->add_option("traces", trace_files, "Round trace CSV files")->required();
  eval_cmd->add_flag("--json", trace_json, "JSON lines instead of CSV");

  std::string inspect_path;
  std::optional<std::size_t> inspect_max_layer;
  auto* inspect_cmd = app.add_subcommand("inspect", "Layer, node and edge counts of an edge-list file");
  inspect_cmd->add_option("path", inspect_path)->required();
  inspect_cmd->add_option("--max-layer", inspect_max_layer, "Reject layer indices above this");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitUsage;
  }

  try {
    if (*sim_cmd) return run_bandit_sim(sim);
    if (*train_cmd) return run_train(tr);
    if (*gen_cmd) return run_gen_synthetic(gen_name, gen_source, gen_seed, gen_out);
    if (*eval_cmd) return run_eval_trace(trace_files, trace_json);
    if (*inspect_cmd) return run_inspect(inspect_path, inspect_max_layer);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}
