#include "itr/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ostream>
#include <sstream>
#include <thread>
#include <tuple>

#include "itr/evaluation.hpp"
#include "itr/federation.hpp"
#include "itr/nuisance.hpp"
#include "itr/rng.hpp"

namespace itr {

namespace {

std::string format_real(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::uint64_t rep_seed(std::uint64_t master, Scenario scenario, Design design,
                       int N, int n, int rep) {
  std::uint64_t s = master;
  s = CounterRng::hash_combine(s, static_cast<std::uint64_t>(scenario));
  s = CounterRng::hash_combine(s, 100 + static_cast<std::uint64_t>(design));
  s = CounterRng::hash_combine(s, static_cast<std::uint64_t>(N));
  s = CounterRng::hash_combine(s, static_cast<std::uint64_t>(n));
  s = CounterRng::hash_combine(s, static_cast<std::uint64_t>(rep));
  return s;
}

double pick(double override_value, double fallback) {
  return std::isnan(override_value) ? fallback : override_value;
}

struct RepTask {
  ExperimentCell cell;
  int rep;
};

std::vector<ResultRow> run_one_rep(const ExperimentCell& cell, int rep,
                                   const ExperimentConfig& config) {
  const std::uint64_t seed = rep_seed(config.master_seed, cell.scenario,
                                      cell.design, cell.N, cell.n, rep);
  const int M = std::max(1, cell.N / cell.n);

  ScenarioSpec train_spec;
  train_spec.scenario = cell.scenario;
  train_spec.design = cell.design;
  train_spec.N = cell.N;
  train_spec.sites = M;
  train_spec.seed = CounterRng::hash_combine(seed, 1);

  ScenarioSpec test_spec = train_spec;
  test_spec.N = config.test_size;
  test_spec.seed = CounterRng::hash_combine(seed, 2);

  const double h = pick(config.h_override, default_global_bandwidth(cell.N));
  const double b = std::max(
      pick(config.b_override, default_local_bandwidth(cell.n)), h);
  const double lambda = pick(config.lambda_override, default_lambda(cell.N));

  FitConfig fit;
  fit.rounds = config.rounds;
  fit.h = h;
  fit.b = b;
  fit.lambda = lambda;

  std::vector<ResultRow> rows;
  ResultRow base;
  base.scenario = to_string(cell.scenario);
  base.design = to_string(cell.design);
  base.N = cell.N;
  base.n = cell.n;
  base.rep = rep;

  Dataset train, test;
  std::vector<std::vector<int>> sites;
  try {
    train = gen_dataset(train_spec);
    test = gen_dataset(test_spec);
    CounterRng part_rng(CounterRng::hash_combine(seed, 3));
    sites = partition_sites(cell.N, M, part_rng);
  } catch (const std::exception& e) {
    for (Method m : config.methods) {
      ResultRow row = base;
      row.method = to_string(m);
      row.error = e.what();
      rows.push_back(std::move(row));
    }
    return rows;
  }

  // The DnC weighted sample is shared by FCE and DCE so the comparison is
  // paired on identical pseudo-outcomes, not just identical raw data.
  WeightedSample dnc_ws;
  std::string dnc_error;
  try {
    dnc_ws = build_weighted_sample(train, sites, NuisanceMode::Dnc);
  } catch (const std::exception& e) {
    dnc_error = e.what();
  }

  for (Method m : config.methods) {
    ResultRow row = base;
    row.method = to_string(m);
    const auto start = std::chrono::steady_clock::now();
    try {
      RuleCoefficients beta;
      switch (m) {
        case Method::Fce: {
          if (!dnc_error.empty()) throw NonConvergence(dnc_error);
          beta = fit_fce(dnc_ws, SmoothedLoss<>(fit.kernel, h), lambda, fit.gcd);
          break;
        }
        case Method::Dce: {
          if (!dnc_error.empty()) throw NonConvergence(dnc_error);
          auto [views, std_tf] = make_site_views(dnc_ws, sites);
          const FitReport report = fit_dce(views, fit);
          beta = std_tf.to_raw(report.final_beta);
          row.rounds = report.rounds_used;
          row.bytes = report.bytes_exchanged;
          break;
        }
        case Method::Initial: {
          // central-site-only pipeline: nuisances and fit both see site 0 only
          const WeightedSample central_ws =
              build_weighted_sample(train, {sites.front()},
                                    NuisanceMode::CentralOnly)
                  .subset(sites.front());
          beta = fit_initial(central_ws, fit);
          break;
        }
        case Method::Avg: {
          std::vector<WeightedSample> locals;
          locals.reserve(sites.size());
          for (const auto& site : sites)
            locals.push_back(build_weighted_sample(train, {site},
                                                   NuisanceMode::CentralOnly)
                                 .subset(site));
          beta = fit_avg(locals, fit);
          break;
        }
      }
      row.ccr = ccr(beta, test);
      row.value = empirical_value(beta, test);
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    row.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    rows.push_back(std::move(row));
  }
  return rows;
}

int resolve_threads(int requested) {
  int threads = requested > 0
                    ? requested
                    : static_cast<int>(std::thread::hardware_concurrency());
  if (threads < 1) threads = 1;
  if (const char* env = std::getenv("ITR_THREADS")) {
    const int cap = std::atoi(env);
    if (cap > 0) threads = std::min(threads, cap);
  }
  return threads;
}

}  // namespace

std::string to_string(Method m) {
  switch (m) {
    case Method::Fce: return "fce";
    case Method::Dce: return "dce";
    case Method::Avg: return "avg";
    case Method::Initial: return "initial";
  }
  throw std::invalid_argument("unknown method");
}

Method method_from_string(const std::string& s) {
  if (s == "fce") return Method::Fce;
  if (s == "dce") return Method::Dce;
  if (s == "avg") return Method::Avg;
  if (s == "initial") return Method::Initial;
  throw std::invalid_argument("method must be one of fce, dce, avg, initial");
}

std::vector<ResultRow> run_cell(const ExperimentCell& cell,
                                const ExperimentConfig& config) {
  std::vector<ResultRow> rows;
  for (int rep = 0; rep < config.reps; ++rep) {
    auto rep_rows = run_one_rep(cell, rep, config);
    rows.insert(rows.end(), rep_rows.begin(), rep_rows.end());
  }
  return rows;
}

std::vector<ResultRow> run_experiment(const ExperimentConfig& config) {
  std::vector<RepTask> tasks;
  for (Scenario s : config.scenarios)
    for (Design d : config.designs)
      for (int N : config.full_sizes)
        for (int n : config.local_sizes)
          for (int rep = 0; rep < config.reps; ++rep)
            tasks.push_back({ExperimentCell{s, d, N, n}, rep});

  std::vector<std::vector<ResultRow>> per_task(tasks.size());
  std::atomic<std::size_t> next{0};
  const int threads = std::min(
      resolve_threads(config.threads),
      static_cast<int>(std::max<std::size_t>(tasks.size(), 1)));

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      per_task[i] = run_one_rep(tasks[i].cell, tasks[i].rep, config);
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  std::vector<ResultRow> rows;
  for (auto& chunk : per_task)
    rows.insert(rows.end(), chunk.begin(), chunk.end());
  std::sort(rows.begin(), rows.end(),
            [](const ResultRow& a, const ResultRow& b) {
              return std::tie(a.scenario, a.design, a.N, a.n, a.method, a.rep) <
                     std::tie(b.scenario, b.design, b.N, b.n, b.method, b.rep);
            });
  return rows;
}

std::vector<SummaryRow> aggregate_table(const std::vector<ResultRow>& rows) {
  std::vector<SummaryRow> out;
  auto key_of = [](const ResultRow& r) {
    return std::tie(r.scenario, r.design, r.N, r.n, r.method);
  };

  std::size_t i = 0;
  while (i < rows.size()) {
    std::size_t j = i;
    while (j < rows.size() && key_of(rows[j]) == key_of(rows[i])) ++j;

    SummaryRow s;
    s.scenario = rows[i].scenario;
    s.design = rows[i].design;
    s.N = rows[i].N;
    s.n = rows[i].n;
    s.method = rows[i].method;

    double ccr_sum = 0.0, value_sum = 0.0;
    for (std::size_t k = i; k < j; ++k) {
      if (!rows[k].error.empty()) continue;
      ccr_sum += rows[k].ccr;
      value_sum += rows[k].value;
      ++s.count;
    }
    if (s.count > 0) {
      s.ccr_mean = ccr_sum / s.count;
      s.value_mean = value_sum / s.count;
    }
    if (s.count > 1) {
      double ccr_ss = 0.0, value_ss = 0.0;
      for (std::size_t k = i; k < j; ++k) {
        if (!rows[k].error.empty()) continue;
        ccr_ss += (rows[k].ccr - s.ccr_mean) * (rows[k].ccr - s.ccr_mean);
        value_ss +=
            (rows[k].value - s.value_mean) * (rows[k].value - s.value_mean);
      }
      s.ccr_sd = std::sqrt(ccr_ss / (s.count - 1));
      s.value_sd = std::sqrt(value_ss / (s.count - 1));
    }
    out.push_back(std::move(s));
    i = j;
  }
  return out;
}

void write_results_csv(std::ostream& os, const std::vector<ResultRow>& rows) {
  os << "scenario,design,N,n,method,rep,ccr,value,rounds,seconds,bytes,error\n";
  for (const auto& r : rows) {
    os << r.scenario << ',' << r.design << ',' << r.N << ',' << r.n << ','
       << r.method << ',' << r.rep << ',' << format_real(r.ccr) << ','
       << format_real(r.value) << ',' << r.rounds << ','
       // whole seconds only: the file must be byte-identical across reruns
       << static_cast<long long>(std::llround(r.seconds)) << ',' << r.bytes
       << ',' << r.error << '\n';
  }
}

void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows) {
  os << "scenario,design,N,n,method,ccr_mean,ccr_sd,value_mean,value_sd\n";
  for (const auto& r : rows) {
    os << r.scenario << ',' << r.design << ',' << r.N << ',' << r.n << ','
       << r.method << ',' << format_real(r.ccr_mean) << ','
       << format_real(r.ccr_sd) << ',' << format_real(r.value_mean) << ','
       << format_real(r.value_sd) << '\n';
  }
}

std::string format_summary(const std::vector<SummaryRow>& rows) {
  std::ostringstream os;
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%-9s %-6s %6s %6s %-8s %-14s %-14s\n",
                "scenario", "design", "N", "n", "method", "ccr", "value");
  os << buf;
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf),
                  "%-9s %-6s %6d %6d %-8s %.3f(%.3f)   %.3f(%.3f)\n",
                  r.scenario.c_str(), r.design.c_str(), r.N, r.n,
                  r.method.c_str(), r.ccr_mean, r.ccr_sd, r.value_mean,
                  r.value_sd);
    os << buf;
  }
  return os.str();
}

}  // namespace itr
