// Acceptance gate: runs every primary criterion end to end and prints one
// PASS/FAIL line per criterion. The process exits nonzero if any criterion
// fails; criteria are asserted exactly as specified, with no weakening.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "itr/evaluation.hpp"
#include "itr/experiments.hpp"
#include "itr/federation.hpp"
#include "itr/nuisance.hpp"
#include "itr/simgen.hpp"
#include "oracles.hpp"

using itr::Design;
using itr::KernelKind;
using itr::RuleCoefficients;
using itr::Scenario;
using itr::SmoothedLoss;
using itr::Vector;
using itr::WeightedSample;

namespace {

int g_failures = 0;

void report(int id, const std::string& name, bool pass,
            const std::string& detail, double seconds) {
  std::printf("[%2d] %-28s %s  (%s; %.1fs)\n", id, name.c_str(),
              pass ? "PASS" : "FAIL", detail.c_str(), seconds);
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

void run(int id, const std::string& name,
         const std::function<std::pair<bool, std::string>()>& criterion) {
  const auto start = std::chrono::steady_clock::now();
  bool pass = false;
  std::string detail;
  try {
    std::tie(pass, detail) = criterion();
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  report(id, name, pass, detail, seconds);
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", x);
  return buf;
}

const KernelKind kAllKernels[] = {KernelKind::Epanechnikov, KernelKind::Uniform,
                                  KernelKind::Gaussian};

WeightedSample random_weighted_sample(itr::CounterRng& rng, Eigen::Index n,
                                      Eigen::Index p) {
  WeightedSample ws;
  ws.covariates.resize(n, p);
  ws.weights.resize(n);
  ws.labels.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < p; ++j)
      ws.covariates(i, j) = rng.uniform(-1.0, 1.0);
    ws.weights[i] = rng.uniform(0.0, 2.0);
    ws.labels[i] =
        (ws.covariates(i, 0) + 0.5 * rng.normal() > 0.0) ? 1.0 : -1.0;
  }
  return ws;
}

WeightedSample scenario_weighted_sample(Scenario scenario, int N, int sites,
                                        std::uint64_t seed,
                                        std::vector<std::vector<int>>* out_sites) {
  itr::ScenarioSpec spec;
  spec.scenario = scenario;
  spec.design = Design::Observational;
  spec.N = N;
  spec.seed = seed;
  const itr::Dataset data = itr::gen_dataset(spec);
  itr::CounterRng rng(itr::CounterRng::hash_combine(seed, 3));
  auto partition = itr::partition_sites(N, sites, rng);
  const WeightedSample ws =
      itr::build_weighted_sample(data, partition, itr::NuisanceMode::Dnc);
  if (out_sites) *out_sites = std::move(partition);
  return ws;
}

// ---------------------------------------------------------------------------

std::pair<bool, std::string> criterion_smoothing() {
  itr::CounterRng rng(101);
  double worst_quad = 0.0, worst_fd = 0.0, worst_bias = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const KernelKind k = kAllKernels[rng.next_u64() % 3];
    const double h = rng.uniform(0.01, 2.0);
    const double t = rng.uniform(-3.0, 3.0);
    const SmoothedLoss<> sl(k, h);
    worst_quad = std::max(
        worst_quad, std::abs(sl.loss(t) - oracles::quad_smoothed_hinge(k, h, t)));
    const double step = 1e-5;
    worst_fd = std::max(
        worst_fd,
        std::abs((sl.loss(t + step) - sl.loss(t - step)) / (2 * step) -
                 sl.deriv(t)));
    worst_bias = std::max(
        worst_bias, std::abs(sl.loss(t) - std::max(1.0 - t, 0.0)) - h / 2);
  }
  const bool pass = worst_quad <= 1e-8 && worst_fd <= 1e-6 && worst_bias <= 0.0;
  return {pass, "quad err " + fmt(worst_quad) + ", fd err " + fmt(worst_fd) +
                    ", bias excess " + fmt(worst_bias)};
}

std::pair<bool, std::string> criterion_lipschitz() {
  bool constant_ok = true;
  for (double b : {0.05, 0.25, 0.5, 1.0, 1.7})
    constant_ok = constant_ok &&
                  std::abs(SmoothedLoss<>(KernelKind::Epanechnikov, b)
                               .lipschitz_constant() -
                           3.0 / (4.0 * b)) <= 1e-15;

  itr::CounterRng rng(102);
  double worst = -1e300;
  for (int i = 0; i < 10000; ++i) {
    const KernelKind k = kAllKernels[rng.next_u64() % 3];
    const double h = rng.uniform(0.01, 2.0);
    const SmoothedLoss<> sl(k, h);
    const double u1 = rng.uniform(-3.0, 3.0);
    const double u2 = rng.uniform(-3.0, 3.0);
    const double slack = sl.loss(u2) + sl.deriv(u2) * (u1 - u2) +
                         0.5 * sl.lipschitz_constant() * (u1 - u2) * (u1 - u2) -
                         sl.loss(u1);
    worst = std::max(worst, -slack);
  }
  const bool pass = constant_ok && worst <= 1e-10;
  return {pass, std::string("constant ") + (constant_ok ? "ok" : "WRONG") +
                    ", majorization violation " + fmt(worst)};
}

std::pair<bool, std::string> criterion_solver() {
  itr::CounterRng rng(103);
  double worst_gap = 0.0;
  bool monotone = true;
  for (int rep = 0; rep < 20; ++rep) {
    WeightedSample ws = random_weighted_sample(rng, 200, 5);
    ws.covariates = itr::standardize(ws.covariates).apply(ws.covariates);
    const SmoothedLoss<> sl(KernelKind::Epanechnikov, 0.5);
    const double lambda = 0.01;

    itr::GcdOptions opts;
    opts.max_sweeps = 5000;
    const RuleCoefficients sol = itr::solve_surrogate(
        ws, RuleCoefficients::zero(5), Vector::Zero(6), sl, lambda, opts);
    const auto ref = oracles::reference_minimize(
        [&](const Vector& v) {
          return itr::penalized_objective(ws, RuleCoefficients::from_stacked(v),
                                          sl, lambda);
        },
        [&](const Vector& v) {
          return itr::penalized_gradient(ws, RuleCoefficients::from_stacked(v),
                                         sl, lambda);
        },
        Vector::Zero(6));
    worst_gap = std::max(worst_gap, (sol.stacked() - ref.x).norm());

    if (rep < 3) {
      double previous = itr::penalized_objective(
          ws, RuleCoefficients::zero(5), sl, lambda);
      for (int sweeps = 1; sweeps <= 30; ++sweeps) {
        itr::GcdOptions partial;
        partial.max_sweeps = sweeps;
        const double value = itr::penalized_objective(
            ws,
            itr::solve_surrogate(ws, RuleCoefficients::zero(5),
                                 Vector::Zero(6), sl, lambda, partial),
            sl, lambda);
        if (value > previous + 1e-12) monotone = false;
        previous = value;
      }
    }
  }
  const bool pass = worst_gap <= 1e-4 && monotone;
  return {pass, "max |gcd - reference| " + fmt(worst_gap) +
                    (monotone ? ", monotone" : ", NOT monotone")};
}

std::pair<bool, std::string> criterion_single_site() {
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const WeightedSample ws =
        scenario_weighted_sample(Scenario::A, 500, 1, seed, nullptr);
    const double h = itr::default_global_bandwidth(500);
    const double lambda = itr::default_lambda(500);
    const RuleCoefficients fce =
        itr::fit_fce(ws, SmoothedLoss<>(KernelKind::Epanechnikov, h), lambda);

    std::vector<std::vector<int>> one_site(1);
    for (int i = 0; i < 500; ++i) one_site[0].push_back(i);
    auto [views, std_tf] = itr::make_site_views(ws, one_site);
    itr::FitConfig config;
    config.h = h;
    config.b = h;
    config.lambda = lambda;
    const RuleCoefficients dce =
        std_tf.to_raw(itr::fit_dce(views, config).final_beta);
    worst = std::max(worst, (dce.stacked() - fce.stacked()).norm());
  }
  return {worst <= 1e-6, "max deviation " + fmt(worst)};
}

std::pair<bool, std::string> criterion_contraction() {
  const int N = 3000, M = 6;
  std::vector<std::vector<double>> ratios(4);
  double worst_final = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    std::vector<std::vector<int>> partition;
    const WeightedSample ws =
        scenario_weighted_sample(Scenario::A, N, M, seed, &partition);
    auto [views, std_tf] = itr::make_site_views(ws, partition);

    itr::FitConfig config;
    config.h = itr::default_global_bandwidth(N);
    config.b = itr::default_local_bandwidth(N / M);
    config.lambda = itr::default_lambda(N);
    config.rounds = 10;
    config.round_tol = 0.0;  // observe all 10 rounds

    // pooled FCE solved in the same standardized coordinates as the protocol
    WeightedSample pooled_std = ws;
    pooled_std.covariates = std_tf.apply(ws.covariates);
    itr::GcdOptions tight;
    tight.max_sweeps = 20000;
    tight.tol = 1e-12;
    const RuleCoefficients fce = itr::solve_surrogate(
        pooled_std, RuleCoefficients::zero(ws.dim()), Vector::Zero(ws.dim() + 1),
        SmoothedLoss<>(config.kernel, config.h), config.lambda, tight);

    const itr::FitReport report = itr::fit_dce(views, config);
    std::vector<double> e;
    for (const auto& beta : report.trajectory)
      e.push_back((beta.stacked() - fce.stacked()).norm());
    for (int t = 1; t <= 4; ++t)
      if (e[static_cast<std::size_t>(t)] > 0.0)
        ratios[static_cast<std::size_t>(t) - 1].push_back(
            e[static_cast<std::size_t>(t) + 1] /
            e[static_cast<std::size_t>(t)]);
    worst_final = std::max(
        worst_final, e.back() / (1.0 + fce.stacked().norm()));
  }

  double worst_median = 0.0;
  for (auto& r : ratios) {
    std::sort(r.begin(), r.end());
    worst_median = std::max(worst_median, r[r.size() / 2]);
  }
  const bool pass = worst_median <= 0.9 && worst_final <= 1e-3;
  return {pass, "worst median ratio " + fmt(worst_median) +
                    ", worst relative final error " + fmt(worst_final)};
}

double mean_metric(const std::vector<itr::ResultRow>& rows,
                   const std::string& method, bool value) {
  double sum = 0.0;
  int count = 0;
  for (const auto& r : rows) {
    if (r.method != method || !r.error.empty()) continue;
    sum += value ? r.value : r.ccr;
    ++count;
  }
  return count > 0 ? sum / count : std::nan("");
}

std::pair<bool, std::string> criterion_table1() {
  itr::ExperimentConfig config;
  config.reps = 20;
  config.master_seed = 2024;

  config.methods = {itr::Method::Dce};
  const auto rows_a = itr::run_cell(
      {Scenario::A, Design::Observational, 1000, 200}, config);
  const double ccr_a = mean_metric(rows_a, "dce", false);

  config.methods = {itr::Method::Dce, itr::Method::Avg};
  const auto rows_b = itr::run_cell(
      {Scenario::B, Design::Observational, 5000, 500}, config);
  const double dce_b = mean_metric(rows_b, "dce", false);
  const double avg_b = mean_metric(rows_b, "avg", false);

  const auto rows_c = itr::run_cell(
      {Scenario::C, Design::Observational, 5000, 200}, config);
  const double dce_c = mean_metric(rows_c, "dce", false);
  const double avg_c = mean_metric(rows_c, "avg", false);

  const bool pass_a = ccr_a >= 0.97;
  const bool pass_b = dce_b >= 0.93 && dce_b - avg_b >= 0.08;
  const bool pass_c = dce_c - avg_c >= 0.01;
  return {pass_a && pass_b && pass_c,
          "a: dce " + fmt(ccr_a) + "; b: dce " + fmt(dce_b) + " avg " +
              fmt(avg_b) + "; c: dce " + fmt(dce_c) + " avg " + fmt(avg_c)};
}

std::pair<bool, std::string> criterion_table2() {
  itr::ExperimentConfig config;
  config.reps = 20;
  config.master_seed = 2025;
  config.methods = {itr::Method::Dce, itr::Method::Initial};

  const auto rows_a = itr::run_cell(
      {Scenario::A, Design::Observational, 1000, 200}, config);
  const double value_a = mean_metric(rows_a, "dce", true);

  const auto rows_d = itr::run_cell(
      {Scenario::D, Design::Observational, 1000, 200}, config);
  const double dce_d = mean_metric(rows_d, "dce", true);
  const double init_d = mean_metric(rows_d, "initial", true);

  const bool pass = value_a >= 3.85 && value_a <= 4.05 && dce_d >= init_d;
  return {pass, "a: dce value " + fmt(value_a) + "; d: dce " + fmt(dce_d) +
                    " vs initial " + fmt(init_d)};
}

std::pair<bool, std::string> criterion_double_robustness() {
  itr::ScenarioSpec spec;
  spec.scenario = Scenario::A;
  spec.design = Design::Observational;
  spec.N = 5000;
  spec.seed = 404;
  const itr::Dataset data = itr::gen_dataset(spec);
  std::vector<int> all;
  for (int i = 0; i < spec.N; ++i) all.push_back(i);

  auto mse_of = [&](const itr::PropensityFit& pf, const itr::OutcomeFit& of) {
    const Vector contrasts = itr::aipwe_contrasts(data, pf, of);
    return (contrasts - data.true_cte).squaredNorm() /
           static_cast<double>(spec.N);
  };

  // regime (i): outcome model correct, propensity intercept-only
  const itr::OutcomeFit correct_outcome = itr::fit_outcome_models(
      data.covariates, data.treatments, data.outcomes, all);
  const itr::PropensityFit intercept_only =
      itr::fit_logistic(itr::Matrix::Zero(spec.N, 0), data.treatments);
  itr::PropensityFit padded_intercept;
  padded_intercept.gamma = Vector::Zero(6);
  padded_intercept.gamma[0] = intercept_only.gamma[0];
  const double mse_i = mse_of(padded_intercept, correct_outcome);

  // regime (ii): outcome model forced to zero, propensity correctly specified
  const itr::PropensityFit pi_fit =
      itr::fit_logistic(data.covariates.leftCols(2), data.treatments);
  itr::PropensityFit correct_propensity;
  correct_propensity.gamma = Vector::Zero(6);
  correct_propensity.gamma.head(3) = pi_fit.gamma;
  itr::OutcomeFit zero_outcome;
  zero_outcome.eta0 = Vector::Zero(6);
  zero_outcome.eta1 = Vector::Zero(6);
  const double mse_ii = mse_of(correct_propensity, zero_outcome);

  const bool pass = mse_i <= 0.05 && mse_ii <= 0.05;
  return {pass, "mse (i) " + fmt(mse_i) + ", mse (ii) " + fmt(mse_ii)};
}

std::pair<bool, std::string> criterion_accounting() {
  itr::CounterRng rng(105);
  struct Config {
    int n, M, p, T;
  };
  const Config configs[] = {{60, 3, 2, 2}, {120, 4, 3, 5}, {90, 2, 5, 4}};
  bool pass = true;
  std::string detail;
  for (const Config& c : configs) {
    const WeightedSample ws = random_weighted_sample(rng, c.n, c.p);
    std::vector<std::vector<int>> partition(static_cast<std::size_t>(c.M));
    for (int i = 0; i < c.n; ++i)
      partition[static_cast<std::size_t>(i % c.M)].push_back(i);
    auto [views, std_tf] = itr::make_site_views(ws, partition);
    itr::FitConfig config;
    config.h = 0.3;
    config.b = 0.6;
    config.rounds = c.T;
    config.round_tol = 0.0;
    const itr::FitReport report = itr::fit_dce(views, config);

    int broadcasts = 0, grads = 0;
    bool payload_ok = true;
    for (const auto& msg : report.transcript) {
      payload_ok = payload_ok && msg.payload.size() == c.p + 1;
      (msg.kind == itr::RoundMessage::Kind::BroadcastBeta ? broadcasts : grads)++;
    }
    const std::size_t expected =
        static_cast<std::size_t>(c.T) * (c.M + 1) *
        (static_cast<std::size_t>(c.p + 1) * 8 + itr::kMessageHeaderBytes);
    const bool ok = broadcasts == c.T && grads == c.T * c.M && payload_ok &&
                    report.bytes_exchanged == expected;
    pass = pass && ok;
    if (!detail.empty()) detail += "; ";
    detail += "M=" + std::to_string(c.M) + (ok ? " ok" : " MISMATCH");
  }
  return {pass, detail};
}

std::pair<bool, std::string> criterion_determinism() {
#ifndef ITR_CLI_PATH
  return {false, "CLI path not wired into the build"};
#else
  const std::string config = "/tmp/itr_acceptance_config.json";
  {
    std::ofstream os(config);
    os << R"({"scenarios":["a"],"designs":["obs"],"N":[400],"n":[200],)"
       << R"("methods":["fce","dce"],"reps":2,"test_size":1000,)"
       << R"("master_seed":17})" << "\n";
  }
  auto run_once = [&](const std::string& tag) {
    const std::string results = "/tmp/itr_acceptance_results_" + tag + ".csv";
    const std::string summary = "/tmp/itr_acceptance_summary_" + tag + ".csv";
    const std::string cmd = std::string(ITR_CLI_PATH) + " experiment --config " +
                            config + " --out-results " + results +
                            " --out-summary " + summary + " > /dev/null 2>&1";
    if (std::system(cmd.c_str()) != 0) return std::string();
    std::ifstream r(results), s(summary);
    std::stringstream ss;
    ss << r.rdbuf() << "\n---\n" << s.rdbuf();
    return ss.str();
  };
  const std::string first = run_once("1");
  const std::string second = run_once("2");
  const bool pass = !first.empty() && first == second;
  return {pass, pass ? "CSVs byte-identical across runs"
                     : "runs differ or the CLI failed"};
#endif
}

}  // namespace

int main() {
  std::printf("acceptance criteria\n-------------------\n");
  run(1, "smoothing correctness", criterion_smoothing);
  run(2, "Lipschitz / majorization", criterion_lipschitz);
  run(3, "solver equivalence", criterion_solver);
  run(4, "single-site identity", criterion_single_site);
  run(5, "distributed contraction", criterion_contraction);
  run(6, "Table 1 reproduction", criterion_table1);
  run(7, "Table 2 reproduction", criterion_table2);
  run(8, "double robustness", criterion_double_robustness);
  run(9, "privacy / accounting", criterion_accounting);
  run(10, "experiment determinism", criterion_determinism);
  std::printf("-------------------\n%d of 10 criteria failed\n", g_failures);
  return g_failures == 0 ? 0 : 1;
}
