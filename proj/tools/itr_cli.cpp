// itr: linear individualized treatment rules from pooled or distributed data.
//
// Subcommands:
//   simulate    write a seeded synthetic dataset CSV (+ sidecar spec JSON)
//   fit         fit a rule (fce | dce | avg | initial) from a dataset CSV
//   eval        score a fitted rule on a test CSV (CCR + empirical value)
//   experiment  run a simulation grid from a JSON config, write CSV tables
//
// Exit codes: 0 ok, 2 invalid flags, 3 I/O failure, 4 solver produced
// non-finite coefficients, 5 degenerate nuisance fit, 6 empty agreement set.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <json.hpp>

#include "itr/csv.hpp"
#include "itr/evaluation.hpp"
#include "itr/experiments.hpp"
#include "itr/federation.hpp"
#include "itr/nuisance.hpp"
#include "itr/simgen.hpp"

using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;
constexpr int kExitNonFinite = 4;
constexpr int kExitDegenerate = 5;
constexpr int kExitEmptyAgreement = 6;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

double resolve_bandwidth(const std::string& flag, double fallback,
                         const char* name) {
  if (flag == "auto") return fallback;
  double v = 0.0;
  std::size_t consumed = 0;
  try {
    v = std::stod(flag, &consumed);
  } catch (const std::exception&) {
    consumed = std::string::npos;
  }
  if (consumed != flag.size() || !(v > 0.0))
    throw UsageError(std::string("--") + name + " must be 'auto' or a positive number");
  return v;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw itr::IoError("cannot open '" + path + "' for writing");
  os << text;
  if (!os) throw itr::IoError("failed writing '" + path + "'");
}

json vector_to_json(const itr::Vector& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

itr::Vector vector_from_json(const json& arr) {
  itr::Vector v(static_cast<Eigen::Index>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i) v[static_cast<Eigen::Index>(i)] = arr[i].get<double>();
  return v;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
  std::string scenario = "a";
  std::string design = "obs";
  int N = 1000;
  int sites = 5;
  std::uint64_t seed = 0;
  std::string out;
  bool allow_remainder = false;
};

int cmd_simulate(const SimulateArgs& args) {
  if (args.N < 1) throw UsageError("--N must be positive");
  if (args.sites < 1) throw UsageError("--sites must be positive");
  if (args.N % args.sites != 0 && !args.allow_remainder)
    throw UsageError(
        "--sites does not divide --N; pass --allow-remainder to spread the "
        "remainder one unit per leading site");

  itr::ScenarioSpec spec;
  spec.scenario = itr::scenario_from_string(args.scenario);
  spec.design = itr::design_from_string(args.design);
  spec.N = args.N;
  spec.sites = args.sites;
  spec.seed = args.seed;

  const itr::Dataset data = itr::gen_dataset(spec);
  itr::write_dataset_csv_file(args.out, data);

  json sidecar = {
      {"scenario", args.scenario}, {"design", args.design},
      {"N", args.N},               {"sites", args.sites},
      {"seed", args.seed},         {"p", spec.p},
      {"noise_sd", spec.noise_sd},
  };
  write_text_file(args.out + ".json", sidecar.dump(2) + "\n");
  std::cout << "wrote " << data.size() << " units to " << args.out << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// fit

struct FitArgs {
  std::string method = "fce";
  std::string data;
  int sites = 1;
  std::string h = "auto";
  std::string b = "auto";
  std::string lambda = "auto";
  int rounds = 10;
  std::uint64_t seed = 0;
  std::string out;
  std::string transcript;
};

int cmd_fit(const FitArgs& args) {
  const itr::Method method = itr::method_from_string(args.method);
  const itr::Dataset data = itr::read_dataset_csv_file(args.data);
  const int N = static_cast<int>(data.size());
  if (args.sites < 1 || args.sites > N)
    throw UsageError("--sites must be between 1 and the number of units");
  const int n = N / args.sites;

  const double h =
      resolve_bandwidth(args.h, itr::default_global_bandwidth(N), "h");
  const double b =
      resolve_bandwidth(args.b, itr::default_local_bandwidth(n), "b");
  const double lambda =
      resolve_bandwidth(args.lambda, itr::default_lambda(N), "lambda");
  if (b < h) throw UsageError("b must be >= h");

  itr::CounterRng rng(itr::CounterRng::hash_combine(args.seed, 3));
  const std::vector<std::vector<int>> sites =
      itr::partition_sites(N, args.sites, rng);

  itr::FitConfig fit;
  fit.rounds = args.rounds;
  fit.h = h;
  fit.b = b;
  fit.lambda = lambda;

  itr::RuleCoefficients beta;
  json diagnostics = json::object();

  switch (method) {
    case itr::Method::Fce: {
      const itr::WeightedSample ws =
          itr::build_weighted_sample(data, sites, itr::NuisanceMode::Dnc);
      beta = itr::fit_fce(ws, itr::SmoothedLoss<>(fit.kernel, h), lambda,
                          fit.gcd);
      break;
    }
    case itr::Method::Dce: {
      const itr::WeightedSample ws =
          itr::build_weighted_sample(data, sites, itr::NuisanceMode::Dnc);
      auto [views, std_tf] = itr::make_site_views(ws, sites);
      const itr::FitReport report = itr::fit_dce(views, fit);
      beta = std_tf.to_raw(report.final_beta);
      diagnostics["rounds_used"] = report.rounds_used;
      diagnostics["bytes_exchanged"] = report.bytes_exchanged;
      diagnostics["gradient_norms"] = report.gradient_norms;
      if (!args.transcript.empty()) {
        std::ofstream os(args.transcript);
        if (!os)
          throw itr::IoError("cannot open '" + args.transcript +
                             "' for writing");
        itr::write_transcript(os, report);
      }
      break;
    }
    case itr::Method::Initial: {
      const itr::WeightedSample central =
          itr::build_weighted_sample(data, {sites.front()},
                                     itr::NuisanceMode::CentralOnly)
              .subset(sites.front());
      beta = itr::fit_initial(central, fit);
      break;
    }
    case itr::Method::Avg: {
      std::vector<itr::WeightedSample> locals;
      for (const auto& site : sites)
        locals.push_back(itr::build_weighted_sample(
                             data, {site}, itr::NuisanceMode::CentralOnly)
                             .subset(site));
      int failed = 0;
      beta = itr::fit_avg(locals, fit, &failed);
      diagnostics["failed_sites"] = failed;
      break;
    }
  }

  const itr::Standardization std_raw = itr::standardize(data.covariates);
  json model = {
      {"method", args.method},
      {"beta", vector_to_json(beta.stacked())},
      {"standardization",
       {{"means", vector_to_json(std_raw.means)},
        {"scales", vector_to_json(std_raw.scales)}}},
      {"config",
       {{"h", h},
        {"b", b},
        {"lambda", lambda},
        {"rounds", args.rounds},
        {"sites", args.sites},
        {"seed", args.seed}}},
      {"diagnostics", diagnostics},
  };
  const std::string text = model.dump(2) + "\n";
  if (args.out.empty())
    std::cout << text;
  else
    write_text_file(args.out, text);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// eval

struct EvalArgs {
  std::string model;
  std::string data;
  std::string out;  // optional CSV to append to
};

int cmd_eval(const EvalArgs& args) {
  std::ifstream ms(args.model);
  if (!ms) throw itr::IoError("cannot open '" + args.model + "' for reading");
  json model;
  try {
    ms >> model;
  } catch (const std::exception& e) {
    throw itr::ParseError(std::string("bad model JSON: ") + e.what());
  }
  const itr::RuleCoefficients beta =
      itr::RuleCoefficients::from_stacked(vector_from_json(model.at("beta")));
  const std::string method = model.value("method", "unknown");

  const itr::Dataset test = itr::read_dataset_csv_file(args.data);

  std::optional<double> ccr_value;
  if (test.has_true_cte()) ccr_value = itr::ccr(beta, test);

  double value = 0.0;
  if (test.has_true_propensity()) {
    value = itr::empirical_value(beta, test);
  } else {
    // real-data path: estimate the propensity, clip, and reweight with it
    const itr::PropensityFit pf =
        itr::fit_logistic(test.covariates, test.treatments);
    const itr::PropensityClip clip;
    itr::Vector pi(test.size());
    for (Eigen::Index i = 0; i < test.size(); ++i)
      pi[i] = std::min(std::max(pf.propensity(test.covariates.row(i).transpose()),
                                clip.lo),
                       clip.hi);
    value = itr::empirical_value(beta, test, pi);
  }

  std::string line = "method,ccr,value,n_test\n" + method + ",";
  {
    char buf[64];
    if (ccr_value)
      std::snprintf(buf, sizeof(buf), "%.6f", *ccr_value);
    else
      std::snprintf(buf, sizeof(buf), "NA");
    line += buf;
    std::snprintf(buf, sizeof(buf), ",%.6f,%lld\n", value,
                  static_cast<long long>(test.size()));
    line += buf;
  }
  if (args.out.empty())
    std::cout << line;
  else
    write_text_file(args.out, line);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// experiment

struct ExperimentArgs {
  std::string config;
  std::string out_results = "results.csv";
  std::string out_summary = "summary.csv";
};

itr::ExperimentConfig parse_experiment_config(const json& j) {
  itr::ExperimentConfig cfg;
  cfg.scenarios.clear();
  for (const auto& s : j.at("scenarios"))
    cfg.scenarios.push_back(itr::scenario_from_string(s.get<std::string>()));
  cfg.designs.clear();
  for (const auto& d : j.at("designs"))
    cfg.designs.push_back(itr::design_from_string(d.get<std::string>()));
  cfg.full_sizes = j.at("N").get<std::vector<int>>();
  cfg.local_sizes = j.at("n").get<std::vector<int>>();
  cfg.methods.clear();
  for (const auto& m : j.at("methods"))
    cfg.methods.push_back(itr::method_from_string(m.get<std::string>()));
  cfg.reps = j.value("reps", 20);
  cfg.test_size = j.value("test_size", 10000);
  cfg.master_seed = j.value("master_seed", std::uint64_t{0});
  cfg.threads = j.value("threads", 0);
  cfg.rounds = j.value("rounds", 10);
  if (j.contains("h")) cfg.h_override = j.at("h").get<double>();
  if (j.contains("b")) cfg.b_override = j.at("b").get<double>();
  if (j.contains("lambda")) cfg.lambda_override = j.at("lambda").get<double>();
  if (cfg.reps < 1) throw UsageError("reps must be positive");
  if (cfg.scenarios.empty() || cfg.designs.empty() || cfg.full_sizes.empty() ||
      cfg.local_sizes.empty() || cfg.methods.empty())
    throw UsageError("experiment config has an empty grid axis");
  return cfg;
}

int cmd_experiment(const ExperimentArgs& args) {
  std::ifstream is(args.config);
  if (!is) throw itr::IoError("cannot open '" + args.config + "' for reading");
  json j;
  try {
    is >> j;
  } catch (const std::exception& e) {
    throw UsageError(std::string("bad experiment config JSON: ") + e.what());
  }
  const itr::ExperimentConfig cfg = parse_experiment_config(j);

  const std::vector<itr::ResultRow> rows = itr::run_experiment(cfg);
  const std::vector<itr::SummaryRow> summary = itr::aggregate_table(rows);

  {
    std::ofstream os(args.out_results);
    if (!os)
      throw itr::IoError("cannot open '" + args.out_results + "' for writing");
    itr::write_results_csv(os, rows);
  }
  {
    std::ofstream os(args.out_summary);
    if (!os)
      throw itr::IoError("cannot open '" + args.out_summary + "' for writing");
    itr::write_summary_csv(os, summary);
  }
  std::cout << itr::format_summary(summary);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Linear individualized treatment rules via smoothed weighted hinge "
      "loss, pooled or distributed"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic dataset CSV");
  simulate->add_option("--scenario", sim.scenario, "Scenario: a, b, c, or d")
      ->capture_default_str();
  simulate->add_option("--design", sim.design, "Design: rct or obs")
      ->capture_default_str();
  simulate->add_option("--N", sim.N, "Number of units")->capture_default_str();
  simulate->add_option("--sites", sim.sites, "Number of sites")
      ->capture_default_str();
  simulate->add_option("--seed", sim.seed, "RNG seed")->capture_default_str();
  simulate->add_option("--out", sim.out, "Output CSV path")->required();
  simulate->add_flag("--allow-remainder", sim.allow_remainder,
                     "Allow sites that do not divide N (remainder spread)");

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "Fit a treatment rule from a dataset CSV");
  // --h would clash with the default -h help shorthand
  fit_cmd->set_help_flag("--help", "Print this help message and exit");
  fit_cmd->add_option("--method", fit.method, "Method: fce, dce, avg, or initial")
      ->capture_default_str();
  fit_cmd->add_option("--data", fit.data, "Input dataset CSV")->required();
  fit_cmd->add_option("--sites", fit.sites, "Number of sites")
      ->capture_default_str();
  fit_cmd->add_option("--h", fit.h, "Global bandwidth, 'auto' = N^(-1/3)")
      ->capture_default_str();
  fit_cmd->add_option("--b", fit.b,
                      "Central-site bandwidth, 'auto' = min(1, 4 n^(-1/3))")
      ->capture_default_str();
  fit_cmd->add_option("--lambda", fit.lambda, "Ridge penalty, 'auto' = 1/sqrt(N)")
      ->capture_default_str();
  fit_cmd->add_option("--rounds", fit.rounds, "Communication rounds (dce)")
      ->capture_default_str();
  fit_cmd->add_option("--seed", fit.seed, "Seed for the site partition")
      ->capture_default_str();
  fit_cmd->add_option("--out", fit.out, "Model JSON path (stdout if empty)");
  fit_cmd->add_option("--transcript", fit.transcript,
                      "Transcript NDJSON path (dce only)");

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a fitted rule on a test CSV");
  eval_cmd->add_option("--model", ev.model, "Model JSON from 'fit'")->required();
  eval_cmd->add_option("--data", ev.data, "Test dataset CSV")->required();
  eval_cmd->add_option("--out", ev.out, "Output CSV path (stdout if empty)");

  ExperimentArgs ex;
  auto* exp_cmd = app.add_subcommand("experiment", "Run a simulation grid from JSON config");
  exp_cmd->add_option("--config", ex.config, "ExperimentConfig JSON path")
      ->required();
  exp_cmd->add_option("--out-results", ex.out_results, "Per-rep results CSV")
      ->capture_default_str();
  exp_cmd->add_option("--out-summary", ex.out_summary, "Summary CSV")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(sim);
    if (fit_cmd->parsed()) return cmd_fit(fit);
    if (eval_cmd->parsed()) return cmd_eval(ev);
    if (exp_cmd->parsed()) return cmd_experiment(ex);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const itr::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const itr::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const itr::NonFinite& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNonFinite;
  } catch (const itr::DegenerateDesign& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDegenerate;
  } catch (const itr::NonConvergence& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDegenerate;
  } catch (const itr::EmptyIntersection& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitEmptyAgreement;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
