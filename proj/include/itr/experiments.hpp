#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "itr/simgen.hpp"
#include "itr/types.hpp"

namespace itr {

enum class Method { Fce, Dce, Avg, Initial };

std::string to_string(Method m);
Method method_from_string(const std::string& s);

struct ExperimentConfig {
  std::vector<Scenario> scenarios{Scenario::A};
  std::vector<Design> designs{Design::Observational};
  std::vector<int> full_sizes{1000};
  std::vector<int> local_sizes{200};
  std::vector<Method> methods{Method::Fce, Method::Dce};
  int reps = 20;
  int test_size = 10000;
  std::uint64_t master_seed = 0;
  int threads = 0;  // 0 = hardware_concurrency, capped by ITR_THREADS

  // Hyperparameter policies; nan means the N/n-driven default.
  double h_override = std::numeric_limits<double>::quiet_NaN();
  double b_override = std::numeric_limits<double>::quiet_NaN();
  double lambda_override = std::numeric_limits<double>::quiet_NaN();
  int rounds = 10;
};

struct ResultRow {
  std::string scenario;
  std::string design;
  int N = 0;
  int n = 0;
  std::string method;
  int rep = 0;
  double ccr = 0.0;
  double value = 0.0;
  int rounds = 0;
  double seconds = 0.0;
  std::uint64_t bytes = 0;
  std::string error;  // empty on success
};

struct SummaryRow {
  std::string scenario;
  std::string design;
  int N = 0;
  int n = 0;
  std::string method;
  double ccr_mean = 0.0;
  double ccr_sd = 0.0;
  double value_mean = 0.0;
  double value_sd = 0.0;
  int count = 0;
};

struct ExperimentCell {
  Scenario scenario;
  Design design;
  int N;
  int n;
};

/// Run every rep of one grid cell; per-rep failures are recorded in the
/// row's error column, not thrown.
std::vector<ResultRow> run_cell(const ExperimentCell& cell,
                                const ExperimentConfig& config);

/// Full grid, parallel over (cell, rep); rows come back deterministically
/// sorted regardless of scheduling.
std::vector<ResultRow> run_experiment(const ExperimentConfig& config);

/// Grouped mean/sd (sample sd, divisor reps-1; 0 for singleton groups).
std::vector<SummaryRow> aggregate_table(const std::vector<ResultRow>& rows);

void write_results_csv(std::ostream& os, const std::vector<ResultRow>& rows);
void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows);
std::string format_summary(const std::vector<SummaryRow>& rows);

}  // namespace itr
