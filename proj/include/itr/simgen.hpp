#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "itr/rng.hpp"
#include "itr/types.hpp"

namespace itr {

enum class Scenario { A, B, C, D };
enum class Design { Rct, Observational };

struct ScenarioSpec {
  Scenario scenario = Scenario::A;
  Design design = Design::Observational;
  int N = 1000;
  int sites = 5;
  int p = 5;
  std::uint64_t seed = 0;
  double noise_sd = 0.5;
};

std::string to_string(Scenario s);
std::string to_string(Design d);
Scenario scenario_from_string(const std::string& s);
Design design_from_string(const std::string& s);

/// Conditional treatment effect delta*(x) for each scenario.
double true_cte(Scenario scenario, const Eigen::Ref<const Vector>& x);

/// Design propensity: 0.5 under RCT, logistic in (x1, x2) under the
/// observational design.
double design_propensity(Design design, const Eigen::Ref<const Vector>& x);

/// Mean outcome 1 + 2x1 + ... + 6x5 + a * delta.
double outcome_mean(const Eigen::Ref<const Vector>& x, int treatment,
                    double delta);

/// Random-permutation split into M contiguous blocks; remainder units are
/// spread one per leading block. Throws BadShape if M > N or M < 1.
std::vector<std::vector<int>> partition_sites(int N, int M, CounterRng& rng);

/// Full dataset with stored truth columns; unit i draws from rng stream i so
/// generation is reproducible independent of scheduling.
Dataset gen_dataset(const ScenarioSpec& spec);

}  // namespace itr
