#include "itr/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace itr {

std::string to_string(Scenario s) {
  switch (s) {
    case Scenario::A: return "a";
    case Scenario::B: return "b";
    case Scenario::C: return "c";
    case Scenario::D: return "d";
  }
  throw std::invalid_argument("unknown scenario");
}

std::string to_string(Design d) {
  return d == Design::Rct ? "rct" : "obs";
}

Scenario scenario_from_string(const std::string& s) {
  if (s == "a" || s == "A") return Scenario::A;
  if (s == "b" || s == "B") return Scenario::B;
  if (s == "c" || s == "C") return Scenario::C;
  if (s == "d" || s == "D") return Scenario::D;
  throw std::invalid_argument("scenario must be one of a, b, c, d");
}

Design design_from_string(const std::string& s) {
  if (s == "rct" || s == "RCT") return Design::Rct;
  if (s == "obs" || s == "observational") return Design::Observational;
  throw std::invalid_argument("design must be rct or obs");
}

double true_cte(Scenario scenario, const Eigen::Ref<const Vector>& x) {
  switch (scenario) {
    case Scenario::A: {
      if (x.size() < 5)
        throw BadShape("true_cte: scenario a needs at least 5 covariates");
      double s = 0.0;
      for (int j = 0; j < 5; ++j) s += (j + 1) * x[j];
      return s;
    }
    case Scenario::B:
      if (x.size() < 3)
        throw BadShape("true_cte: scenario b needs at least 3 covariates");
      return 0.4 * std::abs(x[2]) * (1.0 - x[0] - x[1]);
    case Scenario::C:
      if (x.size() < 1)
        throw BadShape("true_cte: scenario c needs at least 1 covariate");
      return 1.8 * (0.9 - x[0]);
    case Scenario::D:
      if (x.size() < 2)
        throw BadShape("true_cte: scenario d needs at least 2 covariates");
      return std::atan(std::exp(1.0 + x[0]) - 3.0 * x[1] - 5.0);
  }
  throw std::invalid_argument("unknown scenario");
}

double design_propensity(Design design, const Eigen::Ref<const Vector>& x) {
  if (design == Design::Rct) return 0.5;
  if (x.size() < 2)
    throw BadShape("design_propensity: observational design needs 2 covariates");
  const double eta = 0.1 + 0.25 * x[0] + 0.25 * x[1];
  return 1.0 / (1.0 + std::exp(-eta));
}

double outcome_mean(const Eigen::Ref<const Vector>& x, int treatment,
                    double delta) {
  if (x.size() < 5)
    throw BadShape("outcome_mean: main effect uses 5 covariates");
  double mu = 1.0;
  for (int j = 0; j < 5; ++j) mu += (j + 2) * x[j];
  return mu + (treatment == 1 ? delta : 0.0);
}

std::vector<std::vector<int>> partition_sites(int N, int M, CounterRng& rng) {
  if (M < 1 || M > N)
    throw BadShape("partition_sites: need 1 <= M <= N");
  std::vector<int> order(static_cast<std::size_t>(N));
  std::iota(order.begin(), order.end(), 0);
  // Fisher-Yates with the counter stream
  for (int i = N - 1; i > 0; --i) {
    const int j = static_cast<int>(rng.next_u64() %
                                   static_cast<std::uint64_t>(i + 1));
    std::swap(order[static_cast<std::size_t>(i)],
              order[static_cast<std::size_t>(j)]);
  }
  const int base = N / M;
  const int remainder = N % M;
  std::vector<std::vector<int>> sites(static_cast<std::size_t>(M));
  std::size_t at = 0;
  for (int k = 0; k < M; ++k) {
    const int size = base + (k < remainder ? 1 : 0);
    sites[static_cast<std::size_t>(k)].assign(order.begin() + at,
                                              order.begin() + at + size);
    at += static_cast<std::size_t>(size);
  }
  return sites;
}

Dataset gen_dataset(const ScenarioSpec& spec) {
  if (spec.N < 1) throw BadShape("gen_dataset: N must be positive");
  if (spec.p < 5)
    throw BadShape("gen_dataset: outcome model uses 5 covariates, p >= 5");

  Dataset data;
  data.covariates.resize(spec.N, spec.p);
  data.treatments.resize(spec.N);
  data.outcomes.resize(spec.N);
  data.true_cte.resize(spec.N);
  data.true_propensity.resize(spec.N);

  const CounterRng root(spec.seed);
  for (int i = 0; i < spec.N; ++i) {
    CounterRng unit = root.stream(static_cast<std::uint64_t>(i));
    Vector x(spec.p);
    for (int j = 0; j < spec.p; ++j) x[j] = unit.uniform(-1.0, 1.0);
    const double delta = true_cte(spec.scenario, x);
    const double pi = design_propensity(spec.design, x);
    const int a = unit.bernoulli(pi) ? 1 : 0;
    const double y =
        outcome_mean(x, a, delta) + unit.normal(0.0, spec.noise_sd);

    data.covariates.row(i) = x.transpose();
    data.treatments[i] = a;
    data.outcomes[i] = y;
    data.true_cte[i] = delta;
    data.true_propensity[i] = pi;
  }
  return data;
}

}  // namespace itr
