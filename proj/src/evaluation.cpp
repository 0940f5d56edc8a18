#include "itr/evaluation.hpp"

#include <cmath>

namespace itr {

double ccr(const RuleCoefficients& beta, const Dataset& test) {
  if (!test.has_true_cte())
    throw MissingTruth("ccr: dataset carries no true treatment effects");
  const Vector f = beta.decision_values(test.covariates);
  Eigen::Index correct = 0;
  for (Eigen::Index i = 0; i < test.size(); ++i) {
    const bool treat = f[i] > 0.0;
    const bool should = test.true_cte[i] > 0.0;
    if (treat == should) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(test.size());
}

double empirical_value(const RuleCoefficients& beta, const Dataset& test,
                       const Vector& propensities) {
  if (propensities.size() != test.size())
    throw DimensionMismatch("empirical_value: propensity length mismatch");
  const Vector f = beta.decision_values(test.covariates);
  detail::KahanSum num, den;
  Eigen::Index agree = 0;
  for (Eigen::Index i = 0; i < test.size(); ++i) {
    const int recommended = f[i] > 0.0 ? 1 : 0;
    if (test.treatments[i] != recommended) continue;
    const double pi = propensities[i];
    if (!(pi > 0.0 && pi < 1.0))
      throw std::invalid_argument("empirical_value: propensity outside (0,1)");
    const double pi_arm = test.treatments[i] == 1 ? pi : 1.0 - pi;
    num.add(test.outcomes[i] / pi_arm);
    den.add(1.0 / pi_arm);
    ++agree;
  }
  if (agree == 0)
    throw EmptyIntersection(
        "empirical_value: no unit received its recommended arm");
  return num.value() / den.value();
}

double empirical_value(const RuleCoefficients& beta, const Dataset& test) {
  if (!test.has_true_propensity())
    throw MissingTruth("empirical_value: dataset carries no propensities");
  return empirical_value(beta, test, test.true_propensity);
}

}  // namespace itr
