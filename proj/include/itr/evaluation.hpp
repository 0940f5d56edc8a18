#pragma once

#include <string>

#include "itr/types.hpp"

namespace itr {

struct EvalResult {
  double ccr = 0.0;
  double value = 0.0;
  Eigen::Index n_test = 0;
  bool has_ccr = false;
  std::string method;
  std::string scenario;
};

/// Fraction of test units where sign(f(x; beta) > 0) matches sign(delta* > 0).
/// Ties f = 0 classify as "do not treat". Throws MissingTruth.
double ccr(const RuleCoefficients& beta, const Dataset& test);

/// Self-normalized IPW value of the rule d(x) = I(f(x;beta) > 0):
/// sum(Y * I(A=d)/pi_arm) / sum(I(A=d)/pi_arm), with pi_arm the propensity of
/// the arm actually received. Throws EmptyIntersection if no unit agrees.
double empirical_value(const RuleCoefficients& beta, const Dataset& test,
                       const Vector& propensities);

/// Value using the dataset's stored design propensities.
double empirical_value(const RuleCoefficients& beta, const Dataset& test);

}  // namespace itr
