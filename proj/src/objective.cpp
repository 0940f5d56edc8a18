#include "itr/objective.hpp"

namespace itr {

namespace {

void check_nonempty(const WeightedSample& ws) {
  if (ws.size() == 0) throw EmptySample("weighted sample is empty");
}

}  // namespace

double risk(const WeightedSample& ws, const RuleCoefficients& beta,
            const SmoothedLoss<>& sl) {
  check_nonempty(ws);
  const Vector f = beta.decision_values(ws.covariates);
  detail::KahanSum sum;
  for (Eigen::Index i = 0; i < ws.size(); ++i)
    sum.add(ws.weights[i] * sl.loss(ws.labels[i] * f[i]));
  return sum.value() / static_cast<double>(ws.size());
}

Vector risk_gradient(const WeightedSample& ws, const RuleCoefficients& beta,
                     const SmoothedLoss<>& sl) {
  check_nonempty(ws);
  const Eigen::Index p = ws.dim();
  const Vector f = beta.decision_values(ws.covariates);

  std::vector<detail::KahanSum> sums(static_cast<std::size_t>(p) + 1);
  for (Eigen::Index i = 0; i < ws.size(); ++i) {
    const double z = ws.labels[i];
    const double g = ws.weights[i] * sl.deriv(z * f[i]) * z;
    sums[0].add(g);
    for (Eigen::Index j = 0; j < p; ++j)
      sums[static_cast<std::size_t>(j) + 1].add(g * ws.covariates(i, j));
  }
  Vector grad(p + 1);
  for (Eigen::Index j = 0; j <= p; ++j)
    grad[j] = sums[static_cast<std::size_t>(j)].value() /
              static_cast<double>(ws.size());
  return grad;
}

double penalized_objective(const WeightedSample& ws, const RuleCoefficients& beta,
                           const SmoothedLoss<>& sl, double lambda) {
  return risk(ws, beta, sl) + lambda * beta.slopes.squaredNorm();
}

Vector penalized_gradient(const WeightedSample& ws, const RuleCoefficients& beta,
                          const SmoothedLoss<>& sl, double lambda) {
  Vector grad = risk_gradient(ws, beta, sl);
  grad.tail(beta.slopes.size()) += 2.0 * lambda * beta.slopes;
  return grad;
}

double surrogate_objective(const WeightedSample& central_ws,
                           const RuleCoefficients& beta,
                           const SmoothedLoss<>& sl_b, const Vector& shift,
                           const RuleCoefficients& anchor, double lambda) {
  if (shift.size() != central_ws.dim() + 1)
    throw DimensionMismatch("surrogate_objective: shift has wrong length");
  const Vector diff = beta.stacked() - anchor.stacked();
  return risk(central_ws, beta, sl_b) - shift.dot(diff) +
         lambda * beta.slopes.squaredNorm();
}

Vector surrogate_gradient(const WeightedSample& central_ws,
                          const RuleCoefficients& beta,
                          const SmoothedLoss<>& sl_b, const Vector& shift,
                          double lambda) {
  if (shift.size() != central_ws.dim() + 1)
    throw DimensionMismatch("surrogate_gradient: shift has wrong length");
  return penalized_gradient(central_ws, beta, sl_b, lambda) - shift;
}

}  // namespace itr
