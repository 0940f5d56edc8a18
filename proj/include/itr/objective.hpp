#pragma once

#include "itr/smoothing.hpp"
#include "itr/types.hpp"

namespace itr {

/// Weighted convolution-smoothed empirical risk:
/// mean_i weight_i * phi_h(label_i * f(x_i; beta)).
double risk(const WeightedSample& ws, const RuleCoefficients& beta,
            const SmoothedLoss<>& sl);

/// Gradient of `risk` in (intercept, slopes) order.
Vector risk_gradient(const WeightedSample& ws, const RuleCoefficients& beta,
                     const SmoothedLoss<>& sl);

/// risk + lambda * ||slopes||^2; the intercept is never penalized.
double penalized_objective(const WeightedSample& ws, const RuleCoefficients& beta,
                           const SmoothedLoss<>& sl, double lambda);

/// Gradient of the penalized objective.
Vector penalized_gradient(const WeightedSample& ws, const RuleCoefficients& beta,
                          const SmoothedLoss<>& sl, double lambda);

/// Central-site surrogate: risk_b on the central sample, shifted by
/// -<shift, beta - anchor>, plus the ridge term. `shift` is the difference
/// between the central-site gradient and the global gradient at the anchor,
/// which makes the surrogate's gradient at the anchor equal the global
/// penalized gradient there.
double surrogate_objective(const WeightedSample& central_ws,
                           const RuleCoefficients& beta,
                           const SmoothedLoss<>& sl_b, const Vector& shift,
                           const RuleCoefficients& anchor, double lambda);

Vector surrogate_gradient(const WeightedSample& central_ws,
                          const RuleCoefficients& beta,
                          const SmoothedLoss<>& sl_b, const Vector& shift,
                          double lambda);

}  // namespace itr
