#pragma once

#include <utility>

#include "itr/objective.hpp"
#include "itr/types.hpp"

namespace itr {

/// Per-covariate centering/scaling computed on the central site, chosen so
/// the transformed columns have zero sum and mean square one.
struct Standardization {
  Vector means;
  Vector scales;

  Matrix apply(const Eigen::Ref<const Matrix>& covariates) const;

  /// Map coefficients fitted in standardized coordinates back to raw scale.
  RuleCoefficients to_raw(const RuleCoefficients& std_beta) const;

  /// Inverse of to_raw.
  RuleCoefficients to_standardized(const RuleCoefficients& raw_beta) const;
};

/// Moments of the given covariates; throws ConstantColumn if any column has
/// variance below 1e-12.
Standardization standardize(const Eigen::Ref<const Matrix>& covariates);

struct GcdOptions {
  int max_sweeps = 10000;     // safety valve; tol is the intended stop
  double tol = 1e-8;          // on max coordinate change per sweep
  int recompute_every = 10;   // full margin refresh cadence, washes out drift
};

/// Cyclic majorize-minimize coordinate descent for the shifted central-site
/// surrogate. Expects standardized covariates. The intercept coordinate is
/// updated with lambda = 0. Coordinates whose curvature 2*lambda + C_j falls
/// below 1e-14 are skipped. Throws NonFinite if the objective degenerates.
RuleCoefficients solve_surrogate(const WeightedSample& central_ws,
                                 const RuleCoefficients& anchor,
                                 const Vector& shift, const SmoothedLoss<>& sl_b,
                                 double lambda, const GcdOptions& opts = {});

namespace detail {

/// Single coordinate update per the closed-form minimizer of the quadratic
/// majorizer; exposed for unit tests. `margins` are v_i = z_i * f(x_i; beta)
/// and are refreshed in place. j = 0 addresses the intercept.
double coordinate_update(const WeightedSample& ws, Vector& margins,
                         const Vector& beta_stacked, int j, double curvature,
                         const SmoothedLoss<>& sl_b, double shift_j,
                         double lambda);

}  // namespace detail

}  // namespace itr
