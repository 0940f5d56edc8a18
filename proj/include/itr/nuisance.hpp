#pragma once

#include <vector>

#include "itr/types.hpp"

namespace itr {

/// Logistic working model pi_A(x; gamma) = 1/(1+exp(-gamma' x~)),
/// x~ = (1, x), intercept first.
struct PropensityFit {
  Vector gamma;
  bool separation_flagged = false;

  double propensity(const Eigen::Ref<const Vector>& x) const;
};

/// Linear outcome working models Q(x, a; eta_a) = eta_a' x~ for a in {0,1}.
struct OutcomeFit {
  Vector eta0;
  Vector eta1;

  double predict(const Eigen::Ref<const Vector>& x, int a) const;
};

struct PropensityClip {
  double lo = 0.01;
  double hi = 0.99;
};

/// Maximum-likelihood logistic fit via IRLS with step-halving.
/// Coefficients are clamped at +-30 and flagged if separation pushes
/// them there. Throws NonConvergence / DegenerateDesign.
PropensityFit fit_logistic(const Matrix& covariates, const IntVector& treatments,
                           int max_iter = 100, double tol = 1e-8);

/// Least squares of outcomes on (1, x) over `subset`, via column-pivoted QR.
Vector fit_ols(const Matrix& covariates, const Vector& outcomes,
               const std::vector<int>& subset);

/// Fit eta1 on the treated subset and eta0 on the controls.
OutcomeFit fit_outcome_models(const Matrix& covariates, const IntVector& treatments,
                              const Vector& outcomes, const std::vector<int>& subset);

/// AIPW contrast for a single unit, Q-model augmentation plus the
/// inverse-probability-weighted residual; the propensity is clipped into
/// [clip.lo, clip.hi] before dividing.
double aipwe_contrast(double outcome, int treatment,
                      const Eigen::Ref<const Vector>& x, const PropensityFit& pf,
                      const OutcomeFit& of, const PropensityClip& clip = {});

Vector aipwe_contrasts(const Dataset& data, const PropensityFit& pf,
                       const OutcomeFit& of, const PropensityClip& clip = {});

/// weight_i = |delta_i|, label_i = +1 iff delta_i > 0 (zero maps to -1 with
/// zero weight, so the choice is inert).
WeightedSample pseudo_labels(const Vector& contrasts, const Matrix& covariates);

/// Divide-and-conquer pooling: coordinatewise mean of site-local fits.
PropensityFit dnc_average(const std::vector<PropensityFit>& fits);
OutcomeFit dnc_average(const std::vector<OutcomeFit>& fits);

enum class NuisanceMode { Dnc, CentralOnly };

/// Fit nuisances over the site partition per `mode` and form the pooled
/// weighted sample; weights are computed once, up front.
WeightedSample build_weighted_sample(const Dataset& data,
                                     const std::vector<std::vector<int>>& sites,
                                     NuisanceMode mode = NuisanceMode::Dnc,
                                     const PropensityClip& clip = {});

}  // namespace itr
