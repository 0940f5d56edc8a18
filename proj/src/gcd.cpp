#include "itr/gcd.hpp"

#include <cmath>

namespace itr {

namespace {
constexpr double kCurvatureFloor = 1e-14;
constexpr double kVarianceFloor = 1e-12;
}  // namespace

Matrix Standardization::apply(const Eigen::Ref<const Matrix>& covariates) const {
  if (covariates.cols() != means.size())
    throw DimensionMismatch("Standardization::apply: column count mismatch");
  return (covariates.rowwise() - means.transpose()).array().rowwise() /
         scales.transpose().array();
}

RuleCoefficients Standardization::to_raw(const RuleCoefficients& std_beta) const {
  RuleCoefficients raw;
  raw.slopes = std_beta.slopes.cwiseQuotient(scales);
  raw.intercept = std_beta.intercept - raw.slopes.dot(means);
  return raw;
}

RuleCoefficients Standardization::to_standardized(
    const RuleCoefficients& raw_beta) const {
  RuleCoefficients std_beta;
  std_beta.slopes = raw_beta.slopes.cwiseProduct(scales);
  std_beta.intercept = raw_beta.intercept + raw_beta.slopes.dot(means);
  return std_beta;
}

Standardization standardize(const Eigen::Ref<const Matrix>& covariates) {
  const double n = static_cast<double>(covariates.rows());
  Standardization s;
  s.means = covariates.colwise().mean();
  s.scales.resize(covariates.cols());
  for (Eigen::Index j = 0; j < covariates.cols(); ++j) {
    const double mean_sq = covariates.col(j).squaredNorm() / n;
    const double var = mean_sq - s.means[j] * s.means[j];
    if (var < kVarianceFloor)
      throw ConstantColumn("standardize: column " + std::to_string(j) +
                           " is constant");
    s.scales[j] = std::sqrt(var);
  }
  return s;
}

namespace detail {

double coordinate_update(const WeightedSample& ws, Vector& margins,
                         const Vector& beta_stacked, int j, double curvature,
                         const SmoothedLoss<>& sl_b, double shift_j,
                         double lambda) {
  const double n = static_cast<double>(ws.size());
  const double denom = 2.0 * lambda + curvature;
  if (denom < kCurvatureFloor) return beta_stacked[j];

  KahanSum grad;
  for (Eigen::Index i = 0; i < ws.size(); ++i) {
    const double xij = j == 0 ? 1.0 : ws.covariates(i, j - 1);
    grad.add(ws.weights[i] * sl_b.deriv(margins[i]) * ws.labels[i] * xij);
  }
  const double g = grad.value() / n;

  const double updated =
      (curvature * beta_stacked[j] - g + shift_j) / denom;

  const double change = updated - beta_stacked[j];
  if (change != 0.0) {
    for (Eigen::Index i = 0; i < ws.size(); ++i) {
      const double xij = j == 0 ? 1.0 : ws.covariates(i, j - 1);
      margins[i] += ws.labels[i] * xij * change;
    }
  }
  return updated;
}

}  // namespace detail

RuleCoefficients solve_surrogate(const WeightedSample& central_ws,
                                 const RuleCoefficients& anchor,
                                 const Vector& shift, const SmoothedLoss<>& sl_b,
                                 double lambda, const GcdOptions& opts) {
  if (central_ws.size() == 0) throw EmptySample("solve_surrogate: empty sample");
  const Eigen::Index p = central_ws.dim();
  if (anchor.dim() != p)
    throw DimensionMismatch("solve_surrogate: anchor dimension");
  if (shift.size() != p + 1)
    throw DimensionMismatch("solve_surrogate: shift length");

  const double n = static_cast<double>(central_ws.size());
  const double c_b = sl_b.lipschitz_constant();

  // C_{b,j} = c_b * sum_i w_i X_ij^2 / n; the intercept column is all ones.
  Vector curvature(p + 1);
  curvature[0] = c_b * central_ws.weights.sum() / n;
  for (Eigen::Index j = 0; j < p; ++j)
    curvature[j + 1] =
        c_b *
        central_ws.weights.dot(central_ws.covariates.col(j).cwiseAbs2()) / n;

  Vector beta = anchor.stacked();
  Vector margins = central_ws.labels.cwiseProduct(
      RuleCoefficients::from_stacked(beta).decision_values(
          central_ws.covariates));

  for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
    double max_change = 0.0;
    for (int j = 0; j <= static_cast<int>(p); ++j) {
      const double lambda_j = j == 0 ? 0.0 : lambda;
      const double updated = detail::coordinate_update(
          central_ws, margins, beta, j, curvature[j], sl_b, shift[j], lambda_j);
      max_change = std::max(max_change, std::abs(updated - beta[j]));
      beta[j] = updated;
    }
    if (!beta.allFinite())
      throw NonFinite("solve_surrogate: coefficients became non-finite");
    if (max_change < opts.tol) break;
    // margin drift washout
    if ((sweep + 1) % opts.recompute_every == 0)
      margins = central_ws.labels.cwiseProduct(
          RuleCoefficients::from_stacked(beta).decision_values(
              central_ws.covariates));
  }
  return RuleCoefficients::from_stacked(beta);
}

}  // namespace itr
