#include "itr/nuisance.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numeric>

namespace itr {

namespace {

Matrix with_intercept(const Eigen::Ref<const Matrix>& covariates) {
  Matrix design(covariates.rows(), covariates.cols() + 1);
  design.col(0).setOnes();
  design.rightCols(covariates.cols()) = covariates;
  return design;
}

double log_likelihood(const Matrix& design, const IntVector& treatments,
                      const Vector& gamma) {
  double ll = 0.0;
  const Vector eta = design * gamma;
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    // log sigma(eta) and log(1 - sigma(eta)) in overflow-safe form
    const double e = eta[i];
    const double log1p_exp = e > 0 ? e + std::log1p(std::exp(-e))
                                   : std::log1p(std::exp(e));
    ll += treatments[i] == 1 ? e - log1p_exp : -log1p_exp;
  }
  return ll;
}

constexpr double kCoefCap = 30.0;
constexpr double kConditionLimit = 1e12;

}  // namespace

double PropensityFit::propensity(const Eigen::Ref<const Vector>& x) const {
  const double eta = gamma[0] + gamma.tail(gamma.size() - 1).dot(x);
  return 1.0 / (1.0 + std::exp(-eta));
}

double OutcomeFit::predict(const Eigen::Ref<const Vector>& x, int a) const {
  const Vector& eta = a == 1 ? eta1 : eta0;
  return eta[0] + eta.tail(eta.size() - 1).dot(x);
}

PropensityFit fit_logistic(const Matrix& covariates, const IntVector& treatments,
                           int max_iter, double tol) {
  const Eigen::Index n = treatments.size();
  const Eigen::Index p1 = covariates.cols() + 1;
  if (n < p1 + 1)
    throw DegenerateDesign("fit_logistic: need at least p+2 observations");
  const int n_treated = treatments.sum();
  if (n_treated == 0 || n_treated == n)
    throw DegenerateDesign("fit_logistic: treatments are all identical");

  const Matrix design = with_intercept(covariates);
  PropensityFit fit;
  fit.gamma = Vector::Zero(p1);

  double ll = log_likelihood(design, treatments, fit.gamma);
  for (int iter = 0; iter < max_iter; ++iter) {
    const Vector eta = design * fit.gamma;
    const Vector prob = eta.unaryExpr(
        [](double e) { return 1.0 / (1.0 + std::exp(-e)); });
    const Vector grad =
        design.transpose() * (treatments.cast<double>() - prob) /
        static_cast<double>(n);
    if (grad.lpNorm<Eigen::Infinity>() <= tol) return fit;

    const Vector w = prob.array() * (1.0 - prob.array());
    const Matrix hessian =
        design.transpose() * w.asDiagonal() * design / static_cast<double>(n);
    Eigen::JacobiSVD<Matrix> svd(hessian,
                                 Eigen::ComputeThinU | Eigen::ComputeThinV);
    const double smax = svd.singularValues()(0);
    const double smin = svd.singularValues()(svd.singularValues().size() - 1);
    if (!(smin > 0) || smax / smin > kConditionLimit)
      throw DegenerateDesign("fit_logistic: weighted normal equations singular");
    const Vector step = svd.solve(grad);

    // step-halving keeps the log-likelihood nondecreasing
    double scale = 1.0;
    Vector candidate = fit.gamma + step;
    double ll_new = log_likelihood(design, treatments, candidate);
    while (ll_new < ll && scale > 1e-10) {
      scale *= 0.5;
      candidate = fit.gamma + scale * step;
      ll_new = log_likelihood(design, treatments, candidate);
    }
    fit.gamma = candidate;
    ll = ll_new;

    if (fit.gamma.lpNorm<Eigen::Infinity>() > kCoefCap) {
      fit.gamma = fit.gamma.cwiseMax(-kCoefCap).cwiseMin(kCoefCap);
      fit.separation_flagged = true;
      return fit;
    }
  }

  const Vector eta = design * fit.gamma;
  const Vector prob =
      eta.unaryExpr([](double e) { return 1.0 / (1.0 + std::exp(-e)); });
  const Vector grad = design.transpose() * (treatments.cast<double>() - prob) /
                      static_cast<double>(n);
  if (grad.lpNorm<Eigen::Infinity>() > tol)
    throw NonConvergence("fit_logistic: IRLS did not converge");
  return fit;
}

Vector fit_ols(const Matrix& covariates, const Vector& outcomes,
               const std::vector<int>& subset) {
  const Eigen::Index p1 = covariates.cols() + 1;
  if (static_cast<Eigen::Index>(subset.size()) < p1 + 1)
    throw DegenerateDesign("fit_ols: subset smaller than p+2");

  Matrix design(static_cast<Eigen::Index>(subset.size()), p1);
  Vector y(static_cast<Eigen::Index>(subset.size()));
  for (std::size_t r = 0; r < subset.size(); ++r) {
    design(static_cast<Eigen::Index>(r), 0) = 1.0;
    design.row(static_cast<Eigen::Index>(r)).tail(p1 - 1) =
        covariates.row(subset[r]);
    y[static_cast<Eigen::Index>(r)] = outcomes[subset[r]];
  }

  Eigen::ColPivHouseholderQR<Matrix> qr(design);
  if (qr.rank() < p1)
    throw DegenerateDesign("fit_ols: design matrix is rank deficient");
  return qr.solve(y);
}

OutcomeFit fit_outcome_models(const Matrix& covariates, const IntVector& treatments,
                              const Vector& outcomes,
                              const std::vector<int>& subset) {
  std::vector<int> treated, control;
  for (int i : subset) (treatments[i] == 1 ? treated : control).push_back(i);
  OutcomeFit fit;
  fit.eta1 = fit_ols(covariates, outcomes, treated);
  fit.eta0 = fit_ols(covariates, outcomes, control);
  return fit;
}

double aipwe_contrast(double outcome, int treatment,
                      const Eigen::Ref<const Vector>& x, const PropensityFit& pf,
                      const OutcomeFit& of, const PropensityClip& clip) {
  const double pi = std::min(std::max(pf.propensity(x), clip.lo), clip.hi);
  const double q1 = of.predict(x, 1);
  const double q0 = of.predict(x, 0);
  const double arm1 = (treatment == 1 ? (outcome - q1) / pi : 0.0) + q1;
  const double arm0 = (treatment == 0 ? (outcome - q0) / (1.0 - pi) : 0.0) + q0;
  return arm1 - arm0;
}

Vector aipwe_contrasts(const Dataset& data, const PropensityFit& pf,
                       const OutcomeFit& of, const PropensityClip& clip) {
  Vector out(data.size());
  for (Eigen::Index i = 0; i < data.size(); ++i)
    out[i] = aipwe_contrast(data.outcomes[i], data.treatments[i],
                            data.covariates.row(i).transpose(), pf, of, clip);
  return out;
}

WeightedSample pseudo_labels(const Vector& contrasts, const Matrix& covariates) {
  if (contrasts.size() != covariates.rows())
    throw DimensionMismatch("pseudo_labels: contrasts vs covariates rows");
  WeightedSample ws;
  ws.covariates = covariates;
  ws.weights = contrasts.cwiseAbs();
  ws.labels =
      contrasts.unaryExpr([](double d) { return d > 0.0 ? 1.0 : -1.0; });
  return ws;
}

PropensityFit dnc_average(const std::vector<PropensityFit>& fits) {
  if (fits.empty()) throw DimensionMismatch("dnc_average: empty fit list");
  PropensityFit out;
  out.gamma = Vector::Zero(fits.front().gamma.size());
  for (const auto& f : fits) {
    if (f.gamma.size() != out.gamma.size())
      throw DimensionMismatch("dnc_average: propensity fits differ in size");
    out.gamma += f.gamma;
    out.separation_flagged = out.separation_flagged || f.separation_flagged;
  }
  out.gamma /= static_cast<double>(fits.size());
  return out;
}

OutcomeFit dnc_average(const std::vector<OutcomeFit>& fits) {
  if (fits.empty()) throw DimensionMismatch("dnc_average: empty fit list");
  OutcomeFit out;
  out.eta0 = Vector::Zero(fits.front().eta0.size());
  out.eta1 = Vector::Zero(fits.front().eta1.size());
  for (const auto& f : fits) {
    if (f.eta0.size() != out.eta0.size() || f.eta1.size() != out.eta1.size())
      throw DimensionMismatch("dnc_average: outcome fits differ in size");
    out.eta0 += f.eta0;
    out.eta1 += f.eta1;
  }
  out.eta0 /= static_cast<double>(fits.size());
  out.eta1 /= static_cast<double>(fits.size());
  return out;
}

WeightedSample build_weighted_sample(const Dataset& data,
                                     const std::vector<std::vector<int>>& sites,
                                     NuisanceMode mode,
                                     const PropensityClip& clip) {
  PropensityFit pf;
  OutcomeFit of;
  if (mode == NuisanceMode::CentralOnly || sites.size() == 1) {
    const auto& central = sites.front();
    Matrix xc(static_cast<Eigen::Index>(central.size()), data.dim());
    IntVector ac(static_cast<Eigen::Index>(central.size()));
    for (std::size_t r = 0; r < central.size(); ++r) {
      xc.row(static_cast<Eigen::Index>(r)) = data.covariates.row(central[r]);
      ac[static_cast<Eigen::Index>(r)] = data.treatments[central[r]];
    }
    pf = fit_logistic(xc, ac);
    of = fit_outcome_models(data.covariates, data.treatments, data.outcomes,
                            central);
  } else {
    std::vector<PropensityFit> pfs;
    std::vector<OutcomeFit> ofs;
    for (const auto& site : sites) {
      Matrix xs(static_cast<Eigen::Index>(site.size()), data.dim());
      IntVector as(static_cast<Eigen::Index>(site.size()));
      for (std::size_t r = 0; r < site.size(); ++r) {
        xs.row(static_cast<Eigen::Index>(r)) = data.covariates.row(site[r]);
        as[static_cast<Eigen::Index>(r)] = data.treatments[site[r]];
      }
      pfs.push_back(fit_logistic(xs, as));
      ofs.push_back(fit_outcome_models(data.covariates, data.treatments,
                                       data.outcomes, site));
    }
    pf = dnc_average(pfs);
    of = dnc_average(ofs);
  }
  return pseudo_labels(aipwe_contrasts(data, pf, of, clip), data.covariates);
}

}  // namespace itr
