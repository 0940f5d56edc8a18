#pragma once

#include <Eigen/Core>

#include "itr/errors.hpp"

namespace itr {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using IntVector = Eigen::VectorXi;

/// Linear decision rule f(x; beta) = beta0 + beta1' x.
struct RuleCoefficients {
  double intercept = 0.0;
  Vector slopes;

  RuleCoefficients() = default;
  RuleCoefficients(double b0, Vector b1)
      : intercept(b0), slopes(std::move(b1)) {}

  static RuleCoefficients zero(Eigen::Index p) {
    return {0.0, Vector::Zero(p)};
  }

  Eigen::Index dim() const { return slopes.size(); }

  double decision_value(const Eigen::Ref<const Vector>& x) const {
    return intercept + slopes.dot(x);
  }

  Vector decision_values(const Eigen::Ref<const Matrix>& covariates) const {
    return (covariates * slopes).array() + intercept;
  }

  /// Full (p+1)-vector, intercept first.
  Vector stacked() const {
    Vector v(slopes.size() + 1);
    v[0] = intercept;
    v.tail(slopes.size()) = slopes;
    return v;
  }

  static RuleCoefficients from_stacked(const Eigen::Ref<const Vector>& v) {
    if (v.size() < 1) throw DimensionMismatch("coefficient vector is empty");
    return {v[0], v.tail(v.size() - 1)};
  }

  bool all_finite() const {
    return std::isfinite(intercept) && slopes.allFinite();
  }
};

/// Per-unit AIPWE weight |delta-hat| and pseudo-label in {-1,+1}, plus the
/// covariates everything is evaluated on. Input of every risk function.
struct WeightedSample {
  Matrix covariates;  // N x p
  Vector weights;     // |delta-hat|, nonnegative
  Vector labels;      // +1 / -1

  Eigen::Index size() const { return weights.size(); }
  Eigen::Index dim() const { return covariates.cols(); }

  WeightedSample subset(const std::vector<int>& idx) const {
    WeightedSample out;
    out.covariates.resize(static_cast<Eigen::Index>(idx.size()), dim());
    out.weights.resize(static_cast<Eigen::Index>(idx.size()));
    out.labels.resize(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t r = 0; r < idx.size(); ++r) {
      out.covariates.row(static_cast<Eigen::Index>(r)) = covariates.row(idx[r]);
      out.weights[static_cast<Eigen::Index>(r)] = weights[idx[r]];
      out.labels[static_cast<Eigen::Index>(r)] = labels[idx[r]];
    }
    return out;
  }
};

/// Raw simulated or ingested data: covariates, binary treatment, outcome,
/// plus (optionally) the generating truth for evaluation.
struct Dataset {
  Matrix covariates;        // N x p
  IntVector treatments;     // {0,1}
  Vector outcomes;
  Vector true_cte;          // delta*(x_i); empty if unknown
  Vector true_propensity;   // design P(A=1|x); empty if unknown

  Eigen::Index size() const { return outcomes.size(); }
  Eigen::Index dim() const { return covariates.cols(); }
  bool has_true_cte() const { return true_cte.size() == size() && size() > 0; }
  bool has_true_propensity() const {
    return true_propensity.size() == size() && size() > 0;
  }
};

namespace detail {

/// Kahan-compensated accumulator; risk sums mix magnitudes across 1e5 units.
class KahanSum {
 public:
  void add(double x) {
    const double y = x - c_;
    const double t = s_ + y;
    c_ = (t - s_) - y;
    s_ = t;
  }
  double value() const { return s_; }

 private:
  double s_ = 0.0;
  double c_ = 0.0;
};

}  // namespace detail

}  // namespace itr
