#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "itr/gcd.hpp"
#include "itr/nuisance.hpp"
#include "itr/types.hpp"

namespace itr {

/// One site's slice of the study: unit indices plus the site-local weighted
/// sample (already in whatever coordinates the coordinator broadcast).
struct SiteView {
  int site_id = 0;
  std::vector<int> indices;
  WeightedSample sample;
};

/// A single protocol message. The only cross-site payloads are coefficient
/// and gradient vectors of length p+1; no unit-level fields ever travel.
struct RoundMessage {
  enum class Kind { BroadcastBeta, GradientReply };

  Kind kind = Kind::BroadcastBeta;
  int round = 0;
  int site_id = -1;   // replies only
  Vector payload;
  int unit_count = 0; // replies only

  std::size_t payload_bytes() const {
    return static_cast<std::size_t>(payload.size()) * 8;
  }
};

/// Fixed per-message framing cost used by the byte accounting.
inline constexpr std::size_t kMessageHeaderBytes = 16;

/// Everything fit_dce reports lives in the coordinates the sites were given
/// (normally the central site's standardized scale); the caller owns the
/// mapping back to raw covariates.
struct FitReport {
  std::vector<RuleCoefficients> trajectory;  // includes the warm start
  std::vector<double> gradient_norms;        // global penalized gradient, per round
  std::vector<RoundMessage> transcript;
  int rounds_used = 0;
  std::size_t bytes_exchanged = 0;
  RuleCoefficients final_beta;
};

struct FitConfig {
  int rounds = 10;
  double h = 0.1;          // global bandwidth
  double b = 0.3;          // central-site bandwidth, b >= h
  double lambda = 0.01;
  double round_tol = 1e-8; // early stop on ||beta_t - beta_{t-1}||_2
  KernelKind kernel = KernelKind::Epanechnikov;
  GcdOptions gcd;
};

/// Default bandwidth / penalty policies. The local bandwidth keeps the
/// n^{-1/3} order but with a 4x constant: at 1x the central-site curvature is
/// too thin for the gradient-shifted outer iteration to contract reliably.
inline double default_global_bandwidth(Eigen::Index N) {
  return std::pow(static_cast<double>(N), -1.0 / 3.0);
}
inline double default_local_bandwidth(Eigen::Index n) {
  return std::min(1.0, 4.0 * std::pow(static_cast<double>(n), -1.0 / 3.0));
}
inline double default_lambda(Eigen::Index N) {
  return 1.0 / std::sqrt(static_cast<double>(N));
}

/// Site-local gradient of the site's h-smoothed risk at beta.
RoundMessage local_gradient(const SiteView& site, const RuleCoefficients& beta,
                            const SmoothedLoss<>& sl_h, int round);

/// Unit-count-weighted mean of the replies, which equals the pooled gradient
/// exactly for any partition. Throws MissingReply listing absent sites.
Vector aggregate(const std::vector<RoundMessage>& replies, int expected_sites);

/// Pooled fit: standardize, minimize the penalized smoothed objective with a
/// zero shift, and map back to raw scale.
RuleCoefficients fit_fce(const WeightedSample& pooled, const SmoothedLoss<>& sl_h,
                         double lambda, const GcdOptions& opts = {});

/// Algorithm: coordinator broadcasts beta, sites return gradients, the
/// central site solves the shifted surrogate; transcript records every
/// message. Site 0 of `sites` is the central site, and covariates must
/// already share the central site's standardized coordinates.
FitReport fit_dce(const std::vector<SiteView>& sites, const FitConfig& config);

/// Convenience: partition a pooled sample into standardized site views
/// (central-site moments) plus the matching standardization.
std::pair<std::vector<SiteView>, Standardization> make_site_views(
    const WeightedSample& pooled, const std::vector<std::vector<int>>& site_indices);

/// Local fit on the central site only, with the local bandwidth b.
RuleCoefficients fit_initial(const WeightedSample& central, const FitConfig& config);

/// Averaging baseline: each site fits locally (own standardization, bandwidth
/// b), coefficients are averaged in raw scale. Sites that fail to fit are
/// skipped; their count is reported through `failed_sites` when given.
RuleCoefficients fit_avg(const std::vector<WeightedSample>& site_samples,
                         const FitConfig& config, int* failed_sites = nullptr);

/// Line-delimited JSON transcript; reals carry 17 significant digits.
void write_transcript(std::ostream& os, const FitReport& report);

}  // namespace itr
