#include "itr/federation.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <sstream>

namespace itr {

namespace {

std::size_t message_bytes(const RoundMessage& msg) {
  return kMessageHeaderBytes + msg.payload_bytes();
}

void append_real(std::string& out, double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  out += buf;
}

void append_vector(std::string& out, const Vector& v) {
  out += '[';
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    append_real(out, v[i]);
  }
  out += ']';
}

}  // namespace

RoundMessage local_gradient(const SiteView& site, const RuleCoefficients& beta,
                            const SmoothedLoss<>& sl_h, int round) {
  if (site.sample.size() == 0)
    throw EmptySite("local_gradient: site " + std::to_string(site.site_id) +
                    " is empty");
  RoundMessage msg;
  msg.kind = RoundMessage::Kind::GradientReply;
  msg.round = round;
  msg.site_id = site.site_id;
  msg.unit_count = static_cast<int>(site.sample.size());
  msg.payload = risk_gradient(site.sample, beta, sl_h);
  return msg;
}

Vector aggregate(const std::vector<RoundMessage>& replies, int expected_sites) {
  std::vector<bool> seen(static_cast<std::size_t>(expected_sites), false);
  for (const auto& r : replies)
    if (r.site_id >= 0 && r.site_id < expected_sites)
      seen[static_cast<std::size_t>(r.site_id)] = true;
  std::string missing;
  for (int k = 0; k < expected_sites; ++k)
    if (!seen[static_cast<std::size_t>(k)])
      missing += (missing.empty() ? "" : ", ") + std::to_string(k);
  if (!missing.empty())
    throw MissingReply("aggregate: no reply from sites " + missing);

  const Eigen::Index dim = replies.front().payload.size();
  Vector sum = Vector::Zero(dim);
  double total = 0.0;
  for (const auto& r : replies) {
    if (r.payload.size() != dim)
      throw DimensionMismatch("aggregate: gradient length mismatch");
    sum += static_cast<double>(r.unit_count) * r.payload;
    total += static_cast<double>(r.unit_count);
  }
  return sum / total;
}

RuleCoefficients fit_fce(const WeightedSample& pooled, const SmoothedLoss<>& sl_h,
                         double lambda, const GcdOptions& opts) {
  if (pooled.size() == 0) throw EmptySample("fit_fce: empty sample");
  const Standardization std = standardize(pooled.covariates);
  WeightedSample standardized = pooled;
  standardized.covariates = std.apply(pooled.covariates);
  const Vector zero_shift = Vector::Zero(pooled.dim() + 1);
  const RuleCoefficients sol = solve_surrogate(
      standardized, RuleCoefficients::zero(pooled.dim()), zero_shift, sl_h,
      lambda, opts);
  return std.to_raw(sol);
}

std::pair<std::vector<SiteView>, Standardization> make_site_views(
    const WeightedSample& pooled,
    const std::vector<std::vector<int>>& site_indices) {
  if (site_indices.empty()) throw BadShape("make_site_views: no sites");
  const Standardization std = standardize(
      pooled.subset(site_indices.front()).covariates);
  std::vector<SiteView> sites;
  sites.reserve(site_indices.size());
  for (std::size_t k = 0; k < site_indices.size(); ++k) {
    SiteView view;
    view.site_id = static_cast<int>(k);
    view.indices = site_indices[k];
    view.sample = pooled.subset(site_indices[k]);
    view.sample.covariates = std.apply(view.sample.covariates);
    sites.push_back(std::move(view));
  }
  return {std::move(sites), std};
}

FitReport fit_dce(const std::vector<SiteView>& sites, const FitConfig& config) {
  if (sites.empty()) throw BadShape("fit_dce: no sites");
  if (!(config.b >= config.h && config.h > 0))
    throw std::invalid_argument("fit_dce: requires b >= h > 0");
  if (config.rounds < 1) throw std::invalid_argument("fit_dce: rounds < 1");

  const SmoothedLoss<> sl_h(config.kernel, config.h);
  const SmoothedLoss<> sl_b(config.kernel, config.b);
  const SiteView& central = sites.front();
  const Eigen::Index p = central.sample.dim();
  const int num_sites = static_cast<int>(sites.size());

  FitReport report;

  // warm start: local fit on the central site at the local bandwidth
  const Vector zero_shift = Vector::Zero(p + 1);
  RuleCoefficients beta =
      solve_surrogate(central.sample, RuleCoefficients::zero(p), zero_shift,
                      sl_b, config.lambda, config.gcd);
  report.trajectory.push_back(beta);

  for (int t = 1; t <= config.rounds; ++t) {
    RoundMessage broadcast;
    broadcast.kind = RoundMessage::Kind::BroadcastBeta;
    broadcast.round = t;
    broadcast.payload = beta.stacked();
    report.bytes_exchanged += message_bytes(broadcast);
    report.transcript.push_back(std::move(broadcast));

    std::vector<RoundMessage> replies;
    replies.reserve(sites.size());
    for (const auto& site : sites) {
      RoundMessage reply = local_gradient(site, beta, sl_h, t);
      report.bytes_exchanged += message_bytes(reply);
      replies.push_back(reply);
      report.transcript.push_back(std::move(reply));
    }

    const Vector global_grad = aggregate(replies, num_sites);
    const Vector local_grad = risk_gradient(central.sample, beta, sl_b);
    const Vector shift = local_grad - global_grad;

    RuleCoefficients updated = solve_surrogate(central.sample, beta, shift,
                                               sl_b, config.lambda, config.gcd);
    if (!updated.all_finite())
      throw NonFinite("fit_dce: coefficients became non-finite");

    {
      Vector pen_grad = global_grad;
      pen_grad.tail(p) += 2.0 * config.lambda * beta.slopes;
      report.gradient_norms.push_back(pen_grad.lpNorm<Eigen::Infinity>());
    }

    const double step =
        (updated.stacked() - beta.stacked()).norm();
    beta = updated;
    report.trajectory.push_back(beta);
    report.rounds_used = t;
    if (step < config.round_tol) break;
  }

  report.final_beta = beta;
  return report;
}

RuleCoefficients fit_initial(const WeightedSample& central,
                             const FitConfig& config) {
  return fit_fce(central, SmoothedLoss<>(config.kernel, config.b),
                 config.lambda, config.gcd);
}

RuleCoefficients fit_avg(const std::vector<WeightedSample>& site_samples,
                         const FitConfig& config, int* failed_sites) {
  if (site_samples.empty()) throw BadShape("fit_avg: no sites");
  const SmoothedLoss<> sl_b(config.kernel, config.b);
  Vector sum;
  int ok = 0, failed = 0;
  for (const auto& sample : site_samples) {
    try {
      const RuleCoefficients local =
          fit_fce(sample, sl_b, config.lambda, config.gcd);
      if (sum.size() == 0) sum = Vector::Zero(local.dim() + 1);
      sum += local.stacked();
      ++ok;
    } catch (const std::exception&) {
      ++failed;
    }
  }
  if (failed_sites) *failed_sites = failed;
  if (ok == 0) throw NonConvergence("fit_avg: every site-local fit failed");
  return RuleCoefficients::from_stacked(sum / static_cast<double>(ok));
}

void write_transcript(std::ostream& os, const FitReport& report) {
  std::string line;
  for (const auto& msg : report.transcript) {
    line.clear();
    if (msg.kind == RoundMessage::Kind::BroadcastBeta) {
      line += "{\"round\":" + std::to_string(msg.round) +
              ",\"kind\":\"broadcast\",\"beta\":";
      append_vector(line, msg.payload);
      line += '}';
    } else {
      line += "{\"round\":" + std::to_string(msg.round) +
              ",\"kind\":\"grad\",\"site\":" + std::to_string(msg.site_id) +
              ",\"n\":" + std::to_string(msg.unit_count) + ",\"g\":";
      append_vector(line, msg.payload);
      line += '}';
    }
    os << line << '\n';
  }
}

}  // namespace itr
