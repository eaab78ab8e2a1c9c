#include "fedcmab/policies.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fedcmab {

std::string to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::kNonFederated:
      return "nonfed";
    case PolicyKind::kFcb:
      return "fcb";
    case PolicyKind::kPfcb:
      return "pfcb";
  }
  return "unknown";
}

PolicyKind policy_from_string(const std::string& name) {
  if (name == "nonfed") return PolicyKind::kNonFederated;
  if (name == "fcb") return PolicyKind::kFcb;
  if (name == "pfcb") return PolicyKind::kPfcb;
  throw ConfigError("unknown policy '" + name + "' (expected nonfed|fcb|pfcb)");
}

AgentEstimates::AgentEstimates(int m)
    : total_units(static_cast<std::size_t>(m), 0.0),
      pending_units(static_cast<std::size_t>(m), 0.0),
      total_good(static_cast<std::size_t>(m), 0.0),
      pending_good(static_cast<std::size_t>(m), 0.0),
      qhat(static_cast<std::size_t>(m), std::numeric_limits<double>::quiet_NaN()) {}

void AgentEstimates::refresh(int i) {
  const auto ii = static_cast<std::size_t>(i);
  qhat[ii] = total_units[ii] > 0.0 ? total_good[ii] / total_units[ii]
                                   : std::numeric_limits<double>::quiet_NaN();
}

int explore_phase_length(int n, double horizon, double gamma) {
  if (n < 1) throw ConfigError("explore_phase_length: n must be >= 1");
  if (!(horizon >= 1.0)) throw ConfigError("explore_phase_length: T must be >= 1");
  if (!(gamma > 0.0)) throw ConfigError("explore_phase_length: gamma must be > 0");
  const double rounds = 3.0 * std::log(n * horizon) / (2.0 * n * gamma * gamma);
  // Guard against ln() landing one ulp above an integer.
  return std::max(1, static_cast<int>(std::ceil(rounds - 1e-9)));
}

double ucb_estimate(const AgentEstimates& est, int i, std::int64_t t, int n_eff) {
  const auto ii = static_cast<std::size_t>(i);
  const double w = est.total_units[ii];
  if (!(w > 0.0)) throw std::logic_error("ucb_estimate: no samples for producer");
  if (t < 1) throw std::logic_error("ucb_estimate: round must be >= 1");
  const double q = std::clamp(est.qhat[ii], 0.0, 1.0);
  const double n = static_cast<double>(n_eff);
  return q + std::sqrt(3.0 * std::log(n * static_cast<double>(t)) / (2.0 * n * w));
}

void local_update(AgentEstimates& est, const ProcurementVector& s, const RealizationVector& x) {
  for (std::size_t i = 0; i < s.size(); ++i) {
    const int l = s.units[i];
    if (l == 0) continue;
    est.pending_units[i] += l;
    est.total_units[i] += l;
    est.pending_good[i] += x.good_units[i];
    est.total_good[i] += x.good_units[i];
    est.refresh(static_cast<int>(i));
  }
}

void fcb_sync_update(AgentEstimates& est, int i, long pooled_good, long pooled_units) {
  if (pooled_units == 0) return;
  const auto ii = static_cast<std::size_t>(i);
  const double w = est.total_units[ii];
  const double q = w > 0.0 ? est.qhat[ii] : 0.0;
  est.qhat[ii] = (q * w + static_cast<double>(pooled_good)) / (w + static_cast<double>(pooled_units));
  est.total_units[ii] = w + static_cast<double>(pooled_units);
  est.total_good[ii] += static_cast<double>(pooled_good);
}

int ucb_agents(PolicyKind kind, int n) { return kind == PolicyKind::kFcb ? n : 1; }

void choose_action(PolicyKind kind, const AgentEstimates& est, const ProblemInstance& inst,
                   int agent, std::int64_t t, const PolicyConfig& config,
                   std::vector<double>& ucb_scratch, OracleScratch& oracle_scratch,
                   ProcurementVector& out) {
  const int m = inst.producers();
  if (t < 1) throw std::logic_error("choose_action: round must be >= 1");
  if (t <= config.explore_rounds) {
    out.units.assign(static_cast<std::size_t>(m), 1);
    return;
  }
  const int n_eff = ucb_agents(kind, inst.agents());
  const double n = static_cast<double>(n_eff);
  const double log_term = 3.0 * std::log(n * static_cast<double>(t)) / (2.0 * n);
  ucb_scratch.resize(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    const auto ii = static_cast<std::size_t>(i);
    const double w = est.total_units[ii];
    if (!(w > 0.0)) throw std::logic_error("choose_action: producer never sampled");
    ucb_scratch[ii] = std::clamp(est.qhat[ii], 0.0, 1.0) + std::sqrt(log_term / w);
  }
  OracleInput in{ucb_scratch, inst.costs_of(agent), inst.capacities_of(agent),
                 config.alpha + config.gamma, config.rho};
  greedy_ssa(in, out, oracle_scratch);
}

ProcurementVector choose_action(PolicyKind kind, const AgentEstimates& est,
                                const ProblemInstance& inst, int agent, std::int64_t t,
                                const PolicyConfig& config) {
  std::vector<double> ucb;
  OracleScratch scratch;
  ProcurementVector out;
  choose_action(kind, est, inst, agent, t, config, ucb, scratch, out);
  return out;
}

}  // namespace fedcmab
