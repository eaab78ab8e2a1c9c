#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fedcmab/domain.hpp"
#include "fedcmab/oracle.hpp"

namespace fedcmab {

enum class PolicyKind { kNonFederated, kFcb, kPfcb };

std::string to_string(PolicyKind kind);
PolicyKind policy_from_string(const std::string& name);

struct PolicyConfig {
  int explore_rounds = 1;
  double omega1 = 0.1;  // acceptance-width factor
  double omega2 = 10.0;  // weight on accepted communicated data
  double alpha = 0.4;
  double gamma = 0.1;
  double rho = 2.0;
};

/// Per-agent learning state. Totals include accepted communicated data
/// (weighted); the pending accumulators hold local data not yet shared.
struct AgentEstimates {
  std::vector<double> total_units;    // W
  std::vector<double> pending_units;  // w
  std::vector<double> total_good;     // Y
  std::vector<double> pending_good;   // y
  std::vector<double> qhat;           // Y / W, NaN before the first sample

  AgentEstimates() = default;
  explicit AgentEstimates(int m);

  int producers() const { return static_cast<int>(total_units.size()); }

  /// Recomputes qhat_i = Y_i / W_i.
  void refresh(int i);

  bool operator==(const AgentEstimates&) const = default;
};

/// Pure-exploration rounds: ceil(3 ln(nT) / (2 n gamma^2)). Pass n = 1 for
/// the non-federated policy.
int explore_phase_length(int n, double horizon, double gamma);

/// qhat_i (clamped to [0,1]) plus sqrt(3 ln(n_eff t) / (2 n_eff W_i)).
double ucb_estimate(const AgentEstimates& est, int i, std::int64_t t, int n_eff);

/// Adds one round of local observations to both totals and pending accumulators.
void local_update(AgentEstimates& est, const ProcurementVector& s, const RealizationVector& x);

/// Pooled synchronisation step of the homogeneous federated algorithm.
void fcb_sync_update(AgentEstimates& est, int i, long pooled_good, long pooled_units);

/// Width factor n_eff used by the UCB bonus of each policy.
int ucb_agents(PolicyKind kind, int n);

/// Explore phase: one unit from every producer. Afterwards: greedy oracle
/// over UCB values with threshold alpha + gamma.
ProcurementVector choose_action(PolicyKind kind, const AgentEstimates& est,
                                const ProblemInstance& inst, int agent, std::int64_t t,
                                const PolicyConfig& config);

/// Allocation-free variant used by the simulator.
void choose_action(PolicyKind kind, const AgentEstimates& est, const ProblemInstance& inst,
                   int agent, std::int64_t t, const PolicyConfig& config,
                   std::vector<double>& ucb_scratch, OracleScratch& oracle_scratch,
                   ProcurementVector& out);

}  // namespace fedcmab
