#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "fedcmab/domain.hpp"
#include "fedcmab/policies.hpp"
#include "fedcmab/privacy.hpp"

namespace fedcmab {

/// Doubling communication schedule restricted to the window [t_start, t_stop].
struct CommSchedule {
  std::int64_t t_start = 200;
  std::int64_t t_stop = 40000;
  std::int64_t tau = 1;
  int z = 0;           // communication rounds fired so far
  int max_rounds = 0;  // hard cap on z; 0 means uncapped

  CommSchedule() = default;
  CommSchedule(std::int64_t start, std::int64_t stop, int cap = 0);
};

/// t in [t_start, t_stop], t >= tau, and the round cap not yet reached.
bool should_communicate(std::int64_t t, const CommSchedule& sched);

/// Bookkeeping after a fired round: tau doubles and z increments.
void advance(CommSchedule& sched);

struct CheckResult {
  double total_units;
  double total_good;
  bool accepted;
};

/// Receiver-side filter. Accepts (w~, y~) when w~ > w_min and y~/w~ lies in
/// [qhat - r, qhat + r] with qhat = Y/W and r = omega1 sqrt(3 ln(n t) / (2W));
/// an accepted pair is merged with weight omega2.
CheckResult check_and_update(double total_units, double w_tilde, double total_good,
                             double y_tilde, double omega1, double omega2, int n,
                             std::int64_t t, double w_min = 1.0);

/// Messages one receiver gets in one communication round, ordered by
/// (sender, producer).
struct InboxBatch {
  int receiver = 0;
  std::vector<PrivatizedMessage> messages;
};

InboxBatch inbox_for(int receiver, std::span<const PrivatizedMessage> outbox);

struct FederationParams {
  PrivacyParams privacy;
  double omega1 = 0.1;
  double omega2 = 10.0;
  double w_min = 1.0;
  // Perturb w and y with half the round budget each instead of the full one.
  bool strict_composition = false;
  // Charge the accountant even when there is nobody to send to.
  bool charge_when_silent = false;
};

struct TraceRecord {
  std::int64_t t;
  int z;
  int sender;
  int receiver;
  int producer;
  double w_tilde;
  double y_tilde;
  bool accepted;
};

using TraceSink = std::function<void(const TraceRecord&)>;

struct RoundOutcome {
  long delivered = 0;
  long accepted = 0;
};

/// One synchronous exchange (round `z`, time `t`): every agent privatizes its
/// pending accumulators per producer with sensitivity k_ij, every other agent
/// filters them against its state from the start of the round, then all
/// pending accumulators are reset. The accountant is charged once per
/// sending agent before any noise is drawn, so BudgetExceeded leaves every
/// state untouched.
RoundOutcome run_communication_round(std::span<AgentEstimates> agents,
                                     const ProblemInstance& inst, int z, std::int64_t t,
                                     const FederationParams& params,
                                     PrivacyAccountant& accountant, Rng& rng,
                                     const TraceSink* trace = nullptr);

}  // namespace fedcmab
