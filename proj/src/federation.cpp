#include "fedcmab/federation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fedcmab {

CommSchedule::CommSchedule(std::int64_t start, std::int64_t stop, int cap)
    : t_start(start), t_stop(stop), max_rounds(cap) {
  if (start < 1 || stop < start) throw ConfigError("communication window must satisfy 1 <= t_start <= t_stop");
}

bool should_communicate(std::int64_t t, const CommSchedule& sched) {
  if (sched.max_rounds > 0 && sched.z >= sched.max_rounds) return false;
  return t >= sched.t_start && t <= sched.t_stop && t >= sched.tau;
}

void advance(CommSchedule& sched) {
  sched.tau *= 2;
  ++sched.z;
}

CheckResult check_and_update(double total_units, double w_tilde, double total_good,
                             double y_tilde, double omega1, double omega2, int n,
                             std::int64_t t, double w_min) {
  if (!(total_units > 0.0)) throw std::logic_error("check_and_update: receiver has no data");
  CheckResult out{total_units, total_good, false};
  if (!(w_tilde > w_min)) return out;
  const double qhat = total_good / total_units;
  const double radius =
      omega1 * std::sqrt(3.0 * std::log(static_cast<double>(n) * static_cast<double>(t)) /
                         (2.0 * total_units));
  const double ratio = y_tilde / w_tilde;
  if (ratio >= qhat - radius && ratio <= qhat + radius) {
    out.total_units = total_units + omega2 * w_tilde;
    out.total_good = total_good + omega2 * y_tilde;
    out.accepted = true;
  }
  return out;
}

InboxBatch inbox_for(int receiver, std::span<const PrivatizedMessage> outbox) {
  InboxBatch batch;
  batch.receiver = receiver;
  for (const auto& msg : outbox) {
    if (msg.agent != receiver) batch.messages.push_back(msg);
  }
  return batch;
}

RoundOutcome run_communication_round(std::span<AgentEstimates> agents,
                                     const ProblemInstance& inst, int z, std::int64_t t,
                                     const FederationParams& params,
                                     PrivacyAccountant& accountant, Rng& rng,
                                     const TraceSink* trace) {
  const int n = static_cast<int>(agents.size());
  const int m = inst.producers();
  RoundOutcome outcome;

  const bool sending = n >= 2;
  if (sending || params.charge_when_silent) {
    const double eps_z = budget_for_round(z, params.privacy.epsilon, inst.horizon());
    for (int j = 0; j < n; ++j) accountant.charge(j, z, t, eps_z, params.privacy.delta);
  }

  if (sending) {
    const double eps_z = budget_for_round(z, params.privacy.epsilon, inst.horizon());
    const double eps_value = params.strict_composition ? eps_z / 2.0 : eps_z;
    const double delta_value =
        params.strict_composition ? params.privacy.delta / 2.0 : params.privacy.delta;

    std::vector<PrivatizedMessage> outbox;
    outbox.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(m));
    for (int j = 0; j < n; ++j) {
      const auto& sender = agents[static_cast<std::size_t>(j)];
      for (int i = 0; i < m; ++i) {
        const auto ii = static_cast<std::size_t>(i);
        outbox.push_back(privatize({j, i, z, t}, sender.pending_units[ii],
                                   sender.pending_good[ii], inst.capacity(i, j), eps_value,
                                   delta_value, rng));
      }
    }

    // Decisions read the receiver's state from before any merge this round.
    for (int r = 0; r < n; ++r) {
      auto& receiver = agents[static_cast<std::size_t>(r)];
      // Merges accumulate in the order W + w2*w~_1 + w2*w~_2 ..., the same
      // expression check_and_update evaluates for a single message.
      std::vector<double> new_units(receiver.total_units);
      std::vector<double> new_good(receiver.total_good);
      std::vector<bool> touched(static_cast<std::size_t>(m), false);
      const InboxBatch inbox = inbox_for(r, outbox);
      for (const auto& msg : inbox.messages) {
        const auto ii = static_cast<std::size_t>(msg.producer);
        const CheckResult res =
            check_and_update(receiver.total_units[ii], msg.w_tilde, receiver.total_good[ii],
                             msg.y_tilde, params.omega1, params.omega2, n, t, params.w_min);
        ++outcome.delivered;
        if (res.accepted) {
          ++outcome.accepted;
          new_units[ii] += params.omega2 * msg.w_tilde;
          new_good[ii] += params.omega2 * msg.y_tilde;
          touched[ii] = true;
        }
        if (trace != nullptr && *trace) {
          (*trace)({t, z, msg.agent, r, msg.producer, msg.w_tilde, msg.y_tilde, res.accepted});
        }
      }
      for (int i = 0; i < m; ++i) {
        const auto ii = static_cast<std::size_t>(i);
        if (!touched[ii]) continue;
        receiver.total_units[ii] = new_units[ii];
        receiver.total_good[ii] = new_good[ii];
        receiver.refresh(i);
      }
    }
  }

  for (auto& agent : agents) {
    std::fill(agent.pending_units.begin(), agent.pending_units.end(), 0.0);
    std::fill(agent.pending_good.begin(), agent.pending_good.end(), 0.0);
  }
  return outcome;
}

}  // namespace fedcmab
