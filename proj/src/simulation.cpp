#include "fedcmab/simulation.hpp"

#include <algorithm>

namespace fedcmab {


PolicyConfig policy_config_for(PolicyKind kind, const ProblemInstance& inst) {
  PolicyConfig cfg;
  const int n = kind == PolicyKind::kNonFederated ? 1 : inst.agents();
  cfg.explore_rounds =
      explore_phase_length(n, static_cast<double>(inst.horizon()), inst.gamma());
  cfg.alpha = inst.alpha();
  cfg.gamma = inst.gamma();
  cfg.rho = inst.rho();
  return cfg;
}

Simulation::Simulation(const ProblemInstance& inst, SimulationSettings settings,
                       std::uint64_t seed)
    : inst_(inst),
      settings_(std::move(settings)),
      config_(policy_config_for(settings_.policy, inst)),
      rng_(seed),
      sampler_(inst),
      estimates_(static_cast<std::size_t>(inst.agents()), AgentEstimates(inst.producers())),
      actions_(static_cast<std::size_t>(inst.agents())),
      ledger_(inst.agents(), settings_.checkpoints.empty() ? checkpoint_schedule(inst.horizon())
                                                           : settings_.checkpoints),
      pooled_units_(static_cast<std::size_t>(inst.producers()), 0),
      pooled_good_(static_cast<std::size_t>(inst.producers()), 0) {
  if (settings_.explore_rounds > 0) config_.explore_rounds = settings_.explore_rounds;
  config_.omega1 = settings_.federation.omega1;
  config_.omega2 = settings_.federation.omega2;
  if (settings_.policy == PolicyKind::kPfcb) {
    accountant_ = PrivacyAccountant(settings_.federation.privacy, inst.agents());
    const std::int64_t stop = std::min(settings_.t_stop, inst.horizon());
    schedule_ = CommSchedule(settings_.t_start, std::max(stop, settings_.t_start),
                             max_communication_rounds(inst.horizon()));
  }
  benchmarks_.reserve(static_cast<std::size_t>(inst.agents()));
  for (int j = 0; j < inst.agents(); ++j) {
    benchmarks_.push_back(make_benchmark(inst, j, settings_.exact_benchmark));
    ledger_.set_benchmark(j, benchmarks_.back().r_star, benchmarks_.back().max_regret);
  }
}

bool Simulation::step() {
  if (t_ >= inst_.horizon()) return false;
  const std::int64_t t = ++t_;
  const int n = inst_.agents();
  const bool pooled = settings_.policy == PolicyKind::kFcb;
  if (pooled) {
    std::fill(pooled_units_.begin(), pooled_units_.end(), 0);
    std::fill(pooled_good_.begin(), pooled_good_.end(), 0);
  }

  for (int j = 0; j < n; ++j) {
    const auto jj = static_cast<std::size_t>(j);
    auto& est = estimates_[jj];
    auto& action = actions_[jj];
    choose_action(settings_.policy, est, inst_, j, t, config_, ucb_scratch_, oracle_scratch_,
                  action);
    sampler_.sample(action, rng_, realization_);

    const bool ok = constraint_satisfied(inst_, action, inst_.alpha());
    const auto& bench = benchmarks_[jj];
    const double regret = ok ? bench.r_star - expected_revenue(inst_, j, action) : bench.max_regret;
    ledger_.record(j, regret, !ok);

    if (pooled) {
      for (std::size_t i = 0; i < action.size(); ++i) {
        pooled_units_[i] += action.units[i];
        pooled_good_[i] += realization_.good_units[i];
      }
    } else {
      local_update(est, action, realization_);
    }
  }

  if (pooled) {
    for (auto& est : estimates_) {
      for (int i = 0; i < inst_.producers(); ++i) {
        const auto ii = static_cast<std::size_t>(i);
        fcb_sync_update(est, i, pooled_good_[ii], pooled_units_[ii]);
      }
    }
  } else if (settings_.policy == PolicyKind::kPfcb && should_communicate(t, schedule_)) {
    const RoundOutcome outcome =
        run_communication_round(estimates_, inst_, schedule_.z + 1, t, settings_.federation,
                                accountant_, rng_, settings_.trace);
    advance(schedule_);
    comm_times_.push_back(t);
    ledger_.count_messages(outcome.accepted, outcome.delivered - outcome.accepted);
  }

  ledger_.close_round(t);
  return true;
}

void Simulation::run_to_end() {
  while (step()) {
  }
}

SimulationResult simulate(const ProblemInstance& inst, const SimulationSettings& settings,
                          std::uint64_t seed) {
  Simulation sim(inst, settings, seed);
  sim.run_to_end();
  return {sim.ledger(), sim.accountant(), sim.communication_times()};
}

}  // namespace fedcmab
