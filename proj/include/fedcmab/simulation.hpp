#pragma once

#include <cstdint>
#include <vector>

#include "fedcmab/domain.hpp"
#include "fedcmab/federation.hpp"
#include "fedcmab/metrics.hpp"
#include "fedcmab/policies.hpp"
#include "fedcmab/privacy.hpp"

namespace fedcmab {

struct SimulationSettings {
  PolicyKind policy = PolicyKind::kPfcb;
  FederationParams federation;  // privacy and acceptance parameters (pfcb only)
  std::int64_t t_start = 200;
  std::int64_t t_stop = 40000;
  bool exact_benchmark = false;
  int explore_rounds = 0;  // > 0 replaces the derived pure-exploration length
  std::vector<std::int64_t> checkpoints;  // empty: checkpoint_schedule(T)
  const TraceSink* trace = nullptr;
};

/// Explore length for a policy on an instance (the non-federated policy
/// drops the agent count).
PolicyConfig policy_config_for(PolicyKind kind, const ProblemInstance& inst);

/// One run of one policy on one instance, advanced a round at a time. All
/// randomness (realizations and privacy noise) comes from the run's own
/// generator, so a run is a pure function of (instance, settings, seed).
class Simulation {
 public:
  Simulation(const ProblemInstance& inst, SimulationSettings settings, std::uint64_t seed);

  /// Plays round t = round() + 1 for every agent. Returns false once T is reached.
  bool step();
  void run_to_end();

  std::int64_t round() const { return t_; }
  const std::vector<AgentEstimates>& estimates() const { return estimates_; }
  const std::vector<ProcurementVector>& last_actions() const { return actions_; }
  const std::vector<AgentBenchmark>& benchmarks() const { return benchmarks_; }
  const RegretLedger& ledger() const { return ledger_; }
  const PrivacyAccountant& accountant() const { return accountant_; }
  const CommSchedule& schedule() const { return schedule_; }
  const std::vector<std::int64_t>& communication_times() const { return comm_times_; }
  const PolicyConfig& config() const { return config_; }

 private:
  const ProblemInstance& inst_;
  SimulationSettings settings_;
  PolicyConfig config_;
  Rng rng_;
  BinomialTable sampler_;
  std::int64_t t_ = 0;
  std::vector<AgentEstimates> estimates_;
  std::vector<ProcurementVector> actions_;
  std::vector<AgentBenchmark> benchmarks_;
  RegretLedger ledger_;
  PrivacyAccountant accountant_;
  CommSchedule schedule_;
  std::vector<std::int64_t> comm_times_;

  RealizationVector realization_;
  std::vector<double> ucb_scratch_;
  OracleScratch oracle_scratch_;
  std::vector<long> pooled_units_;
  std::vector<long> pooled_good_;
};

struct SimulationResult {
  RegretLedger ledger;
  PrivacyAccountant accountant;
  std::vector<std::int64_t> communication_times;
};

SimulationResult simulate(const ProblemInstance& inst, const SimulationSettings& settings,
                          std::uint64_t seed);

}  // namespace fedcmab
