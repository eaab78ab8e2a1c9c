#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fedcmab/domain.hpp"
#include "fedcmab/oracle.hpp"

namespace fedcmab {

/// Oracle optimum under true qualities (threshold alpha) and the regret cap.
struct AgentBenchmark {
  ProcurementVector s_star;
  double r_star = 0.0;
  double max_regret = 0.0;  // L
};

/// `exact` selects the enumeration oracle instead of the greedy one; it is
/// only usable on small instances.
AgentBenchmark make_benchmark(const ProblemInstance& inst, int agent, bool exact = false);

/// r_{s*} - r_s when `chosen` meets alpha under true qualities, otherwise L.
double round_regret(const ProblemInstance& inst, int agent, const ProcurementVector& chosen,
                    const ProcurementVector& s_star, double alpha, double max_regret);
double round_regret(const ProblemInstance& inst, int agent, const ProcurementVector& chosen,
                    const AgentBenchmark& bench, double alpha);

/// R_A / R_NF, or nullopt when R_NF is not positive.
std::optional<double> frr(double regret_federated, double regret_nonfederated);

/// 1, 2, 5, 10, 20, 50, ... up to T, plus T itself.
std::vector<std::int64_t> checkpoint_schedule(std::int64_t horizon);

/// Per-run regret bookkeeping. Every round is recorded; cumulative values are
/// snapshotted at checkpoints.
class RegretLedger {
 public:
  struct Checkpoint {
    std::int64_t t;
    std::vector<double> cum_regret;
    std::vector<long> violations;
  };

  RegretLedger() = default;
  RegretLedger(int agents, std::vector<std::int64_t> checkpoints);

  void set_benchmark(int agent, double r_star, double max_regret);
  void record(int agent, double regret, bool violated);
  /// Snapshots the cumulative state when t is a checkpoint.
  void close_round(std::int64_t t);

  void count_messages(long accepted, long rejected);

  int agents() const { return static_cast<int>(cum_.size()); }
  double cumulative(int agent) const { return cum_.at(static_cast<std::size_t>(agent)); }
  double cumulative_total() const;
  long violations(int agent) const { return violations_.at(static_cast<std::size_t>(agent)); }
  double r_star(int agent) const { return r_star_.at(static_cast<std::size_t>(agent)); }
  double max_regret(int agent) const { return max_regret_.at(static_cast<std::size_t>(agent)); }
  long accepted_messages() const { return accepted_; }
  long rejected_messages() const { return rejected_; }
  const std::vector<Checkpoint>& checkpoints() const { return snapshots_; }

 private:
  std::vector<double> cum_;
  std::vector<long> violations_;
  std::vector<double> r_star_;
  std::vector<double> max_regret_;
  std::vector<std::int64_t> schedule_;
  std::size_t next_checkpoint_ = 0;
  std::vector<Checkpoint> snapshots_;
  long accepted_ = 0;
  long rejected_ = 0;
};

/// Checkpointed totals of one finished run, as consumed by aggregate().
struct RunRecord {
  std::string label;           // variant, e.g. "pfcb:eps=1"
  std::string baseline_label;  // variant to pair with for FRR; empty for none
  std::string group;           // runs are paired only inside a group
  int instance_index = 0;
  int sim_index = 0;
  int agents = 1;
  std::vector<std::int64_t> t;
  std::vector<double> total_regret;  // summed over agents
};

struct SummaryRow {
  std::string group;
  std::string label;
  std::int64_t t = 0;
  int runs = 0;
  double mean_regret = 0.0;
  double stddev_regret = 0.0;
  double mean_per_agent_regret = 0.0;
  std::optional<double> mean_frr;
};

/// Mean and sample standard deviation of total regret per (group, label,
/// checkpoint), mean per-agent regret and mean per-run FRR against the
/// matching baseline run (same group, instance and simulation index).
std::vector<SummaryRow> aggregate(std::span<const RunRecord> runs);

}  // namespace fedcmab
