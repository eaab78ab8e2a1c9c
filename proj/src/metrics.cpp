#include "fedcmab/metrics.hpp"

#include <cmath>
#include <map>
#include <numeric>
#include <tuple>

namespace fedcmab {

AgentBenchmark make_benchmark(const ProblemInstance& inst, int agent, bool exact) {
  OracleInput in{inst.quality(), inst.costs_of(agent), inst.capacities_of(agent), inst.alpha(),
                 inst.rho()};
  AgentBenchmark b;
  b.s_star = exact ? brute_force_oracle(in) : greedy_ssa(in);
  b.r_star = expected_revenue(inst, agent, b.s_star);
  b.max_regret = max_regret_L(inst, agent, b.s_star);
  return b;
}

double round_regret(const ProblemInstance& inst, int agent, const ProcurementVector& chosen,
                    const ProcurementVector& s_star, double alpha, double max_regret) {
  if (!constraint_satisfied(inst, chosen, alpha)) return max_regret;
  return expected_revenue(inst, agent, s_star) - expected_revenue(inst, agent, chosen);
}

double round_regret(const ProblemInstance& inst, int agent, const ProcurementVector& chosen,
                    const AgentBenchmark& bench, double alpha) {
  if (!constraint_satisfied(inst, chosen, alpha)) return bench.max_regret;
  return bench.r_star - expected_revenue(inst, agent, chosen);
}

std::optional<double> frr(double regret_federated, double regret_nonfederated) {
  if (!(regret_nonfederated > 0.0)) return std::nullopt;
  return regret_federated / regret_nonfederated;
}

std::vector<std::int64_t> checkpoint_schedule(std::int64_t horizon) {
  std::vector<std::int64_t> out;
  for (std::int64_t decade = 1; decade <= horizon; decade *= 10) {
    for (std::int64_t mult : {1, 2, 5}) {
      const std::int64_t t = decade * mult;
      if (t <= horizon) out.push_back(t);
    }
    if (decade > horizon / 10) break;
  }
  if (out.empty() || out.back() != horizon) out.push_back(horizon);
  return out;
}

RegretLedger::RegretLedger(int agents, std::vector<std::int64_t> checkpoints)
    : cum_(static_cast<std::size_t>(agents), 0.0),
      violations_(static_cast<std::size_t>(agents), 0),
      r_star_(static_cast<std::size_t>(agents), 0.0),
      max_regret_(static_cast<std::size_t>(agents), 0.0),
      schedule_(std::move(checkpoints)) {}

void RegretLedger::set_benchmark(int agent, double r_star, double max_regret) {
  r_star_.at(static_cast<std::size_t>(agent)) = r_star;
  max_regret_.at(static_cast<std::size_t>(agent)) = max_regret;
}

void RegretLedger::record(int agent, double regret, bool violated) {
  const auto a = static_cast<std::size_t>(agent);
  cum_[a] += regret;
  if (violated) ++violations_[a];
}

void RegretLedger::close_round(std::int64_t t) {
  while (next_checkpoint_ < schedule_.size() && schedule_[next_checkpoint_] < t) ++next_checkpoint_;
  if (next_checkpoint_ < schedule_.size() && schedule_[next_checkpoint_] == t) {
    snapshots_.push_back({t, cum_, violations_});
    ++next_checkpoint_;
  }
}

void RegretLedger::count_messages(long accepted, long rejected) {
  accepted_ += accepted;
  rejected_ += rejected;
}

double RegretLedger::cumulative_total() const {
  return std::accumulate(cum_.begin(), cum_.end(), 0.0);
}

std::vector<SummaryRow> aggregate(std::span<const RunRecord> runs) {
  using RunKey = std::tuple<std::string, std::string, int, int>;
  std::map<RunKey, const RunRecord*> by_key;
  for (const auto& r : runs) by_key[{r.group, r.label, r.instance_index, r.sim_index}] = &r;

  struct Acc {
    std::vector<std::int64_t> t;
    std::vector<std::vector<double>> totals;     // per checkpoint, one value per run
    std::vector<std::vector<double>> per_agent;  // per checkpoint
    std::vector<std::vector<double>> ratios;     // per checkpoint
  };
  // Insertion order of (group, label) is kept for stable output.
  std::vector<std::pair<std::string, std::string>> order;
  std::map<std::pair<std::string, std::string>, Acc> accs;

  for (const auto& r : runs) {
    const auto key = std::make_pair(r.group, r.label);
    auto [it, inserted] = accs.try_emplace(key);
    Acc& acc = it->second;
    if (inserted) {
      order.push_back(key);
      acc.t = r.t;
      acc.totals.resize(r.t.size());
      acc.per_agent.resize(r.t.size());
      acc.ratios.resize(r.t.size());
    }
    const RunRecord* base = nullptr;
    if (!r.baseline_label.empty()) {
      auto b = by_key.find({r.group, r.baseline_label, r.instance_index, r.sim_index});
      if (b != by_key.end()) base = b->second;
    }
    const std::size_t points = std::min(acc.t.size(), r.total_regret.size());
    for (std::size_t c = 0; c < points; ++c) {
      acc.totals[c].push_back(r.total_regret[c]);
      acc.per_agent[c].push_back(r.total_regret[c] / r.agents);
      if (base != nullptr && c < base->total_regret.size()) {
        if (auto f = frr(r.total_regret[c], base->total_regret[c])) acc.ratios[c].push_back(*f);
      }
    }
  }

  auto mean = [](const std::vector<double>& v) {
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  };
  std::vector<SummaryRow> rows;
  for (const auto& key : order) {
    const Acc& acc = accs.at(key);
    for (std::size_t c = 0; c < acc.t.size(); ++c) {
      SummaryRow row;
      row.group = key.first;
      row.label = key.second;
      row.t = acc.t[c];
      row.runs = static_cast<int>(acc.totals[c].size());
      row.mean_regret = mean(acc.totals[c]);
      if (acc.totals[c].size() > 1) {
        double ss = 0.0;
        for (double v : acc.totals[c]) ss += (v - row.mean_regret) * (v - row.mean_regret);
        row.stddev_regret = std::sqrt(ss / static_cast<double>(acc.totals[c].size() - 1));
      }
      row.mean_per_agent_regret = mean(acc.per_agent[c]);
      if (!acc.ratios[c].empty()) row.mean_frr = mean(acc.ratios[c]);
      rows.push_back(row);
    }
  }
  return rows;
}

}  // namespace fedcmab
