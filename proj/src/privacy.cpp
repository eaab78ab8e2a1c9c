#include "fedcmab/privacy.hpp"

#include <bit>

#include <cmath>
#include <ostream>

namespace fedcmab {

double budget_for_round(int z, double epsilon, std::int64_t horizon) {
  if (z < 1) throw ConfigError("budget_for_round: z must be >= 1");
  if (horizon < 2) throw ConfigError("budget_for_round: T must be >= 2");
  const double log_t = std::log2(static_cast<double>(horizon));
  return epsilon / (2.0 * log_t) + std::ldexp(epsilon, -(z + 1));
}

int max_communication_rounds(std::int64_t horizon) {
  if (horizon < 2) return 0;
  // floor(log2 T): the bit width minus one, exact for every integer T.
  return std::bit_width(static_cast<std::uint64_t>(horizon)) - 1;
}

double gaussian_sigma(double sensitivity, double delta, double eps_z) {
  return std::sqrt(2.0 * sensitivity * sensitivity * std::log(1.25 / delta)) / eps_z;
}

PrivatizedMessage privatize(const MessageHeader& header, double w, double y,
                            double sensitivity, double eps_z, double delta, Rng& rng) {
  std::normal_distribution<double> noise(0.0, gaussian_sigma(sensitivity, delta, eps_z));
  PrivatizedMessage msg;
  msg.agent = header.agent;
  msg.producer = header.producer;
  msg.comm_round = header.comm_round;
  msg.t = header.t;
  msg.w_tilde = w + noise(rng);
  msg.y_tilde = y + noise(rng);
  return msg;
}

PrivacyAccountant::PrivacyAccountant(PrivacyParams params, int agents)
    : params_(params),
      eps_(static_cast<std::size_t>(agents), 0.0),
      delta_(static_cast<std::size_t>(agents), 0.0),
      count_(static_cast<std::size_t>(agents), 0) {
  if (!(params.epsilon > 0.0)) throw ConfigError("privacy budget epsilon must be > 0");
  if (!(params.delta > 0.0 && params.delta < 1.0)) throw ConfigError("delta must lie in (0,1)");
}

void PrivacyAccountant::charge(int agent, int comm_round, std::int64_t t, double eps_z,
                               double delta) {
  const auto a = static_cast<std::size_t>(agent);
  const double next = eps_.at(a) + eps_z;
  // Relative slack absorbs summation rounding only.
  if (next > params_.epsilon * (1.0 + 1e-12)) {
    throw BudgetExceeded("agent " + std::to_string(agent) + " would spend epsilon " +
                         std::to_string(next) + " > budget " + std::to_string(params_.epsilon));
  }
  eps_[a] = next;
  delta_[a] += delta;
  ++count_[a];
  entries_.push_back({agent, comm_round, t, eps_z, delta, next});
}

double PrivacyAccountant::spent_epsilon(int agent) const {
  return eps_.at(static_cast<std::size_t>(agent));
}

double PrivacyAccountant::spent_delta(int agent) const {
  return delta_.at(static_cast<std::size_t>(agent));
}

int PrivacyAccountant::charges(int agent) const {
  return count_.at(static_cast<std::size_t>(agent));
}

void PrivacyAccountant::write_csv(std::ostream& out, bool header) const {
  if (header) out << "agent,z,t,eps_z,delta,cumulative_eps\n";
  const auto old = out.precision(17);
  for (const auto& e : entries_) {
    out << e.agent << ',' << e.comm_round << ',' << e.t << ',' << e.eps << ',' << e.delta << ','
        << e.cumulative_eps << '\n';
  }
  out.precision(old);
}

bool leak_predicate(double qhat_before, double qhat_after) { return qhat_after != qhat_before; }

std::vector<NaiveShareRecord> simulate_naive_sharing(const std::vector<int>& units_per_round,
                                                     double quality, int sync_every,
                                                     double sensitivity, double eps,
                                                     double delta, Rng& rng) {
  if (sync_every < 1) throw ConfigError("sync_every must be >= 1");
  std::normal_distribution<double> noise(0.0, gaussian_sigma(sensitivity, delta, eps));
  std::vector<NaiveShareRecord> records;
  double total_units = 0.0;
  double total_good = 0.0;
  double last_shared = 0.0;
  bool shared_once = false;
  long since_sync = 0;
  for (std::size_t r = 0; r < units_per_round.size(); ++r) {
    const int l = units_per_round[r];
    if (l > 0) {
      total_good += std::binomial_distribution<int>(l, quality)(rng);
      total_units += l;
      since_sync += l;
    }
    const auto t = static_cast<std::int64_t>(r) + 1;
    if (t % sync_every != 0 || total_units == 0.0) continue;
    const double qhat = total_good / total_units;
    NaiveShareRecord rec;
    rec.t = t;
    rec.shared_qhat = qhat;
    rec.noisy_total = total_units + noise(rng);
    rec.procured_since_sync = since_sync;
    rec.leak = shared_once && leak_predicate(last_shared, qhat);
    records.push_back(rec);
    last_shared = qhat;
    shared_once = true;
    since_sync = 0;
  }
  return records;
}

}  // namespace fedcmab
