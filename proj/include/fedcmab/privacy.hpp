#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <vector>

#include "fedcmab/domain.hpp"

namespace fedcmab {

struct PrivacyParams {
  double epsilon = 1.0;  // total budget per agent
  double delta = 0.01;
};

/// Thrown when a charge would push an agent past its total epsilon.
class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Budget of communication round z >= 1: eps / (2 log2 T) + eps / 2^(z+1).
double budget_for_round(int z, double epsilon, std::int64_t horizon);

/// Communication rounds a horizon can afford: floor(log2 T). With at most
/// log2 T rounds the per-round budgets sum to at most epsilon; ceil(log2 T)
/// rounds overspend whenever T is not a power of two.
int max_communication_rounds(std::int64_t horizon);

/// Gaussian mechanism scale: sqrt(2 k^2 ln(1.25/delta)) / eps_z.
double gaussian_sigma(double sensitivity, double delta, double eps_z);

/// Noisy (w, y) pair shared by `agent` about `producer`. Only ever built
/// from privatize(), so the exact accumulators never leave the sender.
struct PrivatizedMessage {
  int agent = 0;
  int producer = 0;
  double w_tilde = 0.0;
  double y_tilde = 0.0;
  int comm_round = 0;
  std::int64_t t = 0;
};

struct MessageHeader {
  int agent = 0;
  int producer = 0;
  int comm_round = 0;
  std::int64_t t = 0;
};

/// w + N(0, sigma^2), y + N(0, sigma^2) with independent draws (w first).
PrivatizedMessage privatize(const MessageHeader& header, double w, double y,
                            double sensitivity, double eps_z, double delta, Rng& rng);

/// Append-only basic-composition ledger, one stream per agent.
class PrivacyAccountant {
 public:
  struct Entry {
    int agent;
    int comm_round;
    std::int64_t t;
    double eps;
    double delta;
    double cumulative_eps;
  };

  PrivacyAccountant() = default;
  PrivacyAccountant(PrivacyParams params, int agents);

  /// Appends a charge; throws BudgetExceeded (and records nothing) if the
  /// agent's epsilon total would exceed the configured budget.
  void charge(int agent, int comm_round, std::int64_t t, double eps_z, double delta);

  double spent_epsilon(int agent) const;
  double spent_delta(int agent) const;
  int charges(int agent) const;
  const std::vector<Entry>& entries() const { return entries_; }
  const PrivacyParams& params() const { return params_; }
  int agents() const { return static_cast<int>(eps_.size()); }

  /// agent,z,t,eps_z,delta,cumulative_eps
  void write_csv(std::ostream& out, bool header = true) const;

 private:
  PrivacyParams params_;
  std::vector<double> eps_;
  std::vector<double> delta_;
  std::vector<int> count_;
  std::vector<Entry> entries_;
};

/// An observer holding two exact consecutive quality estimates can tell
/// that the sender procured something in between exactly when they differ.
bool leak_predicate(double qhat_before, double qhat_after);

/// One sync of the naive scheme that shares exact quality estimates next to
/// noisy totals.
struct NaiveShareRecord {
  std::int64_t t = 0;
  double shared_qhat = 0.0;
  double noisy_total = 0.0;
  long procured_since_sync = 0;
  bool leak = false;
};

/// Runs one agent on one producer of quality `quality` with the given
/// per-round procurement plan, syncing every `sync_every` rounds. The
/// estimate is shared exactly; only the unit total gets Gaussian noise.
std::vector<NaiveShareRecord> simulate_naive_sharing(const std::vector<int>& units_per_round,
                                                     double quality, int sync_every,
                                                     double sensitivity, double eps,
                                                     double delta, Rng& rng);

}  // namespace fedcmab
