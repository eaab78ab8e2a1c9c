#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fedcmab/domain.hpp"

namespace fedcmab {

/// Inputs of the quality-constrained subset-selection oracle. `quality` holds
/// the values the oracle should trust (UCB values during learning, true
/// qualities for the benchmark) and may exceed 1.
struct OracleInput {
  std::span<const double> quality;
  std::span<const double> cost;
  std::span<const int> capacity;
  double threshold = 0.0;
  double rho = 1.0;
};

/// Reusable buffers for the allocation-free greedy overload.
struct OracleScratch {
  std::vector<int> order;
};

/// Greedy subset selection: producers are visited by per-unit revenue
/// (descending, lower index first on ties); each profitable producer
/// contributes the largest whole number of units that keeps the running
/// effective quality at or above the threshold. Returns the all-zero vector
/// when nothing can be added.
ProcurementVector greedy_ssa(const OracleInput& in);
void greedy_ssa(const OracleInput& in, ProcurementVector& out, OracleScratch& scratch);

inline constexpr std::uint64_t kDefaultEnumerationCap = 10'000'000;

/// Exhaustive reference: the feasible vector with the largest revenue,
/// lexicographically smallest among ties. Throws std::length_error when
/// prod(k_i + 1) exceeds `cap`.
ProcurementVector brute_force_oracle(const OracleInput& in,
                                     std::uint64_t cap = kDefaultEnumerationCap);

/// Revenue sum_i l_i (rho q_i - c_i) under the oracle's own qualities.
double oracle_revenue(const OracleInput& in, const ProcurementVector& s);

/// True when `s` is zero or its effective quality under in.quality reaches the threshold.
bool oracle_feasible(const OracleInput& in, const ProcurementVector& s);

/// Largest regret an agent can incur: r_{s*} minus the revenue of buying full
/// capacity from every producer with negative unit revenue.
double max_regret_L(const ProblemInstance& inst, int agent, const ProcurementVector& s_star);

}  // namespace fedcmab
