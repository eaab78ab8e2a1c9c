#include "fedcmab/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace fedcmab {

double oracle_revenue(const OracleInput& in, const ProcurementVector& s) {
  double total = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    total += s.units[i] * (in.rho * in.quality[i] - in.cost[i]);
  }
  return total;
}

bool oracle_feasible(const OracleInput& in, const ProcurementVector& s) {
  const auto eq = effective_quality(s, in.quality);
  return !eq || *eq >= in.threshold;
}

void greedy_ssa(const OracleInput& in, ProcurementVector& out, OracleScratch& scratch) {
  const std::size_t m = in.quality.size();
  out.units.assign(m, 0);

  auto& order = scratch.order;
  order.resize(m);
  std::iota(order.begin(), order.end(), 0);
  auto unit_revenue = [&](int i) {
    const auto ii = static_cast<std::size_t>(i);
    return in.rho * in.quality[ii] - in.cost[ii];
  };
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const double ra = unit_revenue(a);
    const double rb = unit_revenue(b);
    return ra > rb || (ra == rb && a < b);
  });

  const double theta = in.threshold;
  double weighted = 0.0;  // sum l_i q_i
  double units = 0.0;     // sum l_i
  int last_partial = -1;
  for (int i : order) {
    if (!(unit_revenue(i) > 0.0)) break;
    const auto ii = static_cast<std::size_t>(i);
    const double q = in.quality[ii];
    const int k = in.capacity[ii];
    long u = 0;
    if (q >= theta) {
      u = k;
    } else {
      const double slack = weighted - theta * units;
      if (slack > 0.0) {
        u = std::min<long>(k, static_cast<long>(std::floor(slack / (theta - q))));
        while (u > 0 && weighted + u * q < theta * (units + u)) --u;
      }
      if (u > 0) last_partial = i;
    }
    out.units[ii] = static_cast<int>(u);
    weighted += u * q;
    units += u;
  }

  // The running sums accumulate in revenue order while feasibility is judged
  // in index order; trim the last below-threshold block if rounding disagrees.
  while (last_partial >= 0 && !oracle_feasible(in, out)) {
    auto& l = out.units[static_cast<std::size_t>(last_partial)];
    if (l == 0) break;
    --l;
  }
}

ProcurementVector greedy_ssa(const OracleInput& in) {
  ProcurementVector out;
  OracleScratch scratch;
  greedy_ssa(in, out, scratch);
  return out;
}

ProcurementVector brute_force_oracle(const OracleInput& in, std::uint64_t cap) {
  const std::size_t m = in.quality.size();
  std::uint64_t combos = 1;
  for (std::size_t i = 0; i < m; ++i) {
    combos *= static_cast<std::uint64_t>(in.capacity[i]) + 1;
    if (combos > cap) throw std::length_error("brute_force_oracle: enumeration cap exceeded");
  }

  ProcurementVector current(m);
  ProcurementVector best(m);
  double best_revenue = 0.0;  // the all-zero vector is always feasible
  // Odometer with the last producer fastest visits vectors in lexicographic
  // order, so keeping strict improvements keeps the smallest tie.
  while (true) {
    std::size_t pos = m;
    while (pos > 0) {
      --pos;
      if (current.units[pos] < in.capacity[pos]) {
        ++current.units[pos];
        std::fill(current.units.begin() + static_cast<std::ptrdiff_t>(pos) + 1,
                  current.units.end(), 0);
        break;
      }
      if (pos == 0) return best;
    }
    if (m == 0) return best;
    if (!oracle_feasible(in, current)) continue;
    const double r = oracle_revenue(in, current);
    if (r > best_revenue) {
      best_revenue = r;
      best = current;
    }
  }
}

double max_regret_L(const ProblemInstance& inst, int agent, const ProcurementVector& s_star) {
  const auto r = inst.unit_revenue_of(agent);
  const auto k = inst.capacities_of(agent);
  double worst = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) worst += k[i] * std::min(0.0, r[i]);
  return expected_revenue(inst, agent, s_star) - worst;
}

}  // namespace fedcmab
