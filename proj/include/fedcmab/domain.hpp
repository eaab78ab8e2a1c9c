#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fedcmab {

/// Generator used for every stochastic step. Each simulation worker owns one.
using Rng = std::mt19937_64;

/// Raised for invalid parameters anywhere in the library.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Distribution { kUniform, kNormal };

std::string to_string(Distribution d);
Distribution distribution_from_string(const std::string& name);

/// How qualities, costs and capacities are drawn for a random instance.
struct InstanceSpec {
  Distribution distribution = Distribution::kUniform;
  // Only used for Distribution::kNormal.
  double mean = 0.4;
  double stddev = 0.2;
  int k_lo = 1;
  int k_hi = 50;
  std::uint64_t seed = 0;

  bool operator==(const InstanceSpec&) const = default;
};

/// Units procured from each producer by one agent in one round.
struct ProcurementVector {
  std::vector<int> units;

  ProcurementVector() = default;
  explicit ProcurementVector(std::size_t m) : units(m, 0) {}
  explicit ProcurementVector(std::vector<int> u) : units(std::move(u)) {}

  std::size_t size() const { return units.size(); }
  int operator[](std::size_t i) const { return units[i]; }
  int& operator[](std::size_t i) { return units[i]; }
  bool is_zero() const;
  long total() const;

  bool operator==(const ProcurementVector&) const = default;
};

/// Count of quality-1 units observed per producer in one round.
struct RealizationVector {
  std::vector<int> good_units;

  RealizationVector() = default;
  explicit RealizationVector(std::size_t m) : good_units(m, 0) {}

  std::size_t size() const { return good_units.size(); }
  int operator[](std::size_t i) const { return good_units[i]; }

  bool operator==(const RealizationVector&) const = default;
};

/// Plain field bundle used to build a ProblemInstance. Matrices are indexed
/// [producer][agent].
struct InstanceData {
  std::vector<double> quality;
  std::vector<std::vector<double>> cost;
  std::vector<std::vector<int>> capacity;
  double rho = 2.0;
  double alpha = 0.4;
  double gamma = 0.1;
  std::int64_t horizon = 1;
  InstanceSpec spec;
};

/// Ground truth of one simulation. Immutable once constructed, so a single
/// instance can be shared by concurrent workers.
class ProblemInstance {
 public:
  /// Validates every invariant; throws ConfigError on violation.
  explicit ProblemInstance(InstanceData data);

  int producers() const { return m_; }
  int agents() const { return n_; }
  std::int64_t horizon() const { return horizon_; }
  double rho() const { return rho_; }
  double alpha() const { return alpha_; }
  double gamma() const { return gamma_; }
  const InstanceSpec& spec() const { return spec_; }

  std::span<const double> quality() const { return quality_; }
  double quality(int i) const { return quality_[static_cast<std::size_t>(i)]; }
  double cost(int i, int agent) const { return cost_[index(i, agent)]; }
  int capacity(int i, int agent) const { return capacity_[index(i, agent)]; }

  /// Per-producer views for one agent (contiguous).
  std::span<const double> costs_of(int agent) const;
  std::span<const int> capacities_of(int agent) const;

  /// rho * q_i - c_ij for every producer i.
  std::span<const double> unit_revenue_of(int agent) const;

  /// Same instance restricted to its first `n` agents.
  ProblemInstance with_agents(int n) const;

  InstanceData data() const;

 private:
  std::size_t index(int i, int agent) const {
    return static_cast<std::size_t>(agent) * static_cast<std::size_t>(m_) +
           static_cast<std::size_t>(i);
  }

  int m_ = 0;
  int n_ = 0;
  std::int64_t horizon_ = 1;
  double rho_ = 2.0;
  double alpha_ = 0.4;
  double gamma_ = 0.1;
  InstanceSpec spec_;
  std::vector<double> quality_;
  // Agent-major storage: entry (i, j) lives at j * m + i.
  std::vector<double> cost_;
  std::vector<int> capacity_;
  std::vector<double> unit_revenue_;
};

/// Draws a random instance. Qualities come from a producer-level stream and
/// each agent's costs and capacities from its own stream, so the instance
/// generated for n agents is a prefix of the one generated for n' > n.
ProblemInstance generate_instance(const InstanceSpec& spec, int m, int n, std::int64_t horizon,
                                  double rho, double alpha, double gamma);

/// x_i ~ Binomial(l_i, q_i) for every producer.
RealizationVector sample_realizations(const ProblemInstance& inst, const ProcurementVector& s,
                                      Rng& rng);

/// Inversion sampler for Binomial(l, q_i) with the CDFs for every producer
/// and every l up to the largest capacity precomputed. Produces the same
/// distribution as sample_realizations() at a fraction of the cost; the
/// simulator uses it on its hot path.
class BinomialTable {
 public:
  explicit BinomialTable(const ProblemInstance& inst);

  int sample(int producer, int units, Rng& rng) const;
  void sample(const ProcurementVector& s, Rng& rng, RealizationVector& out) const;

  /// Exact Binomial(units, q) probability mass function, used to build the table.
  static std::vector<double> pmf(int units, double q);

 private:
  struct Producer {
    double q = 0.0;
    int max_units = 0;
    std::vector<std::size_t> offset;  // start of the CDF for each l in cdf
    std::vector<double> cdf;
  };
  std::vector<Producer> producers_;
};

/// Sum_i l_i * (rho * q_i - c_ij).
double expected_revenue(const ProblemInstance& inst, int agent, const ProcurementVector& s);

/// Sum_i l_i q_i / Sum_i l_i, or nullopt for the all-zero vector.
std::optional<double> effective_quality(const ProcurementVector& s, std::span<const double> q);

/// True when the effective quality under the true qualities reaches
/// `threshold`. The all-zero vector counts as satisfying.
bool constraint_satisfied(const ProblemInstance& inst, const ProcurementVector& s,
                          double threshold);

/// Vector with one unit from every producer.
ProcurementVector all_ones(int m);

}  // namespace fedcmab
