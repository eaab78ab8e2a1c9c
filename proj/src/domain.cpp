#include "fedcmab/domain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "fedcmab/seeding.hpp"

namespace fedcmab {

std::string to_string(Distribution d) {
  return d == Distribution::kUniform ? "uniform" : "normal";
}

Distribution distribution_from_string(const std::string& name) {
  if (name == "uniform") return Distribution::kUniform;
  if (name == "normal") return Distribution::kNormal;
  throw ConfigError("unknown distribution '" + name + "' (expected uniform|normal)");
}

bool ProcurementVector::is_zero() const {
  return std::all_of(units.begin(), units.end(), [](int l) { return l == 0; });
}

long ProcurementVector::total() const {
  return std::accumulate(units.begin(), units.end(), 0L);
}

ProblemInstance::ProblemInstance(InstanceData data)
    : horizon_(data.horizon),
      rho_(data.rho),
      alpha_(data.alpha),
      gamma_(data.gamma),
      spec_(data.spec),
      quality_(std::move(data.quality)) {
  m_ = static_cast<int>(quality_.size());
  if (m_ < 1) throw ConfigError("instance needs at least one producer");
  if (data.cost.size() != quality_.size() || data.capacity.size() != quality_.size()) {
    throw ConfigError("cost/capacity matrices must have one row per producer");
  }
  n_ = static_cast<int>(data.cost[0].size());
  if (n_ < 1) throw ConfigError("instance needs at least one agent");
  if (horizon_ < 1) throw ConfigError("horizon T must be >= 1");
  if (!(rho_ > 0.0)) throw ConfigError("rho must be > 0");
  if (!(alpha_ > 0.0 && alpha_ < 1.0)) throw ConfigError("alpha must lie in (0,1)");
  if (!(gamma_ > 0.0)) throw ConfigError("gamma must be > 0");
  if (!(alpha_ + gamma_ < 1.0)) throw ConfigError("alpha + gamma must be < 1");

  for (double q : quality_) {
    if (!(q >= 0.0 && q <= 1.0)) throw ConfigError("qualities must lie in [0,1]");
  }

  const auto cells = static_cast<std::size_t>(m_) * static_cast<std::size_t>(n_);
  cost_.resize(cells);
  capacity_.resize(cells);
  unit_revenue_.resize(cells);
  for (int i = 0; i < m_; ++i) {
    const auto& crow = data.cost[static_cast<std::size_t>(i)];
    const auto& krow = data.capacity[static_cast<std::size_t>(i)];
    if (static_cast<int>(crow.size()) != n_ || static_cast<int>(krow.size()) != n_) {
      throw ConfigError("ragged cost/capacity matrix");
    }
    for (int j = 0; j < n_; ++j) {
      const double c = crow[static_cast<std::size_t>(j)];
      const int k = krow[static_cast<std::size_t>(j)];
      if (!(c >= 0.0) || !std::isfinite(c)) throw ConfigError("costs must be finite and >= 0");
      if (k < 1) throw ConfigError("capacities must be >= 1");
      cost_[index(i, j)] = c;
      capacity_[index(i, j)] = k;
      unit_revenue_[index(i, j)] = rho_ * quality_[static_cast<std::size_t>(i)] - c;
    }
  }
}

std::span<const double> ProblemInstance::costs_of(int agent) const {
  return std::span<const double>(cost_).subspan(index(0, agent), static_cast<std::size_t>(m_));
}

std::span<const int> ProblemInstance::capacities_of(int agent) const {
  return std::span<const int>(capacity_).subspan(index(0, agent), static_cast<std::size_t>(m_));
}

std::span<const double> ProblemInstance::unit_revenue_of(int agent) const {
  return std::span<const double>(unit_revenue_)
      .subspan(index(0, agent), static_cast<std::size_t>(m_));
}

InstanceData ProblemInstance::data() const {
  InstanceData d;
  d.quality = quality_;
  d.cost.assign(static_cast<std::size_t>(m_), std::vector<double>(static_cast<std::size_t>(n_)));
  d.capacity.assign(static_cast<std::size_t>(m_), std::vector<int>(static_cast<std::size_t>(n_)));
  for (int i = 0; i < m_; ++i) {
    for (int j = 0; j < n_; ++j) {
      d.cost[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = cost(i, j);
      d.capacity[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = capacity(i, j);
    }
  }
  d.rho = rho_;
  d.alpha = alpha_;
  d.gamma = gamma_;
  d.horizon = horizon_;
  d.spec = spec_;
  return d;
}

ProblemInstance ProblemInstance::with_agents(int n) const {
  if (n < 1 || n > n_) throw ConfigError("with_agents: n out of range");
  InstanceData d = data();
  for (auto& row : d.cost) row.resize(static_cast<std::size_t>(n));
  for (auto& row : d.capacity) row.resize(static_cast<std::size_t>(n));
  return ProblemInstance(std::move(d));
}

namespace {

double draw_unit_value(const InstanceSpec& spec, Rng& rng, double upper) {
  if (spec.distribution == Distribution::kUniform) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  }
  const double v = std::normal_distribution<double>(spec.mean, spec.stddev)(rng);
  return std::clamp(v, 0.0, upper);
}

}  // namespace

ProblemInstance generate_instance(const InstanceSpec& spec, int m, int n, std::int64_t horizon,
                                  double rho, double alpha, double gamma) {
  if (m < 1 || n < 1 || horizon < 1) throw ConfigError("m, n and T must all be >= 1");
  if (spec.distribution == Distribution::kNormal && !(spec.stddev > 0.0)) {
    throw ConfigError("normal distribution needs stddev > 0");
  }
  if (spec.k_lo < 1 || spec.k_hi < spec.k_lo) {
    throw ConfigError("capacity range must satisfy 1 <= k_lo <= k_hi");
  }

  InstanceData d;
  d.rho = rho;
  d.alpha = alpha;
  d.gamma = gamma;
  d.horizon = horizon;
  d.spec = spec;

  Rng quality_rng(derive_seed(spec.seed, {0}));
  d.quality.resize(static_cast<std::size_t>(m));
  for (auto& q : d.quality) q = draw_unit_value(spec, quality_rng, 1.0);

  d.cost.assign(static_cast<std::size_t>(m), std::vector<double>(static_cast<std::size_t>(n)));
  d.capacity.assign(static_cast<std::size_t>(m), std::vector<int>(static_cast<std::size_t>(n)));
  std::uniform_int_distribution<int> capacity_dist(spec.k_lo, spec.k_hi);
  for (int j = 0; j < n; ++j) {
    Rng agent_rng(derive_seed(spec.seed, {static_cast<std::uint64_t>(j) + 1}));
    for (int i = 0; i < m; ++i) {
      const auto ii = static_cast<std::size_t>(i);
      const auto jj = static_cast<std::size_t>(j);
      d.cost[ii][jj] = draw_unit_value(spec, agent_rng, std::numeric_limits<double>::infinity());
      d.capacity[ii][jj] = capacity_dist(agent_rng);
    }
  }
  return ProblemInstance(std::move(d));
}

RealizationVector sample_realizations(const ProblemInstance& inst, const ProcurementVector& s,
                                      Rng& rng) {
  RealizationVector x(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    const int l = s.units[i];
    if (l <= 0) continue;
    const double q = inst.quality(static_cast<int>(i));
    if (q <= 0.0) {
      x.good_units[i] = 0;
    } else if (q >= 1.0) {
      x.good_units[i] = l;
    } else {
      x.good_units[i] = std::binomial_distribution<int>(l, q)(rng);
    }
  }
  return x;
}

std::vector<double> BinomialTable::pmf(int units, double q) {
  std::vector<double> p(static_cast<std::size_t>(units) + 1, 0.0);
  if (q <= 0.0) {
    p.front() = 1.0;
    return p;
  }
  if (q >= 1.0) {
    p.back() = 1.0;
    return p;
  }
  // Recurrence from the heavier tail keeps the seed term above 2^-units.
  const bool mirror = q > 0.5;
  const double r = mirror ? 1.0 - q : q;
  std::vector<double> tail(p.size());
  tail[0] = std::pow(1.0 - r, units);
  for (int x = 0; x < units; ++x) {
    tail[static_cast<std::size_t>(x) + 1] =
        tail[static_cast<std::size_t>(x)] * (units - x) / (x + 1) * r / (1.0 - r);
  }
  for (int x = 0; x <= units; ++x) {
    p[static_cast<std::size_t>(x)] = tail[static_cast<std::size_t>(mirror ? units - x : x)];
  }
  return p;
}

BinomialTable::BinomialTable(const ProblemInstance& inst) {
  producers_.resize(static_cast<std::size_t>(inst.producers()));
  for (int i = 0; i < inst.producers(); ++i) {
    auto& prod = producers_[static_cast<std::size_t>(i)];
    prod.q = inst.quality(i);
    for (int j = 0; j < inst.agents(); ++j) prod.max_units = std::max(prod.max_units, inst.capacity(i, j));
    prod.offset.resize(static_cast<std::size_t>(prod.max_units) + 1, 0);
    for (int l = 1; l <= prod.max_units; ++l) {
      prod.offset[static_cast<std::size_t>(l)] = prod.cdf.size();
      double acc = 0.0;
      for (double mass : pmf(l, prod.q)) {
        acc += mass;
        prod.cdf.push_back(acc);
      }
      prod.cdf.back() = 1.0;
    }
  }
}

int BinomialTable::sample(int producer, int units, Rng& rng) const {
  if (units <= 0) return 0;
  const auto& prod = producers_[static_cast<std::size_t>(producer)];
  if (prod.q <= 0.0) return 0;
  if (prod.q >= 1.0) return units;
  if (units > prod.max_units) return std::binomial_distribution<int>(units, prod.q)(rng);
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  const auto first = prod.cdf.begin() + static_cast<std::ptrdiff_t>(prod.offset[static_cast<std::size_t>(units)]);
  const auto last = first + units + 1;
  return static_cast<int>(std::upper_bound(first, last, u) - first);
}

void BinomialTable::sample(const ProcurementVector& s, Rng& rng, RealizationVector& out) const {
  out.good_units.resize(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    out.good_units[i] = sample(static_cast<int>(i), s.units[i], rng);
  }
}

double expected_revenue(const ProblemInstance& inst, int agent, const ProcurementVector& s) {
  const auto r = inst.unit_revenue_of(agent);
  double total = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) total += s.units[i] * r[i];
  return total;
}

std::optional<double> effective_quality(const ProcurementVector& s, std::span<const double> q) {
  double weighted = 0.0;
  long units = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    weighted += s.units[i] * q[i];
    units += s.units[i];
  }
  if (units == 0) return std::nullopt;
  return weighted / static_cast<double>(units);
}

bool constraint_satisfied(const ProblemInstance& inst, const ProcurementVector& s,
                          double threshold) {
  const auto eq = effective_quality(s, inst.quality());
  return !eq || *eq >= threshold;
}

ProcurementVector all_ones(int m) {
  return ProcurementVector(std::vector<int>(static_cast<std::size_t>(m), 1));
}

}  // namespace fedcmab
