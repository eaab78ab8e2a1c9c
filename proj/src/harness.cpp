#include "fedcmab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "fedcmab/instance_io.hpp"
#include "fedcmab/seeding.hpp"

namespace fedcmab {

using nlohmann::json;

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Shortest form that reads back to the same value, for labels.
std::string fmt_short(double v) {
  char buf[40];
  for (int p = 1; p <= 17; ++p) {
    std::snprintf(buf, sizeof buf, "%.*g", p, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

template <typename T>
void read_if(const json& doc, const char* key, T& out) {
  if (doc.contains(key)) out = doc.at(key).get<T>();
}

}  // namespace

Scale scale_from_string(const std::string& name) {
  if (name == "full") return Scale::kFull;
  if (name == "small") return Scale::kSmall;
  throw ConfigError("unknown scale '" + name + "' (expected small or full)");
}

std::vector<double> ExperimentConfig::epsilons() const {
  return epsilon_grid.empty() ? std::vector<double>{epsilon} : epsilon_grid;
}

std::vector<int> ExperimentConfig::agent_counts() const {
  return n_grid.empty() ? std::vector<int>{n} : n_grid;
}

ExperimentConfig preset(const std::string& experiment) {
  ExperimentConfig cfg;
  cfg.experiment = experiment;
  if (experiment == "exp1" || experiment == "custom") return cfg;
  if (experiment == "exp2") {
    cfg.policies = {PolicyKind::kNonFederated, PolicyKind::kPfcb};
    cfg.epsilon_grid = {0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0, 1.1};
    return cfg;
  }
  if (experiment == "exp3") {
    cfg.policies = {PolicyKind::kPfcb};
    cfg.n_grid = {10, 20, 30, 40};
    return cfg;
  }
  throw ConfigError("unknown experiment '" + experiment + "'");
}

ExperimentConfig config_from_json(const json& input) {
  try {
    const json& doc = input.contains("config") ? input.at("config") : input;
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");
    ExperimentConfig cfg = preset(doc.value("experiment", std::string("custom")));
    if (doc.contains("spec")) {
      // Partial specs are allowed; merge onto the defaults.
      json merged = spec_to_json(cfg.spec);
      merged.update(doc.at("spec"));
      cfg.spec = spec_from_json(merged);
    }
    read_if(doc, "n", cfg.n);
    read_if(doc, "m", cfg.m);
    read_if(doc, "T", cfg.horizon);
    if (doc.contains("policies")) {
      cfg.policies.clear();
      for (const auto& p : doc.at("policies")) cfg.policies.push_back(policy_from_string(p));
    }
    read_if(doc, "epsilon", cfg.epsilon);
    read_if(doc, "epsilon_grid", cfg.epsilon_grid);
    read_if(doc, "n_grid", cfg.n_grid);
    read_if(doc, "delta", cfg.delta);
    read_if(doc, "omega1", cfg.omega1);
    read_if(doc, "omega2", cfg.omega2);
    read_if(doc, "alpha", cfg.alpha);
    read_if(doc, "gamma", cfg.gamma);
    read_if(doc, "rho", cfg.rho);
    read_if(doc, "t_start", cfg.t_start);
    read_if(doc, "t_stop", cfg.t_stop);
    read_if(doc, "instances", cfg.instances);
    read_if(doc, "sims", cfg.sims);
    read_if(doc, "seed", cfg.seed);
    read_if(doc, "output_dir", cfg.output_dir);
    read_if(doc, "trace", cfg.trace);
    read_if(doc, "exact_benchmark", cfg.exact_benchmark);
    read_if(doc, "strict_composition", cfg.strict_composition);
    read_if(doc, "explore_rounds", cfg.explore_rounds);
    return cfg;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config: ") + e.what());
  }
}

json config_to_json(const ExperimentConfig& cfg) {
  json policies = json::array();
  for (auto p : cfg.policies) policies.push_back(to_string(p));
  return json{{"experiment", cfg.experiment},
              {"spec", spec_to_json(cfg.spec)},
              {"n", cfg.n},
              {"m", cfg.m},
              {"T", cfg.horizon},
              {"policies", policies},
              {"epsilon", cfg.epsilon},
              {"epsilon_grid", cfg.epsilon_grid},
              {"n_grid", cfg.n_grid},
              {"delta", cfg.delta},
              {"omega1", cfg.omega1},
              {"omega2", cfg.omega2},
              {"alpha", cfg.alpha},
              {"gamma", cfg.gamma},
              {"rho", cfg.rho},
              {"t_start", cfg.t_start},
              {"t_stop", cfg.t_stop},
              {"instances", cfg.instances},
              {"sims", cfg.sims},
              {"seed", cfg.seed},
              {"output_dir", cfg.output_dir},
              {"trace", cfg.trace},
              {"exact_benchmark", cfg.exact_benchmark},
              {"strict_composition", cfg.strict_composition},
              {"explore_rounds", cfg.explore_rounds}};
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  try {
    return config_from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw ConfigError("cannot parse " + path.string() + ": " + e.what());
  }
}

ExperimentConfig apply_scale(ExperimentConfig cfg, Scale scale) {
  if (scale == Scale::kSmall) {
    cfg.horizon = 20000;
    cfg.instances = 2;
    cfg.sims = 5;
    cfg.t_stop = std::min(cfg.t_stop, cfg.horizon);
  }
  return cfg;
}

std::vector<Finding> validate(const ExperimentConfig& cfg) {
  std::vector<Finding> out;
  auto error = [&](std::string msg) { out.push_back({Finding::Severity::kError, std::move(msg)}); };
  auto warn = [&](std::string msg) { out.push_back({Finding::Severity::kWarning, std::move(msg)}); };

  if (cfg.policies.empty()) error("policy set is empty");
  if (cfg.experiment == "exp2" && cfg.epsilon_grid.empty()) error("exp2 needs an epsilon grid");
  if (cfg.m < 1) error("m must be >= 1");
  if (cfg.horizon < 1) error("T must be >= 1");
  for (int n : cfg.agent_counts()) {
    if (n < 1) error("n must be >= 1");
  }
  for (double e : cfg.epsilons()) {
    if (!(e > 0.0)) error("epsilon must be > 0");
  }
  if (!(cfg.delta > 0.0 && cfg.delta < 1.0)) error("delta must lie in (0, 1)");
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) error("alpha must lie in (0, 1)");
  if (!(cfg.gamma > 0.0 && cfg.gamma < 1.0)) error("gamma must lie in (0, 1)");
  if (!(cfg.rho > 0.0)) error("rho must be > 0");
  if (!(cfg.omega1 > 0.0) || !(cfg.omega2 > 0.0)) error("omega1 and omega2 must be > 0");
  if (cfg.t_start < 1 || cfg.t_stop < cfg.t_start) error("need 1 <= t_start <= t_stop");
  if (cfg.instances < 1 || cfg.sims < 1) error("instances and sims must be >= 1");
  if (cfg.explore_rounds < 0) error("explore_rounds must be >= 0");
  if (cfg.spec.k_lo < 1 || cfg.spec.k_hi < cfg.spec.k_lo) error("need 1 <= k_lo <= k_hi");
  if (cfg.spec.distribution == Distribution::kNormal && !(cfg.spec.stddev > 0.0)) {
    error("normal instances need stddev > 0");
  }

  const bool private_runs =
      std::find(cfg.policies.begin(), cfg.policies.end(), PolicyKind::kPfcb) !=
      cfg.policies.end();
  if (private_runs && cfg.horizon >= 1 && cfg.gamma > 0.0 && cfg.gamma < 1.0) {
    for (int n : cfg.agent_counts()) {
      if (n < 1) continue;
      if (n >= 2 && cfg.delta >= 1.0 / n) {
        warn("delta = " + fmt_short(cfg.delta) + " is not below 1/n for n = " +
             std::to_string(n));
      }
      const int explore = cfg.explore_rounds > 0
                              ? cfg.explore_rounds
                              : explore_phase_length(n, static_cast<double>(cfg.horizon),
                                                     cfg.gamma);
      if (cfg.t_start < explore) {
        warn("t_start = " + std::to_string(cfg.t_start) + " is shorter than the explore phase (" +
             std::to_string(explore) + " rounds for n = " + std::to_string(n) +
             "); early messages carry little data next to the noise");
      }
    }
  }
  const double product = cfg.omega1 * cfg.omega2;
  if (product > 0.0 && (product < 0.5 || product > 2.0)) {
    warn("omega1 * omega2 = " + fmt_short(product) + " is far from 1");
  }
  return out;
}

bool has_errors(const std::vector<Finding>& findings) {
  return std::any_of(findings.begin(), findings.end(), [](const Finding& f) {
    return f.severity == Finding::Severity::kError;
  });
}

std::string Variant::label() const {
  std::string s = to_string(policy);
  if (policy == PolicyKind::kPfcb) s += "/eps=" + fmt_short(epsilon);
  return s + "/n=" + std::to_string(n);
}

std::string Variant::group() const { return "n=" + std::to_string(n); }

std::vector<Variant> variants(const ExperimentConfig& cfg) {
  std::vector<Variant> out;
  const auto ns = cfg.agent_counts();
  const auto eps = cfg.epsilons();
  for (std::size_t a = 0; a < ns.size(); ++a) {
    for (std::size_t p = 0; p < cfg.policies.size(); ++p) {
      const PolicyKind kind = cfg.policies[p];
      if (kind == PolicyKind::kPfcb) {
        for (std::size_t e = 0; e < eps.size(); ++e) {
          out.push_back({ns[a], kind, eps[e], static_cast<int>(p),
                         static_cast<int>(a * eps.size() + e)});
        }
      } else {
        out.push_back({ns[a], kind, 0.0, static_cast<int>(p), static_cast<int>(a * eps.size())});
      }
    }
  }
  return out;
}

std::uint64_t run_seed(std::uint64_t master, int instance, int sim, int policy_index,
                       int grid_index) {
  return derive_seed(master, {static_cast<std::uint64_t>(instance),
                              static_cast<std::uint64_t>(sim),
                              static_cast<std::uint64_t>(policy_index),
                              static_cast<std::uint64_t>(grid_index)});
}

std::uint64_t instance_seed(std::uint64_t master, int instance) {
  return derive_seed(master, {static_cast<std::uint64_t>(instance)});
}

const RunOutput* ExperimentResult::baseline_for(const RunOutput& run) const {
  const Variant& v = variants[static_cast<std::size_t>(run.variant)];
  const auto per_variant =
      static_cast<std::size_t>(config.instances) * static_cast<std::size_t>(config.sims);
  for (std::size_t b = 0; b < variants.size(); ++b) {
    if (variants[b].policy == PolicyKind::kNonFederated && variants[b].n == v.n) {
      const std::size_t idx = b * per_variant +
                              static_cast<std::size_t>(run.instance) *
                                  static_cast<std::size_t>(config.sims) +
                              static_cast<std::size_t>(run.sim);
      return &runs.at(idx);
    }
  }
  return nullptr;
}

std::vector<RunRecord> ExperimentResult::records() const {
  std::vector<RunRecord> out;
  out.reserve(runs.size());
  for (const auto& run : runs) {
    const Variant& v = variants[static_cast<std::size_t>(run.variant)];
    RunRecord rec;
    rec.label = v.label();
    const RunOutput* base = baseline_for(run);
    if (base != nullptr && base != &run) {
      rec.baseline_label = variants[static_cast<std::size_t>(base->variant)].label();
    }
    rec.group = v.group();
    rec.instance_index = run.instance;
    rec.sim_index = run.sim;
    rec.agents = v.n;
    for (const auto& cp : run.result.ledger.checkpoints()) {
      rec.t.push_back(cp.t);
      double total = 0.0;
      for (double r : cp.cum_regret) total += r;
      rec.total_regret.push_back(total);
    }
    out.push_back(std::move(rec));
  }
  return out;
}

ExperimentResult execute(const ExperimentConfig& cfg, int threads) {
  const auto findings = validate(cfg);
  for (const auto& f : findings) {
    if (f.severity == Finding::Severity::kError) throw ConfigError(f.message);
  }

  ExperimentResult result;
  result.config = cfg;
  result.variants = variants(cfg);

  // Instances are drawn once with the largest agent count; smaller counts use
  // a prefix, so every grid point sees the same producers.
  const auto ns = cfg.agent_counts();
  const int n_max = *std::max_element(ns.begin(), ns.end());
  std::vector<ProblemInstance> full;
  std::map<std::pair<int, int>, ProblemInstance> by_n;
  for (int i = 0; i < cfg.instances; ++i) {
    InstanceSpec spec = cfg.spec;
    spec.seed = instance_seed(cfg.seed, i);
    full.push_back(generate_instance(spec, cfg.m, n_max, cfg.horizon, cfg.rho, cfg.alpha,
                                     cfg.gamma));
    for (int n : ns) by_n.emplace(std::make_pair(i, n), full.back().with_agents(n));
  }

  const std::size_t total = result.variants.size() * static_cast<std::size_t>(cfg.instances) *
                            static_cast<std::size_t>(cfg.sims);
  result.runs.resize(total);

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;

  auto worker = [&] {
    for (;;) {
      const std::size_t job = next.fetch_add(1);
      if (job >= total) return;
      {
        std::lock_guard lock(failure_mu);
        if (failure) return;
      }
      try {
        const auto per_variant = static_cast<std::size_t>(cfg.instances * cfg.sims);
        const auto vi = job / per_variant;
        const int instance = static_cast<int>((job % per_variant) / static_cast<std::size_t>(cfg.sims));
        const int sim = static_cast<int>(job % static_cast<std::size_t>(cfg.sims));
        const Variant& v = result.variants[vi];

        RunOutput& out = result.runs[job];
        out.variant = static_cast<int>(vi);
        out.instance = instance;
        out.sim = sim;
        out.instance_seed = full[static_cast<std::size_t>(instance)].spec().seed;
        out.sim_seed = run_seed(cfg.seed, instance, sim, v.policy_index, v.grid_index);

        SimulationSettings settings;
        settings.policy = v.policy;
        settings.federation.privacy.epsilon = v.policy == PolicyKind::kPfcb ? v.epsilon : 1.0;
        settings.federation.privacy.delta = cfg.delta;
        settings.federation.omega1 = cfg.omega1;
        settings.federation.omega2 = cfg.omega2;
        settings.federation.strict_composition = cfg.strict_composition;
        settings.t_start = cfg.t_start;
        settings.t_stop = cfg.t_stop;
        settings.exact_benchmark = cfg.exact_benchmark;
        settings.explore_rounds = cfg.explore_rounds;
        TraceSink sink = [&out](const TraceRecord& r) { out.trace.push_back(r); };
        if (cfg.trace) settings.trace = &sink;

        out.result = simulate(by_n.at({instance, v.n}), settings, out.sim_seed);
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };

  const int workers = std::max(1, std::min<int>(threads, static_cast<int>(total)));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
  return result;
}

void write_metrics_csv(const ExperimentResult& result, std::ostream& out) {
  out << "policy,instance_seed,sim_seed,agent,t,cum_regret,violations,frr_vs_nonfed\n";
  for (const auto& run : result.runs) {
    const Variant& v = result.variants[static_cast<std::size_t>(run.variant)];
    const std::string label = v.label();
    const RunOutput* base = result.baseline_for(run);
    const auto& cps = run.result.ledger.checkpoints();
    for (std::size_t c = 0; c < cps.size(); ++c) {
      const auto& cp = cps[c];
      const RegretLedger::Checkpoint* bcp =
          base != nullptr ? &base->result.ledger.checkpoints().at(c) : nullptr;
      auto ratio = [&](double mine, double theirs) {
        if (bcp == nullptr) return std::string();
        const auto r = frr(mine, theirs);
        return r ? fmt_double(*r) : std::string();
      };
      const std::string prefix = label + ',' + std::to_string(run.instance_seed) + ',' +
                                 std::to_string(run.sim_seed) + ',';
      double total = 0.0;
      double base_total = 0.0;
      long violations = 0;
      for (std::size_t j = 0; j < cp.cum_regret.size(); ++j) {
        total += cp.cum_regret[j];
        violations += cp.violations[j];
        if (bcp != nullptr) base_total += bcp->cum_regret[j];
        out << prefix << j << ',' << cp.t << ',' << fmt_double(cp.cum_regret[j]) << ','
            << cp.violations[j] << ','
            << (bcp != nullptr ? ratio(cp.cum_regret[j], bcp->cum_regret[j]) : std::string())
            << '\n';
      }
      out << prefix << "all," << cp.t << ',' << fmt_double(total) << ',' << violations << ','
          << ratio(total, base_total) << '\n';
    }
  }
}

void write_accountant_csv(const ExperimentResult& result, std::ostream& out) {
  out << "policy,instance_seed,sim_seed,agent,z,t,eps_z,delta,cumulative_eps\n";
  for (const auto& run : result.runs) {
    const Variant& v = result.variants[static_cast<std::size_t>(run.variant)];
    if (v.policy != PolicyKind::kPfcb) continue;
    const std::string prefix = v.label() + ',' + std::to_string(run.instance_seed) + ',' +
                               std::to_string(run.sim_seed) + ',';
    for (const auto& e : run.result.accountant.entries()) {
      out << prefix << e.agent << ',' << e.comm_round << ',' << e.t << ',' << fmt_double(e.eps)
          << ',' << fmt_double(e.delta) << ',' << fmt_double(e.cumulative_eps) << '\n';
    }
  }
}

void write_summary_csv(const ExperimentResult& result, std::ostream& out) {
  out << "group,policy,t,runs,mean_regret,stddev_regret,mean_per_agent_regret,mean_frr\n";
  const auto recs = result.records();
  for (const auto& row : aggregate(recs)) {
    out << row.group << ',' << row.label << ',' << row.t << ',' << row.runs << ','
        << fmt_double(row.mean_regret) << ',' << fmt_double(row.stddev_regret) << ','
        << fmt_double(row.mean_per_agent_regret) << ','
        << (row.mean_frr ? fmt_double(*row.mean_frr) : std::string()) << '\n';
  }
}

void write_trace_jsonl(const ExperimentResult& result, std::ostream& out) {
  for (const auto& run : result.runs) {
    if (run.trace.empty()) continue;
    const std::string label = result.variants[static_cast<std::size_t>(run.variant)].label();
    for (const auto& r : run.trace) {
      json line{{"run", label},
                {"instance_seed", run.instance_seed},
                {"sim_seed", run.sim_seed},
                {"t", r.t},
                {"z", r.z},
                {"sender", r.sender},
                {"receiver", r.receiver},
                {"producer", r.producer},
                {"w_tilde", r.w_tilde},
                {"y_tilde", r.y_tilde},
                {"accepted", r.accepted}};
      out << line.dump() << '\n';
    }
  }
}

json manifest(const ExperimentResult& result) {
  const auto& cfg = result.config;
  json runs = json::array();
  for (const auto& v : result.variants) {
    const int explore =
        cfg.explore_rounds > 0
            ? cfg.explore_rounds
            : explore_phase_length(v.policy == PolicyKind::kNonFederated ? 1 : v.n,
                                   static_cast<double>(cfg.horizon), cfg.gamma);
    runs.push_back({{"label", v.label()},
                    {"policy", to_string(v.policy)},
                    {"n", v.n},
                    {"epsilon", v.epsilon},
                    {"policy_index", v.policy_index},
                    {"grid_index", v.grid_index},
                    {"explore_rounds", explore}});
  }
  json seeds = json::array();
  for (int i = 0; i < cfg.instances; ++i) seeds.push_back(instance_seed(cfg.seed, i));
  return json{{"config", config_to_json(cfg)},
              {"variants", runs},
              {"instance_seeds", seeds},
              {"seed_rule", "instance = derive_seed(seed, {instance}); run = derive_seed(seed, "
                            "{instance, sim, policy_index, grid_index}); SplitMix64 fold"}};
}

void write_outputs(const ExperimentResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream f(dir / name, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + (dir / name).string());
    return f;
  };
  {
    auto f = open("metrics.csv");
    write_metrics_csv(result, f);
  }
  {
    auto f = open("accountant.csv");
    write_accountant_csv(result, f);
  }
  {
    auto f = open("summary.csv");
    write_summary_csv(result, f);
  }
  if (result.config.trace) {
    auto f = open("trace.jsonl");
    write_trace_jsonl(result, f);
  }
  {
    auto f = open("manifest.json");
    f << manifest(result).dump(2) << '\n';
  }
}

}  // namespace fedcmab
