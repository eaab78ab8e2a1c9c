#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fedcmab/domain.hpp"
#include "fedcmab/policies.hpp"
#include "fedcmab/simulation.hpp"
#include "json.hpp"

namespace fedcmab {

enum class Scale { kFull, kSmall };

Scale scale_from_string(const std::string& name);

/// Everything needed to reproduce an experiment. Fields left out of a config
/// document take the preset value for its experiment tag.
struct ExperimentConfig {
  std::string experiment = "custom";  // exp1 | exp2 | exp3 | custom
  InstanceSpec spec;
  int n = 10;
  int m = 30;
  std::int64_t horizon = 100000;
  std::vector<PolicyKind> policies{PolicyKind::kNonFederated, PolicyKind::kFcb,
                                   PolicyKind::kPfcb};
  double epsilon = 1.0;
  std::vector<double> epsilon_grid;  // empty: {epsilon}
  std::vector<int> n_grid;           // empty: {n}
  double delta = 0.01;
  double omega1 = 0.1;
  double omega2 = 10.0;
  double alpha = 0.4;
  double gamma = 0.1;
  double rho = 2.0;
  std::int64_t t_start = 200;
  std::int64_t t_stop = 40000;
  int instances = 5;
  int sims = 20;
  std::uint64_t seed = 1;
  std::string output_dir = "out";
  bool trace = false;
  bool exact_benchmark = false;
  bool strict_composition = false;
  int explore_rounds = 0;  // 0: derived from n, T and gamma

  std::vector<double> epsilons() const;
  std::vector<int> agent_counts() const;
};

/// Preset defaults for an experiment tag.
ExperimentConfig preset(const std::string& experiment);

/// Reads a config document (or a manifest, whose "config" member is used).
ExperimentConfig config_from_json(const nlohmann::json& doc);
nlohmann::json config_to_json(const ExperimentConfig& cfg);
ExperimentConfig load_config(const std::filesystem::path& path);

/// T = 20000, 2 instances x 5 sims for kSmall; unchanged for kFull.
ExperimentConfig apply_scale(ExperimentConfig cfg, Scale scale);

struct Finding {
  enum class Severity { kWarning, kError } severity;
  std::string message;
};

std::vector<Finding> validate(const ExperimentConfig& cfg);
bool has_errors(const std::vector<Finding>& findings);

/// One (agent count, policy, epsilon) combination. Policies that do not use
/// privacy get a single variant per agent count.
struct Variant {
  int n = 1;
  PolicyKind policy = PolicyKind::kPfcb;
  double epsilon = 0.0;
  int policy_index = 0;  // position in cfg.policies
  int grid_index = 0;

  std::string label() const;  // e.g. "pfcb/eps=0.2/n=10"
  std::string group() const;  // "n=10"
};

std::vector<Variant> variants(const ExperimentConfig& cfg);

/// child = derive_seed(master, {instance, sim, policy, grid}).
std::uint64_t run_seed(std::uint64_t master, int instance, int sim, int policy_index,
                       int grid_index);
std::uint64_t instance_seed(std::uint64_t master, int instance);

struct RunOutput {
  int variant = 0;
  int instance = 0;
  int sim = 0;
  std::uint64_t instance_seed = 0;
  std::uint64_t sim_seed = 0;
  SimulationResult result;
  std::vector<TraceRecord> trace;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<Variant> variants;
  std::vector<RunOutput> runs;  // ordered by (variant, instance, sim)

  /// Run of the same instance and sim for the non-federated variant with the
  /// same agent count, if one exists.
  const RunOutput* baseline_for(const RunOutput& run) const;
  std::vector<RunRecord> records() const;
};

/// Executes every run on `threads` workers. Results do not depend on the
/// thread count. Throws ConfigError when validate() reports errors.
ExperimentResult execute(const ExperimentConfig& cfg, int threads = 1);

/// metrics.csv, accountant.csv, summary.csv, manifest.json and, when
/// cfg.trace is set, trace.jsonl.
void write_outputs(const ExperimentResult& result, const std::filesystem::path& dir);

void write_metrics_csv(const ExperimentResult& result, std::ostream& out);
void write_accountant_csv(const ExperimentResult& result, std::ostream& out);
void write_summary_csv(const ExperimentResult& result, std::ostream& out);
void write_trace_jsonl(const ExperimentResult& result, std::ostream& out);
nlohmann::json manifest(const ExperimentResult& result);

}  // namespace fedcmab
