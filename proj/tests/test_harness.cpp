#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fedcmab/harness.hpp"

namespace fedcmab {
namespace {

namespace fs = std::filesystem;

bool has_warning_containing(const std::vector<Finding>& fs, const std::string& needle) {
  for (const auto& f : fs) {
    if (f.severity == Finding::Severity::kWarning && f.message.find(needle) != std::string::npos)
      return true;
  }
  return false;
}

ExperimentConfig tiny(std::string experiment = "exp1") {
  auto cfg = preset(experiment);
  cfg.horizon = 600;
  cfg.m = 6;
  cfg.instances = 2;
  cfg.sims = 2;
  cfg.t_start = 20;
  cfg.t_stop = 600;
  if (!cfg.n_grid.empty()) cfg.n_grid = {2, 3};
  if (!cfg.epsilon_grid.empty()) cfg.epsilon_grid = {0.2, 1.0};
  cfg.n = 3;
  return cfg;
}

TEST(Validate, DeltaNotBelowOneOverN) {
  auto cfg = preset("exp1");
  cfg.delta = 0.2;
  EXPECT_TRUE(has_warning_containing(validate(cfg), "1/n"));
  EXPECT_FALSE(has_errors(validate(cfg)));
}

TEST(Validate, WindowStartsInsideExplorePhase) {
  auto cfg = preset("exp1");
  cfg.t_start = 100;  // explore phase is 208 rounds for n = 10
  EXPECT_TRUE(has_warning_containing(validate(cfg), "explore"));
  cfg.t_start = 200;
  cfg.gamma = 0.2;
  EXPECT_FALSE(has_warning_containing(validate(cfg), "explore"));
}

TEST(Validate, OmegaProductFarFromOne) {
  auto cfg = preset("exp1");
  cfg.omega2 = 100;
  EXPECT_TRUE(has_warning_containing(validate(cfg), "omega1 * omega2"));
}

TEST(Validate, EmptyPolicySetIsAnError) {
  auto cfg = preset("exp1");
  cfg.policies.clear();
  EXPECT_TRUE(has_errors(validate(cfg)));
  EXPECT_THROW(execute(cfg), ConfigError);
}

TEST(Validate, DefaultPresetsAreClean) {
  for (const char* e : {"exp1", "exp2", "exp3"}) {
    auto cfg = preset(e);
    EXPECT_FALSE(has_errors(validate(cfg))) << e;
    EXPECT_FALSE(has_errors(validate(apply_scale(cfg, Scale::kSmall)))) << e;
  }
}

TEST(Presets, MirrorPublishedSettings) {
  auto e1 = preset("exp1");
  EXPECT_EQ(e1.n, 10);
  EXPECT_EQ(e1.m, 30);
  EXPECT_EQ(e1.horizon, 100000);
  EXPECT_EQ(e1.alpha, 0.4);
  EXPECT_EQ(e1.delta, 0.01);
  EXPECT_EQ(e1.t_start, 200);
  EXPECT_EQ(e1.t_stop, 40000);
  EXPECT_EQ(e1.omega1, 0.1);
  EXPECT_EQ(e1.omega2, 10.0);
  EXPECT_EQ(e1.spec.k_lo, 1);
  EXPECT_EQ(e1.spec.k_hi, 50);
  EXPECT_EQ(e1.instances, 5);
  EXPECT_EQ(e1.sims, 20);
  EXPECT_EQ(preset("exp2").epsilon_grid.front(), 0.2);
  EXPECT_EQ(preset("exp2").epsilon_grid.back(), 1.1);
  EXPECT_EQ(preset("exp3").n_grid, (std::vector<int>{10, 20, 30, 40}));
  EXPECT_THROW(preset("exp9"), ConfigError);
}

TEST(Presets, SmallScale) {
  auto cfg = apply_scale(preset("exp1"), Scale::kSmall);
  EXPECT_EQ(cfg.horizon, 20000);
  EXPECT_EQ(cfg.instances, 2);
  EXPECT_EQ(cfg.sims, 5);
  EXPECT_EQ(cfg.t_stop, 20000);
}

TEST(Config, JsonRoundTripAndPartialSpec) {
  auto cfg = tiny("exp2");
  cfg.spec.distribution = Distribution::kNormal;
  auto doc = config_to_json(cfg);
  EXPECT_EQ(config_to_json(config_from_json(doc)), doc);
  EXPECT_EQ(config_to_json(config_from_json(nlohmann::json{{"config", doc}})), doc);

  auto partial = config_from_json(nlohmann::json::parse(
      R"({"experiment": "exp3", "spec": {"distribution": "normal"}, "sims": 3})"));
  EXPECT_EQ(partial.spec.distribution, Distribution::kNormal);
  EXPECT_EQ(partial.spec.k_hi, 50);
  EXPECT_EQ(partial.sims, 3);
  EXPECT_EQ(partial.n_grid, (std::vector<int>{10, 20, 30, 40}));
  EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"n": "ten"})")), ConfigError);
  EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"policies": ["greedy"]})")),
               ConfigError);
}

TEST(Variants, PrivacyFreePoliciesRunOncePerAgentCount) {
  auto cfg = tiny("exp2");
  cfg.policies = {PolicyKind::kNonFederated, PolicyKind::kFcb, PolicyKind::kPfcb};
  auto vs = variants(cfg);
  ASSERT_EQ(vs.size(), 4u);
  EXPECT_EQ(vs[0].label(), "nonfed/n=3");
  EXPECT_EQ(vs[1].label(), "fcb/n=3");
  EXPECT_EQ(vs[2].label(), "pfcb/eps=0.2/n=3");
  EXPECT_EQ(vs[3].label(), "pfcb/eps=1/n=3");
}

TEST(Seeds, FixedSplittingRule) {
  EXPECT_EQ(run_seed(1, 0, 0, 0, 0), run_seed(1, 0, 0, 0, 0));
  EXPECT_NE(run_seed(1, 0, 0, 0, 0), run_seed(1, 0, 0, 0, 1));
  EXPECT_NE(run_seed(1, 0, 1, 0, 0), run_seed(1, 1, 0, 0, 0));
  EXPECT_NE(run_seed(1, 0, 0, 0, 0), run_seed(2, 0, 0, 0, 0));
}

std::string metrics_text(const ExperimentResult& r) {
  std::ostringstream out;
  write_metrics_csv(r, out);
  return out.str();
}

TEST(Execute, ThreadCountDoesNotChangeOutput) {
  auto cfg = tiny("exp2");
  cfg.policies = {PolicyKind::kNonFederated, PolicyKind::kFcb, PolicyKind::kPfcb};
  const auto one = metrics_text(execute(cfg, 1));
  EXPECT_EQ(one, metrics_text(execute(cfg, 3)));
  EXPECT_EQ(one, metrics_text(execute(cfg, 8)));
}

TEST(Execute, MatchedInstancesAcrossAgentCounts) {
  auto cfg = tiny("exp3");
  auto res = execute(cfg, 1);
  ASSERT_EQ(res.variants.size(), 2u);
  // Same instance seed for the same instance index in both grid points.
  const auto per_variant = static_cast<std::size_t>(cfg.instances * cfg.sims);
  for (std::size_t k = 0; k < per_variant; ++k) {
    EXPECT_EQ(res.runs[k].instance_seed, res.runs[per_variant + k].instance_seed);
    EXPECT_NE(res.runs[k].sim_seed, res.runs[per_variant + k].sim_seed);
  }
}

TEST(Execute, MetricsCsvShape) {
  auto cfg = tiny("exp1");
  auto res = execute(cfg, 1);
  std::istringstream in(metrics_text(res));
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "policy,instance_seed,sim_seed,agent,t,cum_regret,violations,frr_vs_nonfed");
  long rows = 0, all_rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    if (line.find(",all,") != std::string::npos) ++all_rows;
    // 0/0 for a zero-regret baseline is left blank.
    if (line.rfind("nonfed/", 0) == 0) {
      EXPECT_TRUE(line.substr(line.size() - 2) == ",1" || line.back() == ',') << line;
    }
  }
  const long cps = static_cast<long>(checkpoint_schedule(cfg.horizon).size());
  EXPECT_EQ(rows, 3L * cfg.instances * cfg.sims * cps * (cfg.n + 1));
  EXPECT_EQ(all_rows, 3L * cfg.instances * cfg.sims * cps);
}

TEST(Outputs, ManifestReproducesByteIdenticalMetrics) {
  auto cfg = tiny("exp1");
  cfg.trace = true;
  const fs::path a = fs::temp_directory_path() / "fedcmab_harness_a";
  const fs::path b = fs::temp_directory_path() / "fedcmab_harness_b";
  fs::remove_all(a);
  fs::remove_all(b);
  auto first = execute(cfg, 2);
  write_outputs(first, a);
  for (const char* f : {"metrics.csv", "accountant.csv", "summary.csv", "trace.jsonl", "manifest.json"}) {
    EXPECT_TRUE(fs::exists(a / f)) << f;
  }
  auto again = load_config(a / "manifest.json");
  write_outputs(execute(again, 1), b);
  for (const char* f : {"metrics.csv", "accountant.csv", "summary.csv", "trace.jsonl"}) {
    std::ifstream fa(a / f, std::ios::binary), fb(b / f, std::ios::binary);
    std::stringstream sa, sb;
    sa << fa.rdbuf();
    sb << fb.rdbuf();
    EXPECT_EQ(sa.str(), sb.str()) << f;
  }
  fs::remove_all(a);
  fs::remove_all(b);
}

#ifdef FEDCMAB_CLI_PATH
int run_cli(const std::string& args) {
  const std::string cmd = std::string(FEDCMAB_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

TEST(Cli, ExitCodes) {
  const fs::path dir = fs::temp_directory_path() / "fedcmab_cli_test";
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::ofstream(dir / "bad.json") << R"({"policies": []})";
  std::ofstream(dir / "broken.json") << "{ not json";
  auto good = config_to_json(tiny("exp1"));
  std::ofstream(dir / "good.json") << good.dump();

  EXPECT_EQ(run_cli("validate --config " + (dir / "bad.json").string()), 2);
  EXPECT_EQ(run_cli("run --config " + (dir / "bad.json").string()), 2);
  EXPECT_EQ(run_cli("run --config " + (dir / "broken.json").string()), 2);
  EXPECT_EQ(run_cli("run --config " + (dir / "missing.json").string()), 2);
  EXPECT_EQ(run_cli("validate --config " + (dir / "good.json").string()), 0);
  EXPECT_EQ(run_cli("run --config " + (dir / "good.json").string() + " --threads 2 --out " +
                    (dir / "out").string()),
            0);
  EXPECT_TRUE(fs::exists(dir / "out" / "metrics.csv"));
  fs::remove_all(dir);
}
#endif

}  // namespace
}  // namespace fedcmab
