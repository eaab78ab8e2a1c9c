// Command-line front end: `fedcmab run --config <path> [--scale small|full]
// [--out <dir>] [--threads N]` and `fedcmab validate --config <path>`.

#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "fedcmab/harness.hpp"
#include "fedcmab/privacy.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitBudget = 3;

void print_findings(const std::vector<fedcmab::Finding>& findings) {
  for (const auto& f : findings) {
    std::cerr << (f.severity == fedcmab::Finding::Severity::kError ? "error: " : "warning: ")
              << f.message << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Federated combinatorial bandit simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string scale = "full";
  std::string out_dir;
  int threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));

  auto* run = app.add_subcommand("run", "Run an experiment and write its result files");
  run->add_option("--config", config_path, "Experiment config (JSON) or a manifest.json")
      ->required();
  run->add_option("--scale", scale, "small or full")->check(CLI::IsMember({"small", "full"}));
  run->add_option("--out", out_dir, "Output directory (overrides output_dir)");
  run->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

  auto* check = app.add_subcommand("validate", "Report warnings and errors for a config");
  check->add_option("--config", config_path, "Experiment config (JSON)")->required();
  check->add_option("--scale", scale, "small or full")->check(CLI::IsMember({"small", "full"}));

  CLI11_PARSE(app, argc, argv);

  try {
    auto cfg = fedcmab::apply_scale(fedcmab::load_config(config_path),
                                    fedcmab::scale_from_string(scale));
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    const auto findings = fedcmab::validate(cfg);
    print_findings(findings);

    if (check->parsed()) return fedcmab::has_errors(findings) ? kExitConfig : 0;
    if (fedcmab::has_errors(findings)) return kExitConfig;

    const auto result = fedcmab::execute(cfg, threads);
    fedcmab::write_outputs(result, cfg.output_dir);
    std::cout << "wrote " << result.runs.size() << " runs to " << cfg.output_dir << '\n';
    return 0;
  } catch (const fedcmab::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const fedcmab::BudgetExceeded& e) {
    std::cerr << "privacy budget exceeded: " << e.what() << '\n';
    return kExitBudget;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
