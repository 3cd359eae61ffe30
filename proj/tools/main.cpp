#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "rissim/harness.hpp"

namespace {

bool verbose_logging() {
  const char* env = std::getenv("RISSIM_LOG");
  return env != nullptr && std::string(env) == "debug";
}

int cmd_run(const rissim::Campaign& campaign) {
  rissim::CampaignResult result = rissim::run_campaign(campaign);
  if (verbose_logging()) {
    for (const auto& row : result.rows) {
      std::cerr << "trial " << row.trial << " seed " << row.seed << " objective "
                << row.objective << (row.feasible ? "" : " (failed)") << " ["
                << row.wall_ms << " ms]\n";
    }
  }
  const auto paths =
      rissim::emit_report(result.rows, result.summary, campaign.output_dir);
  std::cout << "trials: " << result.rows.size() << "  failed: " << result.summary.failed
            << "\nobjective mean " << result.summary.mean << "  min "
            << result.summary.min << "  max " << result.summary.max << "\n";
  if (result.summary.oracle_rows > 0) {
    std::cout << "oracle gap mean " << result.summary.mean_oracle_gap << " over "
              << result.summary.oracle_rows << " rows\n";
  }
  for (const auto& p : paths) std::cout << "wrote " << p << "\n";
  return result.summary.failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"link-level simulation and optimization for surface-assisted downlinks"};
  app.require_subcommand(1);

  rissim::Campaign campaign;

  CLI::App* run = app.add_subcommand("run", "execute a Monte-Carlo campaign");
  run->add_option("--scenario", campaign.scenario_path, "scenario config file")
      ->required();
  run->add_option("--task", campaign.task,
                  "wsr, wsr_clustered, slp, slp_all, pilot, hybrid, secrecy, "
                  "distributed")
      ->required();
  run->add_option("--trials", campaign.trials, "number of trials")->required();
  run->add_option("--seed", campaign.seed_base, "base seed; trial i uses seed+i")
      ->required();
  run->add_option("--out", campaign.output_dir, "report directory")->required();
  run->add_flag("--oracle", campaign.oracle, "enable brute-force cross-checks");

  std::string validate_path;
  CLI::App* validate = app.add_subcommand("validate", "parse and validate a scenario");
  validate->add_option("--scenario", validate_path, "scenario config file")->required();

  std::string oracle_path;
  CLI::App* oracle = app.add_subcommand("oracle", "exact brute-force objective only");
  oracle->add_option("--scenario", oracle_path, "scenario config file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(campaign);
    if (validate->parsed()) {
      rissim::ParsedScenario parsed = rissim::parse_scenario(validate_path);
      std::cout << "ok: " << parsed.scenario.bs_antennas << " antennas, "
                << parsed.scenario.num_terminals << " terminals, "
                << parsed.scenario.ris.size() << " panels\n";
      return 0;
    }
    if (oracle->parsed()) {
      rissim::ParsedScenario parsed = rissim::parse_scenario(oracle_path);
      const rissim::ChannelSet ch = rissim::synthesize_channels(parsed.scenario, 0);
      std::cout << "exact objective: "
                << rissim::brute_force_wsr(ch, parsed.scenario) << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
