#ifndef RISSIM_HARNESS_HPP
#define RISSIM_HARNESS_HPP

#include <optional>
#include <string>
#include <vector>

#include "rissim/scene.hpp"

namespace rissim {

struct ParsedScenario {
  Scenario scenario;
  MobilityProfile mobility;
};

// INI-style scenario file: [scenario], [channel], [ris.N], [terminal.N],
// [eavesdropper], [mobility] sections of key = value lines, # comments.
// Unknown keys and duplicate keys are reported with their line number.
ParsedScenario parse_scenario(const std::string& path);
ParsedScenario parse_scenario_text(const std::string& text, const std::string& name);

struct Campaign {
  std::string scenario_path;
  std::string task;  // wsr, wsr_clustered, slp, slp_all, pilot, hybrid,
                     // secrecy, distributed
  int trials = 1;
  uint64_t seed_base = 0;
  std::string output_dir;
  bool oracle = false;
};

struct MetricRow {
  int trial = 0;
  uint64_t seed = 0;
  double objective = 0;
  double baseline_objective = 0;
  int iterations = 0;
  double wall_ms = 0;  // informational only; kept out of the CSV so reruns
                       // stay byte-identical
  bool feasible = true;
  std::optional<double> oracle_gap;
  std::vector<double> trace;
};

struct CampaignSummary {
  double mean = 0;
  double stddev = 0;
  double min = 0;
  double max = 0;
  double mean_oracle_gap = 0;
  int oracle_rows = 0;
  int failed = 0;
};

struct CampaignResult {
  std::vector<MetricRow> rows;
  CampaignSummary summary;
};

CampaignResult run_campaign(const Campaign& campaign);

// Exact single-user optimum over the full discrete reflection grid, with the
// matched filter at full power as the per-configuration precoder.
double brute_force_wsr(const ChannelSet& ch, const Scenario& scenario);

// Writes metrics.csv, summary.txt and traces.csv into output_dir (atomically,
// via temp-file rename). Returns the written paths.
std::vector<std::string> emit_report(const std::vector<MetricRow>& rows,
                                     const CampaignSummary& summary,
                                     const std::string& output_dir);

}  // namespace rissim

#endif  // RISSIM_HARNESS_HPP
