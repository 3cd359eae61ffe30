#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "rissim/dist.hpp"
#include "rissim/harness.hpp"
#include "rissim/pilot.hpp"
#include "rissim/precode.hpp"
#include "rissim/relaysec.hpp"
#include "rissim/rng.hpp"
#include "rissim/slp.hpp"

namespace rissim {

namespace {

constexpr long kBruteCap = 1L << 20;

std::vector<ReflectionConfig> default_configs(const Scenario& s) {
  std::vector<ReflectionConfig> cfgs;
  for (const auto& r : s.ris) {
    cfgs.push_back(
        ReflectionConfig{project(cvec::Ones(r.elements), r.feasibility), r.feasibility});
  }
  return cfgs;
}

std::vector<CiSpec> ci_specs(const Scenario& s) {
  std::vector<CiSpec> ci;
  for (const auto& t : s.terminals) {
    ci.push_back(CiSpec{std::sqrt(t.noise_power), t.sinr_target,
                        t.constellation.ci_half_angle});
  }
  return ci;
}

cvec draw_symbols(const Scenario& s, Prng& rng) {
  cvec sym(s.num_terminals);
  for (int k = 0; k < s.num_terminals; ++k) {
    const int m = s.terminals[static_cast<size_t>(k)].constellation.order;
    sym(k) = std::polar(1.0, 2.0 * std::numbers::pi * rng.below(m) / m);
  }
  return sym;
}

SolverParams campaign_params(uint64_t seed) {
  SolverParams p;
  p.restarts = 2;
  p.max_outer_iters = 30;
  p.max_inner_iters = 15;
  p.seed = seed;
  return p;
}

// one trial of the requested task; fills objective / baseline / trace
void run_trial(const std::string& task, const Scenario& scenario, bool oracle,
               MetricRow& row) {
  Scenario s = scenario;
  s.seed = row.seed;
  const ChannelSet ch = synthesize_channels(s, 0);
  const SolverParams params = campaign_params(row.seed);
  Prng rng(mix_seed(row.seed, 0xca3f, 0, 0));

  if (task == "wsr" || task == "wsr_clustered") {
    PrecodeSolution sol = task == "wsr" ? solve_wsr(ch, s, params)
                                        : solve_wsr_clustered(ch, s, params);
    // the solver's own starting point: uniform reflection, conjugate-match
    const auto init = default_configs(s);
    cmat p0;
    try {
      p0 = mrt_precoder(ch, init, s.power_budget);
    } catch (const ZeroChannel&) {
      p0 = cmat::Zero(s.bs_antennas, s.num_terminals);
    }
    row.objective = sol.objective;
    row.baseline_objective = weighted_sum_rate(ch, init, p0, s.weights);
    row.iterations = static_cast<int>(sol.iterate_trace.size());
    row.trace = sol.iterate_trace;
    if (oracle && task == "wsr") {
      row.oracle_gap = brute_force_wsr(ch, s) - sol.objective;
    }
    return;
  }
  if (task == "slp" || task == "slp_all") {
    const cvec sym = draw_symbols(s, rng);
    const auto fixed = default_configs(s);
    SlpSolution fixed_sol = solve_slp(ch, s, sym, &fixed, params);
    SlpSolution sol = task == "slp"
                          ? solve_slp(ch, s, sym, nullptr, params)
                          : solve_slp_all_symbols(ch, s, params);
    row.objective = sol.power;
    row.baseline_objective = fixed_sol.power;
    row.iterations = static_cast<int>(sol.iterate_trace.size());
    row.trace = sol.iterate_trace;
    row.feasible = sol.slack.minCoeff() >= -1e-6;
    return;
  }
  if (task == "pilot") {
    if (s.ris.size() < 2) throw InvalidScenario("pilot task needs at least two panels");
    const auto cfgs = default_configs(s);
    const PilotPool pool =
        make_pool(s.bs_antennas, std::max(1, s.num_terminals - 1), row.seed);
    const auto serving = default_serving_map(s);
    PilotAssignment greedy = assign_pilots(ch, cfgs, pool, serving, AssignMode::kGreedy);
    row.objective = greedy.score;
    row.baseline_objective = greedy.score;
    if (oracle) {
      PilotAssignment exact =
          assign_pilots(ch, cfgs, pool, serving, AssignMode::kExhaustive);
      row.oracle_gap = exact.score - greedy.score;
      row.baseline_objective = exact.score;
    }
    return;
  }
  if (task == "hybrid") {
    Scenario hs = s;
    if (hs.active_antennas == 0) hs.active_antennas = 2;
    const ChannelSet hch = synthesize_channels(hs, 0);
    HybridRelayConfig cfg;
    cfg.active_antennas = hs.active_antennas;
    cfg.relay_power_budget = 0.5 * hs.power_budget;
    PrecodeSolution sol = solve_hybrid(hch, hs, cfg, params);
    PrecodeSolution passive = solve_wsr(hch, hs, params);
    row.objective = sol.objective;
    row.baseline_objective = passive.objective;
    row.iterations = static_cast<int>(sol.iterate_trace.size());
    row.trace = sol.iterate_trace;
    return;
  }
  if (task == "secrecy") {
    if (!s.eavesdropper) throw InvalidScenario("secrecy task needs an eavesdropper");
    if (s.num_terminals != 2) throw InvalidScenario("secrecy task needs two terminals");
    PrecodeSolution sol = solve_secrecy(ch, s, 0.0, params);
    const auto cfgs = default_configs(s);
    cmat p0;
    try {
      p0 = mrt_precoder(ch, cfgs, s.power_budget);
    } catch (const ZeroChannel&) {
      p0 = cmat::Zero(s.bs_antennas, 2);
    }
    SecrecyResult base = secrecy_eval(ch, cfgs, p0.col(0), p0.col(1), s);
    row.objective = sol.objective;
    row.baseline_objective = base.secrecy_rate;
    row.iterations = static_cast<int>(sol.iterate_trace.size());
    row.trace = sol.iterate_trace;
    return;
  }
  if (task == "distributed") {
    MobilityProfile still;
    RefreshPolicy policy{RefreshMode::kBsBroadcast, 1};
    auto series = run_distributed_episode(s, still, 10, policy, params);
    double mean = 0;
    for (const auto& r : series) {
      mean += r.sum_rate;
      row.trace.push_back(r.sum_rate);
    }
    row.objective = series.empty() ? 0.0 : mean / static_cast<double>(series.size());
    row.baseline_objective = series.empty() ? 0.0 : series.front().sum_rate;
    row.iterations = static_cast<int>(series.size());
    return;
  }
  throw ValidationError("unknown task '" + task + "'");
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

void atomic_write(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string());
    out << content;
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + ": " + ec.message());
}

}  // namespace

double brute_force_wsr(const ChannelSet& ch, const Scenario& scenario) {
  if (scenario.num_terminals != 1) {
    throw InvalidScenario("exact enumeration only supports a single user");
  }
  long total = 1;
  std::vector<int> radix;
  for (const auto& r : scenario.ris) {
    if (r.feasibility.kind != FeasibilityKind::kDiscretePhase) {
      throw InvalidScenario("exact enumeration needs discrete-phase panels");
    }
    for (int q = 0; q < r.elements; ++q) {
      radix.push_back(r.feasibility.tau);
      if (total > kBruteCap / r.feasibility.tau) {
        throw SearchSpaceTooLarge("reflection grid exceeds 2^20 configurations");
      }
      total *= r.feasibility.tau;
    }
  }
  const double noise = scenario.terminals[0].noise_power;
  double best = 0;
  for (long code = 0; code < total; ++code) {
    long rem = code;
    std::vector<ReflectionConfig> cfgs;
    size_t pos = 0;
    for (const auto& r : scenario.ris) {
      cvec theta(r.elements);
      for (int q = 0; q < r.elements; ++q) {
        const int m = static_cast<int>(rem % radix[pos]);
        rem /= radix[pos];
        ++pos;
        theta(q) = std::polar(1.0, 2.0 * std::numbers::pi * m / r.feasibility.tau);
      }
      cfgs.push_back(ReflectionConfig{theta, r.feasibility});
    }
    const cmat h = composite_channel(ch, cfgs);
    const double gain = h.row(0).squaredNorm();
    best = std::max(best, scenario.weights[0] *
                              std::log2(1.0 + scenario.power_budget * gain / noise));
  }
  return best;
}

CampaignResult run_campaign(const Campaign& campaign) {
  if (campaign.trials < 1) throw ValidationError("trials must be >= 1");
  ParsedScenario parsed = parse_scenario(campaign.scenario_path);

  CampaignResult result;
  for (int i = 0; i < campaign.trials; ++i) {
    MetricRow row;
    row.trial = i;
    row.seed = campaign.seed_base + static_cast<uint64_t>(i);
    const auto t0 = std::chrono::steady_clock::now();
    try {
      run_trial(campaign.task, parsed.scenario, campaign.oracle, row);
    } catch (const std::exception&) {
      row.feasible = false;
      row.objective = 0;
      row.baseline_objective = 0;
    }
    row.wall_ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
    result.rows.push_back(std::move(row));
  }

  CampaignSummary& sum = result.summary;
  sum.min = std::numeric_limits<double>::infinity();
  sum.max = -std::numeric_limits<double>::infinity();
  int counted = 0;
  double mean = 0, sq = 0, gap = 0;
  for (const auto& row : result.rows) {
    if (!row.feasible) {
      ++sum.failed;
      continue;
    }
    ++counted;
    mean += row.objective;
    sq += row.objective * row.objective;
    sum.min = std::min(sum.min, row.objective);
    sum.max = std::max(sum.max, row.objective);
    if (row.oracle_gap) {
      gap += *row.oracle_gap;
      ++sum.oracle_rows;
    }
  }
  if (counted > 0) {
    sum.mean = mean / counted;
    const double var = std::max(0.0, sq / counted - sum.mean * sum.mean);
    sum.stddev = std::sqrt(var);
  } else {
    sum.min = 0;
    sum.max = 0;
  }
  if (sum.oracle_rows > 0) sum.mean_oracle_gap = gap / sum.oracle_rows;
  return result;
}

std::vector<std::string> emit_report(const std::vector<MetricRow>& rows,
                                     const CampaignSummary& summary,
                                     const std::string& output_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(output_dir, ec);
  if (ec) throw IoError("cannot create " + output_dir + ": " + ec.message());

  std::ostringstream csv;
  csv << "trial,seed,objective,baseline_objective,iterations,feasible,oracle_gap\n";
  for (const auto& r : rows) {
    csv << r.trial << "," << r.seed << "," << format_double(r.objective) << ","
        << format_double(r.baseline_objective) << "," << r.iterations << ","
        << (r.feasible ? 1 : 0) << ","
        << (r.oracle_gap ? format_double(*r.oracle_gap) : "") << "\n";
  }

  std::ostringstream traces;
  traces << "trial,iteration,value\n";
  for (const auto& r : rows) {
    for (size_t i = 0; i < r.trace.size(); ++i) {
      traces << r.trial << "," << i << "," << format_double(r.trace[i]) << "\n";
    }
  }

  std::ostringstream txt;
  txt << "rows: " << rows.size() << "\n"
      << "failed: " << summary.failed << "\n"
      << "objective_mean: " << format_double(summary.mean) << "\n"
      << "objective_stddev: " << format_double(summary.stddev) << "\n"
      << "objective_min: " << format_double(summary.min) << "\n"
      << "objective_max: " << format_double(summary.max) << "\n"
      << "oracle_rows: " << summary.oracle_rows << "\n"
      << "oracle_gap_mean: " << format_double(summary.mean_oracle_gap) << "\n";

  const fs::path dir(output_dir);
  atomic_write(dir / "metrics.csv", csv.str());
  atomic_write(dir / "traces.csv", traces.str());
  atomic_write(dir / "summary.txt", txt.str());
  return {(dir / "metrics.csv").string(), (dir / "traces.csv").string(),
          (dir / "summary.txt").string()};
}

}  // namespace rissim
