#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "rissim/dist.hpp"
#include "rissim/harness.hpp"
#include "rissim/pilot.hpp"
#include "rissim/precode.hpp"
#include "rissim/relaysec.hpp"
#include "rissim/slp.hpp"

namespace py = pybind11;
using namespace rissim;

PYBIND11_MODULE(_rissim, m) {
  m.doc() = "link-level simulation and optimization for surface-assisted downlinks";

  py::enum_<FeasibilityKind>(m, "FeasibilityKind")
      .value("GENERAL", FeasibilityKind::kGeneral)
      .value("CONTINUOUS_PHASE", FeasibilityKind::kContinuousPhase)
      .value("DISCRETE_PHASE", FeasibilityKind::kDiscretePhase);

  py::class_<FeasibilitySet>(m, "FeasibilitySet")
      .def(py::init<>())
      .def_readwrite("kind", &FeasibilitySet::kind)
      .def_readwrite("tau", &FeasibilitySet::tau);

  py::class_<ReflectionConfig>(m, "ReflectionConfig")
      .def(py::init<>())
      .def_readwrite("theta", &ReflectionConfig::theta)
      .def_readwrite("feasibility", &ReflectionConfig::feasibility)
      .def("is_feasible", &ReflectionConfig::is_feasible, py::arg("tol") = 1e-9);

  py::class_<Clustering>(m, "Clustering")
      .def(py::init<>())
      .def_readwrite("assignment", &Clustering::assignment)
      .def_readwrite("num_clusters", &Clustering::num_clusters)
      .def_static("contiguous", &Clustering::contiguous);

  m.def("project", &project, py::arg("theta_raw"), py::arg("feasibility"));
  m.def("expand", &expand, py::arg("config"), py::arg("clustering"));
  m.def("control_payload_bits", &control_payload_bits, py::arg("config"),
        py::arg("clustering") = std::nullopt, py::arg("quant_bits_per_coeff") = 8);

  py::enum_<FadingModel>(m, "FadingModel")
      .value("RAYLEIGH", FadingModel::kRayleigh)
      .value("RICIAN", FadingModel::kRician);

  py::class_<ChannelGenParams>(m, "ChannelGenParams")
      .def(py::init<>())
      .def_readwrite("model", &ChannelGenParams::model)
      .def_readwrite("rician_k", &ChannelGenParams::rician_k)
      .def_readwrite("pathloss_exponent", &ChannelGenParams::pathloss_exponent)
      .def_readwrite("reference_loss_db", &ChannelGenParams::reference_loss_db)
      .def_readwrite("carrier_wavelength", &ChannelGenParams::carrier_wavelength);

  py::class_<RisPanel>(m, "RisPanel")
      .def(py::init<>())
      .def_readwrite("elements", &RisPanel::elements)
      .def_readwrite("feasibility", &RisPanel::feasibility)
      .def_readwrite("position", &RisPanel::position)
      .def_readwrite("cluster_budget", &RisPanel::cluster_budget);

  py::class_<Constellation>(m, "Constellation")
      .def(py::init<>())
      .def_readwrite("order", &Constellation::order)
      .def_readwrite("ci_half_angle", &Constellation::ci_half_angle)
      .def_static("psk", &Constellation::psk);

  py::class_<Terminal>(m, "Terminal")
      .def(py::init<>())
      .def_readwrite("noise_power", &Terminal::noise_power)
      .def_readwrite("position", &Terminal::position)
      .def_readwrite("sinr_target", &Terminal::sinr_target)
      .def_readwrite("constellation", &Terminal::constellation);

  py::class_<Eavesdropper>(m, "Eavesdropper")
      .def(py::init<>())
      .def_readwrite("antennas", &Eavesdropper::antennas)
      .def_readwrite("noise_power", &Eavesdropper::noise_power)
      .def_readwrite("position", &Eavesdropper::position);

  py::class_<Scenario>(m, "Scenario")
      .def(py::init<>())
      .def_readwrite("bs_antennas", &Scenario::bs_antennas)
      .def_readwrite("num_terminals", &Scenario::num_terminals)
      .def_readwrite("ris", &Scenario::ris)
      .def_readwrite("terminals", &Scenario::terminals)
      .def_readwrite("eavesdropper", &Scenario::eavesdropper)
      .def_readwrite("power_budget", &Scenario::power_budget)
      .def_readwrite("weights", &Scenario::weights)
      .def_readwrite("seed", &Scenario::seed)
      .def_readwrite("channel_params", &Scenario::channel_params)
      .def_readwrite("bs_position", &Scenario::bs_position)
      .def_readwrite("active_antennas", &Scenario::active_antennas)
      .def("validate", &Scenario::validate);

  py::class_<ChannelSet>(m, "ChannelSet")
      .def_readonly("direct", &ChannelSet::direct)
      .def_readonly("bs_ris", &ChannelSet::bs_ris)
      .def_readonly("ris_user", &ChannelSet::ris_user)
      .def_readonly("snapshot_index", &ChannelSet::snapshot_index);

  m.def("synthesize_channels", &synthesize_channels, py::arg("scenario"),
        py::arg("snapshot_index") = 0);
  m.def("composite_channel", &composite_channel);
  m.def("composite_eve_channel", &composite_eve_channel);

  py::class_<SolverParams>(m, "SolverParams")
      .def(py::init<>())
      .def_readwrite("max_outer_iters", &SolverParams::max_outer_iters)
      .def_readwrite("max_inner_iters", &SolverParams::max_inner_iters)
      .def_readwrite("tol", &SolverParams::tol)
      .def_readwrite("restarts", &SolverParams::restarts)
      .def_readwrite("seed", &SolverParams::seed)
      .def_readwrite("trace_path", &SolverParams::trace_path);

  py::class_<PrecodeSolution>(m, "PrecodeSolution")
      .def_readonly("precoder", &PrecodeSolution::precoder)
      .def_readonly("configs", &PrecodeSolution::configs)
      .def_readonly("objective", &PrecodeSolution::objective)
      .def_readonly("iterate_trace", &PrecodeSolution::iterate_trace)
      .def_readonly("converged", &PrecodeSolution::converged)
      .def_readonly("alpha", &PrecodeSolution::alpha);

  m.def("sinr", &sinr);
  m.def("weighted_sum_rate", &weighted_sum_rate);
  m.def("mrt_precoder", &mrt_precoder);
  m.def("zf_precoder", &zf_precoder);
  m.def(
      "solve_wsr",
      [](const ChannelSet& ch, const Scenario& s, const SolverParams& p) {
        return solve_wsr(ch, s, p);
      },
      py::arg("channels"), py::arg("scenario"), py::arg("params") = SolverParams{});

  py::class_<CiSpec>(m, "CiSpec")
      .def(py::init<>())
      .def_readwrite("sigma", &CiSpec::sigma)
      .def_readwrite("gamma", &CiSpec::gamma)
      .def_readwrite("phi", &CiSpec::phi);

  py::class_<SlpSolution>(m, "SlpSolution")
      .def_readonly("x", &SlpSolution::x)
      .def_readonly("all_x", &SlpSolution::all_x)
      .def_readonly("slack", &SlpSolution::slack)
      .def_readonly("power", &SlpSolution::power)
      .def_readonly("configs", &SlpSolution::configs)
      .def_readonly("kkt_residual", &SlpSolution::kkt_residual);

  m.def("ci_slack", &ci_slack);
  m.def("slp_min_power", &slp_min_power);
  m.def(
      "solve_slp",
      [](const ChannelSet& ch, const Scenario& s, const cvec& symbols,
         const std::optional<std::vector<ReflectionConfig>>& fixed,
         const SolverParams& p) {
        return solve_slp(ch, s, symbols, fixed ? &*fixed : nullptr, p);
      },
      py::arg("channels"), py::arg("scenario"), py::arg("symbols"),
      py::arg("fixed_configs") = std::nullopt, py::arg("params") = SolverParams{});

  py::enum_<AssignMode>(m, "AssignMode")
      .value("EXHAUSTIVE", AssignMode::kExhaustive)
      .value("GREEDY", AssignMode::kGreedy);

  py::class_<PilotPool>(m, "PilotPool")
      .def_readonly("pilots", &PilotPool::pilots)
      .def("count", &PilotPool::count);

  py::class_<PilotAssignment>(m, "PilotAssignment")
      .def_readonly("map", &PilotAssignment::map)
      .def_readonly("score", &PilotAssignment::score);

  m.def("make_pool", &make_pool);
  m.def("default_serving_map", &default_serving_map);
  m.def("pilot_sir", &pilot_sir);
  m.def("assign_pilots", &assign_pilots);

  py::class_<HybridRelayConfig>(m, "HybridRelayConfig")
      .def(py::init<>())
      .def_readwrite("alpha", &HybridRelayConfig::alpha)
      .def_readwrite("relay_power_budget", &HybridRelayConfig::relay_power_budget)
      .def_readwrite("relay_noise", &HybridRelayConfig::relay_noise)
      .def_readwrite("active_antennas", &HybridRelayConfig::active_antennas);

  py::class_<SecrecyResult>(m, "SecrecyResult")
      .def_readonly("c1", &SecrecyResult::c1)
      .def_readonly("c2", &SecrecyResult::c2)
      .def_readonly("c_eve", &SecrecyResult::c_eve)
      .def_readonly("secrecy_rate", &SecrecyResult::secrecy_rate);

  m.def("sinr_active", &sinr_active);
  m.def("sinr_mrc", &sinr_mrc);
  m.def("solve_hybrid", &solve_hybrid);
  m.def("eve_capacity", &eve_capacity);
  m.def("secrecy_eval", &secrecy_eval);
  m.def("solve_secrecy", &solve_secrecy);

  py::class_<SlotMetrics>(m, "SlotMetrics")
      .def_readonly("slot", &SlotMetrics::slot)
      .def_readonly("sum_rate", &SlotMetrics::sum_rate)
      .def_readonly("min_true_slack", &SlotMetrics::min_true_slack)
      .def_readonly("est_error", &SlotMetrics::est_error)
      .def_readonly("ris_power", &SlotMetrics::ris_power);

  py::enum_<RefreshMode>(m, "RefreshMode")
      .value("KEEP_LOCAL", RefreshMode::kKeepLocal)
      .value("NEIGHBOR_AVERAGE", RefreshMode::kNeighborAverage)
      .value("BS_BROADCAST", RefreshMode::kBsBroadcast);

  py::class_<RefreshPolicy>(m, "RefreshPolicy")
      .def(py::init<>())
      .def_readwrite("mode", &RefreshPolicy::mode)
      .def_readwrite("period", &RefreshPolicy::period);

  py::enum_<MobilityKind>(m, "MobilityKind")
      .value("STATIC", MobilityKind::kStatic)
      .value("STOCHASTIC", MobilityKind::kStochastic)
      .value("STEERABLE", MobilityKind::kSteerable)
      .value("PREDICTABLE", MobilityKind::kPredictable)
      .value("HYBRID", MobilityKind::kHybrid);

  py::class_<MobilityProfile>(m, "MobilityProfile")
      .def(py::init<>())
      .def_readwrite("kind", &MobilityProfile::kind)
      .def_readwrite("drift_sigma", &MobilityProfile::drift_sigma)
      .def_readwrite("trajectory", &MobilityProfile::trajectory)
      .def_readwrite("transition", &MobilityProfile::transition);

  m.def("evolve", &evolve);
  m.def("run_distributed_episode", &run_distributed_episode, py::arg("scenario"),
        py::arg("profile"), py::arg("t_slots"), py::arg("policy"), py::arg("params"),
        py::arg("beta") = 1.0, py::arg("sensing_noise") = 0.0,
        py::arg("oracle_estimates") = false);

  py::class_<ParsedScenario>(m, "ParsedScenario")
      .def_readonly("scenario", &ParsedScenario::scenario)
      .def_readonly("mobility", &ParsedScenario::mobility);

  m.def("parse_scenario", &parse_scenario);
  m.def("brute_force_wsr", &brute_force_wsr);

  py::register_exception<InvalidScenario>(m, "InvalidScenarioError");
  py::register_exception<Infeasible>(m, "InfeasibleError");
  py::register_exception<ParseError>(m, "ScenarioParseError");
}
