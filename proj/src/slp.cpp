#include "rissim/slp.hpp"

#include <cmath>
#include <limits>

#include "rissim/rng.hpp"

namespace rissim {

double ci_slack(std::complex<double> y_tilde, std::complex<double> symbol,
                double sigma_w, double gamma, double phi) {
  const std::complex<double> u = y_tilde * std::polar(1.0, -std::arg(symbol));
  return (u.real() - sigma_w * std::sqrt(gamma)) * std::tan(phi) - std::abs(u.imag());
}

namespace {

struct RealQp {
  Eigen::MatrixXd a;  // 2K x 2L, constraints a_i . z >= b_i
  Eigen::VectorXd b;
};

// Each CI region is the intersection of two half-planes in the rotated
// received coordinate; stack them as linear constraints on [Re x; Im x].
RealQp build_qp(const cmat& rows, const cvec& symbols, const std::vector<CiSpec>& ci) {
  const int num_k = static_cast<int>(rows.rows());
  const int num_l = static_cast<int>(rows.cols());
  RealQp qp;
  qp.a.resize(2 * num_k, 2 * num_l);
  qp.b.resize(2 * num_k);
  for (int k = 0; k < num_k; ++k) {
    const double t = std::tan(ci[k].phi);
    const double d = ci[k].sigma * std::sqrt(ci[k].gamma);
    const Eigen::RowVectorXcd w =
        rows.row(k) * std::polar(1.0, -std::arg(symbols(k)));
    const Eigen::RowVectorXd wr = w.real();
    const Eigen::RowVectorXd wi = w.imag();
    qp.a.row(2 * k) << t * wr - wi, -t * wi - wr;
    qp.a.row(2 * k + 1) << t * wr + wi, -t * wi + wr;
    qp.b(2 * k) = t * d;
    qp.b(2 * k + 1) = t * d;
  }
  return qp;
}

Eigen::VectorXd min_slack_all(const cmat& rows, const cvec& symbols,
                              const std::vector<CiSpec>& ci, const cvec& x) {
  Eigen::VectorXd s(rows.rows());
  for (Eigen::Index k = 0; k < rows.rows(); ++k) {
    const std::complex<double> y = rows.row(k) * x;
    s(k) = ci_slack(y, symbols(k), ci[static_cast<size_t>(k)].sigma,
                    ci[static_cast<size_t>(k)].gamma, ci[static_cast<size_t>(k)].phi);
  }
  return s;
}

cvec to_complex(const Eigen::VectorXd& z) {
  const Eigen::Index l = z.size() / 2;
  cvec x(l);
  for (Eigen::Index i = 0; i < l; ++i) x(i) = {z(i), z(l + i)};
  return x;
}

std::vector<CiSpec> scenario_ci(const Scenario& s) {
  std::vector<CiSpec> ci;
  for (const auto& t : s.terminals) {
    ci.push_back({std::sqrt(t.noise_power), t.sinr_target, t.constellation.ci_half_angle});
  }
  return ci;
}

}  // namespace

SlpSolution slp_min_power(const cmat& rows, const cvec& symbols,
                          const std::vector<CiSpec>& ci) {
  const int num_k = static_cast<int>(rows.rows());
  if (symbols.size() != num_k || static_cast<int>(ci.size()) != num_k) {
    throw DimensionMismatch("symbols and CI specs must match the user count");
  }
  const RealQp qp = build_qp(rows, symbols, ci);
  const int rows_n = static_cast<int>(qp.a.rows());

  Eigen::VectorXd row_norm2(rows_n);
  for (int i = 0; i < rows_n; ++i) {
    row_norm2(i) = qp.a.row(i).squaredNorm();
    if (row_norm2(i) == 0.0 && qp.b(i) > 1e-15) {
      throw Infeasible("user with zero effective channel and positive SINR target");
    }
  }

  // Hildreth dual coordinate ascent: z = A^T lambda stays the running primal
  Eigen::VectorXd lambda = Eigen::VectorXd::Zero(rows_n);
  Eigen::VectorXd z = Eigen::VectorXd::Zero(qp.a.cols());
  const int max_sweeps = 5000;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double delta_max = 0;
    for (int i = 0; i < rows_n; ++i) {
      if (row_norm2(i) == 0.0) continue;
      const double resid = qp.b(i) - qp.a.row(i).dot(z);
      const double next = std::max(0.0, lambda(i) + resid / row_norm2(i));
      const double delta = next - lambda(i);
      if (delta != 0.0) {
        z += delta * qp.a.row(i).transpose();
        lambda(i) = next;
        delta_max = std::max(delta_max, std::abs(delta) * std::sqrt(row_norm2(i)));
      }
    }
    if (delta_max < 1e-12) break;
  }

  SlpSolution sol;
  sol.x = to_complex(z);
  sol.slack = min_slack_all(rows, symbols, ci, sol.x);

  // scale out residual violations when the homogeneous part allows it
  if (sol.slack.minCoeff() < 0) {
    double scale = 1.0;
    bool scalable = true;
    for (int k = 0; k < num_k; ++k) {
      const double t = std::tan(ci[k].phi);
      const double d = ci[k].sigma * std::sqrt(ci[k].gamma);
      const double hom = sol.slack(k) + t * d;  // scales linearly with x
      if (hom <= 0) {
        scalable = false;
        break;
      }
      scale = std::max(scale, t * d / hom);
    }
    if (scalable && scale < 1e6) {
      sol.x *= scale;
      sol.slack = min_slack_all(rows, symbols, ci, sol.x);
    }
  }
  if (sol.slack.minCoeff() < -1e-4) {
    throw Infeasible("CI constraints unattainable for the fixed reflection state");
  }

  // KKT residual: stationarity is exact by construction, check primal
  // feasibility and complementary slackness
  double resid = std::max(0.0, (qp.b - qp.a * z).maxCoeff());
  for (int i = 0; i < rows_n; ++i) {
    resid = std::max(resid, std::abs(lambda(i) * (qp.a.row(i).dot(z) - qp.b(i))));
  }
  sol.kkt_residual = resid;
  sol.power = sol.x.squaredNorm();
  return sol;
}

namespace {

// Descend total power over free reflection coefficients with a
// finite-difference surrogate gradient; accepts only improving steps.
template <typename PowerFn>
void descend_theta(std::vector<ReflectionConfig>& configs, PowerFn&& power_of,
                   const SolverParams& params, std::vector<double>* trace) {
  double current = power_of(configs);
  if (trace) trace->push_back(current);
  for (int outer = 0; outer < std::min(params.max_outer_iters, 25); ++outer) {
    bool improved = false;
    for (size_t n = 0; n < configs.size(); ++n) {
      auto& cfg = configs[n];
      if (cfg.feasibility.kind == FeasibilityKind::kDiscretePhase) {
        for (Eigen::Index q = 0; q < cfg.theta.size(); ++q) {
          const std::complex<double> keep = cfg.theta(q);
          std::complex<double> best_v = keep;
          double best = current;
          for (int m = 0; m < cfg.feasibility.tau; ++m) {
            cfg.theta(q) = std::polar(1.0, 2.0 * std::numbers::pi * m / cfg.feasibility.tau);
            const double p = power_of(configs);
            if (p < best - 1e-15) {
              best = p;
              best_v = cfg.theta(q);
            }
          }
          cfg.theta(q) = best_v;
          if (best < current) {
            current = best;
            improved = true;
          }
        }
      } else {
        // finite-difference gradient in the phase parameters
        const double h = 1e-5;
        Eigen::VectorXd grad(cfg.theta.size());
        for (Eigen::Index q = 0; q < cfg.theta.size(); ++q) {
          const std::complex<double> keep = cfg.theta(q);
          cfg.theta(q) = keep * std::polar(1.0, h);
          const double plus = power_of(configs);
          cfg.theta(q) = keep * std::polar(1.0, -h);
          const double minus = power_of(configs);
          cfg.theta(q) = keep;
          grad(q) = (plus - minus) / (2 * h);
        }
        double step = 0.5;
        for (int bt = 0; bt < 20; ++bt) {
          auto trial = cfg;
          for (Eigen::Index q = 0; q < cfg.theta.size(); ++q) {
            trial.theta(q) = cfg.theta(q) * std::polar(1.0, -step * grad(q));
          }
          trial.theta = project(trial.theta, cfg.feasibility);
          auto saved = cfg;
          cfg = trial;
          const double p = power_of(configs);
          if (p < current - 1e-15) {
            current = p;
            improved = true;
            break;
          }
          cfg = saved;
          step *= params.backtrack_factor;
        }
      }
    }
    if (trace) trace->push_back(current);
    if (!improved) break;
  }
}

std::vector<ReflectionConfig> default_configs(const Scenario& s) {
  std::vector<ReflectionConfig> cfgs;
  for (const auto& r : s.ris) {
    ReflectionConfig c;
    c.theta = project(cvec::Ones(r.elements), r.feasibility);
    c.feasibility = r.feasibility;
    cfgs.push_back(c);
  }
  return cfgs;
}

}  // namespace

SlpSolution solve_slp(const ChannelSet& ch, const Scenario& scenario, const cvec& symbols,
                      const std::vector<ReflectionConfig>* fixed_configs,
                      const SolverParams& params) {
  scenario.validate();
  params.validate();
  const auto ci = scenario_ci(scenario);

  if (fixed_configs) {
    SlpSolution sol = slp_min_power(composite_channel(ch, *fixed_configs), symbols, ci);
    sol.configs = *fixed_configs;
    return sol;
  }

  std::vector<ReflectionConfig> configs = default_configs(scenario);
  auto power_of = [&](const std::vector<ReflectionConfig>& cfgs) {
    try {
      return slp_min_power(composite_channel(ch, cfgs), symbols, ci).power;
    } catch (const Infeasible&) {
      return 1e12;
    }
  };
  std::vector<double> trace;
  descend_theta(configs, power_of, params, &trace);
  SlpSolution sol = slp_min_power(composite_channel(ch, configs), symbols, ci);
  sol.configs = configs;
  sol.iterate_trace = std::move(trace);
  return sol;
}

SlpSolution solve_slp_all_symbols(const ChannelSet& ch, const Scenario& scenario,
                                  const SolverParams& params,
                                  const std::vector<ReflectionConfig>* init_configs,
                                  long cap) {
  scenario.validate();
  params.validate();
  const auto ci = scenario_ci(scenario);
  const int num_k = scenario.num_terminals;

  long combos = 1;
  for (const auto& t : scenario.terminals) {
    combos *= t.constellation.order;
    if (combos > cap) {
      throw CombinatorialCap("symbol combinations exceed cap of " + std::to_string(cap));
    }
  }

  // all PSK symbol vectors, mixed-radix enumeration
  std::vector<cvec> symbol_vectors;
  std::vector<int> idx(static_cast<size_t>(num_k), 0);
  while (true) {
    cvec s(num_k);
    for (int k = 0; k < num_k; ++k) {
      const int m = scenario.terminals[static_cast<size_t>(k)].constellation.order;
      s(k) = std::polar(1.0, 2.0 * std::numbers::pi * idx[static_cast<size_t>(k)] / m);
    }
    symbol_vectors.push_back(s);
    int carry = 0;
    while (carry < num_k) {
      const int m = scenario.terminals[static_cast<size_t>(carry)].constellation.order;
      if (++idx[static_cast<size_t>(carry)] < m) break;
      idx[static_cast<size_t>(carry)] = 0;
      ++carry;
    }
    if (carry == num_k) break;
  }

  auto total_power = [&](const std::vector<ReflectionConfig>& cfgs) {
    const cmat rows = composite_channel(ch, cfgs);
    double total = 0;
    for (const auto& s : symbol_vectors) {
      total += slp_min_power(rows, s, ci).power;
    }
    return total;
  };

  std::vector<ReflectionConfig> configs =
      init_configs ? *init_configs : default_configs(scenario);
  std::vector<double> trace;
  auto guarded = [&](const std::vector<ReflectionConfig>& cfgs) {
    try {
      return total_power(cfgs);
    } catch (const Infeasible&) {
      return 1e12;
    }
  };
  descend_theta(configs, guarded, params, &trace);

  const cmat rows = composite_channel(ch, configs);
  SlpSolution sol;
  sol.all_x.resize(scenario.bs_antennas, static_cast<Eigen::Index>(symbol_vectors.size()));
  double fro2 = 0;
  double worst_kkt = 0;
  Eigen::VectorXd worst_slack =
      Eigen::VectorXd::Constant(num_k, std::numeric_limits<double>::infinity());
  for (size_t i = 0; i < symbol_vectors.size(); ++i) {
    SlpSolution col = slp_min_power(rows, symbol_vectors[i], ci);
    sol.all_x.col(static_cast<Eigen::Index>(i)) = col.x;
    fro2 += col.power;
    worst_kkt = std::max(worst_kkt, col.kkt_residual);
    worst_slack = worst_slack.cwiseMin(col.slack);
  }
  sol.x = sol.all_x.col(0);
  sol.power = fro2;
  sol.slack = worst_slack;
  sol.kkt_residual = worst_kkt;
  sol.configs = configs;
  sol.iterate_trace = std::move(trace);
  return sol;
}

}  // namespace rissim
