#include "rissim/relaysec.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "rissim/rng.hpp"

namespace rissim {

namespace {

constexpr double kLog2e = std::numbers::log2e;

void require_active(const ChannelSet& ch) {
  if (!ch.bs_act || ch.act_user.size() != static_cast<size_t>(ch.scenario.num_terminals)) {
    throw MissingActiveChannels("scenario has no amplified relay path");
  }
}

// effective relay rows: row k = h_{relay->user k}^T H_{BS->relay}
cmat relay_rows(const ChannelSet& ch) {
  const int k_users = ch.scenario.num_terminals;
  cmat rows(k_users, ch.bs_act->cols());
  for (int k = 0; k < k_users; ++k) {
    rows.row(k) = ch.act_user[static_cast<size_t>(k)].transpose() * (*ch.bs_act);
  }
  return rows;
}

std::vector<double> noise_powers(const Scenario& s) {
  std::vector<double> n;
  for (const auto& t : s.terminals) n.push_back(t.noise_power);
  return n;
}

double active_sinr_from_rows(const cmat& act_rows, const std::vector<double>& h_norm2,
                             const HybridRelayConfig& cfg, const cmat& p, int k,
                             double noise_k) {
  if (cfg.alpha == 0.0) return 0.0;
  const double a2 = cfg.alpha * cfg.alpha;
  const Eigen::RowVectorXcd r = act_rows.row(k) * p;
  const double sig = a2 * std::norm(r(k));
  double denom = noise_k + a2 * h_norm2[static_cast<size_t>(k)] * cfg.relay_noise;
  for (Eigen::Index l = 0; l < r.size(); ++l) {
    if (l != k) denom += a2 * std::norm(r(l));
  }
  return sig / denom;
}

// largest alpha honoring the relay power cap for the current precoder
double alpha_cap(const ChannelSet& ch, const HybridRelayConfig& cfg, const cmat& p) {
  double load = 0;
  for (Eigen::Index k = 0; k < p.cols(); ++k) {
    load += ((*ch.bs_act) * p.col(k)).squaredNorm() + cfg.relay_noise;
  }
  if (load <= 0) return 0;
  return std::sqrt(cfg.relay_power_budget / load);
}

double hybrid_objective_rows(const cmat& rows, const cmat& act_rows,
                             const std::vector<double>& h_norm2,
                             const HybridRelayConfig& cfg, const Scenario& s,
                             const cmat& p) {
  double obj = 0;
  for (int k = 0; k < s.num_terminals; ++k) {
    const Eigen::RowVectorXcd a = rows.row(k) * p;
    const double noise = s.terminals[static_cast<size_t>(k)].noise_power;
    double denom = noise;
    for (Eigen::Index l = 0; l < a.size(); ++l) {
      if (l != k) denom += std::norm(a(l));
    }
    const double mrc = std::norm(a(k)) / denom +
                       active_sinr_from_rows(act_rows, h_norm2, cfg, p, k, noise);
    obj += s.weights[static_cast<size_t>(k)] * std::log2(1.0 + mrc);
  }
  return obj;
}

double hybrid_objective(const ChannelSet& ch, const cmat& act_rows,
                        const std::vector<double>& h_norm2, const HybridRelayConfig& cfg,
                        const std::vector<ReflectionConfig>& configs, const cmat& p) {
  return hybrid_objective_rows(composite_channel(ch, configs), act_rows, h_norm2, cfg,
                               ch.scenario, p);
}

// gradient of the MRC weighted sum rate with respect to conj(P)
cmat hybrid_grad(const cmat& pass_rows, const cmat& act_rows,
                 const std::vector<double>& h_norm2, const HybridRelayConfig& cfg,
                 const Scenario& s, const cmat& p) {
  const int k_users = static_cast<int>(pass_rows.rows());
  const double a2 = cfg.alpha * cfg.alpha;
  cmat grad = cmat::Zero(p.rows(), p.cols());
  for (int k = 0; k < k_users; ++k) {
    const double noise = s.terminals[static_cast<size_t>(k)].noise_power;
    const Eigen::RowVectorXcd ap = pass_rows.row(k) * p;
    const Eigen::RowVectorXcd aa = act_rows.row(k) * p;
    const double sp = std::norm(ap(k));
    double dp = noise;
    const double sa = a2 * std::norm(aa(k));
    double da = noise + a2 * h_norm2[static_cast<size_t>(k)] * cfg.relay_noise;
    for (int l = 0; l < k_users; ++l) {
      if (l == k) continue;
      dp += std::norm(ap(l));
      da += a2 * std::norm(aa(l));
    }
    const double w = s.weights[static_cast<size_t>(k)] * kLog2e /
                     (1.0 + sp / dp + sa / da);
    for (int j = 0; j < k_users; ++j) {
      const double cp = (j == k) ? 1.0 / dp : -sp / (dp * dp);
      grad.col(j) += w * cp * pass_rows.row(k).adjoint() * ap(j);
      if (a2 > 0) {
        const double ca = (j == k) ? a2 / da : -a2 * sa / (da * da);
        grad.col(j) += w * ca * act_rows.row(k).adjoint() * aa(j);
      }
    }
  }
  return grad;
}

// accept-on-improve update of one panel's reflection: exact per-element
// enumeration on a discrete grid, finite-difference phase ascent otherwise
template <typename Objective>
bool improve_theta(std::vector<ReflectionConfig>& configs, size_t n,
                   const SolverParams& params, Objective&& obj) {
  const FeasibilitySet& fs = configs[n].feasibility;
  cvec& th = configs[n].theta;
  double base = obj();
  bool improved = false;
  if (fs.kind == FeasibilityKind::kDiscretePhase) {
    for (Eigen::Index q = 0; q < th.size(); ++q) {
      const std::complex<double> keep = th(q);
      std::complex<double> best = keep;
      for (int m = 0; m < fs.tau; ++m) {
        th(q) = std::polar(1.0, 2.0 * std::numbers::pi * m / fs.tau);
        const double v = obj();
        if (v > base) {
          base = v;
          best = th(q);
          improved = true;
        }
      }
      th(q) = best;
    }
    return improved;
  }
  for (int it = 0; it < params.max_inner_iters; ++it) {
    Eigen::VectorXd phase(th.size());
    for (Eigen::Index q = 0; q < th.size(); ++q) phase(q) = std::arg(th(q));
    Eigen::VectorXd grad(th.size());
    const double h = 1e-5;
    for (Eigen::Index q = 0; q < th.size(); ++q) {
      const std::complex<double> keep = th(q);
      th(q) = std::polar(1.0, phase(q) + h);
      const double up = obj();
      th(q) = std::polar(1.0, phase(q) - h);
      const double dn = obj();
      th(q) = keep;
      grad(q) = (up - dn) / (2 * h);
    }
    const double gnorm = grad.norm();
    if (gnorm == 0) break;
    grad /= gnorm;
    double step = params.step_init;
    bool moved = false;
    for (int i = 0; i < 30; ++i) {
      cvec trial(th.size());
      for (Eigen::Index q = 0; q < th.size(); ++q) {
        trial(q) = std::polar(1.0, phase(q) + step * grad(q));
      }
      trial = project(trial, fs);
      const cvec keep = th;
      th = trial;
      const double v = obj();
      if (v > base) {
        base = v;
        moved = true;
        improved = true;
        break;
      }
      th = keep;
      step *= params.backtrack_factor;
    }
    if (!moved) break;
  }
  return improved;
}

constexpr double kGolden = 0.6180339887498949;

// golden-section maximization of f on [lo, hi]
template <typename F>
double golden_max(F&& f, double lo, double hi, int iters = 60) {
  double a = lo, b = hi;
  double x1 = b - kGolden * (b - a);
  double x2 = a + kGolden * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int i = 0; i < iters; ++i) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kGolden * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kGolden * (b - a);
      f1 = f(x1);
    }
  }
  return f1 > f2 ? x1 : x2;
}

}  // namespace

double sinr_active(const ChannelSet& ch, const HybridRelayConfig& cfg, const cmat& precoder,
                   int user) {
  cfg.validate();
  require_active(ch);
  if (user < 0 || user >= ch.scenario.num_terminals) {
    throw IndexOutOfRange("user index out of range");
  }
  const cmat act_rows = relay_rows(ch);
  std::vector<double> h_norm2;
  for (const auto& h : ch.act_user) h_norm2.push_back(h.squaredNorm());
  return active_sinr_from_rows(act_rows, h_norm2, cfg, precoder, user,
                               ch.scenario.terminals[static_cast<size_t>(user)].noise_power);
}

double sinr_mrc(const ChannelSet& ch, const std::vector<ReflectionConfig>& configs,
                const HybridRelayConfig& cfg, const cmat& precoder, int user) {
  return sinr(ch, configs, precoder, user) + sinr_active(ch, cfg, precoder, user);
}

PrecodeSolution solve_hybrid(const ChannelSet& ch, const Scenario& scenario,
                             const HybridRelayConfig& cfg, const SolverParams& params) {
  cfg.validate();
  params.validate();
  require_active(ch);

  // the reflective-only optimum at alpha = 0 is a feasible starting point, so
  // the hybrid objective can only move up from it
  PrecodeSolution sol = solve_wsr(ch, scenario, params);
  if (sol.precoder.squaredNorm() == 0.0 && scenario.power_budget > 0) {
    // dead reflective path: spread the budget so the amplified path has a
    // gradient to climb
    sol.precoder = cmat::Constant(
        scenario.bs_antennas, scenario.num_terminals,
        std::sqrt(scenario.power_budget /
                  (scenario.bs_antennas * scenario.num_terminals)));
  }
  const cmat act_rows = relay_rows(ch);
  std::vector<double> h_norm2;
  for (const auto& h : ch.act_user) h_norm2.push_back(h.squaredNorm());

  HybridRelayConfig state = cfg;
  state.alpha = 0;
  auto obj_now = [&](const cmat& p) {
    return hybrid_objective(ch, act_rows, h_norm2, state, sol.configs, p);
  };

  double obj = obj_now(sol.precoder);
  sol.iterate_trace.push_back(obj);
  for (int outer = 0; outer < params.max_outer_iters; ++outer) {
    // alpha block: bounded 1-D search on the relay power cap
    const double cap = alpha_cap(ch, cfg, sol.precoder);
    if (cap > 0) {
      const double cand = golden_max(
          [&](double a) {
            HybridRelayConfig t = state;
            t.alpha = a;
            return hybrid_objective(ch, act_rows, h_norm2, t, sol.configs, sol.precoder);
          },
          0.0, cap);
      HybridRelayConfig t = state;
      t.alpha = cand;
      if (hybrid_objective(ch, act_rows, h_norm2, t, sol.configs, sol.precoder) > obj) {
        state.alpha = cand;
      }
    }

    // precoder block: reject trials that would bust the relay power cap at
    // the current amplification
    const cmat pass_rows = composite_channel(ch, sol.configs);
    const cmat grad = hybrid_grad(pass_rows, act_rows, h_norm2, state, scenario,
                                  sol.precoder);
    auto guarded = [&](const cmat& p) {
      if (state.alpha > alpha_cap(ch, cfg, p) + 1e-12) return -1e300;
      return hybrid_objective_rows(pass_rows, act_rows, h_norm2, state, scenario, p);
    };
    sol.precoder = detail::ascend_precoder(sol.precoder, grad, scenario.power_budget,
                                           params, guarded);

    // reflection block, one panel at a time
    for (size_t n = 0; n < sol.configs.size(); ++n) {
      improve_theta(sol.configs, n, params, [&]() { return obj_now(sol.precoder); });
    }

    const double next = obj_now(sol.precoder);
    sol.iterate_trace.push_back(next);
    if (next - obj <= params.tol * std::max(1.0, std::abs(obj))) {
      obj = next;
      sol.converged = true;
      break;
    }
    obj = next;
  }
  sol.objective = obj;
  sol.alpha = state.alpha;
  return sol;
}

double eve_capacity(const ChannelSet& ch, const std::vector<ReflectionConfig>& configs,
                    const cvec& p1, const cvec& p2, const Eavesdropper& eve) {
  if (!ch.eve_direct) throw MissingEveChannels("scenario has no eavesdropper channels");
  if (eve.noise_power <= 0) throw InvalidScenario("eavesdropper noise power must be > 0");
  const cmat he = composite_eve_channel(ch, configs);
  const cvec d = he * p1;  // useful-signal direction
  const cvec v = he * p2;  // interfering stream
  const Eigen::Index m = he.rows();
  const cmat cov = eve.noise_power * cmat::Identity(m, m) + v * v.adjoint();
  const cmat arg = cmat::Identity(m, m) + cov.llt().solve(cmat(d * d.adjoint()));
  return std::log2(std::max(1.0, arg.determinant().real()));
}

SecrecyResult secrecy_eval(const ChannelSet& ch, const std::vector<ReflectionConfig>& configs,
                           const cvec& p1, const cvec& p2, const Scenario& scenario) {
  if (scenario.num_terminals != 2) {
    throw InvalidScenario("secrecy evaluation needs exactly two terminals");
  }
  cmat p(p1.size(), 2);
  p.col(0) = p1;
  p.col(1) = p2;
  SecrecyResult r;
  r.c1 = std::log2(1.0 + sinr(ch, configs, p, 0));
  r.c2 = std::log2(1.0 + sinr(ch, configs, p, 1));
  r.c_eve = 0;
  if (ch.eve_direct && scenario.eavesdropper) {
    r.c_eve = eve_capacity(ch, configs, p1, p2, *scenario.eavesdropper);
  }
  r.secrecy_rate = std::max(0.0, r.c1 - r.c_eve);
  return r;
}

namespace {

struct SecrecyObjective {
  const ChannelSet& ch;
  const Scenario& scenario;
  double c_demand;
  double mu;

  double penalized(const std::vector<ReflectionConfig>& configs, const cmat& p) const {
    SecrecyResult r = secrecy_eval(ch, configs, p.col(0), p.col(1), scenario);
    const double gap = std::max(0.0, c_demand - r.c2);
    return (r.c1 - r.c_eve) - mu * gap * gap;
  }
};

cmat finite_diff_grad(const SecrecyObjective& f,
                      const std::vector<ReflectionConfig>& configs, cmat p) {
  const double h = 1e-6;
  cmat grad(p.rows(), p.cols());
  for (Eigen::Index c = 0; c < p.cols(); ++c) {
    for (Eigen::Index r = 0; r < p.rows(); ++r) {
      const std::complex<double> keep = p(r, c);
      p(r, c) = keep + h;
      const double re_up = f.penalized(configs, p);
      p(r, c) = keep - h;
      const double re_dn = f.penalized(configs, p);
      p(r, c) = keep + std::complex<double>(0, h);
      const double im_up = f.penalized(configs, p);
      p(r, c) = keep - std::complex<double>(0, h);
      const double im_dn = f.penalized(configs, p);
      p(r, c) = keep;
      grad(r, c) = std::complex<double>((re_up - re_dn) / (2 * h),
                                        (im_up - im_dn) / (2 * h));
    }
  }
  return grad;
}

}  // namespace

PrecodeSolution solve_secrecy(const ChannelSet& ch, const Scenario& scenario,
                              double c_demand, const SolverParams& params) {
  params.validate();
  if (scenario.num_terminals != 2) {
    throw InvalidScenario("secrecy optimization needs exactly two terminals");
  }
  if (c_demand < 0) throw InvalidScenario("rate demand must be >= 0");

  // feasibility certificate: the largest achievable C2 with the full budget
  Scenario only2 = scenario;
  only2.weights = {0.0, 1.0};
  PrecodeSolution best_c2 = solve_wsr(ch, only2, params);
  if (best_c2.objective < c_demand - 1e-9) {
    throw DemandInfeasible("rate demand exceeds the single-user capacity of user 2");
  }

  Scenario only1 = scenario;
  only1.weights = {1.0, 0.0};
  PrecodeSolution init1 = solve_wsr(ch, only1, params);

  PrecodeSolution best;
  best.objective = -1e300;
  bool have_feasible = false;

  for (const PrecodeSolution* init : {&init1, &best_c2}) {
    cmat p = init->precoder;
    std::vector<ReflectionConfig> configs = init->configs;
    std::vector<double> trace;
    for (double mu : {10.0, 100.0, 1e3, 1e4, 1e5}) {
      SecrecyObjective f{ch, scenario, c_demand, mu};
      double obj = f.penalized(configs, p);
      for (int outer = 0; outer < std::max(5, params.max_outer_iters / 10); ++outer) {
        const cmat grad = finite_diff_grad(f, configs, p);
        p = detail::ascend_precoder(p, grad, scenario.power_budget, params,
                                    [&](const cmat& q) { return f.penalized(configs, q); });
        for (size_t n = 0; n < configs.size(); ++n) {
          improve_theta(configs, n, params, [&]() { return f.penalized(configs, p); });
        }
        const double next = f.penalized(configs, p);
        trace.push_back(next);
        if (next - obj <= params.tol * std::max(1.0, std::abs(obj))) {
          obj = next;
          break;
        }
        obj = next;
      }
      SecrecyResult r = secrecy_eval(ch, configs, p.col(0), p.col(1), scenario);
      if (r.c2 >= c_demand - 1e-6) {
        const double value = r.c1 - r.c_eve;
        if (!have_feasible || value > best.objective) {
          have_feasible = true;
          best.precoder = p;
          best.configs = configs;
          best.objective = value;
          best.iterate_trace = trace;
          best.converged = true;
        }
      }
    }
  }

  if (!have_feasible) {
    // the demand certificate passed, so meeting C2 alone is always available
    best.precoder = best_c2.precoder;
    best.configs = best_c2.configs;
    SecrecyResult r = secrecy_eval(ch, best.configs, best.precoder.col(0),
                                   best.precoder.col(1), scenario);
    best.objective = r.c1 - r.c_eve;
  }
  best.objective = std::max(0.0, best.objective);
  return best;
}

}  // namespace rissim
