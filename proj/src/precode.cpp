#include "rissim/precode.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

#include "rissim/rng.hpp"

namespace rissim {

namespace {

constexpr double kLog2e = 1.4426950408889634;  // 1/ln 2
// joint discrete enumeration kicks in below this many candidate configs
constexpr long kEnumerationCap = 4096;

std::vector<double> noise_powers(const Scenario& s) {
  std::vector<double> out;
  out.reserve(s.terminals.size());
  for (const auto& t : s.terminals) out.push_back(t.noise_power);
  return out;
}

}  // namespace

namespace detail {

double wsr_given_rows(const cmat& rows, const cmat& precoder,
                      const std::vector<double>& noise,
                      const std::vector<double>& weights) {
  const int num_k = static_cast<int>(rows.rows());
  double obj = 0;
  for (int k = 0; k < num_k; ++k) {
    const Eigen::RowVectorXcd a = rows.row(k) * precoder;
    const double sig = std::norm(a(k));
    const double denom = a.squaredNorm() - sig + noise[k];
    obj += weights[k] * std::log2(1.0 + sig / denom);
  }
  if (!std::isfinite(obj)) throw NonFiniteObjective("weighted sum rate is not finite");
  return obj;
}

cmat project_power(const cmat& precoder, double power_budget) {
  const double total = precoder.squaredNorm();
  if (total <= power_budget || total == 0.0) return precoder;
  return precoder * std::sqrt(power_budget / total);
}

cmat wsr_grad_precoder(const cmat& rows, const cmat& precoder,
                       const std::vector<double>& noise,
                       const std::vector<double>& weights) {
  const int num_k = static_cast<int>(rows.rows());
  const int num_j = static_cast<int>(precoder.cols());
  cmat grad = cmat::Zero(precoder.rows(), num_j);
  for (int k = 0; k < num_k; ++k) {
    const Eigen::RowVectorXcd a = rows.row(k) * precoder;
    const double total = a.squaredNorm() + noise[k];
    const double interf = total - std::norm(a(k));
    Eigen::RowVectorXcd coef(num_j);
    for (int j = 0; j < num_j; ++j) {
      const double c = 1.0 / total - (j == k ? 0.0 : 1.0 / interf);
      coef(j) = weights[k] * kLog2e * c * a(j);
    }
    grad += rows.row(k).adjoint() * coef;
  }
  return grad;
}

cmat ascend_precoder(const cmat& precoder, const cmat& grad, double power_budget,
                     const SolverParams& params,
                     const std::function<double(const cmat&)>& objective) {
  const double base = objective(precoder);
  const double gnorm = grad.norm();
  if (gnorm == 0.0) return precoder;
  // unit-norm ascent direction keeps iterates invariant under uniform
  // objective scaling
  const cmat dir = grad / gnorm;
  double step = params.step_init;
  for (int i = 0; i < 40; ++i) {
    const cmat trial = project_power(precoder + step * dir, power_budget);
    if (objective(trial) > base) return trial;
    step *= params.backtrack_factor;
  }
  return precoder;
}

}  // namespace detail

double sinr(const ChannelSet& ch, const std::vector<ReflectionConfig>& configs,
            const cmat& precoder, int user) {
  if (user < 0 || user >= ch.scenario.num_terminals) {
    throw IndexOutOfRange("user index out of range");
  }
  const cmat h = composite_channel(ch, configs);
  if (precoder.rows() != h.cols() || precoder.cols() != h.rows()) {
    throw DimensionMismatch("precoder must be L x K");
  }
  const Eigen::RowVectorXcd a = h.row(user) * precoder;
  const double sig = std::norm(a(user));
  const double denom = a.squaredNorm() - sig + ch.scenario.terminals[user].noise_power;
  return sig / denom;
}

double weighted_sum_rate(const ChannelSet& ch, const std::vector<ReflectionConfig>& configs,
                         const cmat& precoder, const std::vector<double>& weights) {
  const cmat h = composite_channel(ch, configs);
  return detail::wsr_given_rows(h, precoder, noise_powers(ch.scenario), weights);
}

cmat mrt_precoder(const ChannelSet& ch, const std::vector<ReflectionConfig>& configs,
                  double power_budget) {
  const cmat h = composite_channel(ch, configs);
  const int num_k = static_cast<int>(h.rows());
  cmat p(h.cols(), num_k);
  for (int k = 0; k < num_k; ++k) {
    const double norm = h.row(k).norm();
    if (norm == 0.0) throw ZeroChannel("user " + std::to_string(k) + " has a zero channel");
    p.col(k) = h.row(k).adjoint() * (std::sqrt(power_budget / num_k) / norm);
  }
  return p;
}

cmat zf_precoder(const ChannelSet& ch, const std::vector<ReflectionConfig>& configs,
                 double power_budget) {
  const cmat h = composite_channel(ch, configs);
  const int num_k = static_cast<int>(h.rows());
  Eigen::CompleteOrthogonalDecomposition<cmat> cod(h);
  if (cod.rank() < num_k) throw RankDeficient("composite channel has row rank < K");
  const cmat pinv = cod.pseudoInverse();  // L x K
  cmat p(h.cols(), num_k);
  for (int k = 0; k < num_k; ++k) {
    p.col(k) = pinv.col(k) * (std::sqrt(power_budget / num_k) / pinv.col(k).norm());
  }
  return p;
}

namespace {

// Optimization state: per-RIS clustered coefficient vectors. The identity
// clustering recovers the unclustered problem.
struct ThetaParam {
  std::vector<Clustering> clusterings;   // per RIS
  std::vector<FeasibilitySet> sets;      // per RIS
};

std::vector<ReflectionConfig> make_configs(const ThetaParam& tp,
                                           const std::vector<cvec>& tilde) {
  std::vector<ReflectionConfig> cfgs;
  for (size_t n = 0; n < tilde.size(); ++n) {
    cfgs.push_back(ReflectionConfig{expand(tilde[n], tp.clusterings[n]), tp.sets[n]});
  }
  return cfgs;
}

struct WsrProblem {
  const ChannelSet& ch;
  const Scenario& scenario;
  std::vector<double> noise;
  std::vector<double> weights;
  double pbar;

  double objective(const std::vector<ReflectionConfig>& cfgs, const cmat& p) const {
    return detail::wsr_given_rows(composite_channel(ch, cfgs), p, noise, weights);
  }
};

// Exact P block for K = 1: matched filter at full power.
cmat matched_filter(const cmat& rows, double pbar) {
  cmat p(rows.cols(), 1);
  const double n = rows.row(0).norm();
  if (n == 0.0 || pbar == 0.0) {
    p.setZero();
  } else {
    p.col(0) = rows.row(0).adjoint() * (std::sqrt(pbar) / n);
  }
  return p;
}

void precoder_step(const WsrProblem& prob, const ThetaParam& tp,
                   const std::vector<cvec>& tilde, cmat& p, const SolverParams& params) {
  const auto cfgs = make_configs(tp, tilde);
  const cmat rows = composite_channel(prob.ch, cfgs);
  if (prob.scenario.num_terminals == 1) {
    const cmat cand = matched_filter(rows, prob.pbar);
    if (detail::wsr_given_rows(rows, cand, prob.noise, prob.weights) >=
        detail::wsr_given_rows(rows, p, prob.noise, prob.weights)) {
      p = cand;
    }
    return;
  }
  auto obj = [&](const cmat& q) {
    return detail::wsr_given_rows(rows, q, prob.noise, prob.weights);
  };
  for (int it = 0; it < params.max_inner_iters; ++it) {
    const cmat grad = detail::wsr_grad_precoder(rows, p, prob.noise, prob.weights);
    const cmat next = detail::ascend_precoder(p, grad, prob.pbar, params, obj);
    if ((next - p).norm() == 0.0) break;
    p = next;
  }
}

// Per-cluster cascade coefficients for RIS n:
//   a_{k,j}(tilde) = base_{k,j} + sum_r tilde_r * beta[k][j][r]
struct RisLinearization {
  cmat base;                        // K x K, base_{k,j} without RIS n
  std::vector<cmat> beta;           // per k: K x R (j by r)
};

RisLinearization linearize_ris(const WsrProblem& prob, const ThetaParam& tp,
                               const std::vector<cvec>& tilde, size_t n, const cmat& p) {
  const int num_k = prob.scenario.num_terminals;
  const auto& cl = tp.clusterings[n];
  const int num_r = cl.num_clusters;

  std::vector<ReflectionConfig> cfgs = make_configs(tp, tilde);
  cfgs[static_cast<size_t>(n)].theta.setZero();
  const cmat rows_wo = composite_channel(prob.ch, cfgs);

  RisLinearization lin;
  lin.base = rows_wo * p;  // K x K
  const cmat cascade = prob.ch.bs_ris[n] * p;  // Q x K
  for (int k = 0; k < num_k; ++k) {
    cmat bk = cmat::Zero(p.cols(), num_r);
    for (int q = 0; q < prob.scenario.ris[n].elements; ++q) {
      const int r = cl.assignment[static_cast<size_t>(q)];
      for (int j = 0; j < p.cols(); ++j) {
        bk(j, r) += prob.ch.ris_user[n](k, q) * cascade(q, j);
      }
    }
    lin.beta.push_back(std::move(bk));
  }
  return lin;
}

double wsr_from_amplitudes(const WsrProblem& prob, const RisLinearization& lin,
                           const cvec& tilde) {
  const int num_k = static_cast<int>(lin.base.rows());
  double obj = 0;
  for (int k = 0; k < num_k; ++k) {
    Eigen::RowVectorXcd a = lin.base.row(k);
    a += (lin.beta[static_cast<size_t>(k)] * tilde).transpose();
    const double sig = std::norm(a(k));
    const double denom = a.squaredNorm() - sig + prob.noise[static_cast<size_t>(k)];
    obj += prob.weights[static_cast<size_t>(k)] * std::log2(1.0 + sig / denom);
  }
  return obj;
}

void theta_step_ris(const WsrProblem& prob, const ThetaParam& tp,
                    std::vector<cvec>& tilde, size_t n, const cmat& p,
                    const SolverParams& params) {
  const RisLinearization lin = linearize_ris(prob, tp, tilde, n, p);
  const FeasibilitySet& fs = tp.sets[n];
  cvec& th = tilde[n];
  const int num_r = static_cast<int>(th.size());

  if (fs.kind == FeasibilityKind::kDiscretePhase) {
    // exact per-coordinate argmax over the tau-point grid
    for (int r = 0; r < num_r; ++r) {
      double best = wsr_from_amplitudes(prob, lin, th);
      std::complex<double> best_v = th(r);
      for (int m = 0; m < fs.tau; ++m) {
        const std::complex<double> cand =
            std::polar(1.0, 2.0 * std::numbers::pi * m / fs.tau);
        cvec trial = th;
        trial(r) = cand;
        const double obj = wsr_from_amplitudes(prob, lin, trial);
        if (obj > best + 1e-15) {
          best = obj;
          best_v = cand;
        }
      }
      th(r) = best_v;
    }
    return;
  }

  if (prob.scenario.num_terminals == 1) {
    // single user: each coordinate has a closed-form phase alignment
    for (int sweep = 0; sweep < 8; ++sweep) {
      for (int r = 0; r < num_r; ++r) {
        const std::complex<double> b = lin.beta[0](0, r);
        if (std::abs(b) == 0.0) continue;
        std::complex<double> rest = lin.base(0, 0);
        for (int r2 = 0; r2 < num_r; ++r2) {
          if (r2 != r) rest += th(r2) * lin.beta[0](0, r2);
        }
        std::complex<double> cand;
        if (std::abs(rest) == 0.0) {
          cand = std::complex<double>(1.0, 0.0);
        } else {
          cand = std::polar(1.0, std::arg(rest) - std::arg(b));
        }
        cvec trial = th;
        trial(r) = cand;
        if (wsr_from_amplitudes(prob, lin, trial) >= wsr_from_amplitudes(prob, lin, th)) {
          th(r) = cand;
        }
      }
    }
    return;
  }

  // general multiuser case: projected gradient with backtracking
  auto obj = [&](const cvec& t) { return wsr_from_amplitudes(prob, lin, t); };
  for (int it = 0; it < params.max_inner_iters; ++it) {
    cvec grad = cvec::Zero(num_r);
    for (int k = 0; k < prob.scenario.num_terminals; ++k) {
      Eigen::RowVectorXcd a = lin.base.row(k);
      a += (lin.beta[static_cast<size_t>(k)] * th).transpose();
      const double total = a.squaredNorm() + prob.noise[static_cast<size_t>(k)];
      const double interf = total - std::norm(a(k));
      for (int j = 0; j < a.size(); ++j) {
        const double c = 1.0 / total - (j == k ? 0.0 : 1.0 / interf);
        const double w = prob.weights[static_cast<size_t>(k)] * kLog2e * c;
        grad += w * a(j) * lin.beta[static_cast<size_t>(k)].row(j).adjoint();
      }
    }
    const double base = obj(th);
    const double gnorm = grad.norm();
    if (gnorm == 0.0) break;
    const cvec dir = grad / gnorm;
    double step = params.step_init;
    bool moved = false;
    for (int i = 0; i < 30; ++i) {
      const cvec trial = project(th + step * dir, fs);
      if (obj(trial) > base) {
        th = trial;
        moved = true;
        break;
      }
      step *= params.backtrack_factor;
    }
    if (!moved) break;
  }
}

long joint_grid_size(const ThetaParam& tp) {
  long total = 1;
  for (size_t n = 0; n < tp.sets.size(); ++n) {
    if (tp.sets[n].kind != FeasibilityKind::kDiscretePhase) return -1;
    for (int r = 0; r < tp.clusterings[n].num_clusters; ++r) {
      total *= tp.sets[n].tau;
      if (total > kEnumerationCap) return -1;
    }
  }
  return total;
}

// Exact enumeration of small discrete instances. For K = 1 the precoder is
// eliminated in closed form, which makes the enumeration globally optimal.
void theta_joint_enumeration(const WsrProblem& prob, const ThetaParam& tp,
                             std::vector<cvec>& tilde, cmat& p) {
  std::vector<int> radix;
  for (size_t n = 0; n < tp.sets.size(); ++n) {
    for (int r = 0; r < tp.clusterings[n].num_clusters; ++r) radix.push_back(tp.sets[n].tau);
  }
  const size_t dims = radix.size();
  std::vector<int> idx(dims, 0);
  double best = -1;
  std::vector<cvec> best_tilde = tilde;
  const bool single_user = prob.scenario.num_terminals == 1;

  while (true) {
    std::vector<cvec> cand = tilde;
    size_t pos = 0;
    for (size_t n = 0; n < tp.sets.size(); ++n) {
      for (int r = 0; r < tp.clusterings[n].num_clusters; ++r) {
        cand[n](r) = std::polar(1.0, 2.0 * std::numbers::pi * idx[pos] / radix[pos]);
        ++pos;
      }
    }
    const auto cfgs = make_configs(tp, cand);
    const cmat rows = composite_channel(prob.ch, cfgs);
    double obj;
    if (single_user) {
      obj = detail::wsr_given_rows(rows, matched_filter(rows, prob.pbar), prob.noise,
                                   prob.weights);
    } else {
      obj = detail::wsr_given_rows(rows, p, prob.noise, prob.weights);
    }
    if (obj > best) {
      best = obj;
      best_tilde = cand;
    }
    size_t carry = 0;
    while (carry < dims && ++idx[carry] == radix[carry]) idx[carry++] = 0;
    if (carry == dims) break;
  }
  tilde = best_tilde;
  if (single_user) {
    const auto cfgs = make_configs(tp, tilde);
    p = matched_filter(composite_channel(prob.ch, cfgs), prob.pbar);
  }
}

struct RunResult {
  cmat p;
  std::vector<cvec> tilde;
  double objective;
  std::vector<double> trace;
  bool converged;
};

RunResult run_block_ascent(const WsrProblem& prob, const ThetaParam& tp,
                           std::vector<cvec> tilde, const SolverParams& params) {
  const int num_l = prob.scenario.bs_antennas;
  const int num_k = prob.scenario.num_terminals;
  cmat p;
  {
    const auto cfgs = make_configs(tp, tilde);
    try {
      p = mrt_precoder(prob.ch, cfgs, prob.pbar);
    } catch (const ZeroChannel&) {
      p = cmat::Zero(num_l, num_k);
    }
  }

  const long grid = joint_grid_size(tp);
  RunResult res;
  res.converged = false;
  double obj = prob.objective(make_configs(tp, tilde), p);
  res.trace.push_back(obj);

  for (int outer = 0; outer < params.max_outer_iters; ++outer) {
    precoder_step(prob, tp, tilde, p, params);
    if (grid > 0) {
      theta_joint_enumeration(prob, tp, tilde, p);
    } else {
      for (size_t n = 0; n < tp.sets.size(); ++n) {
        theta_step_ris(prob, tp, tilde, n, p, params);
      }
    }
    const double next = prob.objective(make_configs(tp, tilde), p);
    res.trace.push_back(next);
    if (next - obj <= params.tol * std::max(1.0, std::abs(obj))) {
      obj = std::max(obj, next);
      res.converged = true;
      break;
    }
    obj = next;
  }
  res.p = p;
  res.tilde = std::move(tilde);
  res.objective = res.trace.back();
  return res;
}

std::vector<cvec> random_tilde(const ThetaParam& tp, Prng& rng, bool all_ones) {
  std::vector<cvec> tilde;
  for (size_t n = 0; n < tp.sets.size(); ++n) {
    cvec t(tp.clusterings[n].num_clusters);
    for (Eigen::Index r = 0; r < t.size(); ++r) {
      t(r) = all_ones ? std::complex<double>(1, 0)
                      : std::polar(1.0, 2.0 * std::numbers::pi * rng.uniform());
    }
    tilde.push_back(project(t, tp.sets[n]));
  }
  return tilde;
}

void write_trace(const std::string& path, const std::vector<double>& trace) {
  if (path.empty()) return;
  std::ofstream out(path);
  if (!out) throw IoError("cannot open trace file " + path);
  out << "iteration,objective,min_slack\n";
  for (size_t i = 0; i < trace.size(); ++i) {
    out << i << "," << trace[i] << ",\n";
  }
}

PrecodeSolution solve_wsr_parameterized(const ChannelSet& ch, const Scenario& scenario,
                                        const ThetaParam& tp, const SolverParams& params,
                                        const std::vector<ReflectionConfig>* init_configs) {
  scenario.validate();
  params.validate();
  // normalize weights by their maximum so that a uniform rescaling of the
  // weights leaves every iterate bit-identical (the argmax is scale free)
  std::vector<double> weights = scenario.weights;
  double wmax = 0;
  for (double w : weights) wmax = std::max(wmax, w);
  if (wmax > 0) {
    for (double& w : weights) w /= wmax;
  } else {
    wmax = 1.0;
  }
  WsrProblem prob{ch, scenario, noise_powers(scenario), weights,
                  scenario.power_budget};

  RunResult best;
  best.objective = -1;
  Prng rng(mix_seed(scenario.seed, params.seed, 0xc0de, 0));
  for (int r = 0; r < params.restarts; ++r) {
    auto tilde = random_tilde(tp, rng, r == 0);
    RunResult run = run_block_ascent(prob, tp, std::move(tilde), params);
    if (run.objective > best.objective) best = std::move(run);
  }
  if (init_configs) {
    // warm start restricted to the identity clustering
    std::vector<cvec> tilde;
    bool ok = init_configs->size() == tp.sets.size();
    for (size_t n = 0; ok && n < tp.sets.size(); ++n) {
      if (tp.clusterings[n].num_clusters !=
          static_cast<int>((*init_configs)[n].theta.size())) {
        ok = false;
      } else {
        tilde.push_back((*init_configs)[n].theta);
      }
    }
    if (ok) {
      RunResult run = run_block_ascent(prob, tp, std::move(tilde), params);
      if (run.objective > best.objective) best = std::move(run);
    }
  }

  PrecodeSolution sol;
  sol.precoder = best.p;
  sol.configs = make_configs(tp, best.tilde);
  sol.objective = wmax * best.objective;
  for (double& v : best.trace) v *= wmax;
  sol.iterate_trace = best.trace;
  sol.converged = best.converged;
  write_trace(params.trace_path, best.trace);
  return sol;
}

ThetaParam identity_param(const Scenario& scenario) {
  ThetaParam tp;
  for (const auto& r : scenario.ris) {
    tp.clusterings.push_back(Clustering::contiguous(r.elements, r.elements));
    tp.sets.push_back(r.feasibility);
  }
  return tp;
}

}  // namespace

PrecodeSolution solve_wsr(const ChannelSet& ch, const Scenario& scenario,
                          const SolverParams& params,
                          const std::vector<ReflectionConfig>* init_configs) {
  return solve_wsr_parameterized(ch, scenario, identity_param(scenario), params,
                                 init_configs);
}

PrecodeSolution solve_wsr_clustered(const ChannelSet& ch, const Scenario& scenario,
                                    const std::vector<Clustering>& clusterings,
                                    const SolverParams& params) {
  if (clusterings.size() != scenario.ris.size()) {
    throw DimensionMismatch("need one clustering per RIS");
  }
  ThetaParam tp;
  for (size_t n = 0; n < scenario.ris.size(); ++n) {
    if (static_cast<int>(clusterings[n].assignment.size()) != scenario.ris[n].elements) {
      throw DimensionMismatch("clustering size must equal RIS element count");
    }
    clusterings[n].validate();
    tp.clusterings.push_back(clusterings[n]);
    tp.sets.push_back(scenario.ris[n].feasibility);
  }
  return solve_wsr_parameterized(ch, scenario, tp, params, nullptr);
}

PrecodeSolution solve_wsr_clustered(const ChannelSet& ch, const Scenario& scenario,
                                    const SolverParams& params) {
  std::vector<Clustering> cls;
  for (const auto& r : scenario.ris) {
    cls.push_back(Clustering::contiguous(r.elements, r.cluster_budget));
  }
  PrecodeSolution best = solve_wsr_clustered(ch, scenario, cls, params);

  // one greedy element-move improvement sweep over the partition
  SolverParams quick = params;
  quick.restarts = 1;
  quick.max_outer_iters = std::min(params.max_outer_iters, 30);
  for (size_t n = 0; n < cls.size(); ++n) {
    const int num_r = cls[n].num_clusters;
    if (num_r < 2) continue;
    for (size_t q = 0; q < cls[n].assignment.size(); ++q) {
      const int current = cls[n].assignment[q];
      for (int r = 0; r < num_r; ++r) {
        if (r == current) continue;
        std::vector<Clustering> trial = cls;
        trial[n].assignment[q] = r;
        // keep the partition surjective
        bool empty = true;
        for (int a : trial[n].assignment) {
          if (a == current) empty = false;
        }
        if (empty) continue;
        PrecodeSolution cand = solve_wsr_clustered(ch, scenario, trial, quick);
        if (cand.objective > best.objective) {
          best = std::move(cand);
          cls = std::move(trial);
          break;
        }
      }
    }
  }
  return best;
}

}  // namespace rissim
