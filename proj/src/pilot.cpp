#include "rissim/pilot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "rissim/rng.hpp"

namespace rissim {

namespace {

constexpr long kExhaustiveCap = 1000000;

// row-vector response of panel n to pilot s: h_RU,k^T diag(theta) H_BR s
std::complex<double> cascade_response(const ChannelSet& ch,
                                      const std::vector<ReflectionConfig>& configs,
                                      int n, int k, const cvec& s) {
  const auto& theta = configs[static_cast<size_t>(n)].theta;
  const Eigen::RowVectorXcd row =
      ch.ris_user[static_cast<size_t>(n)].row(k).cwiseProduct(theta.transpose());
  return row * (ch.bs_ris[static_cast<size_t>(n)] * s);
}

void check_unit_modulus(const std::vector<ReflectionConfig>& configs) {
  for (const auto& c : configs) {
    for (Eigen::Index q = 0; q < c.theta.size(); ++q) {
      if (std::abs(std::abs(c.theta(q)) - 1.0) > 1e-9) {
        throw InvalidScenario("pilot training requires unit-modulus reflection");
      }
    }
  }
}

// ratio of user k if it were given pilot p (0-based); depends on no other
// user's choice, so assignments score from a K x count table
double ratio_for(const ChannelSet& ch, const std::vector<ReflectionConfig>& configs,
                 const PilotPool& pool, int k, int n_serving, int p) {
  const cvec s = pool.pilots.col(p);
  const int num_ris = static_cast<int>(ch.bs_ris.size());
  const double sig = std::norm(cascade_response(ch, configs, n_serving, k, s));
  double interf = 0;
  for (int n = 0; n < num_ris; ++n) {
    if (n == n_serving) continue;
    interf += std::norm(cascade_response(ch, configs, n, k, s));
  }
  if (interf == 0.0) {
    return sig > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  }
  return sig / interf;
}

Eigen::MatrixXd ratio_table(const ChannelSet& ch,
                            const std::vector<ReflectionConfig>& configs,
                            const PilotPool& pool,
                            const std::vector<int>& serving_map) {
  const int k_users = static_cast<int>(serving_map.size());
  Eigen::MatrixXd table(k_users, pool.count());
  for (int k = 0; k < k_users; ++k) {
    for (int p = 0; p < pool.count(); ++p) {
      table(k, p) = ratio_for(ch, configs, pool, k, serving_map[static_cast<size_t>(k)], p);
    }
  }
  return table;
}

double min_score(const Eigen::MatrixXd& table, const std::vector<int>& map0) {
  double m = std::numeric_limits<double>::infinity();
  for (size_t k = 0; k < map0.size(); ++k) {
    m = std::min(m, table(static_cast<int>(k), map0[k]));
  }
  return m;
}

}  // namespace

void PilotPool::validate() const {
  for (int i = 0; i < count(); ++i) {
    if (std::abs(pilots.col(i).norm() - 1.0) > 1e-10) {
      throw ValidationError("pilot is not unit norm");
    }
    for (int j = 0; j < i; ++j) {
      if (std::abs((pilots.col(i).adjoint() * pilots.col(j))(0)) > 1e-10) {
        throw ValidationError("pilots are not orthogonal");
      }
    }
  }
}

PilotPool make_pool(int l, int count, uint64_t seed) {
  if (count < 1 || count > l) {
    throw ValidationError("pilot count must lie in 1..L");
  }
  Prng rng(mix_seed(seed, 0, 0x9170, 0));
  cmat g(l, count);
  for (int c = 0; c < count; ++c) {
    for (int r = 0; r < l; ++r) g(r, c) = rng.cgaussian();
  }
  Eigen::HouseholderQR<cmat> qr(g);
  cmat q = qr.householderQ() * cmat::Identity(l, count);
  return PilotPool{std::move(q)};
}

std::vector<int> default_serving_map(const Scenario& scenario) {
  if (scenario.ris.empty()) throw InvalidScenario("serving map needs at least one panel");
  std::vector<int> map;
  for (const auto& t : scenario.terminals) {
    int best = 0;
    double best_len = std::numeric_limits<double>::infinity();
    for (size_t n = 0; n < scenario.ris.size(); ++n) {
      const double len = (scenario.ris[n].position - scenario.bs_position).norm() +
                         (t.position - scenario.ris[n].position).norm();
      if (len < best_len) {
        best_len = len;
        best = static_cast<int>(n);
      }
    }
    map.push_back(best);
  }
  return map;
}

double pilot_sir(const ChannelSet& ch, const std::vector<ReflectionConfig>& configs,
                 const PilotPool& pool, const std::vector<int>& map, int k,
                 int n_serving) {
  const int num_ris = static_cast<int>(ch.bs_ris.size());
  if (num_ris < 2) {
    throw DegenerateObjective("pilot ratio needs at least two panels");
  }
  if (configs.size() != static_cast<size_t>(num_ris)) {
    throw DimensionMismatch("one reflection config per panel expected");
  }
  if (k < 0 || k >= static_cast<int>(map.size())) {
    throw IndexOutOfRange("user index out of range");
  }
  if (n_serving < 0 || n_serving >= num_ris) {
    throw IndexOutOfRange("serving panel index out of range");
  }
  const int p = map[static_cast<size_t>(k)];
  if (p < 1 || p > pool.count()) {
    throw IndexOutOfRange("pilot index out of range");
  }
  check_unit_modulus(configs);
  return ratio_for(ch, configs, pool, k, n_serving, p - 1);
}

PilotAssignment assign_pilots(const ChannelSet& ch,
                              const std::vector<ReflectionConfig>& configs,
                              const PilotPool& pool,
                              const std::vector<int>& serving_map, AssignMode mode) {
  const int num_ris = static_cast<int>(ch.bs_ris.size());
  if (num_ris < 2) {
    throw DegenerateObjective("pilot ratio needs at least two panels");
  }
  check_unit_modulus(configs);
  const int k_users = static_cast<int>(serving_map.size());
  const int count = pool.count();
  if (mode == AssignMode::kExhaustive) {
    double total = 1;
    for (int k = 0; k < k_users; ++k) total *= count;
    if (total > static_cast<double>(kExhaustiveCap)) {
      throw SearchSpaceTooLarge("exhaustive pilot search exceeds 10^6 maps");
    }
  }
  const Eigen::MatrixXd table = ratio_table(ch, configs, pool, serving_map);

  if (mode == AssignMode::kExhaustive) {
    // lexicographic enumeration with strict improvement keeps the smallest
    // map among ties
    std::vector<int> map0(static_cast<size_t>(k_users), 0);
    std::vector<int> best_map = map0;
    double best = min_score(table, map0);
    while (true) {
      int pos = k_users - 1;
      while (pos >= 0 && map0[static_cast<size_t>(pos)] == count - 1) {
        map0[static_cast<size_t>(pos)] = 0;
        --pos;
      }
      if (pos < 0) break;
      ++map0[static_cast<size_t>(pos)];
      const double score = min_score(table, map0);
      if (score > best) {
        best = score;
        best_map = map0;
      }
    }
    PilotAssignment out;
    for (int v : best_map) out.map.push_back(v + 1);
    out.score = best;
    return out;
  }

  // greedy: users in descending serving-cascade gain, each taking the pilot
  // that maximizes the running minimum
  std::vector<int> order(static_cast<size_t>(k_users));
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> gain(static_cast<size_t>(k_users), 0.0);
  for (int k = 0; k < k_users; ++k) {
    const int n = serving_map[static_cast<size_t>(k)];
    const auto& theta = configs[static_cast<size_t>(n)].theta;
    const Eigen::RowVectorXcd row =
        ch.ris_user[static_cast<size_t>(n)].row(k).cwiseProduct(theta.transpose());
    gain[static_cast<size_t>(k)] = (row * ch.bs_ris[static_cast<size_t>(n)]).norm();
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return gain[static_cast<size_t>(a)] > gain[static_cast<size_t>(b)]; });

  std::vector<int> map0(static_cast<size_t>(k_users), -1);
  for (int idx : order) {
    int best_p = 0;
    double best_score = -1;
    for (int p = 0; p < count; ++p) {
      map0[static_cast<size_t>(idx)] = p;
      double score = table(idx, p);
      for (size_t k = 0; k < map0.size(); ++k) {
        if (map0[k] >= 0) score = std::min(score, table(static_cast<int>(k), map0[k]));
      }
      if (score > best_score) {
        best_score = score;
        best_p = p;
      }
    }
    map0[static_cast<size_t>(idx)] = best_p;
  }
  // one swap-improvement sweep
  double cur = min_score(table, map0);
  for (int k = 0; k < k_users; ++k) {
    for (int p = 0; p < count; ++p) {
      const int keep = map0[static_cast<size_t>(k)];
      if (p == keep) continue;
      map0[static_cast<size_t>(k)] = p;
      const double score = min_score(table, map0);
      if (score > cur) {
        cur = score;
      } else {
        map0[static_cast<size_t>(k)] = keep;
      }
    }
  }
  PilotAssignment out;
  for (int v : map0) out.map.push_back(v + 1);
  out.score = cur;
  return out;
}

}  // namespace rissim
