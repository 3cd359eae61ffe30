#include "rissim/reflect.hpp"

#include <cmath>
#include <numbers>

namespace rissim {

namespace {

// Phase grid point m out of tau, constructed exactly from the index.
std::complex<double> grid_point(int m, int tau) {
  const double phi = 2.0 * std::numbers::pi * m / tau;
  return std::polar(1.0, phi);
}

}  // namespace

bool ReflectionConfig::is_feasible(double tol) const {
  for (Eigen::Index q = 0; q < theta.size(); ++q) {
    const double mag = std::abs(theta(q));
    switch (feasibility.kind) {
      case FeasibilityKind::kGeneral:
        if (mag > 1.0 + tol) return false;
        break;
      case FeasibilityKind::kContinuousPhase:
        if (std::abs(mag - 1.0) > tol) return false;
        break;
      case FeasibilityKind::kDiscretePhase: {
        bool on_grid = false;
        for (int m = 0; m < feasibility.tau; ++m) {
          if (std::abs(theta(q) - grid_point(m, feasibility.tau)) <= tol) {
            on_grid = true;
            break;
          }
        }
        if (!on_grid) return false;
        break;
      }
    }
  }
  return true;
}

void Clustering::validate() const {
  if (num_clusters < 1) throw InvalidScenario("clustering needs R >= 1");
  for (int c : assignment) {
    if (c < 0 || c >= num_clusters) {
      throw IndexOutOfRange("cluster index " + std::to_string(c) +
                            " outside [0, " + std::to_string(num_clusters) + ")");
    }
  }
}

Clustering Clustering::contiguous(int elements, int clusters) {
  Clustering cl;
  cl.num_clusters = clusters;
  cl.assignment.resize(elements);
  const int block = (elements + clusters - 1) / clusters;  // ceil(Q/R)
  for (int q = 0; q < elements; ++q) {
    cl.assignment[q] = std::min(q / block, clusters - 1);
  }
  return cl;
}

cvec project(const cvec& theta_raw, const FeasibilitySet& fs) {
  cvec out(theta_raw.size());
  for (Eigen::Index q = 0; q < theta_raw.size(); ++q) {
    const std::complex<double> v = theta_raw(q);
    const double mag = std::abs(v);
    switch (fs.kind) {
      case FeasibilityKind::kGeneral:
        // tolerance guard keeps the map exactly idempotent under rounding
        out(q) = (mag > 1.0 + 1e-12) ? v / mag : v;
        break;
      case FeasibilityKind::kContinuousPhase:
        if (mag == 0.0) {
          out(q) = std::complex<double>(1.0, 0.0);
        } else if (std::abs(mag - 1.0) <= 1e-12) {
          out(q) = v;
        } else {
          out(q) = v / mag;
        }
        break;
      case FeasibilityKind::kDiscretePhase: {
        // nearest grid phase; ties resolved toward the smaller index
        int best = 0;
        double best_dist = std::abs((mag == 0.0 ? std::complex<double>(1, 0) : v / mag) -
                                    grid_point(0, fs.tau));
        for (int m = 1; m < fs.tau; ++m) {
          const double d =
              std::abs((mag == 0.0 ? std::complex<double>(1, 0) : v / mag) -
                       grid_point(m, fs.tau));
          if (d < best_dist - 1e-15) {
            best_dist = d;
            best = m;
          }
        }
        out(q) = grid_point(best, fs.tau);
        break;
      }
    }
  }
  return out;
}

cvec expand(const cvec& clustered_theta, const Clustering& clustering) {
  clustering.validate();
  if (clustering.num_clusters != static_cast<int>(clustered_theta.size())) {
    throw DimensionMismatch("clustered vector length != R");
  }
  cvec out(static_cast<Eigen::Index>(clustering.assignment.size()));
  for (size_t q = 0; q < clustering.assignment.size(); ++q) {
    out(static_cast<Eigen::Index>(q)) = clustered_theta(clustering.assignment[q]);
  }
  return out;
}

long control_payload_bits(const ReflectionConfig& config,
                          const std::optional<Clustering>& clustering,
                          int quant_bits_per_coeff) {
  const long count = clustering ? clustering->num_clusters
                                : static_cast<long>(config.theta.size());
  long bits_per;
  if (config.feasibility.kind == FeasibilityKind::kDiscretePhase) {
    bits_per = static_cast<long>(
        std::ceil(std::log2(static_cast<double>(config.feasibility.tau))));
  } else {
    bits_per = quant_bits_per_coeff;
  }
  return count * bits_per;
}

}  // namespace rissim
