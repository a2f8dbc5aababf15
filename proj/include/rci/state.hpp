#pragma once

#include <complex>
#include <limits>
#include <vector>

namespace rci {

using cplx = std::complex<double>;

/// Absent-value marker in numeric series (e.g. a centroid of an empty state).
inline constexpr double kAbsent = std::numeric_limits<double>::quiet_NaN();

/// Paired manifold amplitudes alpha(p) (state a at p) and beta(p + 2 hbar k)
/// (state b), both indexed by the manifold momentum p.
struct ManifoldState {
  std::vector<double> p_nodes;
  std::vector<cplx> alpha;
  std::vector<cplx> beta;
  double dp = 0.0;
  double time = 0.0;

  std::size_t size() const { return p_nodes.size(); }
  /// sum(|alpha|^2 + |beta|^2) dp
  double norm() const;
};

struct PositionWavefunctions {
  std::vector<double> z_nodes;
  std::vector<cplx> psi_a;
  std::vector<cplx> psi_b;
  double dz = 0.0;
  double time = 0.0;

  double norm() const;
};

/// Sampled observables; centroid/spread entries are kAbsent where the
/// component holds no population.
struct TrajectoryRecord {
  std::vector<double> times;
  std::vector<double> P_a;
  std::vector<double> P_b;
  std::vector<double> centroid_a;
  std::vector<double> centroid_b;
  std::vector<double> spread_a;
  std::vector<double> spread_b;

  std::size_t size() const { return times.size(); }
};

/// Worker count for node-parallel kernels. Results do not depend on it.
struct ExecPolicy {
  int workers = 1;
};

}  // namespace rci
