#pragma once

#include <Eigen/Dense>
#include <vector>

#include "rci/config.hpp"
#include "rci/state.hpp"

namespace rci {

/// Amplitudes on the manifold |p, a>, |p + hbar k, e>, |p + 2 hbar k, b>.
struct ThreeLevelState {
  std::vector<double> p_nodes;
  std::vector<cplx> alpha;
  std::vector<cplx> xi;
  std::vector<cplx> beta;
  double dp = 0.0;
  double time = 0.0;

  std::size_t size() const { return p_nodes.size(); }
  double norm() const;
};

struct ThreeLevelTrajectory {
  std::vector<double> times;
  std::vector<double> P_a;
  std::vector<double> P_e;
  std::vector<double> P_b;
};

struct ThreeLevelResult {
  ThreeLevelState final_state;
  ThreeLevelTrajectory trajectory;
  int steps = 0;
};

/// Single-photon detuning of the a-e transition seen by manifold p:
/// delta1 - (k p / m + hbar k^2 / (2 m)).
double intermediate_detuning(double p, const SimConfig& cfg);

/// Single-photon Rabi envelopes. Both follow sqrt(envelope / peak), so that
/// Omega1(t) Omega2(t) / (delta1 + delta2) reproduces the effective envelope.
double rabi1_envelope(double t, const SimConfig& cfg);
double rabi2_envelope(double t, const SimConfig& cfg);

/// H/hbar in the (a, e, b) basis, rad/s. Diagonal
/// (Delta/2, Delta/2 - delta1(p), -Delta/2) with Delta the two-photon detuning,
/// so the a-b splitting and the frame match the effective two-level model.
/// Couplings Omega1(t)/2 e^{i theta(t)} (a-e) and Omega2(t)/2 (e-b).
Eigen::Matrix3cd three_level_hamiltonian(double p, double t, const SimConfig& cfg);

/// Smallest multiple of cfg.time.steps whose step keeps dt times every
/// frequency scale of the three-level Hamiltonian at or below 0.1.
int three_level_steps(const SimConfig& cfg);

/// Runs the three-level model over cfg.time with `steps` grid steps (0 picks
/// three_level_steps). `steps` must be a multiple of cfg.time.steps; samples
/// are taken at t_start, every `record_stride` steps of the two-level grid and
/// at t_end, so they line up with propagate(). Throws ResolutionError when
/// the step does not resolve the single-photon detuning.
ThreeLevelResult propagate_three_level(const SimConfig& cfg, int record_stride, int steps = 0,
                                       ExecPolicy policy = {});

struct AdiabaticReport {
  double max_deviation = 0.0;    // max over samples of |P_b(three) - P_b(two)|
  double final_deviation = 0.0;  // |P_b(three) - P_b(two)| at t_end
  double fidelity = 0.0;         // |<psi_two|psi_three>|^2 at t_end, e dropped
  double max_intermediate = 0.0; // max over samples of P_e
  double intermediate_bound = 0.0;  // 2 max_t (Omega1^2 + Omega2^2) / (4 delta^2)
  double final_P_b_two = 0.0;
  double final_P_b_three = 0.0;
  int steps_two = 0;
  int steps_three = 0;
};

/// Runs both models on the same configuration and compares them.
AdiabaticReport compare_adiabatic(const SimConfig& cfg, int record_stride = 20,
                                  ExecPolicy policy = {});

/// Scales the mean single-photon detuning by `factor` while keeping the
/// two-photon detuning at the packet centre and the effective Rabi frequency
/// fixed (Omega_j grow as sqrt(factor)).
SimConfig scale_single_photon_detuning(const SimConfig& cfg, double factor);

}  // namespace rci
