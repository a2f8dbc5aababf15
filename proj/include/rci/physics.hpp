#pragma once

#include <Eigen/Core>

#include <vector>

#include "rci/config.hpp"

namespace rci {

/// Omega1 * Omega2 / (delta1 + delta2). Throws ConfigError if the detunings
/// sum to zero.
double effective_rabi(const LaserSpec& laser);

/// Two-photon detuning of the manifold {|p,a>, |p+2hbar k,b>}:
///   (delta1 - delta2)/2 - [E_kin(p + 2 hbar k) - E_kin(p)] / hbar
/// i.e. the laser term minus the Doppler (2kp/m) and recoil (2 hbar k^2/m)
/// shifts between the manifold endpoints. Affine in p with slope -2k/m.
double two_photon_detuning(double p, const SimConfig& cfg);

/// Effective Rabi envelope Omega0(t); t = 0 is the pulse-centre crossing.
double envelope(double t, const SimConfig& cfg);

/// Peak of the envelope (the normalisation of the single-photon envelopes).
double peak_rabi(const SimConfig& cfg);

/// Characteristic half-duration of the pulse: l/v for a Gaussian, half the
/// duration for a flat top, half the first-to-last zone span for a sequence.
double pulse_half_duration(const SimConfig& cfg);

/// Length used for the equivalent three-zone interferometer: l for a
/// Gaussian, zone separation for a sequence, half-length for a flat top.
double reference_length(const SimConfig& cfg);

/// Time at which the atom reaches the plate edge (offset / v_x).
double plate_switch_time(const SimConfig& cfg);

/// phi for v_x t >= offset, else 0.
double plate_phase(double t, const SimConfig& cfg);

/// 2 k Omega_rot v_x t^2: the Raman phase seen at x = v_x t after the
/// wavefronts have turned by Omega_rot t about the pulse centre.
double rotation_phase(double t, const SimConfig& cfg);

/// Total phase on the a-b coupling: plate + rotation + (phase1 - phase2).
double coupling_phase(double t, const SimConfig& cfg);

/// H/hbar in the (a, b) basis, rad/s:
///   [[ D/2 + W/2,  (W/2) e^{i theta} ],
///    [ (W/2) e^{-i theta}, -D/2 + W/2 ]]
/// with W = envelope(t), D = two_photon_detuning(p), theta = coupling_phase(t).
Eigen::Matrix2cd effective_hamiltonian(double p, double t, const SimConfig& cfg);

/// Envelope discontinuities and the plate edge inside the time window, sorted.
std::vector<double> breakpoints(const SimConfig& cfg);

/// 2 hbar k / m.
double recoil_velocity(const SimConfig& cfg);

}  // namespace rci
