#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rci/config.hpp"
#include "rci/state.hpp"

namespace rci {

struct Populations {
  double a = 0.0;
  double b = 0.0;
};

/// P_a = sum |alpha|^2 dp, P_b = sum |beta|^2 dp.
Populations populations(const ManifoldState& state);

/// Position-space wavefunctions on the grid conjugate to the momentum grid
/// (dz = 2 pi hbar / (N dp), centred on z = 0):
///   psi(z) = (2 pi hbar)^{-1/2} sum_p amp(p) K(p, tau) exp(+i p z / hbar) dp
/// where K(p, tau) = exp(-i (p^2 + (p + 2 hbar k)^2) tau / (4 m hbar)) restores
/// the mean kinetic phase and tau is the time elapsed since t_start. psi_b
/// uses beta(p + 2 hbar k) against exp(i p z / hbar), so the 2 hbar k carrier
/// is dropped and |psi_b|^2 is unaffected.
PositionWavefunctions reconstruct_position(const ManifoldState& state, const SimConfig& cfg);

/// <z> under |psi|^2; nullopt when sum |psi|^2 dz <= 1e-6.
std::optional<double> centroid(std::span<const cplx> psi, std::span<const double> z_nodes);

/// sqrt(<z^2> - <z>^2); nullopt when sum |psi|^2 dz <= 1e-6.
std::optional<double> spread(std::span<const cplx> psi, std::span<const double> z_nodes);

/// Appends one sample (populations, centroids, spreads) for `state`.
void record_observables(TrajectoryRecord& record, const ManifoldState& state,
                        const SimConfig& cfg);

struct FringeScan {
  std::vector<double> phi;
  std::vector<double> P_b;
  std::string config_digest;
};

/// P_b(phi) = offset - (amplitude / 2) cos(phi - phi_min).
struct FringeFit {
  double offset = 0.0;
  double amplitude = 0.0;   // peak-to-peak
  double visibility = 0.0;  // amplitude / (2 offset)
  std::optional<double> phi_min;  // in (-pi, pi]; absent for a flat scan
  double rms_residual = 0.0;
};

/// How scan_phase obtains P_b(phi).
///   direct:     one full propagation per phase value
///   factorized: one propagation up to the plate edge plus one unitary for
///               the remainder; the plate phase enters as a diagonal gauge
///               transform of the second segment, so every phase value
///               follows from the same two per-node propagators.
enum class ScanMethod { factorized, direct };

/// n phases evenly covering [0, 2 pi).
std::vector<double> uniform_phases(int n);

/// Final P_b for each plate phase; everything else in cfg is held fixed.
/// Requires >= 8 strictly increasing samples whose uniform period covers 2 pi.
FringeScan scan_phase(const SimConfig& cfg, std::span<const double> phi_values,
                      ScanMethod method = ScanMethod::factorized, ExecPolicy policy = {});

/// Least-squares first-harmonic fit. Throws FitError when the rms residual
/// exceeds 5% of the amplitude.
FringeFit fit_fringe(const FringeScan& scan);

/// Wraps to (-pi, pi].
double wrap_phase(double phi);

/// Area of the equivalent three-zone interferometer: L^2 2 hbar k / (m v_x).
double bci_reference_area(const SimConfig& cfg);

struct AreaEstimate {
  std::vector<double> rates;         // rad/s
  std::vector<double> phase_shifts;  // Sagnac phase per rate, rad
  std::vector<FringeFit> fits;
  double slope = 0.0;           // d(phase shift)/d(rate), rad s
  double area = 0.0;            // A_eff = hbar slope / (2 m), m^2
  double reference_area = 0.0;  // A_0, m^2
  double eta = 0.0;             // A_eff / A_0
  double linearity_residual = 0.0;
};

/// The Sagnac phase at rate r is the shift of the fitted fringe minimum,
/// phi_min(0) - phi_min(r), i.e. the plate phase that compensates the
/// rotation. Rates must include 0 and come in +/- pairs. Throws
/// LinearityError when the relative rms deviation from the through-origin
/// fit reaches 1e-2 or any shift reaches pi/4.
AreaEstimate effective_area(const SimConfig& cfg, std::span<const double> rotation_rates,
                            std::span<const double> phi_values,
                            ScanMethod method = ScanMethod::factorized, ExecPolicy policy = {});

}  // namespace rci
