#pragma once

#include <numbers>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace rci {

inline constexpr double kHbar = 1.054571817e-34;  // J s
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct AtomSpec {
  double mass = 1.41e-25;  // kg, 85Rb
  std::string label_a = "a";
  std::string label_b = "b";
  std::string label_e = "e";
};

/// Counter-propagating Raman pair, k1 = -k2 = k. Detunings are laser-frame
/// values; Doppler and recoil shifts are added per momentum node.
struct LaserSpec {
  double wavenumber = 8.0556e6;  // rad/m
  double rabi1 = 0.0;            // peak single-photon Rabi frequencies, rad/s
  double rabi2 = 0.0;
  double detuning1 = 0.0;  // rad/s
  double detuning2 = 0.0;
  double phase1 = 0.0;  // rad
  double phase2 = 0.0;
};

/// Gaussian single-zone beam: Omega(t) = peak_rabi * exp(-(v t / length)^2).
struct GaussianPulse {
  double length = 3e-3;  // 1/e length along x, m
  double peak_rabi = 0.0;  // rad/s
};

/// Flat-top pulse centred on t = 0.
struct RectPulse {
  double duration = 0.0;  // s
  double rabi = 0.0;      // rad/s
};

/// One flat-top zone of a multi-zone sequence, positioned along x.
struct Zone {
  double area = 0.0;    // pulse area, rad
  double center = 0.0;  // m
  double width = 0.0;   // m
};

struct ZoneSequence {
  std::vector<Zone> zones;
};

using PulseProfile = std::variant<GaussianPulse, RectPulse, ZoneSequence>;

/// Glass plate: phase `phase` is applied to the Raman coupling for
/// longitudinal positions x >= offset (measured from the pulse centre).
/// Offsets of +/-infinity are allowed.
struct PlateSpec {
  double phase = 0.0;   // rad
  double offset = 0.0;  // m
};

/// Rotation about the axis normal to the x-z interferometer plane.
struct RotationSpec {
  double rate = 0.0;  // rad/s
};

/// Half-open momentum grid p_j = p_min + j * (p_max - p_min) / nodes.
struct MomentumGrid {
  double p_min = 0.0;  // kg m/s
  double p_max = 0.0;
  int nodes = 1024;

  double spacing() const { return (p_max - p_min) / nodes; }
  double node(int j) const { return p_min + j * spacing(); }
};

struct TimeGrid {
  double t_start = 0.0;  // s
  double t_end = 0.0;
  int steps = 20000;

  double step() const { return (t_end - t_start) / steps; }
};

/// How the packet width w is read.
///   amplitude: psi(z) ~ exp(-(z/w)^2), w is the 1/e half-width of |psi|
///   intensity: |psi(z)|^2 ~ exp(-(z/w)^2)
enum class WidthConvention { amplitude, intensity };

struct SimConfig {
  AtomSpec atom;
  LaserSpec laser;
  PulseProfile pulse = GaussianPulse{};
  PlateSpec plate;
  RotationSpec rotation;
  double velocity = 0.0;      // longitudinal v_x, m/s
  double packet_width = 0.0;  // w, m
  WidthConvention width_convention = WidthConvention::amplitude;
  MomentumGrid momentum;
  TimeGrid time;
};

/// Throws ConfigError naming the first violated invariant.
void validate(const SimConfig& cfg);

/// Non-fatal diagnostics (e.g. |Omega_j / delta_j| > 0.1).
std::vector<std::string> warnings(const SimConfig& cfg);

/// Default single-zone profile: Omega0 = 2 pi * 7e4 rad/s, l = 3 mm,
/// Omega0 * l / v_x = 3.3, w = 1/k, laser resonant at the packet centre.
SimConfig paper_config();

/// Three-zone pi/2 - pi - pi/2 profile with zones at -L, 0, +L (L = l of the
/// single-zone default), zone width L/1000, and a momentum-narrow packet.
SimConfig bci_config();

/// Laser detunings delta1, delta2 around `mean_detuning` chosen so that the
/// two-photon detuning at p = 0 equals `center_detuning`.
void set_detunings_for_center(SimConfig& cfg, double mean_detuning, double center_detuning);

/// Symmetric single-photon Rabi frequencies reproducing the pulse's peak
/// effective Rabi frequency at the configured detunings.
void set_symmetric_rabi(SimConfig& cfg);

/// Default momentum grid: +/- 8 hbar/w around p = 0.
void set_default_momentum_grid(SimConfig& cfg, int nodes = 1024);

/// Default time window: +/- 3 characteristic half-durations for single
/// pulses, all zones plus a 5% margin for sequences.
void set_default_time_grid(SimConfig& cfg, int steps = 20000);

}  // namespace rci
