#include "rci/physics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>

#include "rci/errors.hpp"

namespace rci {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

struct ZoneWindow {
  double t_begin;
  double t_end;
  double rabi;
};

ZoneWindow zone_window(const Zone& z, double velocity) {
  const double begin = (z.center - 0.5 * z.width) / velocity;
  const double end = (z.center + 0.5 * z.width) / velocity;
  return {begin, end, z.area * velocity / z.width};
}

[[noreturn]] void fail(const std::string& invariant, const std::string& what) {
  throw ConfigError(invariant, "invalid configuration: " + what + " (requires " + invariant + ")");
}

}  // namespace

double effective_rabi(const LaserSpec& laser) {
  const double sum = laser.detuning1 + laser.detuning2;
  if (sum == 0.0 || !std::isfinite(sum)) {
    fail("delta1 + delta2 != 0", "degenerate single-photon detunings");
  }
  return laser.rabi1 * laser.rabi2 / sum;
}

double recoil_velocity(const SimConfig& cfg) {
  return 2.0 * kHbar * cfg.laser.wavenumber / cfg.atom.mass;
}

double two_photon_detuning(double p, const SimConfig& cfg) {
  const double k = cfg.laser.wavenumber;
  const double m = cfg.atom.mass;
  const double laser_term = 0.5 * (cfg.laser.detuning1 - cfg.laser.detuning2);
  return laser_term - (2.0 * k * p / m + 2.0 * kHbar * k * k / m);
}

double envelope(double t, const SimConfig& cfg) {
  return std::visit(
      overloaded{
          [&](const GaussianPulse& g) {
            const double x = cfg.velocity * t / g.length;
            return g.peak_rabi * std::exp(-x * x);
          },
          [&](const RectPulse& r) {
            return t >= -0.5 * r.duration && t < 0.5 * r.duration ? r.rabi : 0.0;
          },
          [&](const ZoneSequence& s) {
            double total = 0.0;
            for (const auto& z : s.zones) {
              const auto w = zone_window(z, cfg.velocity);
              if (t >= w.t_begin && t < w.t_end) total += w.rabi;
            }
            return total;
          },
      },
      cfg.pulse);
}

double peak_rabi(const SimConfig& cfg) {
  return std::visit(overloaded{
                        [](const GaussianPulse& g) { return g.peak_rabi; },
                        [](const RectPulse& r) { return r.rabi; },
                        [&](const ZoneSequence& s) {
                          double peak = 0.0;
                          for (const auto& z : s.zones) {
                            peak = std::max(peak, std::abs(zone_window(z, cfg.velocity).rabi));
                          }
                          return peak;
                        },
                    },
                    cfg.pulse);
}

double pulse_half_duration(const SimConfig& cfg) {
  return std::visit(overloaded{
                        [&](const GaussianPulse& g) { return g.length / cfg.velocity; },
                        [](const RectPulse& r) { return 0.5 * r.duration; },
                        [&](const ZoneSequence& s) {
                          if (s.zones.empty()) return 0.0;
                          const double first = zone_window(s.zones.front(), cfg.velocity).t_begin;
                          const double last = zone_window(s.zones.back(), cfg.velocity).t_end;
                          return 0.5 * (last - first);
                        },
                    },
                    cfg.pulse);
}

double reference_length(const SimConfig& cfg) {
  return std::visit(overloaded{
                        [](const GaussianPulse& g) { return g.length; },
                        [&](const RectPulse& r) { return 0.5 * r.duration * cfg.velocity; },
                        [](const ZoneSequence& s) {
                          if (s.zones.size() < 2) return 0.0;
                          return 0.5 * (s.zones.back().center - s.zones.front().center);
                        },
                    },
                    cfg.pulse);
}

double plate_switch_time(const SimConfig& cfg) { return cfg.plate.offset / cfg.velocity; }

double plate_phase(double t, const SimConfig& cfg) {
  return cfg.velocity * t >= cfg.plate.offset ? cfg.plate.phase : 0.0;
}

double rotation_phase(double t, const SimConfig& cfg) {
  return 2.0 * cfg.laser.wavenumber * cfg.rotation.rate * cfg.velocity * t * t;
}

double coupling_phase(double t, const SimConfig& cfg) {
  return plate_phase(t, cfg) + rotation_phase(t, cfg) + (cfg.laser.phase1 - cfg.laser.phase2);
}

Eigen::Matrix2cd effective_hamiltonian(double p, double t, const SimConfig& cfg) {
  const double w = envelope(t, cfg);
  const double d = two_photon_detuning(p, cfg);
  const std::complex<double> c = std::polar(0.5 * w, coupling_phase(t, cfg));
  Eigen::Matrix2cd h;
  h(0, 0) = 0.5 * d + 0.5 * w;
  h(1, 1) = -0.5 * d + 0.5 * w;
  h(0, 1) = c;
  h(1, 0) = std::conj(c);
  return h;
}

std::vector<double> breakpoints(const SimConfig& cfg) {
  std::vector<double> out;
  const double t0 = cfg.time.t_start;
  const double t1 = cfg.time.t_end;
  auto add = [&](double t) {
    if (std::isfinite(t) && t > t0 && t < t1) out.push_back(t);
  };
  add(plate_switch_time(cfg));
  if (const auto* r = std::get_if<RectPulse>(&cfg.pulse)) {
    add(-0.5 * r->duration);
    add(0.5 * r->duration);
  } else if (const auto* s = std::get_if<ZoneSequence>(&cfg.pulse)) {
    for (const auto& z : s->zones) {
      const auto w = zone_window(z, cfg.velocity);
      add(w.t_begin);
      add(w.t_end);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace rci
