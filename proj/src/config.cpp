#include "rci/config.hpp"

#include <cmath>
#include <sstream>
#include <variant>

#include "rci/errors.hpp"
#include "rci/physics.hpp"

namespace rci {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

void require(bool ok, const std::string& invariant, const std::string& what) {
  if (!ok) {
    throw ConfigError(invariant,
                      "invalid configuration: " + what + " (requires " + invariant + ")");
  }
}

}  // namespace

void validate(const SimConfig& cfg) {
  auto finite = [](double v) { return std::isfinite(v); };

  require(cfg.atom.mass > 0 && finite(cfg.atom.mass), "mass > 0", "atom mass");
  require(cfg.laser.wavenumber > 0 && finite(cfg.laser.wavenumber), "k > 0", "laser wavenumber");
  require(finite(cfg.laser.detuning1) && finite(cfg.laser.detuning2), "detunings finite",
          "single-photon detunings");
  require(cfg.laser.detuning1 + cfg.laser.detuning2 != 0.0, "delta1 + delta2 != 0",
          "single-photon detunings sum to zero");
  require(finite(cfg.laser.rabi1) && finite(cfg.laser.rabi2), "rabi finite",
          "single-photon Rabi frequencies");
  require(finite(cfg.laser.phase1) && finite(cfg.laser.phase2), "laser phases finite",
          "laser phases");
  require(cfg.velocity > 0 && finite(cfg.velocity), "velocity > 0", "longitudinal velocity");

  std::visit(overloaded{
                 [](const GaussianPulse& g) {
                   require(g.length > 0 && std::isfinite(g.length), "pulse_length > 0",
                           "Gaussian 1/e length");
                   require(g.peak_rabi >= 0 && std::isfinite(g.peak_rabi), "omega0 >= 0",
                           "peak effective Rabi frequency");
                 },
                 [](const RectPulse& r) {
                   require(r.duration > 0 && std::isfinite(r.duration), "rect_duration > 0",
                           "flat-top duration");
                   require(r.rabi >= 0 && std::isfinite(r.rabi), "omega0 >= 0",
                           "flat-top effective Rabi frequency");
                 },
                 [](const ZoneSequence& s) {
                   require(!s.zones.empty(), "zones non-empty", "zone sequence");
                   for (std::size_t i = 0; i < s.zones.size(); ++i) {
                     const auto& z = s.zones[i];
                     require(z.width > 0 && std::isfinite(z.width), "zone width > 0", "zone width");
                     require(z.area >= 0 && std::isfinite(z.area), "zone area >= 0", "zone area");
                     require(std::isfinite(z.center), "zone center finite", "zone centre");
                     if (i > 0) {
                       const auto& prev = s.zones[i - 1];
                       require(z.center > prev.center, "zone centers strictly increasing",
                               "zone order");
                       require(z.center - 0.5 * z.width >= prev.center + 0.5 * prev.width,
                               "zones non-overlapping", "zone overlap");
                     }
                   }
                 },
             },
             cfg.pulse);

  require(!std::isnan(cfg.plate.offset), "plate offset not NaN", "plate offset");
  require(finite(cfg.plate.phase), "plate phase finite", "plate phase");
  require(finite(cfg.rotation.rate), "rotation finite", "rotation rate");
  require(cfg.packet_width > 0 && finite(cfg.packet_width), "packet_width > 0",
          "wavepacket width");

  const auto& mg = cfg.momentum;
  require(mg.nodes >= 2 && mg.nodes % 2 == 0, "node_count >= 2 and even", "momentum node count");
  require(finite(mg.p_min) && finite(mg.p_max) && mg.p_min < mg.p_max, "p_min < p_max",
          "momentum grid bounds");
  const double required = 6.0 * kHbar / cfg.packet_width;
  require(mg.p_min <= -required && mg.p_max >= required,
          "momentum grid spans +/-6 hbar/w", "momentum grid too narrow for the packet");

  const auto& tg = cfg.time;
  require(finite(tg.t_start) && finite(tg.t_end) && tg.t_start < tg.t_end, "t_start < t_end",
          "time window");
  require(tg.steps >= 1, "step_count >= 1", "time step count");

  const double half = pulse_half_duration(cfg);
  const double slack = 1e-9 * half;
  if (std::holds_alternative<ZoneSequence>(cfg.pulse)) {
    const auto& zones = std::get<ZoneSequence>(cfg.pulse).zones;
    const double first = (zones.front().center - 0.5 * zones.front().width) / cfg.velocity;
    const double last = (zones.back().center + 0.5 * zones.back().width) / cfg.velocity;
    require(tg.t_start <= first + slack && tg.t_end >= last - slack, "time window covers all zones",
            "time window");
  } else {
    require(tg.t_start <= -3.0 * half + slack && tg.t_end >= 3.0 * half - slack,
            "time window covers +/-3 pulse half-durations", "time window");
  }
}

std::vector<std::string> warnings(const SimConfig& cfg) {
  std::vector<std::string> out;
  const auto& l = cfg.laser;
  auto check = [&](double rabi, double det, const char* which) {
    if (det != 0.0 && std::abs(rabi / det) > 0.1) {
      std::ostringstream os;
      os << "|Omega" << which << "/delta" << which << "| = " << std::abs(rabi / det)
         << " > 0.1: adiabatic elimination may be inaccurate";
      out.push_back(os.str());
    }
  };
  check(l.rabi1, l.detuning1, "1");
  check(l.rabi2, l.detuning2, "2");
  return out;
}

void set_detunings_for_center(SimConfig& cfg, double mean_detuning, double center_detuning) {
  const double k = cfg.laser.wavenumber;
  const double recoil = 2.0 * kHbar * k * k / cfg.atom.mass;
  // (delta1 - delta2)/2 - recoil = center_detuning
  const double half_split = center_detuning + recoil;
  cfg.laser.detuning1 = mean_detuning + half_split;
  cfg.laser.detuning2 = mean_detuning - half_split;
}

void set_symmetric_rabi(SimConfig& cfg) {
  const double sum = cfg.laser.detuning1 + cfg.laser.detuning2;
  const double rabi = std::sqrt(std::abs(sum) * peak_rabi(cfg));
  cfg.laser.rabi1 = rabi;
  cfg.laser.rabi2 = sum < 0 ? -rabi : rabi;
}

void set_default_momentum_grid(SimConfig& cfg, int nodes) {
  const double span = 8.0 * kHbar / cfg.packet_width;
  cfg.momentum = {-span, span, nodes};
}

void set_default_time_grid(SimConfig& cfg, int steps) {
  if (const auto* s = std::get_if<ZoneSequence>(&cfg.pulse); s && !s->zones.empty()) {
    const double first = (s->zones.front().center - 0.5 * s->zones.front().width) / cfg.velocity;
    const double last = (s->zones.back().center + 0.5 * s->zones.back().width) / cfg.velocity;
    const double margin = 0.05 * (last - first);
    cfg.time = {first - margin, last + margin, steps};
    return;
  }
  const double half = pulse_half_duration(cfg);
  cfg.time = {-3.0 * half, 3.0 * half, steps};
}

SimConfig paper_config() {
  SimConfig cfg;
  const double omega0 = kTwoPi * 7e4;
  const double length = 3e-3;
  cfg.pulse = GaussianPulse{length, omega0};
  cfg.velocity = length * omega0 / 3.3;
  cfg.packet_width = 1.0 / cfg.laser.wavenumber;
  cfg.plate = {0.0, 0.48 * length};
  set_detunings_for_center(cfg, kTwoPi * 1.5e9, 0.0);
  set_symmetric_rabi(cfg);
  set_default_momentum_grid(cfg);
  set_default_time_grid(cfg);
  return cfg;
}

SimConfig bci_config() {
  SimConfig cfg = paper_config();
  const double L = 3e-3;
  const double width = L / 1000.0;
  const double pi = std::numbers::pi;
  cfg.pulse = ZoneSequence{{{0.5 * pi, -L, width}, {pi, 0.0, width}, {0.5 * pi, L, width}}};
  cfg.packet_width = 100.0 / cfg.laser.wavenumber;
  cfg.plate = {0.0, 0.5 * L};
  set_symmetric_rabi(cfg);
  set_default_momentum_grid(cfg, 64);
  const double zone_rabi = peak_rabi(cfg);
  set_default_time_grid(cfg, 1);
  const double window = cfg.time.t_end - cfg.time.t_start;
  cfg.time.steps = static_cast<int>(std::ceil(window * zone_rabi / 0.05));
  return cfg;
}

}  // namespace rci
