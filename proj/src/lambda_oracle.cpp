#include "rci/lambda_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rci/errors.hpp"
#include "rci/kernels.hpp"
#include "rci/propagator.hpp"
#include "rci/physics.hpp"

namespace rci {

namespace {

double envelope_root(double t, const SimConfig& cfg) {
  const double peak = peak_rabi(cfg);
  if (peak == 0.0) return 0.0;
  return std::sqrt(std::max(0.0, envelope(t, cfg) / peak));
}

kernels::ThreeLevelDiagonal diagonal(double p, const SimConfig& cfg) {
  const double half = 0.5 * two_photon_detuning(p, cfg);
  return {half, half - intermediate_detuning(p, cfg), -half};
}

kernels::ThreeLevelStep three_level_step(const Substep& s, const SimConfig& cfg) {
  const double t = s.t_mid();
  return {s.dt, 0.5 * rabi1_envelope(t, cfg) * std::polar(1.0, coupling_phase(t, cfg)),
          0.5 * rabi2_envelope(t, cfg)};
}

/// Largest frequency scale of the three-level Hamiltonian over the grid.
double max_frequency(const SimConfig& cfg) {
  double scale = std::max(std::abs(cfg.laser.rabi1), std::abs(cfg.laser.rabi2));
  for (double p : {cfg.momentum.p_min, cfg.momentum.p_max}) {
    const auto d = diagonal(p, cfg);
    scale = std::max({scale, std::abs(d.a), std::abs(d.e), std::abs(d.b)});
  }
  return scale;
}

void record(ThreeLevelTrajectory& tr, const ThreeLevelState& s) {
  double pa = 0.0, pe = 0.0, pb = 0.0;
  for (std::size_t j = 0; j < s.size(); ++j) {
    pa += std::norm(s.alpha[j]);
    pe += std::norm(s.xi[j]);
    pb += std::norm(s.beta[j]);
  }
  tr.times.push_back(s.time);
  tr.P_a.push_back(pa * s.dp);
  tr.P_e.push_back(pe * s.dp);
  tr.P_b.push_back(pb * s.dp);
}

}  // namespace

double ThreeLevelState::norm() const {
  double sum = 0.0;
  for (std::size_t j = 0; j < size(); ++j) {
    sum += std::norm(alpha[j]) + std::norm(xi[j]) + std::norm(beta[j]);
  }
  return sum * dp;
}

double intermediate_detuning(double p, const SimConfig& cfg) {
  const double k = cfg.laser.wavenumber;
  const double m = cfg.atom.mass;
  return cfg.laser.detuning1 - (k * p / m + kHbar * k * k / (2.0 * m));
}

double rabi1_envelope(double t, const SimConfig& cfg) {
  return cfg.laser.rabi1 * envelope_root(t, cfg);
}

double rabi2_envelope(double t, const SimConfig& cfg) {
  return cfg.laser.rabi2 * envelope_root(t, cfg);
}

Eigen::Matrix3cd three_level_hamiltonian(double p, double t, const SimConfig& cfg) {
  const auto d = diagonal(p, cfg);
  const cplx ae = 0.5 * rabi1_envelope(t, cfg) * std::polar(1.0, coupling_phase(t, cfg));
  const double eb = 0.5 * rabi2_envelope(t, cfg);
  Eigen::Matrix3cd h;
  h << d.a, ae, 0.0,
       std::conj(ae), d.e, eb,
       0.0, eb, d.b;
  return h;
}

int three_level_steps(const SimConfig& cfg) {
  const double window = cfg.time.t_end - cfg.time.t_start;
  const double needed = std::ceil(window * max_frequency(cfg) / kMaxPhasePerStep);
  const double base = cfg.time.steps;
  const double steps = base * std::max(1.0, std::ceil(needed / base));
  if (!(steps < 2e9)) {
    throw ResolutionError("detuning", window * max_frequency(cfg) / base,
                          "three-level run would need more than 2e9 steps");
  }
  return static_cast<int>(steps);
}

ThreeLevelResult propagate_three_level(const SimConfig& cfg, int record_stride, int steps,
                                       ExecPolicy policy) {
  validate(cfg);
  if (steps == 0) steps = three_level_steps(cfg);
  if (steps < cfg.time.steps || steps % cfg.time.steps != 0) {
    throw ConfigError("three-level steps multiple of time steps",
                      "three-level step count must be a multiple of the time-grid steps");
  }
  const int ratio = steps / cfg.time.steps;
  const auto schedule = build_schedule(cfg, steps);
  const double scale = max_frequency(cfg);
  for (const auto& s : schedule) {
    if (s.dt * scale > kMaxPhasePerStep * (1.0 + 1e-12)) {
      std::ostringstream os;
      os << "three-level time step too coarse: dt * |delta| = " << s.dt * scale << " > "
         << kMaxPhasePerStep;
      throw ResolutionError("detuning", s.dt * scale, os.str());
    }
  }

  const ManifoldState start = init_wavepacket(cfg);
  ThreeLevelResult result;
  result.steps = steps;
  auto& st = result.final_state;
  st.p_nodes = start.p_nodes;
  st.alpha = start.alpha;
  st.xi.assign(start.size(), cplx{0.0, 0.0});
  st.beta.assign(start.size(), cplx{0.0, 0.0});
  st.dp = start.dp;
  st.time = start.time;
  record(result.trajectory, st);

  std::vector<kernels::ThreeLevelDiagonal> diag(st.size());
  for (std::size_t j = 0; j < st.size(); ++j) diag[j] = diagonal(st.p_nodes[j], cfg);

  const long long stride = static_cast<long long>(record_stride) * ratio;
  std::vector<kernels::ThreeLevelStep> chunk;
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    const auto& s = schedule[i];
    chunk.push_back(three_level_step(s, cfg));
    const bool last = i + 1 == schedule.size();
    const bool at_stride = s.closes_grid_step && stride > 0 && (s.grid_step + 1) % stride == 0;
    if (!(at_stride || last || chunk.size() >= 65536)) continue;
    kernels::evolve_three_level(st.alpha, st.xi, st.beta, diag, chunk, policy.workers);
    st.time = s.t_end();
    chunk.clear();
    if (at_stride || last) record(result.trajectory, st);
  }
  return result;
}

AdiabaticReport compare_adiabatic(const SimConfig& cfg, int record_stride, ExecPolicy policy) {
  const auto two = propagate(cfg, record_stride, policy);
  const auto three = propagate_three_level(cfg, record_stride, 0, policy);

  AdiabaticReport r;
  r.steps_two = cfg.time.steps;
  r.steps_three = three.steps;
  const auto& a = two.trajectory.P_b;
  const auto& b = three.trajectory.P_b;
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) r.max_deviation = std::max(r.max_deviation, std::abs(a[i] - b[i]));
  for (double pe : three.trajectory.P_e) r.max_intermediate = std::max(r.max_intermediate, pe);
  r.final_P_b_two = a.back();
  r.final_P_b_three = b.back();
  r.final_deviation = std::abs(a.back() - b.back());

  const auto& s2 = two.final_state;
  const auto& s3 = three.final_state;
  cplx overlap{0.0, 0.0};
  for (std::size_t j = 0; j < s2.size(); ++j) {
    overlap += std::conj(s2.alpha[j]) * s3.alpha[j] + std::conj(s2.beta[j]) * s3.beta[j];
  }
  r.fidelity = std::norm(overlap * s2.dp);

  const double delta = std::min(std::abs(cfg.laser.detuning1), std::abs(cfg.laser.detuning2));
  const double peak = cfg.laser.rabi1 * cfg.laser.rabi1 + cfg.laser.rabi2 * cfg.laser.rabi2;
  r.intermediate_bound = 2.0 * peak / (4.0 * delta * delta);
  return r;
}

SimConfig scale_single_photon_detuning(const SimConfig& cfg, double factor) {
  SimConfig out = cfg;
  const double k = cfg.laser.wavenumber;
  const double recoil = 2.0 * kHbar * k * k / cfg.atom.mass;
  const double mean = 0.5 * (cfg.laser.detuning1 + cfg.laser.detuning2);
  const double center = 0.5 * (cfg.laser.detuning1 - cfg.laser.detuning2) - recoil;
  set_detunings_for_center(out, mean * factor, center);
  set_symmetric_rabi(out);
  return out;
}

}  // namespace rci
