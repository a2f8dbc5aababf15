#include "rci/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rci/errors.hpp"
#include "rci/observables.hpp"
#include "rci/physics.hpp"

namespace rci {

double ManifoldState::norm() const {
  double sum = 0.0;
  for (std::size_t j = 0; j < size(); ++j) sum += std::norm(alpha[j]) + std::norm(beta[j]);
  return sum * dp;
}

std::vector<Substep> build_schedule(const SimConfig& cfg) {
  return build_schedule(cfg, cfg.time.steps);
}

std::vector<Substep> build_schedule(const SimConfig& cfg, int steps) {
  if (steps < 1) throw ConfigError("step_count >= 1", "time grid needs at least one step");
  const double t0 = cfg.time.t_start;
  const double h = (cfg.time.t_end - t0) / steps;
  const auto cuts = breakpoints(cfg);

  std::vector<Substep> out;
  out.reserve(static_cast<std::size_t>(steps) + 2 * cuts.size());
  auto cut = cuts.begin();
  for (int i = 0; i < steps; ++i) {
    const double a = t0 + i * h;
    const double b = (i + 1 == steps) ? cfg.time.t_end : t0 + (i + 1) * h;
    double left = a;
    while (cut != cuts.end() && *cut <= a) ++cut;
    while (cut != cuts.end() && *cut < b) {
      out.push_back({left, *cut - left, i, false});
      left = *cut;
      ++cut;
    }
    out.push_back({left, b - left, i, true});
  }
  return out;
}

void check_resolution(std::span<const Substep> schedule, const SimConfig& cfg) {
  const double d_lo = std::abs(two_photon_detuning(cfg.momentum.p_min, cfg));
  const double d_hi = std::abs(two_photon_detuning(cfg.momentum.p_max, cfg));
  const double max_detuning = std::max(d_lo, d_hi);
  for (const auto& s : schedule) {
    const double rabi = std::abs(envelope(s.t_mid(), cfg));
    const double worst = s.dt * std::max(rabi, max_detuning);
    if (worst > kMaxPhasePerStep) {
      const bool by_rabi = rabi >= max_detuning;
      std::ostringstream os;
      os << "time step too coarse: dt * " << (by_rabi ? "Omega0" : "|Delta|") << " = " << worst
         << " > " << kMaxPhasePerStep << " at t = " << s.t_mid() << " s";
      throw ResolutionError(by_rabi ? "rabi" : "detuning", worst, os.str());
    }
  }
}

ManifoldState init_wavepacket(const SimConfig& cfg) {
  const auto& grid = cfg.momentum;
  const double w = cfg.packet_width;
  const bool amplitude = cfg.width_convention == WidthConvention::amplitude;
  // |alpha(p)|^2 is Gaussian with standard deviation sigma_p.
  const double sigma_p = amplitude ? kHbar / w : kHbar / (w * std::sqrt(2.0));
  const double outside = 0.5 * std::erfc(grid.p_max / (std::sqrt(2.0) * sigma_p)) +
                         0.5 * std::erfc(-grid.p_min / (std::sqrt(2.0) * sigma_p));
  if (outside >= 1e-6) {
    std::ostringstream os;
    os << "momentum grid too narrow: " << outside << " of the packet norm lies outside it";
    throw ConfigError("packet norm outside grid < 1e-6", os.str());
  }

  ManifoldState s;
  const auto n = static_cast<std::size_t>(grid.nodes);
  s.p_nodes.resize(n);
  s.alpha.resize(n);
  s.beta.assign(n, cplx{0.0, 0.0});
  s.dp = grid.spacing();
  s.time = cfg.time.t_start;
  for (std::size_t j = 0; j < n; ++j) {
    const double p = grid.node(static_cast<int>(j));
    const double x = p / (2.0 * sigma_p);
    s.p_nodes[j] = p;
    s.alpha[j] = std::exp(-x * x);
  }
  double sum = 0.0;
  for (const auto& a : s.alpha) sum += std::norm(a);
  const double scale = 1.0 / std::sqrt(sum * s.dp);
  for (auto& a : s.alpha) a *= scale;
  return s;
}

std::vector<double> half_detunings(const ManifoldState& state, const SimConfig& cfg) {
  std::vector<double> out(state.size());
  for (std::size_t j = 0; j < out.size(); ++j) {
    out[j] = 0.5 * two_photon_detuning(state.p_nodes[j], cfg);
  }
  return out;
}

kernels::StepCoefficients step_coefficients(const Substep& s, const SimConfig& cfg) {
  const double t = s.t_mid();
  return kernels::make_step(s.dt, envelope(t, cfg), coupling_phase(t, cfg));
}

ManifoldState step_manifold(ManifoldState state, double dt, const SimConfig& cfg,
                            ExecPolicy policy) {
  if (!(dt > 0.0)) throw ConfigError("dt > 0", "step_manifold needs a positive step");
  if (dt > cfg.time.step() * (1.0 + 1e-12)) {
    throw ConfigError("dt <= time grid step", "step_manifold step exceeds the time-grid step");
  }
  const Substep s{state.time, dt, 0, true};
  check_resolution(std::span(&s, 1), cfg);
  const auto coeff = step_coefficients(s, cfg);
  const auto hd = half_detunings(state, cfg);
  kernels::evolve(state.alpha, state.beta, hd, std::span(&coeff, 1), policy.workers);
  state.time = s.t_end();
  return state;
}

void evolve(ManifoldState& state, std::span<const Substep> substeps, const SimConfig& cfg,
            ExecPolicy policy) {
  if (substeps.empty()) return;
  std::vector<kernels::StepCoefficients> coeffs;
  coeffs.reserve(substeps.size());
  for (const auto& s : substeps) coeffs.push_back(step_coefficients(s, cfg));
  const auto hd = half_detunings(state, cfg);
  kernels::evolve(state.alpha, state.beta, hd, coeffs, policy.workers);
  state.time = substeps.back().t_end();
}

EvolutionResult propagate(const SimConfig& cfg, int record_stride, ExecPolicy policy) {
  validate(cfg);
  const auto schedule = build_schedule(cfg);
  check_resolution(schedule, cfg);

  EvolutionResult result;
  result.final_state = init_wavepacket(cfg);
  auto& state = result.final_state;
  record_observables(result.trajectory, state, cfg);

  std::vector<kernels::StepCoefficients> coeffs;
  coeffs.reserve(schedule.size());
  for (const auto& s : schedule) coeffs.push_back(step_coefficients(s, cfg));
  const auto hd = half_detunings(state, cfg);

  std::size_t begin = 0;
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    const auto& s = schedule[i];
    const bool last = i + 1 == schedule.size();
    const bool at_stride =
        s.closes_grid_step && record_stride > 0 && (s.grid_step + 1) % record_stride == 0;
    if (!(at_stride || last)) continue;
    kernels::evolve(state.alpha, state.beta, hd,
                    std::span(coeffs).subspan(begin, i + 1 - begin), policy.workers);
    state.time = s.t_end();
    begin = i + 1;
    record_observables(result.trajectory, state, cfg);
  }
  return result;
}

}  // namespace rci
