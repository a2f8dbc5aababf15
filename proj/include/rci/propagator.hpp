#pragma once

#include <span>
#include <vector>

#include "rci/config.hpp"
#include "rci/kernels.hpp"
#include "rci/state.hpp"

namespace rci {

/// One midpoint substep. Grid steps that contain an envelope discontinuity
/// or the plate edge are split there, so every substep sees a smooth
/// Hamiltonian.
struct Substep {
  double t_start = 0.0;
  double dt = 0.0;
  int grid_step = 0;             // index of the enclosing grid step
  bool closes_grid_step = false;  // last substep of that grid step

  double t_mid() const { return t_start + 0.5 * dt; }
  double t_end() const { return t_start + dt; }
};

/// Largest allowed dt * max(|Omega0|, |Delta|).
inline constexpr double kMaxPhasePerStep = 0.1;

std::vector<Substep> build_schedule(const SimConfig& cfg);
std::vector<Substep> build_schedule(const SimConfig& cfg, int steps);

/// Throws ResolutionError if any substep violates the phase-per-step guard.
void check_resolution(std::span<const Substep> schedule, const SimConfig& cfg);

/// Gaussian packet in state a centred at p = 0, normalised on the grid.
/// Throws ConfigError if >= 1e-6 of the norm falls outside the grid.
ManifoldState init_wavepacket(const SimConfig& cfg);

/// Delta(p)/2 at every node.
std::vector<double> half_detunings(const ManifoldState& state, const SimConfig& cfg);

kernels::StepCoefficients step_coefficients(const Substep& s, const SimConfig& cfg);

/// Advances the state by dt from state.time with the exponential midpoint
/// rule. dt may not exceed the time-grid step.
ManifoldState step_manifold(ManifoldState state, double dt, const SimConfig& cfg,
                            ExecPolicy policy = {});

/// Applies a contiguous run of substeps.
void evolve(ManifoldState& state, std::span<const Substep> substeps, const SimConfig& cfg,
            ExecPolicy policy = {});

struct EvolutionResult {
  ManifoldState final_state;
  TrajectoryRecord trajectory;
};

/// Full run over cfg.time. Observables are recorded at t_start, after every
/// `record_stride` grid steps, and at t_end. A stride of 0 records only the
/// end points.
EvolutionResult propagate(const SimConfig& cfg, int record_stride, ExecPolicy policy = {});

}  // namespace rci
