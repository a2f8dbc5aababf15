#pragma once

// Per-node stepping kernels. Momentum nodes are independent manifolds, so
// each kernel comes in a serial reference form and an OpenMP form that
// partitions nodes into contiguous blocks. Both run the same per-node
// arithmetic in the same order, so their results are bit-identical for any
// worker count.

#include <complex>
#include <span>

namespace rci::kernels {

using cplx = std::complex<double>;

/// Node-independent part of one midpoint step of the effective two-level
/// Hamiltonian.
struct StepCoefficients {
  double dt = 0.0;
  double half_rabi = 0.0;              // Omega0(t_mid) / 2
  cplx coupling{1.0, 0.0};             // exp(i theta(t_mid))
  cplx common_phase{1.0, 0.0};         // exp(-i Omega0(t_mid) dt / 2), the light shift
};

StepCoefficients make_step(double dt, double rabi, double theta);

/// Exact exp(-i H dt) applied to one (alpha, beta) pair. `half_detuning` is
/// Delta(p)/2.
inline void step_node(cplx& alpha, cplx& beta, double half_detuning, const StepCoefficients& s) {
  const double d = half_detuning;
  const double g = s.half_rabi;
  const double lambda = std::sqrt(d * d + g * g);
  const double angle = lambda * s.dt;
  const double c = std::cos(angle);
  const double sn = lambda > 0.0 ? std::sin(angle) / lambda : s.dt;
  // U = [[u, v], [-conj(v), conj(u)]] * common_phase
  const cplx u{c, -sn * d};
  const cplx v = cplx{0.0, -sn * g} * s.coupling;
  const cplx a = u * alpha + v * beta;
  const cplx b = -std::conj(v) * alpha + std::conj(u) * beta;
  alpha = s.common_phase * a;
  beta = s.common_phase * b;
}

/// Applies `steps` in order to every node.
void evolve_serial(std::span<cplx> alpha, std::span<cplx> beta,
                   std::span<const double> half_detuning,
                   std::span<const StepCoefficients> steps);

void evolve_parallel(std::span<cplx> alpha, std::span<cplx> beta,
                     std::span<const double> half_detuning,
                     std::span<const StepCoefficients> steps, int workers);

/// Dispatches to the serial kernel for one worker.
void evolve(std::span<cplx> alpha, std::span<cplx> beta, std::span<const double> half_detuning,
            std::span<const StepCoefficients> steps, int workers);

/// Node-independent part of one three-level step in the (a, e, b) basis.
struct ThreeLevelStep {
  double dt = 0.0;
  cplx coupling_ae{0.0, 0.0};  // Omega1(t)/2 exp(i theta)
  double coupling_eb = 0.0;    // Omega2(t)/2
};

/// Node-dependent diagonal (a, e, b) of the three-level Hamiltonian.
struct ThreeLevelDiagonal {
  double a = 0.0;
  double e = 0.0;
  double b = 0.0;
};

/// exp(-i H dt) v by Taylor series summed to machine precision; requires
/// ||H|| dt of order 0.1 or below.
void step_three_level_node(cplx& a, cplx& e, cplx& b, const ThreeLevelDiagonal& diag,
                           const ThreeLevelStep& s);

void evolve_three_level(std::span<cplx> a, std::span<cplx> e, std::span<cplx> b,
                        std::span<const ThreeLevelDiagonal> diag,
                        std::span<const ThreeLevelStep> steps, int workers);

}  // namespace rci::kernels
