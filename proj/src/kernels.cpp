#include "rci/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>

namespace rci::kernels {

namespace {

struct Block {
  std::size_t begin;
  std::size_t end;
};

Block block_of(std::size_t n, int worker, int workers) {
  const std::size_t w = static_cast<std::size_t>(workers);
  const std::size_t i = static_cast<std::size_t>(worker);
  const std::size_t base = n / w;
  const std::size_t extra = n % w;
  const std::size_t begin = i * base + std::min(i, extra);
  return {begin, begin + base + (i < extra ? 1 : 0)};
}

void evolve_block(std::span<cplx> alpha, std::span<cplx> beta,
                  std::span<const double> half_detuning,
                  std::span<const StepCoefficients> steps, Block blk) {
  for (const auto& s : steps) {
    for (std::size_t j = blk.begin; j < blk.end; ++j) {
      step_node(alpha[j], beta[j], half_detuning[j], s);
    }
  }
}

}  // namespace

StepCoefficients make_step(double dt, double rabi, double theta) {
  StepCoefficients s;
  s.dt = dt;
  s.half_rabi = 0.5 * rabi;
  s.coupling = std::polar(1.0, theta);
  s.common_phase = std::polar(1.0, -0.5 * rabi * dt);
  return s;
}

void evolve_serial(std::span<cplx> alpha, std::span<cplx> beta,
                   std::span<const double> half_detuning,
                   std::span<const StepCoefficients> steps) {
  evolve_block(alpha, beta, half_detuning, steps, {0, alpha.size()});
}

void evolve_parallel(std::span<cplx> alpha, std::span<cplx> beta,
                     std::span<const double> half_detuning,
                     std::span<const StepCoefficients> steps, int workers) {
  const std::size_t n = alpha.size();
  workers = std::max(1, std::min<int>(workers, static_cast<int>(n)));
#pragma omp parallel num_threads(workers)
  {
    const int nt = omp_get_num_threads();
    const Block blk = block_of(n, omp_get_thread_num(), nt);
    evolve_block(alpha, beta, half_detuning, steps, blk);
  }
}

void evolve(std::span<cplx> alpha, std::span<cplx> beta, std::span<const double> half_detuning,
            std::span<const StepCoefficients> steps, int workers) {
  if (workers <= 1) {
    evolve_serial(alpha, beta, half_detuning, steps);
  } else {
    evolve_parallel(alpha, beta, half_detuning, steps, workers);
  }
}

void step_three_level_node(cplx& a, cplx& e, cplx& b, const ThreeLevelDiagonal& diag,
                           const ThreeLevelStep& s) {
  // term_{n+1} = (-i H dt / (n+1)) term_n
  const cplx c_ae = s.coupling_ae;
  const double c_eb = s.coupling_eb;
  cplx ta = a, te = e, tb = b;
  cplx sa = a, se = e, sb = b;
  const auto l1 = [](cplx x, cplx y, cplx z) {
    return std::abs(x.real()) + std::abs(x.imag()) + std::abs(y.real()) + std::abs(y.imag()) +
           std::abs(z.real()) + std::abs(z.imag());
  };
  const double tol = 1e-18 * l1(a, e, b);
  for (int n = 1; n < 40; ++n) {
    const cplx ha = diag.a * ta + c_ae * te;
    const cplx he = std::conj(c_ae) * ta + diag.e * te + c_eb * tb;
    const cplx hb = c_eb * te + diag.b * tb;
    const cplx f{0.0, -s.dt / n};
    ta = f * ha;
    te = f * he;
    tb = f * hb;
    sa += ta;
    se += te;
    sb += tb;
    if (l1(ta, te, tb) <= tol) break;
  }
  a = sa;
  e = se;
  b = sb;
}

void evolve_three_level(std::span<cplx> a, std::span<cplx> e, std::span<cplx> b,
                        std::span<const ThreeLevelDiagonal> diag,
                        std::span<const ThreeLevelStep> steps, int workers) {
  const std::size_t n = a.size();
  workers = std::max(1, std::min<int>(workers, static_cast<int>(n)));
#pragma omp parallel num_threads(workers) if (workers > 1)
  {
    const Block blk = block_of(n, omp_get_thread_num(), omp_get_num_threads());
    for (const auto& s : steps) {
      for (std::size_t j = blk.begin; j < blk.end; ++j) {
        step_three_level_node(a[j], e[j], b[j], diag[j], s);
      }
    }
  }
}

}  // namespace rci::kernels
