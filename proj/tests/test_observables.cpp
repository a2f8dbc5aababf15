#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <random>

#include "rci/errors.hpp"
#include "rci/observables.hpp"
#include "rci/physics.hpp"
#include "rci/propagator.hpp"

using namespace rci;

namespace {

constexpr double kPi = std::numbers::pi;

SimConfig small_config(int nodes = 64, int steps = 4000) {
  auto cfg = paper_config();
  set_default_momentum_grid(cfg, nodes);
  cfg.time.steps = steps;
  return cfg;
}

/// Final P_b from classical RK4 on each node's two-level equation, split at
/// the plate edge.
double rk4_final_pb(const SimConfig& cfg, int steps_per_segment) {
  const auto s0 = init_wavepacket(cfg);
  const double ts = std::clamp(plate_switch_time(cfg), cfg.time.t_start, cfg.time.t_end);
  double pb = 0.0;
  for (std::size_t j = 0; j < s0.size(); ++j) {
    const double p = s0.p_nodes[j];
    Eigen::Vector2cd y(s0.alpha[j], s0.beta[j]);
    const auto f = [&](double t, const Eigen::Vector2cd& v) -> Eigen::Vector2cd {
      return cplx(0.0, -1.0) * (effective_hamiltonian(p, t, cfg) * v);
    };
    for (auto [a, b] : {std::pair{cfg.time.t_start, ts}, std::pair{ts, cfg.time.t_end}}) {
      const double h = (b - a) / steps_per_segment;
      const double eps = 1e-9 * h;
      for (int i = 0; i < steps_per_segment; ++i) {
        const double t = a + i * h;
        const auto k1 = f(std::max(t, a + eps), y);
        const auto k2 = f(t + 0.5 * h, y + 0.5 * h * k1);
        const auto k3 = f(t + 0.5 * h, y + 0.5 * h * k2);
        const auto k4 = f(std::min(t + h, b - eps), y + h * k3);
        y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      }
    }
    pb += std::norm(y(1));
  }
  return pb * s0.dp;
}

FringeScan synthetic(double offset, double amplitude, double phi_min, int n) {
  FringeScan s;
  s.phi = uniform_phases(n);
  for (double phi : s.phi) s.P_b.push_back(offset - 0.5 * amplitude * std::cos(phi - phi_min));
  return s;
}

}  // namespace

TEST(Observables, PositionTransformMatchesDirectSum) {
  auto cfg = small_config(64, 2000);
  auto state = propagate(cfg, 0).final_state;
  const auto psi = reconstruct_position(state, cfg);
  const double tau = state.time - cfg.time.t_start;
  const double m = cfg.atom.mass;
  const double hk2 = 2.0 * kHbar * cfg.laser.wavenumber;
  const double n = static_cast<double>(state.size());
  const double dz = 2.0 * kPi * kHbar / (n * state.dp);
  EXPECT_DOUBLE_EQ(psi.dz, dz);

  double worst = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < state.size(); ++i) {
    const double z = (static_cast<double>(i) - 0.5 * n) * dz;
    EXPECT_NEAR(psi.z_nodes[i], z, 1e-12 * dz);
    cplx a{0.0, 0.0}, b{0.0, 0.0};
    for (std::size_t j = 0; j < state.size(); ++j) {
      const double p = state.p_nodes[j];
      const double q = p + hk2;
      const cplx kinetic = std::exp(cplx(0.0, -(p * p + q * q) * tau / (4.0 * m * kHbar)));
      const cplx wave = std::exp(cplx(0.0, p * z / kHbar));
      a += state.alpha[j] * kinetic * wave;
      b += state.beta[j] * kinetic * wave;
    }
    const double norm = state.dp / std::sqrt(2.0 * kPi * kHbar);
    worst = std::max({worst, std::abs(a * norm - psi.psi_a[i]), std::abs(b * norm - psi.psi_b[i])});
    scale = std::max(scale, std::abs(psi.psi_a[i]));
  }
  EXPECT_LE(worst, 1e-10 * scale);
}

TEST(Observables, PositionTransformPreservesNorm) {
  auto cfg = small_config(128, 2000);
  const auto state = propagate(cfg, 0).final_state;
  const auto psi = reconstruct_position(state, cfg);
  EXPECT_NEAR(psi.norm(), state.norm(), 1e-12);
  const auto pops = populations(state);
  EXPECT_NEAR(pops.a + pops.b, 1.0, 1e-12);
}

TEST(Observables, RecordMarksEmptyComponents) {
  auto cfg = small_config(64, 2000);
  TrajectoryRecord r;
  record_observables(r, init_wavepacket(cfg), cfg);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_DOUBLE_EQ(r.P_a[0], 1.0);
  EXPECT_EQ(r.P_b[0], 0.0);
  EXPECT_TRUE(std::isnan(r.centroid_b[0]));
  EXPECT_TRUE(std::isnan(r.spread_b[0]));
  EXPECT_FALSE(std::isnan(r.centroid_a[0]));
}

TEST(FringeScan, FactorizedMatchesDirect) {
  auto cfg = small_config(64, 4000);
  cfg.rotation.rate = 0.15;
  const auto phi = uniform_phases(12);
  for (double dl : {-0.7, 0.0, 0.48, 1.2}) {
    cfg.plate.offset = dl * 3e-3;
    const auto fast = scan_phase(cfg, phi, ScanMethod::factorized);
    const auto slow = scan_phase(cfg, phi, ScanMethod::direct);
    ASSERT_EQ(fast.phi, slow.phi);
    for (std::size_t i = 0; i < phi.size(); ++i) EXPECT_NEAR(fast.P_b[i], slow.P_b[i], 1e-12);
    EXPECT_EQ(fast.config_digest, slow.config_digest);
    EXPECT_EQ(fast.config_digest.size(), 16u);
  }
}

TEST(FringeScan, MatchesRungeKuttaOracle) {
  auto cfg = small_config(16, 20000);
  cfg.rotation.rate = 0.1;
  for (double phase : {0.0, 1.3, 4.0}) {
    cfg.plate.phase = phase;
    const double expected = rk4_final_pb(cfg, 40000);
    const double got = scan_phase(cfg, std::vector<double>{phase, phase + 0.7, phase + 1.4,
                                                           phase + 2.1, phase + 2.8, phase + 3.5,
                                                           phase + 4.2, phase + 5.6},
                                  ScanMethod::factorized)
                           .P_b[0];
    EXPECT_NEAR(got, expected, 1e-6) << "phase " << phase;
  }
}

TEST(FringeScan, ValidatesPhaseSamples) {
  const auto cfg = small_config();
  EXPECT_THROW(scan_phase(cfg, uniform_phases(7)), ConfigError);
  std::vector<double> half;
  for (int i = 0; i < 8; ++i) half.push_back(0.4 * i);
  EXPECT_THROW(scan_phase(cfg, half), ConfigError);
  auto unsorted = uniform_phases(8);
  std::swap(unsorted[2], unsorted[3]);
  EXPECT_THROW(scan_phase(cfg, unsorted), ConfigError);
}

TEST(FringeFit, RecoversSinusoid) {
  for (double phi_min : {-3.0, -1.0, 0.0, 0.5, 3.1}) {
    const auto fit = fit_fringe(synthetic(0.45, 0.8, phi_min, 16));
    EXPECT_NEAR(fit.offset, 0.45, 1e-12);
    EXPECT_NEAR(fit.amplitude, 0.8, 1e-12);
    EXPECT_NEAR(fit.visibility, 0.8 / 0.9, 1e-12);
    ASSERT_TRUE(fit.phi_min.has_value());
    EXPECT_NEAR(*fit.phi_min, phi_min, 1e-12);
    EXPECT_LT(fit.rms_residual, 1e-14);
  }
}

TEST(FringeFit, FlatScanHasNoMinimum) {
  const auto fit = fit_fringe(synthetic(0.3, 0.0, 0.0, 16));
  EXPECT_FALSE(fit.phi_min.has_value());
  EXPECT_EQ(fit.amplitude, 0.0);
  EXPECT_NEAR(fit.offset, 0.3, 1e-15);
}

TEST(FringeFit, RejectsStrongHarmonics) {
  auto scan = synthetic(0.5, 0.4, 0.0, 16);
  for (std::size_t i = 0; i < scan.phi.size(); ++i) scan.P_b[i] += 0.1 * std::cos(2.0 * scan.phi[i]);
  try {
    fit_fringe(scan);
    FAIL() << "expected FitError";
  } catch (const FitError& e) {
    EXPECT_GT(e.rms_residual(), 0.05 * e.amplitude());
  }
}

TEST(FringeFit, WrapPhase) {
  EXPECT_DOUBLE_EQ(wrap_phase(kPi), kPi);
  EXPECT_DOUBLE_EQ(wrap_phase(-kPi), kPi);
  EXPECT_NEAR(wrap_phase(3.0 * kPi / 2.0), -kPi / 2.0, 1e-15);
  EXPECT_NEAR(wrap_phase(-7.0), -7.0 + 2.0 * kPi, 1e-15);
}

TEST(Area, ReferenceAreaOfTheDefaultGeometry) {
  const auto cfg = paper_config();
  const double a0 = bci_reference_area(cfg);
  EXPECT_NEAR(a0, 2.7e-10, 0.01 * 2.7e-10);
  const double L = 3e-3;
  EXPECT_NEAR(a0, L * L * recoil_velocity(cfg) / cfg.velocity, 1e-22);
  EXPECT_NEAR(bci_reference_area(bci_config()), a0, 1e-12 * a0);
}

TEST(Area, SagnacSlopeOfTheThreeZoneInterferometer) {
  const auto cfg = bci_config();
  const auto est = effective_area(cfg, std::vector<double>{-0.1, 0.0, 0.1}, uniform_phases(16));
  EXPECT_NEAR(est.eta, 1.0, 1e-3);
  EXPECT_NEAR(est.slope, 2.0 * cfg.atom.mass * est.reference_area / kHbar * est.eta, 1e-9);
  EXPECT_LT(est.linearity_residual, 1e-9);
  EXPECT_NEAR(est.phase_shifts[0], -est.phase_shifts[2], 1e-9);
  EXPECT_EQ(est.phase_shifts[1], 0.0);
}

TEST(Area, ValidatesRates) {
  const auto cfg = bci_config();
  const auto phi = uniform_phases(8);
  EXPECT_THROW(effective_area(cfg, std::vector<double>{0.0, 0.1}, phi), ConfigError);
  EXPECT_THROW(effective_area(cfg, std::vector<double>{-0.1, 0.1, 0.2}, phi), ConfigError);
  EXPECT_THROW(effective_area(cfg, std::vector<double>{-0.1, 0.0, 0.2}, phi), ConfigError);
  EXPECT_THROW(effective_area(cfg, std::vector<double>{-2.0, 0.0, 2.0}, phi), LinearityError);
}
