#include "rci/observables.hpp"

#include <fftw3.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>
#include <numbers>
#include <sstream>

#include "rci/config_io.hpp"
#include "rci/errors.hpp"
#include "rci/physics.hpp"
#include "rci/propagator.hpp"

namespace rci {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kMinNorm = 1e-6;

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct PlanDeleter {
  void operator()(fftw_plan_s* p) const {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(p);
  }
};
using Plan = std::unique_ptr<fftw_plan_s, PlanDeleter>;

/// out_n = sum_j in_j exp(+2 pi i j n / N)
void inverse_dft(std::vector<cplx>& in, std::vector<cplx>& out) {
  Plan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan.reset(fftw_plan_dft_1d(static_cast<int>(in.size()),
                                reinterpret_cast<fftw_complex*>(in.data()),
                                reinterpret_cast<fftw_complex*>(out.data()), FFTW_BACKWARD,
                                FFTW_ESTIMATE));
  }
  fftw_execute(plan.get());
}

struct Moments {
  double norm = 0.0;
  double mean = 0.0;
  double second = 0.0;
};

Moments moments(std::span<const cplx> psi, std::span<const double> z) {
  Moments m;
  double s0 = 0.0, s1 = 0.0, s2 = 0.0;
  for (std::size_t n = 0; n < psi.size(); ++n) {
    const double rho = std::norm(psi[n]);
    s0 += rho;
    s1 += rho * z[n];
    s2 += rho * z[n] * z[n];
  }
  const double dz = z.size() > 1 ? z[1] - z[0] : 1.0;
  m.norm = s0 * dz;
  if (s0 > 0.0) {
    m.mean = s1 / s0;
    m.second = s2 / s0;
  }
  return m;
}

double fraction_of_period(std::span<const double> phi) {
  const auto n = static_cast<double>(phi.size());
  return (phi.back() - phi.front()) * n / (n - 1.0);
}

void check_phases(std::span<const double> phi) {
  if (phi.size() < 8) {
    throw ConfigError("phase samples >= 8", "phase scan needs at least 8 samples");
  }
  for (std::size_t i = 1; i < phi.size(); ++i) {
    if (!(phi[i] > phi[i - 1])) {
      throw ConfigError("phase samples strictly increasing", "phase samples must increase");
    }
  }
  if (fraction_of_period(phi) < 2.0 * kPi * (1.0 - 1e-9)) {
    throw ConfigError("phase samples span 2 pi", "phase samples must cover a full period");
  }
}

FringeScan scan_direct(const SimConfig& cfg, std::span<const double> phi, ExecPolicy policy) {
  FringeScan scan;
  for (double v : phi) {
    SimConfig c = cfg;
    c.plate.phase = v;
    const auto result = propagate(c, 0, policy);
    scan.phi.push_back(v);
    scan.P_b.push_back(populations(result.final_state).b);
  }
  return scan;
}

FringeScan scan_factorized(const SimConfig& cfg, std::span<const double> phi, ExecPolicy policy) {
  SimConfig base = cfg;
  base.plate.phase = 0.0;
  validate(base);
  const auto schedule = build_schedule(base);
  check_resolution(schedule, base);

  const double switch_time = plate_switch_time(base);
  const auto split = static_cast<std::size_t>(
      std::find_if(schedule.begin(), schedule.end(),
                   [&](const Substep& s) { return s.t_start >= switch_time; }) -
      schedule.begin());
  const std::span<const Substep> all(schedule);

  // Before the plate edge: the physical state.
  ManifoldState before = init_wavepacket(base);
  evolve(before, all.first(split), base, policy);

  // After the plate edge: first column (x, y) of the per-node SU(2)
  // propagator, U = [[x, -conj(y)], [y, conj(x)]] with the common light-shift
  // phase removed.
  ManifoldState column = before;
  std::fill(column.alpha.begin(), column.alpha.end(), cplx{1.0, 0.0});
  std::fill(column.beta.begin(), column.beta.end(), cplx{0.0, 0.0});
  {
    const auto rest = all.subspan(split);
    std::vector<kernels::StepCoefficients> coeffs;
    coeffs.reserve(rest.size());
    for (const auto& s : rest) {
      auto c = step_coefficients(s, base);
      c.common_phase = cplx{1.0, 0.0};
      coeffs.push_back(c);
    }
    const auto hd = half_detunings(column, base);
    kernels::evolve(column.alpha, column.beta, hd, coeffs, policy.workers);
  }

  // With the plate phase phi on the second segment, U(phi) = G U G^dagger,
  // G = diag(e^{i phi/2}, e^{-i phi/2}), so
  //   beta_final = e^{-i phi/2} (y alpha_1 e^{-i phi/2} + conj(x) beta_1 e^{i phi/2}).
  const std::size_t n = before.size();
  std::vector<cplx> direct(n), crossed(n);
  for (std::size_t j = 0; j < n; ++j) {
    crossed[j] = column.beta[j] * before.alpha[j];
    direct[j] = std::conj(column.alpha[j]) * before.beta[j];
  }
  FringeScan scan;
  for (double v : phi) {
    const cplx rot = std::polar(1.0, -v);
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) sum += std::norm(crossed[j] * rot + direct[j]);
    scan.phi.push_back(v);
    scan.P_b.push_back(sum * before.dp);
  }
  return scan;
}

}  // namespace

double PositionWavefunctions::norm() const {
  double sum = 0.0;
  for (std::size_t n = 0; n < z_nodes.size(); ++n) {
    sum += std::norm(psi_a[n]) + std::norm(psi_b[n]);
  }
  return sum * dz;
}

Populations populations(const ManifoldState& state) {
  Populations p;
  for (std::size_t j = 0; j < state.size(); ++j) {
    p.a += std::norm(state.alpha[j]);
    p.b += std::norm(state.beta[j]);
  }
  p.a *= state.dp;
  p.b *= state.dp;
  return p;
}

PositionWavefunctions reconstruct_position(const ManifoldState& state, const SimConfig& cfg) {
  const std::size_t n = state.size();
  const double dp = state.dp;
  const double dz = 2.0 * kPi * kHbar / (static_cast<double>(n) * dp);
  const double p_min = state.p_nodes.front();
  const double hk2 = 2.0 * kHbar * cfg.laser.wavenumber;
  const double tau = state.time - cfg.time.t_start;
  const double m = cfg.atom.mass;

  PositionWavefunctions out;
  out.dz = dz;
  out.time = state.time;
  out.z_nodes.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.z_nodes[i] = (static_cast<double>(i) - 0.5 * static_cast<double>(n)) * dz;
  }

  // With z_0 = -(N/2) dz, exp(i p_j z_n / hbar) factors into
  // (-1)^j exp(2 pi i j n / N) exp(i p_min z_n / hbar).
  std::vector<cplx> in_a(n), in_b(n), out_a(n), out_b(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double p = state.p_nodes[j];
    const double q = p + hk2;
    const cplx kinetic = std::polar(1.0, -(p * p + q * q) * tau / (4.0 * m * kHbar));
    const double sign = (j % 2 == 0) ? 1.0 : -1.0;
    in_a[j] = sign * kinetic * state.alpha[j];
    in_b[j] = sign * kinetic * state.beta[j];
  }
  inverse_dft(in_a, out_a);
  inverse_dft(in_b, out_b);

  const double scale = dp / std::sqrt(2.0 * kPi * kHbar);
  out.psi_a.resize(n);
  out.psi_b.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const cplx carrier = std::polar(scale, p_min * out.z_nodes[i] / kHbar);
    out.psi_a[i] = carrier * out_a[i];
    out.psi_b[i] = carrier * out_b[i];
  }
  return out;
}

std::optional<double> centroid(std::span<const cplx> psi, std::span<const double> z_nodes) {
  const auto m = moments(psi, z_nodes);
  if (m.norm <= kMinNorm) return std::nullopt;
  return m.mean;
}

std::optional<double> spread(std::span<const cplx> psi, std::span<const double> z_nodes) {
  const auto m = moments(psi, z_nodes);
  if (m.norm <= kMinNorm) return std::nullopt;
  return std::sqrt(std::max(0.0, m.second - m.mean * m.mean));
}

void record_observables(TrajectoryRecord& record, const ManifoldState& state,
                        const SimConfig& cfg) {
  const auto pops = populations(state);
  const auto pos = reconstruct_position(state, cfg);
  record.times.push_back(state.time);
  record.P_a.push_back(pops.a);
  record.P_b.push_back(pops.b);
  record.centroid_a.push_back(centroid(pos.psi_a, pos.z_nodes).value_or(kAbsent));
  record.centroid_b.push_back(centroid(pos.psi_b, pos.z_nodes).value_or(kAbsent));
  record.spread_a.push_back(spread(pos.psi_a, pos.z_nodes).value_or(kAbsent));
  record.spread_b.push_back(spread(pos.psi_b, pos.z_nodes).value_or(kAbsent));
}

std::vector<double> uniform_phases(int n) {
  std::vector<double> out(static_cast<std::size_t>(std::max(n, 0)));
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = 2.0 * kPi * i / n;
  return out;
}

FringeScan scan_phase(const SimConfig& cfg, std::span<const double> phi_values, ScanMethod method,
                      ExecPolicy policy) {
  check_phases(phi_values);
  auto scan = method == ScanMethod::direct ? scan_direct(cfg, phi_values, policy)
                                           : scan_factorized(cfg, phi_values, policy);
  scan.config_digest = config_digest(cfg);
  return scan;
}

double wrap_phase(double phi) {
  double r = std::remainder(phi, 2.0 * kPi);
  if (r <= -kPi) r += 2.0 * kPi;
  return r;
}

FringeFit fit_fringe(const FringeScan& scan) {
  const auto n = static_cast<Eigen::Index>(scan.phi.size());
  if (n < 3) throw ConfigError("phase samples >= 3", "fringe fit needs at least 3 samples");
  Eigen::MatrixXd design(n, 3);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double phi = scan.phi[static_cast<std::size_t>(i)];
    design(i, 0) = 1.0;
    design(i, 1) = std::cos(phi);
    design(i, 2) = std::sin(phi);
    y(i) = scan.P_b[static_cast<std::size_t>(i)];
  }
  const Eigen::Vector3d c = design.colPivHouseholderQr().solve(y);
  // c1 cos + c2 sin = -(C/2) cos(phi - phi_min)
  FringeFit fit;
  fit.offset = c(0);
  fit.amplitude = 2.0 * std::hypot(c(1), c(2));
  fit.visibility = fit.offset != 0.0 ? fit.amplitude / (2.0 * fit.offset) : 0.0;
  fit.rms_residual = std::sqrt((design * c - y).squaredNorm() / static_cast<double>(n));

  const double floor = 1e-12 * std::max(1.0, std::abs(fit.offset));
  if (fit.amplitude <= floor) {
    fit.amplitude = 0.0;
    fit.visibility = 0.0;
    return fit;
  }
  fit.phi_min = wrap_phase(std::atan2(-c(2), -c(1)));
  if (fit.rms_residual > 0.05 * fit.amplitude) {
    std::ostringstream os;
    os << "fringe fit rejected: rms residual " << fit.rms_residual << " exceeds 5% of amplitude "
       << fit.amplitude;
    throw FitError(fit.rms_residual, fit.amplitude, os.str());
  }
  return fit;
}

double bci_reference_area(const SimConfig& cfg) {
  if (!(cfg.velocity > 0.0)) throw ConfigError("velocity > 0", "reference area needs v_x > 0");
  const double L = reference_length(cfg);
  return L * L * 2.0 * kHbar * cfg.laser.wavenumber / (cfg.atom.mass * cfg.velocity);
}

AreaEstimate effective_area(const SimConfig& cfg, std::span<const double> rotation_rates,
                            std::span<const double> phi_values, ScanMethod method,
                            ExecPolicy policy) {
  if (rotation_rates.size() < 3) {
    throw ConfigError("rotation rates >= 3", "effective area needs at least three rates");
  }
  const auto has = [&](double r) {
    return std::find(rotation_rates.begin(), rotation_rates.end(), r) != rotation_rates.end();
  };
  if (!has(0.0)) throw ConfigError("rotation rates include 0", "rates must include 0");
  for (double r : rotation_rates) {
    if (!has(-r)) throw ConfigError("rotation rates in +/- pairs", "rates must come in +/- pairs");
  }

  AreaEstimate est;
  est.reference_area = bci_reference_area(cfg);
  std::vector<double> phi_min;
  for (double r : rotation_rates) {
    SimConfig c = cfg;
    c.rotation.rate = r;
    const auto fit = fit_fringe(scan_phase(c, phi_values, method, policy));
    if (!fit.phi_min) {
      throw FitError(fit.rms_residual, fit.amplitude,
                     "flat fringe: no fringe minimum to track under rotation");
    }
    est.rates.push_back(r);
    est.fits.push_back(fit);
    phi_min.push_back(*fit.phi_min);
  }
  const auto zero = static_cast<std::size_t>(
      std::find(est.rates.begin(), est.rates.end(), 0.0) - est.rates.begin());

  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < est.rates.size(); ++i) {
    const double shift = wrap_phase(phi_min[zero] - phi_min[i]);
    est.phase_shifts.push_back(shift);
    sxy += est.rates[i] * shift;
    sxx += est.rates[i] * est.rates[i];
  }
  est.slope = sxy / sxx;
  est.area = kHbar * est.slope / (2.0 * cfg.atom.mass);
  est.eta = est.area / est.reference_area;

  double res2 = 0.0, sig2 = 0.0, largest = 0.0;
  for (std::size_t i = 0; i < est.rates.size(); ++i) {
    const double r = est.phase_shifts[i] - est.slope * est.rates[i];
    res2 += r * r;
    sig2 += est.phase_shifts[i] * est.phase_shifts[i];
    largest = std::max(largest, std::abs(est.phase_shifts[i]));
  }
  est.linearity_residual = sig2 > 0.0 ? std::sqrt(res2 / sig2) : 0.0;
  if (largest >= 0.25 * kPi) {
    std::ostringstream os;
    os << "rotation rates too large: fringe shift " << largest << " rad reaches pi/4";
    throw LinearityError(est.linearity_residual, os.str());
  }
  if (est.linearity_residual >= 1e-2) {
    std::ostringstream os;
    os << "fringe shift not linear in rotation rate: relative rms residual "
       << est.linearity_residual;
    throw LinearityError(est.linearity_residual, os.str());
  }
  return est;
}

}  // namespace rci
