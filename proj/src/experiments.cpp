#include "rci/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <exception>

#include "rci/config_io.hpp"
#include "rci/errors.hpp"
#include "rci/physics.hpp"
#include "rci/propagator.hpp"

namespace rci {

namespace {

/// Fringe minima for each rate, in input order.
std::vector<FringeFit> fits_for_rates(const SimConfig& cfg, std::span<const double> rates,
                                      std::span<const double> phi, ScanMethod method,
                                      ExecPolicy policy) {
  std::vector<FringeFit> out;
  for (double r : rates) {
    SimConfig c = cfg;
    c.rotation.rate = r;
    auto fit = fit_fringe(scan_phase(c, phi, method, policy));
    if (!fit.phi_min) {
      throw FitError(fit.rms_residual, fit.amplitude, "flat fringe under rotation");
    }
    out.push_back(fit);
  }
  return out;
}

SweepRow sweep_point(const SimConfig& base, double dl, const SweepOptions& options) {
  SweepRow row;
  row.value = dl;
  SimConfig cfg = base;
  cfg.plate.offset = dl * reference_length(base);
  const ExecPolicy serial{1};
  try {
    row.fit = fit_fringe(scan_phase(cfg, options.phi_values, options.method, serial));
  } catch (const FitError& e) {
    row.error = e.what();
    return row;
  }
  if (options.rotation_rates.empty()) return row;
  try {
    row.area = effective_area(cfg, options.rotation_rates, options.phi_values, options.method,
                              serial);
  } catch (const FitError& e) {
    row.error = e.what();
  } catch (const LinearityError& e) {
    row.error = e.what();
  }
  return row;
}

}  // namespace

TrajectoryRecord run_trajectories(const SimConfig& cfg, int record_stride, ExecPolicy policy) {
  return propagate(cfg, record_stride, policy).trajectory;
}

SweepResult sweep_plate_position(const SimConfig& cfg, std::span<const double> dl_over_l,
                                 const SweepOptions& options, ExecPolicy policy) {
  validate(cfg);
  for (double dl : dl_over_l) {
    if (!(dl >= -1.5 && dl <= 1.5)) {
      throw ConfigError("dl_over_l in [-1.5, 1.5]", "plate position outside [-1.5, 1.5] l");
    }
  }

  SweepResult result;
  result.parameter = "dl_over_l";
  result.config_digest = config_digest(cfg);
  result.rows.resize(dl_over_l.size());

  const int n = static_cast<int>(dl_over_l.size());
  const int workers = std::max(1, std::min(policy.workers, n));
  std::vector<std::exception_ptr> errors(dl_over_l.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(workers) if (workers > 1)
  for (int i = 0; i < n; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    try {
      result.rows[idx] = sweep_point(cfg, dl_over_l[idx], options);
    } catch (...) {
      errors[idx] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return result;
}

SimConfig with_plate_on_last_zone(const SimConfig& cfg) {
  const auto* seq = std::get_if<ZoneSequence>(&cfg.pulse);
  if (!seq || seq->zones.size() < 2) {
    throw ConfigError("sequence of >= 2 zones", "needs a zone sequence with at least two zones");
  }
  SimConfig out = cfg;
  const auto& z = seq->zones;
  out.plate.offset = 0.5 * (z[z.size() - 2].center + z.back().center);
  return out;
}

BciResult run_bci(const SimConfig& cfg, std::span<const double> rotation_rates,
                  std::span<const double> phi_values, ScanMethod method, ExecPolicy policy) {
  const SimConfig c = with_plate_on_last_zone(cfg);
  BciResult r;
  r.scan = scan_phase(c, phi_values, method, policy);
  r.fit = fit_fringe(r.scan);
  r.area = effective_area(c, rotation_rates, phi_values, method, policy);
  return r;
}

LinearityResult sagnac_linearity(const SimConfig& cfg, std::span<const double> rates,
                                 std::span<const double> phi_values, ScanMethod method,
                                 ExecPolicy policy) {
  std::vector<double> grid(rates.begin(), rates.end());
  if (std::find(grid.begin(), grid.end(), 0.0) == grid.end()) grid.push_back(0.0);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  double smallest = 0.0, largest = 0.0;
  for (double r : grid) {
    if (r == 0.0) continue;
    if (!std::binary_search(grid.begin(), grid.end(), -r)) {
      throw ConfigError("rotation rates in +/- pairs", "linearity rates must come in +/- pairs");
    }
    smallest = smallest == 0.0 ? std::abs(r) : std::min(smallest, std::abs(r));
    largest = std::max(largest, std::abs(r));
  }
  if (smallest == 0.0 || largest < 10.0 * smallest * (1.0 - 1e-12)) {
    throw ConfigError("rates span a decade", "linearity rates must span at least a decade");
  }

  const auto fits = fits_for_rates(cfg, grid, phi_values, method, policy);
  const auto zero = static_cast<std::size_t>(std::find(grid.begin(), grid.end(), 0.0) - grid.begin());
  const double phi0 = *fits[zero].phi_min;

  LinearityResult out;
  out.rates = grid;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double shift = wrap_phase(phi0 - *fits[i].phi_min);
    out.phase_shifts.push_back(shift);
    sxy += grid[i] * shift;
    sxx += grid[i] * grid[i];
  }
  out.fit_slope = sxy / sxx;

  const auto at = [&](double r) {
    return out.phase_shifts[static_cast<std::size_t>(
        std::lower_bound(grid.begin(), grid.end(), r) - grid.begin())];
  };
  out.slope = (at(smallest) - at(-smallest)) / (2.0 * smallest);

  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double expected = out.slope * grid[i];
    out.deviations.push_back(grid[i] == 0.0 ? 0.0
                                            : std::abs(out.phase_shifts[i] - expected) /
                                                  std::abs(expected));
    if (grid[i] > 0.0) {
      out.antisymmetry = std::max(out.antisymmetry, std::abs(out.phase_shifts[i] + at(-grid[i])));
    }
  }

  // Walk outwards by |r| while both signs stay within 1%.
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double r = grid[i];
    if (r <= 0.0) continue;
    const auto neg = static_cast<std::size_t>(
        std::lower_bound(grid.begin(), grid.end(), -r) - grid.begin());
    if (out.deviations[i] >= 1e-2 || out.deviations[neg] >= 1e-2) break;
    out.max_linear_rate = r;
  }
  return out;
}

}  // namespace rci
