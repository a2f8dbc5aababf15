#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rci/config.hpp"
#include "rci/observables.hpp"
#include "rci/state.hpp"

namespace rci {

/// Full propagation with observables sampled every `record_stride` steps.
TrajectoryRecord run_trajectories(const SimConfig& cfg, int record_stride, ExecPolicy policy = {});

struct SweepRow {
  double value = 0.0;
  std::optional<FringeFit> fit;       // absent when the fringe fit was rejected
  std::optional<AreaEstimate> area;   // absent when not requested or rejected
  std::string error;                  // reason for a missing fit or area
};

struct SweepResult {
  std::string parameter;
  std::vector<SweepRow> rows;  // in the order of the requested values
  std::string config_digest;
};

struct SweepOptions {
  std::vector<double> rotation_rates;  // empty: no area estimate
  std::vector<double> phi_values;
  ScanMethod method = ScanMethod::factorized;
};

/// Moves the plate edge to dl_over_l * l for each value and fits the fringe
/// at zero rotation; with rotation rates, also estimates the effective area.
/// Failed fits are kept as flagged rows. Sweep points run concurrently on
/// `policy.workers` threads; the table does not depend on the thread count.
SweepResult sweep_plate_position(const SimConfig& cfg, std::span<const double> dl_over_l,
                                 const SweepOptions& options, ExecPolicy policy = {});

struct BciResult {
  FringeScan scan;
  FringeFit fit;
  AreaEstimate area;
};

/// Three-zone run with the plate edge midway between the last two zones, so
/// the scanned phase acts on the final pulse only.
BciResult run_bci(const SimConfig& cfg, std::span<const double> rotation_rates,
                  std::span<const double> phi_values, ScanMethod method = ScanMethod::factorized,
                  ExecPolicy policy = {});

/// Plate edge between the last two zones of a sequence.
SimConfig with_plate_on_last_zone(const SimConfig& cfg);

struct LinearityResult {
  std::vector<double> rates;         // sorted ascending, 0 included
  std::vector<double> phase_shifts;  // rad
  std::vector<double> deviations;    // |shift - slope r| / |slope r|; 0 at r = 0
  double slope = 0.0;                // from the smallest +/- pair, rad s
  double fit_slope = 0.0;            // through-origin fit over all rates
  double max_linear_rate = 0.0;      // largest |r| below which every deviation is < 1%
  double antisymmetry = 0.0;         // max |shift(r) + shift(-r)|
};

/// Sagnac phase over a rate grid of +/- pairs spanning at least a decade.
/// The reference slope comes from the smallest pair.
LinearityResult sagnac_linearity(const SimConfig& cfg, std::span<const double> rates,
                                 std::span<const double> phi_values,
                                 ScanMethod method = ScanMethod::factorized,
                                 ExecPolicy policy = {});

}  // namespace rci
