#include "rci/cli.hpp"

#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rci/config_io.hpp"
#include "rci/errors.hpp"
#include "rci/experiments.hpp"
#include "rci/lambda_oracle.hpp"
#include "rci/physics.hpp"

namespace rci {

namespace {

using Json = nlohmann::ordered_json;

struct Options {
  std::optional<std::string> config;
  std::vector<std::string> overrides;
  std::optional<std::string> out;
  std::string format = "csv";
  int workers = 1;
  int record_stride = 100;
};

struct Output {
  OutputTable table;
  Json summary = Json::object();
  int status = kExitOk;
};

double or_nan(const std::optional<double>& v) { return v.value_or(std::nan("")); }

Json fit_json(const FringeFit& fit) {
  Json j;
  j["offset"] = fit.offset;
  j["amplitude"] = fit.amplitude;
  j["visibility"] = fit.visibility;
  j["phi_min"] = fit.phi_min ? Json(*fit.phi_min) : Json(nullptr);
  j["rms_residual"] = fit.rms_residual;
  return j;
}

Json area_json(const AreaEstimate& a) {
  Json j;
  j["slope"] = a.slope;
  j["area"] = a.area;
  j["reference_area"] = a.reference_area;
  j["eta"] = a.eta;
  j["linearity_residual"] = a.linearity_residual;
  return j;
}

Output simulate(const ResolvedConfig& rc, const Options& opt) {
  const auto tr = run_trajectories(rc.sim, opt.record_stride, {opt.workers});
  Output o;
  o.table.columns = {{"t", "s"},   {"P_a", "1"}, {"P_b", "1"}, {"z_a", "m"},
                     {"z_b", "m"}, {"s_a", "m"}, {"s_b", "m"}};
  for (std::size_t i = 0; i < tr.size(); ++i) {
    o.table.rows.push_back({tr.times[i], tr.P_a[i], tr.P_b[i], tr.centroid_a[i],
                            tr.centroid_b[i], tr.spread_a[i], tr.spread_b[i]});
  }
  return o;
}

Output scan(const ResolvedConfig& rc, const Options& opt) {
  const auto phi = uniform_phases(rc.run.phi_samples);
  const auto s = scan_phase(rc.sim, phi, rc.run.scan_method, {opt.workers});
  Output o;
  o.table.columns = {{"phi", "rad"}, {"P_b", "1"}};
  for (std::size_t i = 0; i < s.phi.size(); ++i) o.table.rows.push_back({s.phi[i], s.P_b[i]});
  try {
    o.summary["fit"] = fit_json(fit_fringe(s));
  } catch (const FitError& e) {
    o.summary["fit_error"] = e.what();
    o.status = kExitRejected;
  }
  return o;
}

Output sweep(const ResolvedConfig& rc, const Options& opt) {
  const auto dl = rc.run.dl_grid.values();
  SweepOptions so;
  so.rotation_rates = rc.run.rotation_rates;
  so.phi_values = uniform_phases(rc.run.phi_samples);
  so.method = rc.run.scan_method;
  const auto result = sweep_plate_position(rc.sim, dl, so, {opt.workers});

  Output o;
  o.table.columns = {{"dl_over_l", "1"}, {"alpha", "1"}, {"visibility", "1"},
                     {"phi_min", "rad"}, {"eta", "1"}};
  Json flagged = Json::array();
  const SweepRow* best = nullptr;
  for (const auto& row : result.rows) {
    const double nan = std::nan("");
    o.table.rows.push_back({row.value, row.fit ? row.fit->amplitude : nan,
                            row.fit ? row.fit->visibility : nan,
                            row.fit ? or_nan(row.fit->phi_min) : nan,
                            row.area ? row.area->eta : nan});
    if (!row.error.empty()) flagged.push_back({{"dl_over_l", row.value}, {"reason", row.error}});
    if (row.fit && (!best || row.fit->amplitude > best->fit->amplitude)) best = &row;
  }
  if (best) {
    o.summary["alpha_max"] = best->fit->amplitude;
    o.summary["alpha_max_at"] = best->value;
  }
  o.summary["flagged_rows"] = flagged;
  return o;
}

Output area(const ResolvedConfig& rc, const Options& opt) {
  const auto phi = uniform_phases(rc.run.phi_samples);
  const auto est =
      effective_area(rc.sim, rc.run.rotation_rates, phi, rc.run.scan_method, {opt.workers});
  Output o;
  o.table.columns = {{"rate", "rad/s"}, {"dphi", "rad"}, {"phi_min", "rad"}, {"alpha", "1"}};
  for (std::size_t i = 0; i < est.rates.size(); ++i) {
    o.table.rows.push_back(
        {est.rates[i], est.phase_shifts[i], or_nan(est.fits[i].phi_min), est.fits[i].amplitude});
  }
  o.summary["area"] = area_json(est);
  return o;
}

Output bci(const ResolvedConfig& rc, const Options& opt) {
  const auto phi = uniform_phases(rc.run.phi_samples);
  const auto r = run_bci(rc.sim, rc.run.rotation_rates, phi, rc.run.scan_method, {opt.workers});
  Output o;
  o.table.columns = {{"phi", "rad"}, {"P_b", "1"}};
  for (std::size_t i = 0; i < r.scan.phi.size(); ++i) {
    o.table.rows.push_back({r.scan.phi[i], r.scan.P_b[i]});
  }
  o.summary["fit"] = fit_json(r.fit);
  o.summary["area"] = area_json(r.area);
  return o;
}

Output linearity(const ResolvedConfig& rc, const Options& opt) {
  const auto phi = uniform_phases(rc.run.phi_samples);
  const auto r = sagnac_linearity(rc.sim, rc.run.linearity_rates, phi, rc.run.scan_method,
                                  {opt.workers});
  Output o;
  o.table.columns = {{"rate", "rad/s"}, {"dphi", "rad"}, {"deviation", "1"}};
  for (std::size_t i = 0; i < r.rates.size(); ++i) {
    o.table.rows.push_back({r.rates[i], r.phase_shifts[i], r.deviations[i]});
  }
  o.summary["slope"] = r.slope;
  o.summary["fit_slope"] = r.fit_slope;
  o.summary["max_linear_rate"] = r.max_linear_rate;
  o.summary["antisymmetry"] = r.antisymmetry;
  return o;
}

Output oracle(const ResolvedConfig& rc, const Options& opt) {
  SimConfig cfg = rc.sim;
  cfg.momentum.nodes = rc.run.oracle_nodes;
  const auto r = compare_adiabatic(cfg, 20, {opt.workers});
  Output o;
  o.table.columns = {{"max_deviation", "1"}, {"final_deviation", "1"}, {"fidelity", "1"},
                     {"max_P_e", "1"},       {"P_e_bound", "1"},       {"steps_three", "1"}};
  o.table.rows.push_back({r.max_deviation, r.final_deviation, r.fidelity, r.max_intermediate,
                          r.intermediate_bound, static_cast<double>(r.steps_three)});
  const bool ok = r.max_deviation <= 0.02 && r.max_intermediate <= r.intermediate_bound;
  o.summary["deviation_threshold"] = 0.02;
  o.summary["within_thresholds"] = ok;
  if (!ok) o.status = kExitRejected;
  return o;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Raman continuous-interferometer simulator", "raman-ci"};
  app.fallthrough();
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  Options opt;
  app.add_option("--config", opt.config, "key = value configuration file")
      ->check(CLI::ExistingFile);
  app.add_option("--set", opt.overrides, "override one key (key=value); repeatable")
      ->allow_extra_args(false);
  app.add_option("--out", opt.out, "output file (default: standard output)");
  app.add_option("--format", opt.format, "output format")
      ->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--workers", opt.workers, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--record-stride", opt.record_stride, "time steps between trajectory samples")
      ->check(CLI::NonNegativeNumber);

  using Runner = std::function<Output(const ResolvedConfig&, const Options&)>;
  struct Command {
    const char* name;
    const char* help;
    Runner run;
    Profile profile;
  };
  const std::vector<Command> commands = {
      {"simulate", "trajectories of both components", simulate, Profile::single_zone},
      {"scan-phase", "fringe scan over the plate phase", scan, Profile::single_zone},
      {"sweep-plate", "fringe amplitude and area versus plate position", sweep,
       Profile::single_zone},
      {"area", "effective area from a rotation scan", area, Profile::single_zone},
      {"bci", "three-zone reference interferometer", bci, Profile::three_zone},
      {"linearity", "Sagnac phase versus rotation rate", linearity, Profile::single_zone},
      {"oracle-check", "three-level model versus the effective model", oracle,
       Profile::single_zone},
  };
  for (const auto& c : commands) app.add_subcommand(c.name, c.help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  const Command* chosen = nullptr;
  for (const auto& c : commands) {
    if (app.got_subcommand(c.name)) chosen = &c;
  }

  try {
    const std::optional<std::filesystem::path> path =
        opt.config ? std::optional<std::filesystem::path>(*opt.config) : std::nullopt;
    const auto rc = load_config(path, opt.overrides, chosen->profile);
    for (const auto& w : warnings(rc.sim)) err << "warning: " << w << '\n';

    const Output result = chosen->run(rc, opt);

    RunManifest manifest;
    manifest.tool_version = kToolVersion;
    manifest.subcommand = chosen->name;
    if (opt.config) manifest.arguments.insert(manifest.arguments.end(), {"--config", *opt.config});
    for (const auto& s : opt.overrides) manifest.arguments.insert(manifest.arguments.end(), {"--set", s});
    if (std::string(chosen->name) == "simulate") {
      manifest.arguments.insert(manifest.arguments.end(),
                                {"--record-stride", std::to_string(opt.record_stride)});
    }
    manifest.resolved_config = resolved_config_text(rc);
    manifest.config_digest = config_digest(rc);

    const auto format = opt.format == "json" ? OutputFormat::json : OutputFormat::csv;
    if (opt.out) {
      emit_table(result.table, format, manifest, result.summary, std::filesystem::path(*opt.out));
    } else {
      emit_table(result.table, format, manifest, result.summary, out);
    }
    if (result.status != kExitOk) err << "error: result rejected (see summary)\n";
    return result.status;
  } catch (const FitError& e) {
    err << "error: " << e.what() << '\n';
    return kExitRejected;
  } catch (const LinearityError& e) {
    err << "error: " << e.what() << '\n';
    return kExitRejected;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << " [invariant: " << e.invariant() << "]\n";
    return kExitInvalid;
  } catch (const ResolutionError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  }
}

}  // namespace rci
