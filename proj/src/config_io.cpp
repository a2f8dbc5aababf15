#include "rci/config_io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include "rci/errors.hpp"
#include "rci/physics.hpp"

namespace rci {

namespace {

using Raw = std::map<std::string, std::string, std::less<>>;

constexpr std::array kKnownKeys = {
    "mass_kg",          "wavenumber_rad_m",     "detuning_mean_rad_s",  "detuning_mean_hz",
    "raman_detuning_rad_s", "raman_detuning_hz", "detuning1_rad_s",     "detuning1_hz",
    "detuning2_rad_s",  "detuning2_hz",          "rabi1_rad_s",          "rabi1_hz",
    "rabi2_rad_s",      "rabi2_hz",              "laser_phase1_rad",     "laser_phase2_rad",
    "pulse_shape",      "omega0_rad_s",          "omega0_hz",            "omega0_T",
    "pulse_length_m",   "rect_duration_s",       "zones",                "velocity_m_s",
    "packet_width_m",   "width_convention",      "plate_phase_rad",      "plate_offset_m",
    "plate_offset_over_l", "rotation_rad_s",     "p_min_kg_m_s",         "p_max_kg_m_s",
    "p_nodes",          "t_start_s",             "t_end_s",              "time_steps",
    "phi_samples",      "dl_grid",               "rotation_rates_rad_s", "linearity_rates_rad_s",
    "oracle_nodes",     "scan_method",
};

// Stems of unit-carrying keys; an unknown key starting with one of these is a
// unit-suffix mismatch rather than an unknown name.
constexpr std::array kUnitStems = {
    "mass",       "wavenumber",   "detuning_mean", "raman_detuning", "detuning1",
    "detuning2",  "rabi1",        "rabi2",         "laser_phase1",   "laser_phase2",
    "omega0",     "pulse_length", "rect_duration", "velocity",       "packet_width",
    "plate_phase", "plate_offset", "rotation_rates", "linearity_rates", "rotation",
    "p_min",      "p_max",        "t_start",       "t_end",
};

[[noreturn]] void bad(const std::string& invariant, const std::string& message) {
  throw ConfigError(invariant, message);
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

void check_key(const std::string& key) {
  if (std::find(kKnownKeys.begin(), kKnownKeys.end(), key) != kKnownKeys.end()) return;
  for (const char* stem : kUnitStems) {
    const std::string s = std::string(stem) + "_";
    if (key.rfind(s, 0) == 0) {
      std::string allowed;
      for (const char* k : kKnownKeys) {
        if (std::string_view(k).rfind(s, 0) == 0) {
          if (!allowed.empty()) allowed += ", ";
          allowed += k;
        }
      }
      bad("unit suffix", "unit-suffix mismatch for key '" + key + "' (expected one of: " +
                             allowed + ")");
    }
  }
  bad("known key", "unknown configuration key '" + key + "'");
}

void parse_line(std::string_view line, Raw& raw, const std::string& where) {
  if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
  line = trim(line);
  if (line.empty()) return;
  const auto eq = line.find('=');
  if (eq == std::string_view::npos) bad("key = value", "malformed line " + where + ": missing '='");
  const std::string key(trim(line.substr(0, eq)));
  const std::string value(trim(line.substr(eq + 1)));
  if (key.empty()) bad("key = value", "malformed line " + where + ": empty key");
  if (value.empty()) bad("key = value", "empty value for key '" + key + "'");
  check_key(key);
  raw[key] = value;
}

double to_number(std::string_view text, const std::string& key) {
  text = trim(text);
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    bad("numeric value", "key '" + key + "': '" + std::string(text) + "' is not a number");
  }
  return v;
}

int to_int(std::string_view text, const std::string& key) {
  text = trim(text);
  int v = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    bad("integer value", "key '" + key + "': '" + std::string(text) + "' is not an integer");
  }
  return v;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    out.push_back(trim(text.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::vector<double> to_list(std::string_view text, const std::string& key) {
  std::vector<double> out;
  for (auto item : split(text, ',')) out.push_back(to_number(item, key));
  return out;
}

class Reader {
 public:
  explicit Reader(const Raw& raw) : raw_(raw) {}

  std::optional<std::string> text(const char* key) const {
    if (auto it = raw_.find(key); it != raw_.end()) return it->second;
    return std::nullopt;
  }

  std::optional<double> number(const char* key) const {
    if (auto t = text(key)) return to_number(*t, key);
    return std::nullopt;
  }

  /// Angular frequency given as `<stem>_rad_s` or `<stem>_hz`.
  std::optional<double> angular(const std::string& stem) const {
    const auto rad = number((stem + "_rad_s").c_str());
    const auto hz = number((stem + "_hz").c_str());
    if (rad && hz) {
      bad("one unit per quantity", "both " + stem + "_rad_s and " + stem + "_hz given");
    }
    if (hz) return kTwoPi * *hz;
    return rad;
  }

  std::optional<int> integer(const char* key) const {
    if (auto t = text(key)) return to_int(*t, key);
    return std::nullopt;
  }

 private:
  const Raw& raw_;
};

void require_positive(std::optional<double> v, const std::string& name) {
  if (v && !(*v > 0.0 && std::isfinite(*v))) {
    bad(name + " > 0", "invalid configuration: " + name + " must be positive (requires " + name +
                           " > 0)");
  }
}

std::vector<Zone> parse_zones(std::string_view text) {
  std::vector<Zone> zones;
  for (auto item : split(text, ',')) {
    const auto parts = split(item, ':');
    if (parts.size() != 3) bad("zone area:center:width", "zones entry '" + std::string(item) +
                                                             "' is not area:center:width");
    zones.push_back({to_number(parts[0], "zones"), to_number(parts[1], "zones"),
                     to_number(parts[2], "zones")});
  }
  return zones;
}

ResolvedConfig resolve(const Raw& raw, Profile profile) {
  const Reader in(raw);
  ResolvedConfig out;
  SimConfig& cfg = out.sim;
  const bool three_zone = profile == Profile::three_zone;

  cfg.atom.mass = in.number("mass_kg").value_or(1.41e-25);
  require_positive(cfg.atom.mass, "mass");
  cfg.laser.wavenumber = in.number("wavenumber_rad_m").value_or(8.0556e6);
  require_positive(cfg.laser.wavenumber, "wavenumber");
  const double k = cfg.laser.wavenumber;

  const auto omega0 = in.angular("omega0");
  require_positive(omega0, "omega0");
  const double peak = omega0.value_or(kTwoPi * 7e4);
  const double length = in.number("pulse_length_m").value_or(3e-3);
  require_positive(length, "pulse_length");
  const double omega0_T = in.number("omega0_T").value_or(3.3);
  require_positive(omega0_T, "omega0_T");
  cfg.velocity = in.number("velocity_m_s").value_or(length * peak / omega0_T);
  require_positive(cfg.velocity, "velocity");

  const std::string shape = in.text("pulse_shape").value_or(three_zone ? "sequence" : "gaussian");
  double reference = length;
  if (shape == "gaussian") {
    cfg.pulse = GaussianPulse{length, peak};
  } else if (shape == "rect") {
    const double duration = in.number("rect_duration_s").value_or(std::numbers::pi / peak);
    require_positive(duration, "rect_duration");
    cfg.pulse = RectPulse{duration, peak};
  } else if (shape == "sequence") {
    ZoneSequence seq;
    if (auto z = in.text("zones")) {
      seq.zones = parse_zones(*z);
    } else {
      const double pi = std::numbers::pi;
      const double w = length / 1000.0;
      seq.zones = {{0.5 * pi, -length, w}, {pi, 0.0, w}, {0.5 * pi, length, w}};
    }
    cfg.pulse = seq;
  } else {
    bad("pulse_shape in {gaussian, rect, sequence}", "unknown pulse_shape '" + shape + "'");
  }
  if (!std::holds_alternative<GaussianPulse>(cfg.pulse)) reference = reference_length(cfg);

  cfg.packet_width = in.number("packet_width_m").value_or((three_zone ? 100.0 : 1.0) / k);
  require_positive(cfg.packet_width, "packet_width");
  const std::string convention = in.text("width_convention").value_or("amplitude");
  if (convention == "amplitude") {
    cfg.width_convention = WidthConvention::amplitude;
  } else if (convention == "intensity") {
    cfg.width_convention = WidthConvention::intensity;
  } else {
    bad("width_convention in {amplitude, intensity}",
        "unknown width_convention '" + convention + "'");
  }

  const auto d1 = in.angular("detuning1");
  const auto d2 = in.angular("detuning2");
  if (d1.has_value() != d2.has_value()) {
    bad("detuning1 and detuning2 together", "detuning1 and detuning2 must be given together");
  }
  if (d1) {
    if (in.angular("detuning_mean") || in.angular("raman_detuning")) {
      bad("explicit or derived detunings", "detuning1/2 conflict with detuning_mean/raman_detuning");
    }
    cfg.laser.detuning1 = *d1;
    cfg.laser.detuning2 = *d2;
  } else {
    set_detunings_for_center(cfg, in.angular("detuning_mean").value_or(kTwoPi * 1.5e9),
                             in.angular("raman_detuning").value_or(0.0));
  }
  if (cfg.laser.detuning1 + cfg.laser.detuning2 == 0.0) {
    bad("delta1 + delta2 != 0", "invalid configuration: single-photon detunings sum to zero");
  }

  const auto r1 = in.angular("rabi1");
  const auto r2 = in.angular("rabi2");
  if (r1.has_value() != r2.has_value()) {
    bad("rabi1 and rabi2 together", "rabi1 and rabi2 must be given together");
  }
  if (r1) {
    cfg.laser.rabi1 = *r1;
    cfg.laser.rabi2 = *r2;
  } else {
    set_symmetric_rabi(cfg);
  }
  cfg.laser.phase1 = in.number("laser_phase1_rad").value_or(0.0);
  cfg.laser.phase2 = in.number("laser_phase2_rad").value_or(0.0);

  cfg.plate.phase = in.number("plate_phase_rad").value_or(0.0);
  {
    const auto abs_offset = in.number("plate_offset_m");
    const auto rel_offset = in.number("plate_offset_over_l");
    if (abs_offset && rel_offset) {
      bad("one plate offset", "both plate_offset_m and plate_offset_over_l given");
    }
    if (abs_offset) {
      cfg.plate.offset = *abs_offset;
    } else {
      cfg.plate.offset = rel_offset.value_or(three_zone ? 0.5 : 0.48) * reference;
    }
  }
  cfg.rotation.rate = in.number("rotation_rad_s").value_or(0.0);

  set_default_momentum_grid(cfg, in.integer("p_nodes").value_or(three_zone ? 64 : 1024));
  cfg.momentum.p_min = in.number("p_min_kg_m_s").value_or(cfg.momentum.p_min);
  cfg.momentum.p_max = in.number("p_max_kg_m_s").value_or(cfg.momentum.p_max);

  set_default_time_grid(cfg, 20000);
  cfg.time.t_start = in.number("t_start_s").value_or(cfg.time.t_start);
  cfg.time.t_end = in.number("t_end_s").value_or(cfg.time.t_end);
  int default_steps = 20000;
  if (std::holds_alternative<ZoneSequence>(cfg.pulse)) {
    const double window = cfg.time.t_end - cfg.time.t_start;
    const double needed = std::ceil(window * peak_rabi(cfg) / 0.05);
    if (std::isfinite(needed) && needed > default_steps) default_steps = static_cast<int>(needed);
  }
  cfg.time.steps = in.integer("time_steps").value_or(default_steps);

  RunOptions& run = out.run;
  run.phi_samples = in.integer("phi_samples").value_or(run.phi_samples);
  if (run.phi_samples < 8) bad("phi_samples >= 8", "phi_samples must be at least 8");
  if (auto g = in.text("dl_grid")) run.dl_grid = parse_grid(*g);
  if (auto r = in.text("rotation_rates_rad_s")) run.rotation_rates = to_list(*r, "rotation_rates_rad_s");
  if (auto r = in.text("linearity_rates_rad_s")) {
    run.linearity_rates = to_list(*r, "linearity_rates_rad_s");
  }
  run.oracle_nodes = in.integer("oracle_nodes").value_or(run.oracle_nodes);
  if (run.oracle_nodes < 2 || run.oracle_nodes % 2 != 0) {
    bad("oracle_nodes >= 2 and even", "oracle_nodes must be even and at least 2");
  }
  const std::string method = in.text("scan_method").value_or("factorized");
  if (method == "factorized") {
    run.scan_method = ScanMethod::factorized;
  } else if (method == "direct") {
    run.scan_method = ScanMethod::direct;
  } else {
    bad("scan_method in {factorized, direct}", "unknown scan_method '" + method + "'");
  }

  validate(cfg);
  return out;
}

std::string join(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ",";
    out += format_number(values[i]);
  }
  return out;
}

void physics_text(const SimConfig& cfg, std::ostream& os) {
  auto kv = [&](const char* key, const std::string& value) { os << key << " = " << value << '\n'; };
  auto num = [&](const char* key, double v) { kv(key, format_number(v)); };
  num("mass_kg", cfg.atom.mass);
  num("wavenumber_rad_m", cfg.laser.wavenumber);
  num("detuning1_rad_s", cfg.laser.detuning1);
  num("detuning2_rad_s", cfg.laser.detuning2);
  num("rabi1_rad_s", cfg.laser.rabi1);
  num("rabi2_rad_s", cfg.laser.rabi2);
  num("laser_phase1_rad", cfg.laser.phase1);
  num("laser_phase2_rad", cfg.laser.phase2);
  if (const auto* g = std::get_if<GaussianPulse>(&cfg.pulse)) {
    kv("pulse_shape", "gaussian");
    num("omega0_rad_s", g->peak_rabi);
    num("pulse_length_m", g->length);
  } else if (const auto* r = std::get_if<RectPulse>(&cfg.pulse)) {
    kv("pulse_shape", "rect");
    num("omega0_rad_s", r->rabi);
    num("rect_duration_s", r->duration);
  } else {
    const auto& s = std::get<ZoneSequence>(cfg.pulse);
    kv("pulse_shape", "sequence");
    std::string zones;
    for (std::size_t i = 0; i < s.zones.size(); ++i) {
      if (i) zones += ",";
      zones += format_number(s.zones[i].area) + ":" + format_number(s.zones[i].center) + ":" +
               format_number(s.zones[i].width);
    }
    kv("zones", zones);
  }
  num("velocity_m_s", cfg.velocity);
  num("packet_width_m", cfg.packet_width);
  kv("width_convention",
     cfg.width_convention == WidthConvention::amplitude ? "amplitude" : "intensity");
  num("plate_phase_rad", cfg.plate.phase);
  num("plate_offset_m", cfg.plate.offset);
  num("rotation_rad_s", cfg.rotation.rate);
  num("p_min_kg_m_s", cfg.momentum.p_min);
  num("p_max_kg_m_s", cfg.momentum.p_max);
  kv("p_nodes", std::to_string(cfg.momentum.nodes));
  num("t_start_s", cfg.time.t_start);
  num("t_end_s", cfg.time.t_end);
  kv("time_steps", std::to_string(cfg.time.steps));
}

std::string fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << h;
  return os.str();
}

nlohmann::ordered_json json_number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

}  // namespace

std::vector<double> GridSpec::values() const {
  std::vector<double> out;
  if (count == 1) {
    out.push_back(start);
    return out;
  }
  for (int i = 0; i < count; ++i) {
    out.push_back(i + 1 == count ? stop : start + (stop - start) * i / (count - 1));
  }
  return out;
}

GridSpec parse_grid(std::string_view text) {
  const auto parts = split(text, ':');
  if (parts.size() != 3) {
    bad("grid start:stop:count", "grid '" + std::string(text) + "' is not start:stop:count");
  }
  GridSpec g{to_number(parts[0], "grid"), to_number(parts[1], "grid"), to_int(parts[2], "grid")};
  if (g.count < 1) bad("grid count >= 1", "grid count must be at least 1");
  if (g.count > 1 && !(g.stop > g.start)) bad("grid start < stop", "grid must increase");
  return g;
}

std::string format_number(double v) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc()) return "nan";
  return std::string(buf.data(), ptr);
}

ResolvedConfig parse_config(std::string_view text, std::span<const std::string> overrides,
                            Profile profile) {
  Raw raw;
  int line_no = 0;
  for (auto line : split(text, '\n')) {
    ++line_no;
    parse_line(line, raw, std::to_string(line_no));
  }
  for (const auto& o : overrides) {
    if (o.find('=') == std::string::npos) bad("key=value", "override '" + o + "' needs key=value");
    parse_line(o, raw, "'" + o + "'");
  }
  return resolve(raw, profile);
}

ResolvedConfig load_config(const std::optional<std::filesystem::path>& path,
                           std::span<const std::string> overrides, Profile profile) {
  std::string text;
  if (path) {
    std::ifstream in(*path, std::ios::binary);
    if (!in) bad("config file readable", "cannot read config file '" + path->string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  return parse_config(text, overrides, profile);
}

std::string resolved_config_text(const ResolvedConfig& cfg) {
  std::ostringstream os;
  physics_text(cfg.sim, os);
  const auto& r = cfg.run;
  os << "phi_samples = " << r.phi_samples << '\n';
  os << "dl_grid = " << format_number(r.dl_grid.start) << ':' << format_number(r.dl_grid.stop)
     << ':' << r.dl_grid.count << '\n';
  os << "rotation_rates_rad_s = " << join(r.rotation_rates) << '\n';
  os << "linearity_rates_rad_s = " << join(r.linearity_rates) << '\n';
  os << "oracle_nodes = " << r.oracle_nodes << '\n';
  os << "scan_method = " << (r.scan_method == ScanMethod::direct ? "direct" : "factorized")
     << '\n';
  return os.str();
}

std::string config_digest(const ResolvedConfig& cfg) { return fnv1a(resolved_config_text(cfg)); }

std::string config_digest(const SimConfig& cfg) {
  std::ostringstream os;
  physics_text(cfg, os);
  return fnv1a(os.str());
}

nlohmann::ordered_json RunManifest::to_json() const {
  nlohmann::ordered_json j;
  j["tool_version"] = tool_version;
  j["subcommand"] = subcommand;
  j["arguments"] = arguments;
  j["config_digest"] = config_digest;
  nlohmann::ordered_json resolved = nlohmann::ordered_json::object();
  for (auto line : split(resolved_config, '\n')) {
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) continue;
    resolved[std::string(trim(line.substr(0, eq)))] = std::string(trim(line.substr(eq + 1)));
  }
  j["resolved_config"] = resolved;
  if (timestamp) j["timestamp"] = *timestamp;
  return j;
}

void emit_table(const OutputTable& table, OutputFormat format, const RunManifest& manifest,
                const nlohmann::ordered_json& summary, std::ostream& out) {
  if (format == OutputFormat::json) {
    nlohmann::ordered_json doc;
    doc["manifest"] = manifest.to_json();
    doc["summary"] = summary.is_null() ? nlohmann::ordered_json::object() : summary;
    auto cols = nlohmann::ordered_json::array();
    for (const auto& c : table.columns) cols.push_back({{"name", c.name}, {"unit", c.unit}});
    doc["columns"] = cols;
    auto rows = nlohmann::ordered_json::array();
    for (const auto& row : table.rows) {
      auto r = nlohmann::ordered_json::array();
      for (double v : row) r.push_back(json_number(v));
      rows.push_back(r);
    }
    doc["rows"] = rows;
    out << doc.dump(2) << '\n';
    return;
  }

  out << "# config_digest=" << manifest.config_digest << '\n';
  out << "# tool=" << manifest.tool_version << " subcommand=" << manifest.subcommand << '\n';
  if (manifest.timestamp) out << "# timestamp=" << *manifest.timestamp << '\n';
  if (summary.is_object()) {
    for (const auto& [key, value] : summary.items()) {
      out << "# " << key << '=';
      if (value.is_number_float()) {
        out << format_number(value.get<double>());
      } else if (value.is_string()) {
        out << value.get<std::string>();
      } else {
        out << value.dump();
      }
      out << '\n';
    }
  }
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    if (i) out << ',';
    out << table.columns[i].name << '[' << table.columns[i].unit << ']';
  }
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      out << (std::isfinite(row[i]) ? format_number(row[i]) : std::string("nan"));
    }
    out << '\n';
  }
}

void emit_table(const OutputTable& table, OutputFormat format, const RunManifest& manifest,
                const nlohmann::ordered_json& summary, const std::filesystem::path& destination) {
  std::ofstream out(destination, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write output file '" + destination.string() + "'");
  emit_table(table, format, manifest, summary, out);
  out.flush();
  if (!out) throw std::runtime_error("failed writing output file '" + destination.string() + "'");
}

}  // namespace rci
