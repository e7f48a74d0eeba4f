#include "qbm/scenario.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace qbm {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& key, const std::string& msg) {
  throw Error(ErrorCode::Config, key + ": " + msg);
}

double number(const json& v, const std::string& key) {
  if (!v.is_number()) bad(key, "expected a number");
  return v.get<double>();
}

int integer(const json& v, const std::string& key) {
  if (!v.is_number_integer()) bad(key, "expected an integer");
  return v.get<int>();
}

bool boolean(const json& v, const std::string& key) {
  if (!v.is_boolean()) bad(key, "expected true or false");
  return v.get<bool>();
}

std::string text(const json& v, const std::string& key) {
  if (!v.is_string()) bad(key, "expected a string");
  return v.get<std::string>();
}

std::vector<double> numbers(const json& v, const std::string& key) {
  if (!v.is_array()) bad(key, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], key + "[" + std::to_string(i) + "]"));
  return out;
}

std::string upper(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

// Calls f(name, value, dotted key) for each member; f returns false for unknown names.
template <class F>
void members(const json& obj, const std::string& prefix, F f) {
  if (!obj.is_object()) bad(prefix.empty() ? "config" : prefix, "expected an object");
  for (const auto& [k, v] : obj.items()) {
    std::string key = prefix.empty() ? k : prefix + "." + k;
    if (!f(k, v, key)) bad(key, "unknown key");
  }
}

bool finite_nonneg(double x) { return std::isfinite(x) && x >= 0; }

json optional_number(const std::optional<double>& x) {
  if (!x) return nullptr;
  return *x;
}

std::vector<double> steps(double first, double step, int n) {
  std::vector<double> v;
  for (int i = 0; i < n; ++i) v.push_back(first + step * i);
  return v;
}

}  // namespace

void ScenarioConfig::validate() const {
  if (!finite_nonneg(xi)) bad("xi", "must be >= 0");
  if (!finite_nonneg(bath.gamma)) bad("bath.gamma", "must be >= 0");
  if (!(std::isfinite(bath.cutoff) && bath.cutoff > 0)) bad("bath.Gamma", "must be > 0");
  if (!finite_nonneg(bath.temperature)) bad("bath.T", "must be >= 0");
  if (relative_rate && !finite_nonneg(*relative_rate)) bad("dynamics.relative_rate", "must be >= 0");
  if (!(std::isfinite(t_max) && t_max > 0)) bad("time.t_max", "must be > 0");
  if (n_points < 2) bad("time.n_points", "must be >= 2");
  quad.validate();
  dynamics.validate();
  if (scan_gamma.empty()) bad("scan.gamma", "must not be empty");
  if (scan_cutoff.empty()) bad("scan.Gamma", "must not be empty");
  if (!(std::isfinite(profile_T_min) && profile_T_min > 0)) bad("profile.T_min", "must be > 0");
  if (!(std::isfinite(profile_T_max) && profile_T_max > profile_T_min)) bad("profile.T_max", "must exceed profile.T_min");
  if (profile_points < 2) bad("profile.n_points", "must be >= 2");
}

ChannelModel ScenarioConfig::channel() const {
  ChannelModel m;
  m.kind = model;
  m.bath = bath;
  if (relative_rate) {
    m.relative_rate_source = RelativeRateSource::Explicit;
    m.explicit_relative_rate = *relative_rate;
  }
  return m;
}

std::vector<double> ScenarioConfig::time_grid() const {
  return grid == GridKind::Linear ? linear_grid(t_max, n_points) : log_grid(t_max, n_points);
}

std::vector<double> ScenarioConfig::profile_grid() const {
  std::vector<double> g;
  double lo = std::log(profile_T_min), hi = std::log(profile_T_max);
  for (int i = 0; i < profile_points; ++i) g.push_back(std::exp(lo + (hi - lo) * i / (profile_points - 1)));
  g.front() = profile_T_min;
  g.back() = profile_T_max;
  return g;
}

std::vector<std::string> preset_names() { return {"fig1", "fig2", "fig3", "fig4", "fig5", "fig6"}; }

ScenarioConfig preset(std::string_view name) {
  ScenarioConfig c;
  c.model = ChannelKind::CommonModified;
  c.xi = 1;
  c.bath.gamma = 0.2;
  c.bath.cutoff = 10;
  c.bath.temperature = 3.5;
  c.t_max = 400;
  c.n_points = 4001;
  if (name == "fig1") return c;
  if (name == "fig2") {
    c.bath.cutoff = 1;
    c.t_max = 800;
    c.n_points = 8001;
    return c;
  }
  if (name == "fig3" || name == "fig4") {
    c.bath.gamma = name == "fig3" ? 1.5 : 2.0;
    c.bath.temperature = 1e-3;
    c.t_max = 40;
    c.n_points = 4001;
    return c;
  }
  if (name == "fig5") {
    c.bath.gamma = 2;
    c.bath.temperature = 0.25;
    c.profile_T_min = 0.02;
    c.profile_T_max = 2;
    c.profile_points = 60;
    return c;
  }
  if (name == "fig6") {
    c.bath.gamma = 2;
    c.bath.temperature = 0.25;
    c.scan_gamma = steps(0.25, 0.25, 16);
    c.scan_cutoff = steps(1, 1, 20);
    return c;
  }
  bad("preset", "unknown preset '" + std::string(name) + "'");
}

ScenarioConfig apply_json(const ScenarioConfig& base, const json& j) {
  if (!j.is_object()) bad("config", "expected an object");
  ScenarioConfig c = base;
  if (j.contains("preset")) c = preset(text(j["preset"], "preset"));

  members(j, "", [&](const std::string& k, const json& v, const std::string& key) {
    if (k == "preset") return true;
    if (k == "model") c.model = parse_channel_kind(text(v, key));
    else if (k == "xi") c.xi = number(v, key);
    else if (k == "bath")
      members(v, key, [&](const std::string& k2, const json& v2, const std::string& key2) {
        if (k2 == "gamma") c.bath.gamma = number(v2, key2);
        else if (k2 == "Gamma") c.bath.cutoff = number(v2, key2);
        else if (k2 == "T") c.bath.temperature = number(v2, key2);
        else return false;
        return true;
      });
    else if (k == "time")
      members(v, key, [&](const std::string& k2, const json& v2, const std::string& key2) {
        if (k2 == "t_max") c.t_max = number(v2, key2);
        else if (k2 == "n_points") c.n_points = integer(v2, key2);
        else if (k2 == "grid") {
          auto g = upper(text(v2, key2));
          if (g == "LINEAR") c.grid = GridKind::Linear;
          else if (g == "LOG") c.grid = GridKind::Log;
          else bad(key2, "expected LINEAR or LOG");
        } else return false;
        return true;
      });
    else if (k == "quad")
      members(v, key, [&](const std::string& k2, const json& v2, const std::string& key2) {
        if (k2 == "abs_tol") c.quad.abs_tol = number(v2, key2);
        else if (k2 == "rel_tol") c.quad.rel_tol = number(v2, key2);
        else if (k2 == "max_subdivisions") c.quad.max_subdivisions = integer(v2, key2);
        else if (k2 == "omega_max_factor") c.quad.omega_max_factor = number(v2, key2);
        else return false;
        return true;
      });
    else if (k == "dynamics")
      members(v, key, [&](const std::string& k2, const json& v2, const std::string& key2) {
        if (k2 == "compensate_shift") c.dynamics.compensate_shift = boolean(v2, key2);
        else if (k2 == "rel_eq_factor") c.dynamics.rel_eq_factor = number(v2, key2);
        else if (k2 == "exact_coefficients") c.dynamics.exact_coefficients = boolean(v2, key2);
        else if (k2 == "relative_rate") {
          if (v2.is_string() && upper(v2.get<std::string>()) == "STATIONARY") c.relative_rate.reset();
          else c.relative_rate = number(v2, key2);
        } else return false;
        return true;
      });
    else if (k == "output")
      members(v, key, [&](const std::string& k2, const json& v2, const std::string& key2) {
        if (k2 == "path") c.output_path = text(v2, key2);
        else if (k2 == "format") {
          auto f = upper(text(v2, key2));
          if (f == "CSV") c.format = OutputFormat::Csv;
          else if (f == "JSON") c.format = OutputFormat::Json;
          else bad(key2, "expected CSV or JSON");
        } else return false;
        return true;
      });
    else if (k == "scan")
      members(v, key, [&](const std::string& k2, const json& v2, const std::string& key2) {
        if (k2 == "gamma") c.scan_gamma = numbers(v2, key2);
        else if (k2 == "Gamma") c.scan_cutoff = numbers(v2, key2);
        else if (k2 == "threads") {
          int n = integer(v2, key2);
          if (n < 0) bad(key2, "must be >= 0");
          c.threads = static_cast<unsigned>(n);
        } else return false;
        return true;
      });
    else if (k == "profile")
      members(v, key, [&](const std::string& k2, const json& v2, const std::string& key2) {
        if (k2 == "T_min") c.profile_T_min = number(v2, key2);
        else if (k2 == "T_max") c.profile_T_max = number(v2, key2);
        else if (k2 == "n_points") c.profile_points = integer(v2, key2);
        else return false;
        return true;
      });
    else return false;
    return true;
  });
  return c;
}

ScenarioConfig load_config(const std::string& path, const ScenarioConfig& base) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot read config '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    bad("config", std::string("malformed JSON: ") + e.what());
  }
  return apply_json(base, j);
}

json to_json(const ScenarioConfig& c) {
  json j;
  j["model"] = to_string(c.model);
  j["xi"] = c.xi;
  j["bath"] = {{"gamma", c.bath.gamma}, {"Gamma", c.bath.cutoff}, {"T", c.bath.temperature}};
  j["time"] = {{"t_max", c.t_max}, {"n_points", c.n_points}, {"grid", c.grid == GridKind::Linear ? "LINEAR" : "LOG"}};
  j["quad"] = {{"abs_tol", c.quad.abs_tol},
               {"rel_tol", c.quad.rel_tol},
               {"max_subdivisions", c.quad.max_subdivisions},
               {"omega_max_factor", c.quad.omega_max_factor}};
  j["dynamics"] = {{"compensate_shift", c.dynamics.compensate_shift},
                   {"rel_eq_factor", c.dynamics.rel_eq_factor},
                   {"exact_coefficients", c.dynamics.exact_coefficients}};
  if (c.relative_rate) j["dynamics"]["relative_rate"] = *c.relative_rate;
  else j["dynamics"]["relative_rate"] = "stationary";
  j["output"] = {{"path", c.output_path}, {"format", c.format == OutputFormat::Csv ? "CSV" : "JSON"}};
  j["scan"] = {{"gamma", c.scan_gamma}, {"Gamma", c.scan_cutoff}, {"threads", c.threads}};
  j["profile"] = {{"T_min", c.profile_T_min}, {"T_max", c.profile_T_max}, {"n_points", c.profile_points}};
  return j;
}

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::Config:
    case ErrorCode::InvalidArgument:
    case ErrorCode::ZeroParameter:
    case ErrorCode::UnphysicalInitial:
      return 2;
    case ErrorCode::Io:
      return 4;
    default:
      return 3;
  }
}

EvolveOutcome run_evolve(const ScenarioConfig& cfg) {
  cfg.validate();
  auto grid = cfg.time_grid();
  EvolveOutcome out;
  out.trajectory = evolve(cfg.channel(), squeezed_initial_state(cfg.xi), grid, cfg.quad, cfg.dynamics);
  TimeScaleOptions o;
  o.require_stationary = false;
  out.scales = detect_time_scales(out.trajectory, o);
  const auto& ts = out.scales;

  json s;
  s["model"] = to_string(cfg.model);
  s["xi"] = cfg.xi;
  s["gamma"] = cfg.bath.gamma;
  s["Gamma"] = cfg.bath.cutoff;
  s["T"] = cfg.bath.temperature;
  s["tau_s"] = optional_number(ts.tau_s);
  s["tau_e"] = optional_number(ts.tau_e);
  s["revival_intervals"] = json::array();
  for (const auto& [a, b] : ts.revival_intervals) s["revival_intervals"].push_back({a, b});
  s["stationary"] = ts.stationary;
  s["tail_drift"] = ts.tail_drift;
  s["end_time"] = ts.end_time;
  std::size_t last = 0;
  while (last + 1 < out.trajectory.times.size() && out.trajectory.times[last + 1] <= ts.end_time) ++last;
  s["EN_inf"] = ts.stationary ? json(out.trajectory.diagnostics[last].EN) : json(nullptr);
  if (cfg.model == ChannelKind::CommonModified && cfg.bath.gamma > 0) {
    try {
      s["EN_inf_stationary"] = run_stationary(cfg).e_n_inf;
    } catch (const Error& e) {
      s["EN_inf_stationary"] = nullptr;
    }
  }
  s["warnings"] = json::array();
  for (const auto& w : out.trajectory.warnings) s["warnings"].push_back({{"t", w.t}, {"nu_minus", w.nu_minus}});
  out.summary = std::move(s);
  return out;
}

json markovian_json(double xi, double gamma, double T) {
  if (!finite_nonneg(xi)) bad("xi", "must be >= 0");
  if (!(std::isfinite(gamma) && gamma > 0)) bad("bath.gamma", "must be > 0");
  if (!finite_nonneg(T)) bad("bath.T", "must be >= 0");
  auto m = markovian_times(xi, gamma, T);
  json j;
  j["tau1"] = std::isinf(m.tau1) ? json("inf") : json(m.tau1);
  j["tau2"] = m.tau2 ? json(*m.tau2) : json("undefined");
  j["xi_c"] = m.xi_c;
  return j;
}

StationaryReport run_stationary(const ScenarioConfig& cfg) {
  cfg.validate();
  if (!(cfg.bath.gamma > 0)) bad("bath.gamma", "must be > 0 for a stationary state");
  return stationary_report(cfg.bath.with_mass(2 * cfg.bath.mass), cfg.quad);
}

json stationary_json(const ScenarioConfig& cfg, const StationaryReport& r) {
  return {{"gamma", cfg.bath.gamma},
          {"Gamma", cfg.bath.cutoff},
          {"T", cfg.bath.temperature},
          {"r2", r.r2},
          {"p2R", r.p2_R},
          {"px2eq", r.px2_eq},
          {"x2eq", r.x2_eq},
          {"ERx", r.e_rx},
          {"ENinf", r.e_n_inf},
          {"Sinf", r.simon_S},
          {"I", r.mutual_information},
          {"entropy", r.entropy},
          {"integral_lhs", r.integral_lhs},
          {"moment_lhs", r.moment_lhs},
          {"entangled", r.entangled}};
}

ScanOutcome run_scan(const ScenarioConfig& cfg, const CsvTable* previous) {
  cfg.validate();
  const auto header = scan_csv_header();
  std::map<std::vector<std::string>, const std::vector<std::string>*> done;
  if (previous && !previous->header.empty()) {
    if (previous->header != header) bad("output.path", "existing file is not a scan table");
    for (const auto& row : previous->rows)
      if (row.back() != "error") done[{row[0], row[1], row[2]}] = &row;
  }

  ScanOutcome out;
  std::vector<std::size_t> slot;
  const double T = cfg.bath.temperature;
  for (double g : cfg.scan_gamma)
    for (double G : cfg.scan_cutoff) {
      std::vector<std::string> key{format_double(g), format_double(G), format_double(T)};
      if (auto it = done.find(key); it != done.end()) {
        out.rows.push_back(*it->second);
        ++out.reused;
        continue;
      }
      slot.push_back(out.rows.size());
      out.rows.emplace_back();
      out.computed.push_back({g, G, T, std::nullopt, {}});
    }
  evaluate_cells(out.computed, cfg.quad, cfg.threads);
  for (std::size_t i = 0; i < slot.size(); ++i) {
    out.rows[slot[i]] = scan_csv_row(out.computed[i]);
    if (!out.computed[i].report) ++out.failed;
  }
  return out;
}

}  // namespace qbm
