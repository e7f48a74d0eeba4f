#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "qbm/scenario.hpp"

using namespace qbm;

namespace {

struct Overrides {
  std::string config, preset_name, model, out, format;
  std::optional<double> gamma, cutoff, temp, xi;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "JSON scenario file");
  cmd->add_option("--preset", o.preset_name, "fig1 .. fig6");
  cmd->add_option("--gamma", o.gamma, "coupling strength");
  cmd->add_option("--Gamma", o.cutoff, "Drude cutoff");
  cmd->add_option("--temp", o.temp, "bath temperature");
  cmd->add_option("--xi", o.xi, "initial squeezing");
  cmd->add_option("--model", o.model, "TWO_RESERVOIR, COMMON_MODIFIED, COMMON_UNDAMPED_REL, MARKOVIAN_REFERENCE");
  cmd->add_option("--out", o.out, "output file (default: standard output)");
  cmd->add_option("--format", o.format, "CSV or JSON");
}

ScenarioConfig resolve(const Overrides& o) {
  ScenarioConfig c = o.preset_name.empty() ? ScenarioConfig{} : preset(o.preset_name);
  if (!o.config.empty()) c = load_config(o.config, c);
  nlohmann::json j = nlohmann::json::object();
  if (o.gamma) j["bath"]["gamma"] = *o.gamma;
  if (o.cutoff) j["bath"]["Gamma"] = *o.cutoff;
  if (o.temp) j["bath"]["T"] = *o.temp;
  if (o.xi) j["xi"] = *o.xi;
  if (!o.model.empty()) j["model"] = o.model;
  if (!o.out.empty()) j["output"]["path"] = o.out;
  if (!o.format.empty()) j["output"]["format"] = o.format;
  c = apply_json(c, j);
  c.validate();
  return c;
}

// Callers format everything first, so a failing run leaves no partial file.
void emit(const ScenarioConfig& c, const std::string& data) {
  if (c.output_path.empty()) {
    std::cout << data << std::flush;
    return;
  }
  std::ofstream f(c.output_path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorCode::Io, "output.path: cannot open '" + c.output_path + "' for writing");
  f << data;
  f.flush();
  if (!f) throw Error(ErrorCode::Io, "output.path: write to '" + c.output_path + "' failed");
}

std::string csv_text(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
  std::ostringstream s;
  write_csv_row(s, header);
  for (const auto& r : rows) write_csv_row(s, r);
  return s.str();
}

nlohmann::json table_json(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
  auto cols = nlohmann::json::object();
  for (std::size_t k = 0; k < header.size(); ++k) {
    auto col = nlohmann::json::array();
    for (const auto& r : rows) {
      const auto& f = r[k];
      if (f == "true" || f == "false") col.push_back(f == "true");
      else if (f == "error") col.push_back(f);
      else {
        double v = parse_double(f);
        col.push_back(std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(f));
      }
    }
    cols[header[k]] = std::move(col);
  }
  return cols;
}

int cmd_evolve(const ScenarioConfig& c) {
  auto r = run_evolve(c);
  std::ostringstream csv;
  write_trajectory_csv(csv, r.trajectory);
  if (c.format == OutputFormat::Json) {
    std::istringstream in(csv.str());
    auto t = read_csv(in);
    nlohmann::json j{{"summary", r.summary}, {"trajectory", table_json(t.header, t.rows)}};
    emit(c, j.dump(2) + "\n");
    return 0;
  }
  emit(c, csv.str());
  // The summary goes to standard output unless the trajectory already occupies it.
  (c.output_path.empty() ? std::cerr : std::cout) << r.summary.dump(2) << std::endl;
  if (!r.scales.stationary)
    std::cerr << "qbm: warning: trajectory not stationary at t = " << format_double(r.scales.end_time) << "\n";
  return 0;
}

int cmd_markovian(const ScenarioConfig& c) {
  emit(c, markovian_json(c.xi, c.bath.gamma, c.bath.temperature).dump(2) + "\n");
  return 0;
}

int cmd_stationary(const ScenarioConfig& c) {
  auto r = run_stationary(c);
  if (c.format == OutputFormat::Json) {
    emit(c, stationary_json(c, r).dump(2) + "\n");
  } else {
    ScanCell cell{c.bath.gamma, c.bath.cutoff, c.bath.temperature, r, {}};
    emit(c, csv_text(scan_csv_header(), {scan_csv_row(cell)}));
  }
  return 0;
}

int cmd_critical(const ScenarioConfig& c) {
  auto tc = critical_temperature(c.bath.gamma, c.bath.cutoff, c.quad);
  std::string value = tc ? format_double(*tc) : "none";
  if (c.format == OutputFormat::Json) {
    nlohmann::json j{{"gamma", c.bath.gamma}, {"Gamma", c.bath.cutoff}};
    j["T_c"] = tc ? nlohmann::json(*tc) : nlohmann::json("none");
    emit(c, j.dump(2) + "\n");
  } else {
    emit(c, value + "\n");
  }
  return 0;
}

int cmd_scan(const ScenarioConfig& c, bool resume) {
  std::optional<CsvTable> previous;
  if (resume) {
    if (c.output_path.empty()) throw Error(ErrorCode::Config, "output.path: --resume needs an output file");
    std::ifstream in(c.output_path);
    if (in) {
      try {
        previous = read_csv(in);
      } catch (const Error& e) {
        throw Error(ErrorCode::Io, "output.path: unreadable scan table: " + std::string(e.what()));
      }
    }
  }
  auto r = run_scan(c, previous ? &*previous : nullptr);
  if (c.format == OutputFormat::Json) emit(c, table_json(scan_csv_header(), r.rows).dump(2) + "\n");
  else emit(c, csv_text(scan_csv_header(), r.rows));
  std::cerr << "qbm: scan " << r.rows.size() << " cells, " << r.reused << " reused, " << r.failed << " failed\n";
  for (const auto& cell : r.computed)
    if (!cell.report)
      std::cerr << "qbm: cell gamma=" << format_double(cell.gamma) << " Gamma=" << format_double(cell.cutoff)
                << ": " << cell.error << "\n";
  if (!r.rows.empty() && r.failed == r.rows.size()) {
    std::cerr << "qbm: every scan cell failed\n";
    return 3;
  }
  return 0;
}

int cmd_profile(const ScenarioConfig& c) {
  auto grid = c.profile_grid();
  auto pts = temperature_profile(c.bath, grid, c.quad);
  std::vector<std::vector<std::string>> rows;
  std::size_t failed = 0;
  for (const auto& p : pts) {
    rows.push_back(profile_csv_row(p));
    if (!p.error.empty()) {
      ++failed;
      std::cerr << "qbm: T=" << format_double(p.temperature) << ": " << p.error << "\n";
    }
  }
  if (c.format == OutputFormat::Json) emit(c, table_json(profile_csv_header(), rows).dump(2) + "\n");
  else emit(c, csv_text(profile_csv_header(), rows));
  return failed == pts.size() ? 3 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-mode Gaussian entanglement in quantum Brownian motion"};
  app.require_subcommand(1);
  Overrides o;
  bool resume = false;
  unsigned threads = 0;

  auto* evolve_cmd = app.add_subcommand("evolve", "time evolution; trajectory CSV plus JSON summary");
  auto* markov_cmd = app.add_subcommand("markovian", "closed-form Markovian separability times");
  auto* stat_cmd = app.add_subcommand("stationary", "stationary state of the common reservoir");
  auto* crit_cmd = app.add_subcommand("critical-temp", "temperature above which stationary entanglement vanishes");
  auto* scan_cmd = app.add_subcommand("scan", "stationary (gamma, Gamma) scan");
  auto* prof_cmd = app.add_subcommand("profile", "stationary quantities against temperature");
  auto* list_cmd = app.add_subcommand("presets", "list presets or print one as JSON");
  for (auto* cmd : {evolve_cmd, markov_cmd, stat_cmd, crit_cmd, scan_cmd, prof_cmd}) add_common(cmd, o);
  scan_cmd->add_flag("--resume", resume, "keep completed cells of the existing output file");
  scan_cmd->add_option("--threads", threads, "worker count (0: available parallelism)");
  list_cmd->add_option("--preset", o.preset_name, "preset to print");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (list_cmd->parsed()) {
      if (o.preset_name.empty()) {
        for (const auto& n : preset_names()) std::cout << n << "\n";
      } else {
        std::cout << to_json(preset(o.preset_name)).dump(2) << "\n";
      }
      return 0;
    }
    ScenarioConfig c = resolve(o);
    if (evolve_cmd->parsed()) return cmd_evolve(c);
    if (markov_cmd->parsed()) return cmd_markovian(c);
    if (stat_cmd->parsed()) return cmd_stationary(c);
    if (crit_cmd->parsed()) return cmd_critical(c);
    if (scan_cmd->parsed()) {
      if (scan_cmd->count("--threads")) c.threads = threads;
      return cmd_scan(c, resume);
    }
    if (prof_cmd->parsed()) return cmd_profile(c);
  } catch (const Error& e) {
    std::cerr << "qbm: " << e.what() << "\n";
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "qbm: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
