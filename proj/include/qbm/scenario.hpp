#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "qbm/analysis.hpp"
#include "qbm/csv.hpp"

namespace qbm {

enum class GridKind { Linear, Log };
enum class OutputFormat { Csv, Json };

struct ScenarioConfig {
  ChannelKind model = ChannelKind::CommonModified;
  double xi = 1.0;
  BathSpec bath;  // single-mode mass and frequency
  std::optional<double> relative_rate;

  double t_max = 50;
  int n_points = 1001;
  GridKind grid = GridKind::Linear;

  QuadratureConfig quad;
  DynamicsOptions dynamics;

  std::string output_path;  // empty: standard output
  OutputFormat format = OutputFormat::Csv;

  std::vector<double> scan_gamma{2.0};
  std::vector<double> scan_cutoff{10.0};
  unsigned threads = 0;

  double profile_T_min = 0.02;
  double profile_T_max = 2.0;
  int profile_points = 40;

  // Throws Config with the offending key as prefix.
  void validate() const;
  ChannelModel channel() const;
  std::vector<double> time_grid() const;
  std::vector<double> profile_grid() const;  // log-spaced
};

std::vector<std::string> preset_names();
ScenarioConfig preset(std::string_view name);

// Applies `j` on top of `base`. An optional "preset" key selects the base.
// Unknown keys and mistyped values are Config errors.
ScenarioConfig apply_json(const ScenarioConfig& base, const nlohmann::json& j);
ScenarioConfig load_config(const std::string& path, const ScenarioConfig& base = {});
nlohmann::json to_json(const ScenarioConfig& cfg);

int exit_code(ErrorCode code);

struct EvolveOutcome {
  Trajectory trajectory;
  TimeScales scales;
  nlohmann::json summary;
};

EvolveOutcome run_evolve(const ScenarioConfig& cfg);
nlohmann::json markovian_json(double xi, double gamma, double T);
nlohmann::json stationary_json(const ScenarioConfig& cfg, const StationaryReport& r);
StationaryReport run_stationary(const ScenarioConfig& cfg);

struct ScanOutcome {
  std::vector<std::vector<std::string>> rows;  // grid order, scan_csv_header columns
  std::vector<ScanCell> computed;
  std::size_t reused = 0;
  std::size_t failed = 0;
};

// Cells whose row in `previous` is complete are copied, the rest computed.
ScanOutcome run_scan(const ScenarioConfig& cfg, const CsvTable* previous = nullptr);

}  // namespace qbm
