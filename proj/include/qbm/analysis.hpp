#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qbm/dynamics.hpp"

namespace qbm {

// ν̃₋ below 1/2 by more than this counts as entangled.
inline constexpr double kEntangledMargin = 1e-9;

struct TimeScales {
  std::optional<double> tau_s;
  std::optional<double> tau_e;
  std::vector<std::pair<double, double>> revival_intervals;
  bool stationary = false;  // tail drift below threshold over the whole window
  double tail_drift = 0;
  double end_time = 0;      // last physically valid sample
};

struct TimeScaleOptions {
  double tail_window = 0;  // 0: 20/max(stationary rate, 1e-3)
  double drift_tol = 1e-4;
  double time_tol = 1e-6;
  bool require_stationary = true;  // throw NotConverged when the tail drifts
};

TimeScales detect_time_scales(const Trajectory& traj, const TimeScaleOptions& opts = {});

struct StationaryReport {
  double r2 = 0, p2_R = 0, px2_eq = 0, x2_eq = 0;
  double e_rx = 0;
  double e_n_inf = 0;
  double integral_lhs = 0;  // direct integral
  double moment_lhs = 0;    // r2·(2n̄+1)
  double simon_S = 0;
  double mutual_information = 0;
  double entropy = 0;  // von Neumann entropy of the two-mode state
  bool entangled = false;
  CovarianceMatrix covariance;
};

// `com_bath` describes the center of mass (mass M); the relative pair has reduced mass M/4.
StationaryReport stationary_report(const BathSpec& com_bath, const QuadratureConfig& qc);

// g(T) = r2(T)(2n̄+1) − 1/4 for the center of mass of two unit-mass modes.
double stationary_criterion_margin(double gamma, double cutoff, double T, const QuadratureConfig& qc);

// Empty when g(10⁻⁶) > 0; NoBracket when g keeps its sign up to 10².
std::optional<double> critical_temperature(double gamma, double cutoff, const QuadratureConfig& qc);

struct ScanCell {
  double gamma = 0, cutoff = 0, temperature = 0;
  std::optional<StationaryReport> report;
  std::string error;
};

// Row-major over (gamma, cutoff); threads = 0 uses the available parallelism.
std::vector<ScanCell> phase_scan(std::span<const double> gamma_grid, std::span<const double> cutoff_grid,
                                 double T, const QuadratureConfig& qc, unsigned threads = 0);
// Computes the report of every cell in place; failures land in `error`.
void evaluate_cells(std::span<ScanCell> cells, const QuadratureConfig& qc, unsigned threads = 0);

struct ProfilePoint {
  double temperature = 0;
  double S_inf = 0, E_N_inf = 0, E_Rx = 0, I_inf = 0, corr_qq = 0, corr_pp = 0;
  std::string error;
};

// bath_base.mass is the single-mode mass; gamma and cutoff are taken from it.
std::vector<ProfilePoint> temperature_profile(const BathSpec& bath_base, std::span<const double> T_grid,
                                              const QuadratureConfig& qc);

std::vector<std::string> scan_csv_header();
std::vector<std::string> scan_csv_row(const ScanCell& cell);
std::vector<std::string> profile_csv_header();
std::vector<std::string> profile_csv_row(const ProfilePoint& p);

}  // namespace qbm
