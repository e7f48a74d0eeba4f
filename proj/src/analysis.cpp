#include "qbm/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "qbm/csv.hpp"

namespace qbm {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kTcLow = 1e-6, kTcHigh = 1e2;
constexpr int kTcProbes = 40;

bool entangled_nu(double nu) { return nu < 0.5 - kEntangledMargin; }

BathSpec com_bath(double gamma, double cutoff, double T, double single_mass = 1.0) {
  BathSpec b;
  b.gamma = gamma;
  b.cutoff = cutoff;
  b.temperature = T;
  b.mass = 2 * single_mass;
  return b;
}

}  // namespace

TimeScales detect_time_scales(const Trajectory& traj, const TimeScaleOptions& o) {
  const auto& ts = traj.times;
  const auto& dg = traj.diagnostics;
  if (ts.size() < 2 || dg.size() != ts.size())
    throw Error(ErrorCode::InvalidArgument, "trajectory needs at least two samples");
  std::size_t valid = 0;
  while (valid < ts.size() && std::isfinite(dg[valid].nu_tilde_minus)) ++valid;
  if (valid == 0) throw Error(ErrorCode::InvalidArgument, "trajectory has no physical samples");

  auto nu_at = [&](double t) {
    return unchecked::nu_tilde_minus(traj.dense->state_at(t));
  };
  auto crossing = [&](std::size_t i) {
    double a = ts[i - 1], b = ts[i];
    bool sa = entangled_nu(dg[i - 1].nu_tilde_minus);
    if (!traj.dense) {
      double fa = dg[i - 1].nu_tilde_minus - 0.5, fb = dg[i].nu_tilde_minus - 0.5;
      return fa == fb ? b : a + (b - a) * fa / (fa - fb);
    }
    while (b - a > o.time_tol) {
      double mid = 0.5 * (a + b);
      if (entangled_nu(nu_at(mid)) == sa) a = mid;
      else b = mid;
    }
    return 0.5 * (a + b);
  };

  TimeScales r;
  r.end_time = ts[valid - 1];
  std::vector<std::pair<double, double>> positive;
  bool state = entangled_nu(dg[0].nu_tilde_minus);
  double open = ts[0];
  for (std::size_t i = 1; i < valid; ++i) {
    bool s = entangled_nu(dg[i].nu_tilde_minus);
    if (s == state) continue;
    double tc = crossing(i);
    if (state) positive.emplace_back(open, tc);
    else open = tc;
    if (state && !r.tau_s) r.tau_s = tc;
    state = s;
  }
  if (state) positive.emplace_back(open, r.end_time);
  if (!entangled_nu(dg[0].nu_tilde_minus)) r.tau_s = ts[0];
  if (r.tau_s) {
    for (const auto& iv : positive)
      if (iv.first >= *r.tau_s) r.revival_intervals.push_back(iv);
    if (state && !r.revival_intervals.empty()) r.tau_e = r.revival_intervals.back().first;
  }

  double window = o.tail_window > 0 ? o.tail_window : 20.0 / std::max(traj.stationary_rate, 1e-3);
  double nu_end = dg[valid - 1].nu_tilde_minus;
  double drift = 0;
  for (std::size_t i = 0; i < valid; ++i)
    if (ts[i] >= r.end_time - window)
      drift = std::max(drift, std::abs(dg[i].nu_tilde_minus - nu_end) / std::max(std::abs(nu_end), 1e-300));
  r.tail_drift = drift;
  bool truncated = valid < ts.size();
  r.stationary = !truncated && r.end_time - ts[0] >= window && drift < o.drift_tol;
  if (!r.stationary && o.require_stationary) {
    std::string why = truncated ? "state lost positive definiteness at t = " + format_double(ts[valid])
                      : r.end_time - ts[0] < window
                          ? "trajectory shorter than the tail window " + format_double(window)
                          : "tail drift " + format_double(drift) + " exceeds " + format_double(o.drift_tol);
    throw Error(ErrorCode::NotConverged, why);
  }
  return r;
}

StationaryReport stationary_report(const BathSpec& cb, const QuadratureConfig& qc) {
  cb.validate();
  qc.validate();
  const double M = cb.mass, w0 = cb.omega0, mu = M / 4;
  const double occ = omega_coth(w0, cb.temperature) / w0;
  StationaryReport r;
  auto mom = stationary_R_moments(cb, qc);
  r.r2 = mom.r2;
  r.p2_R = mom.p2;
  r.px2_eq = mu * w0 * occ / 2;
  r.x2_eq = occ / (2 * mu * w0);
  r.e_rx = std::max(1.0 / 16 - r.r2 * r.px2_eq, 0.0);
  r.entangled = r.e_rx > 0;
  r.moment_lhs = r.r2 * occ;
  r.integral_lhs = stationary_criterion_integral(cb, qc);

  NormalModeState nm;
  nm.com = {r.r2, 0.0, r.p2_R};
  nm.rel_xx = r.x2_eq;
  nm.rel_pp = r.px2_eq;
  r.covariance = reconstruct_covariance(nm);
  Diagnostics d = diagnose(r.covariance);
  r.e_n_inf = d.EN;
  r.simon_S = d.S;
  r.mutual_information = d.I;
  try {
    r.entropy = von_neumann_entropies(r.covariance).total;
  } catch (const Error&) {
    r.entropy = kNaN;
  }
  return r;
}

double stationary_criterion_margin(double gamma, double cutoff, double T, const QuadratureConfig& qc) {
  auto b = com_bath(gamma, cutoff, T);
  return stationary_R_moments(b, qc).r2 * (omega_coth(b.omega0, T) / b.omega0) - 0.25;
}

std::optional<double> critical_temperature(double gamma, double cutoff, const QuadratureConfig& qc) {
  if (!(gamma > 0) || !std::isfinite(gamma)) throw Error(ErrorCode::InvalidArgument, "gamma must be > 0");
  if (!(cutoff > 0) || !std::isfinite(cutoff)) throw Error(ErrorCode::InvalidArgument, "Gamma must be > 0");
  auto g = [&](double T) { return stationary_criterion_margin(gamma, cutoff, T, qc); };
  if (g(kTcLow) > 0) return std::nullopt;
  double lo = kTcLow, hi = 0;
  const double ratio = std::log(kTcHigh / kTcLow) / (kTcProbes - 1);
  for (int k = 1; k < kTcProbes; ++k) {
    double T = k == kTcProbes - 1 ? kTcHigh : kTcLow * std::exp(ratio * k);
    if (g(T) > 0) {
      hi = T;
      break;
    }
    lo = T;
  }
  if (hi == 0)
    throw Error(ErrorCode::NoBracket, "stationary criterion keeps its sign on [1e-6, 1e2]");
  while (hi / lo - 1 > 1e-4) {
    double mid = std::sqrt(lo * hi);
    (g(mid) > 0 ? hi : lo) = mid;
  }
  return std::sqrt(lo * hi);
}

std::vector<ScanCell> phase_scan(std::span<const double> gamma_grid, std::span<const double> cutoff_grid,
                                 double T, const QuadratureConfig& qc, unsigned threads) {
  if (gamma_grid.empty() || cutoff_grid.empty()) throw Error(ErrorCode::InvalidArgument, "scan grids must be nonempty");
  qc.validate();
  std::vector<ScanCell> cells;
  for (double g : gamma_grid)
    for (double G : cutoff_grid) cells.push_back({g, G, T, std::nullopt, {}});
  evaluate_cells(cells, qc, threads);
  return cells;
}

void evaluate_cells(std::span<ScanCell> cells, const QuadratureConfig& qc, unsigned threads) {
  qc.validate();
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next++) < cells.size();) {
      auto& c = cells[i];
      try {
        c.report = stationary_report(com_bath(c.gamma, c.cutoff, c.temperature), qc);
        c.error.clear();
      } catch (const std::exception& e) {
        c.report.reset();
        c.error = e.what();
      }
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, cells.size()));
  if (threads <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned k = 0; k < threads; ++k) pool.emplace_back(work);
  }
}

std::vector<ProfilePoint> temperature_profile(const BathSpec& base, std::span<const double> T_grid,
                                              const QuadratureConfig& qc) {
  for (std::size_t i = 0; i < T_grid.size(); ++i)
    if (!(T_grid[i] > 0) || (i > 0 && !(T_grid[i] > T_grid[i - 1])))
      throw Error(ErrorCode::InvalidArgument, "temperature grid must be positive and ascending");
  std::vector<ProfilePoint> out;
  for (double T : T_grid) {
    ProfilePoint p;
    p.temperature = T;
    try {
      BathSpec b = base;
      b.temperature = T;
      b.mass = 2 * base.mass;
      auto r = stationary_report(b, qc);
      p.S_inf = r.simon_S;
      p.E_N_inf = r.e_n_inf;
      p.E_Rx = r.e_rx;
      p.I_inf = r.mutual_information;
      p.corr_qq = 2 * r.covariance(0, 2);
      p.corr_pp = 2 * r.covariance(1, 3);
    } catch (const std::exception& e) {
      p.S_inf = p.E_N_inf = p.E_Rx = p.I_inf = p.corr_qq = p.corr_pp = kNaN;
      p.error = e.what();
    }
    out.push_back(p);
  }
  return out;
}

std::vector<std::string> scan_csv_header() {
  return {"gamma", "Gamma", "T", "r2", "p2R", "px2eq", "ERx", "ENinf", "Sinf", "I", "entangled"};
}

std::vector<std::string> scan_csv_row(const ScanCell& c) {
  std::vector<std::string> row{format_double(c.gamma), format_double(c.cutoff), format_double(c.temperature)};
  if (!c.report) {
    for (int k = 0; k < 7; ++k) row.push_back("nan");
    row.push_back("error");
    return row;
  }
  const auto& r = *c.report;
  for (double v : {r.r2, r.p2_R, r.px2_eq, r.e_rx, r.e_n_inf, r.simon_S, r.mutual_information})
    row.push_back(format_double(v));
  row.push_back(r.entangled ? "true" : "false");
  return row;
}

std::vector<std::string> profile_csv_header() {
  return {"T", "Sinf", "ENinf", "ERx", "Iinf", "corr_qq", "corr_pp"};
}

std::vector<std::string> profile_csv_row(const ProfilePoint& p) {
  std::vector<std::string> row;
  for (double v : {p.temperature, p.S_inf, p.E_N_inf, p.E_Rx, p.I_inf, p.corr_qq, p.corr_pp})
    row.push_back(format_double(v));
  return row;
}

}  // namespace qbm
