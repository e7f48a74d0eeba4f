#include "qbm/dynamics.hpp"

#include <algorithm>
#include <boost/numeric/odeint.hpp>
#include <cctype>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>

#include "qbm/coefficient_table.hpp"
#include "qbm/csv.hpp"

namespace qbm {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kWarnTol = 5e-3;

using State = std::array<double, 16>;
namespace ode = boost::numeric::odeint;

Mat2 free_propagator(double t, double mass, double w0) {
  double c = std::cos(w0 * t), s = std::sin(w0 * t);
  Mat2 S;
  S << c, s / (mass * w0), -mass * w0 * s, c;
  return S;
}

const Mat4& to_normal() {
  static const Mat4 n = [] {
    Mat4 m;
    m << 0.5, 0, 0.5, 0,  //
        0, 1, 0, 1,       //
        1, 0, -1, 0,      //
        0, 0.5, 0, -0.5;
    return m;
  }();
  return n;
}

const Mat4& from_normal() {
  static const Mat4 n = [] {
    Mat4 m;
    m << 1, 0, 0.5, 0,  //
        0, 0.5, 0, 1,   //
        1, 0, -0.5, 0,  //
        0, 0.5, 0, -1;
    return m;
  }();
  return n;
}

class Propagator final : public DenseEvaluator {
 public:
  Propagator(const ChannelModel& model, const CovarianceMatrix& V0, double t_end,
             const QuadratureConfig& qc, const DynamicsOptions& opts)
      : model_(model), opts_(opts), v0_(V0), t_end_(t_end) {
    const BathSpec& b = model_.bath;
    const double m = b.mass, w0 = b.omega0;
    hpz_bath_ = b;
    switch (model_.kind) {
      case ChannelKind::TwoReservoir:
        break;
      case ChannelKind::CommonModified:
      case ChannelKind::CommonUndampedRel: {
        hpz_bath_ = b.with_mass(2 * m);
        NormalModeState nm = normal_modes(V0);
        rel0_ << nm.rel_xx, nm.rel_xp, nm.rel_xp, nm.rel_pp;
        com0_ = nm.com;
        double mu = 0.5 * m, occ = omega_coth(w0, b.temperature) / w0;
        rel_eq_ << opts_.rel_eq_factor * occ / (2 * mu * w0), 0, 0, mu * w0 * occ / 2;
        rel_rate_ = model_.kind == ChannelKind::CommonModified ? model_.relative_rate() : 0.0;
        break;
      }
      case ChannelKind::MarkovianReference: {
        double occ = omega_coth(w0, b.temperature) / w0;
        markov_eq_ = Mat4::Zero();
        for (int j : {0, 2}) {
          markov_eq_(j, j) = occ / (2 * m * w0);
          markov_eq_(j + 1, j + 1) = m * w0 * occ / 2;
        }
        break;
      }
    }
    if (has_ode()) {
      if (b.gamma > 0) table_.emplace(hpz_bath_, t_end, qc, opts_.exact_coefficients);
      shift_ = opts_.compensate_shift ? hpz_stationary_coefficients(hpz_bath_, qc).delta_omega_sq : 0.0;
      transient_end_ = 10.0 / b.cutoff;
      max_step_ = 0.01 * std::min(1.0 / b.cutoff, 1.0 / w0) * opts_.max_step_scale;
    }
  }

  bool has_ode() const { return model_.kind != ChannelKind::MarkovianReference; }

  State initial_state() const {
    State x{};
    if (model_.kind == ChannelKind::TwoReservoir) {
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) x[4 * i + j] = v0_(i, j);
    } else {
      x[0] = com0_.s_qq;
      x[1] = com0_.s_qp;
      x[2] = com0_.s_pp;
    }
    return x;
  }

  HpzCoefficients coefficients(double t) const {
    HpzCoefficients c;
    if (table_) c = table_->at(t);
    c.delta_omega_sq -= shift_;
    return c;
  }

  // The state holds the interaction-picture moments W = U⁻¹ V U⁻ᵀ with U the free
  // propagator at ω₀, so undamped evolution leaves it constant.
  void rhs(const State& x, State& dx, double t) const {
    const double M = hpz_bath_.mass, w0 = hpz_bath_.omega0;
    HpzCoefficients c = coefficients(t);
    dx.fill(0.0);
    Mat2 a1, d;
    a1 << 0, 0, -M * c.delta_omega_sq, -c.gamma_p;
    d << 0, c.d_qp, c.d_qp, 2 * c.d_p;
    Mat2 u = free_propagator(t, M, w0), ui = free_propagator(-t, M, w0);
    Mat2 a = ui * a1 * u, dd = ui * d * ui.transpose();
    if (model_.kind == ChannelKind::TwoReservoir) {
      Mat4 A = Mat4::Zero(), D = Mat4::Zero();
      A.block<2, 2>(0, 0) = A.block<2, 2>(2, 2) = a;
      D.block<2, 2>(0, 0) = D.block<2, 2>(2, 2) = dd;
      Eigen::Map<const Eigen::Matrix<double, 4, 4, Eigen::RowMajor>> W(x.data());
      Eigen::Map<Eigen::Matrix<double, 4, 4, Eigen::RowMajor>> dW(dx.data());
      dW = A * W + W * A.transpose() + D;
    } else {
      Mat2 W;
      W << x[0], x[1], x[1], x[2];
      Mat2 dW = a * W + W * a.transpose() + dd;
      dx[0] = dW(0, 0);
      dx[1] = 0.5 * (dW(0, 1) + dW(1, 0));
      dx[2] = dW(1, 1);
    }
  }

  // Integrates x from t0 to t1; dt carries the step-size guess between calls.
  void advance(State& x, double t0, double t1, double& dt) const {
    if (!has_ode() || t1 <= t0) return;
    auto ctrl = ode::make_controlled<ode::runge_kutta_dopri5<State>>(opts_.abs_tol, opts_.rel_tol);
    auto sys = [this](const State& s, State& d, double t) { rhs(s, d, t); };
    double t = t0;
    if (!(dt > 0)) dt = std::min(max_step_, t1 - t0);
    long steps = 0;
    while (t < t1) {
      double remaining = t1 - t;
      double step = std::min(dt, remaining);
      if (t < transient_end_) step = std::min(step, max_step_);
      bool last = step >= remaining;
      double trial = step;
      if (ctrl.try_step(sys, x, t, trial) == ode::success) {
        if (last) t = t1;
        if (step == dt || trial > dt) dt = trial;
      } else {
        dt = trial;
        if (dt < 1e-14 * std::max(1.0, std::abs(t)))
          throw Error(ErrorCode::IntegratorFailure, "step size underflow at t = " + format_double(t));
      }
      if (++steps > 50'000'000) throw Error(ErrorCode::IntegratorFailure, "step budget exhausted");
    }
  }

  CovarianceMatrix assemble(double t, const State& x) const {
    const BathSpec& b = model_.bath;
    switch (model_.kind) {
      case ChannelKind::TwoReservoir: {
        Eigen::Map<const Eigen::Matrix<double, 4, 4, Eigen::RowMajor>> W(x.data());
        Mat4 U = Mat4::Zero();
        U.block<2, 2>(0, 0) = U.block<2, 2>(2, 2) = free_propagator(t, b.mass, b.omega0);
        Mat4 v = U * W * U.transpose();
        return CovarianceMatrix(0.5 * (v + v.transpose()), kInf);
      }
      case ChannelKind::CommonModified:
      case ChannelKind::CommonUndampedRel: {
        Mat2 S = free_propagator(t, 0.5 * b.mass, b.omega0);
        double e = std::exp(-rel_rate_ * t);
        Mat2 r = S * (e * rel0_ + (1 - e) * rel_eq_) * S.transpose();
        Mat2 W, U = free_propagator(t, hpz_bath_.mass, b.omega0);
        W << x[0], x[1], x[1], x[2];
        Mat2 com = U * W * U.transpose();
        NormalModeState nm;
        nm.com = {com(0, 0), 0.5 * (com(0, 1) + com(1, 0)), com(1, 1)};
        nm.rel_xx = r(0, 0);
        nm.rel_xp = 0.5 * (r(0, 1) + r(1, 0));
        nm.rel_pp = r(1, 1);
        return reconstruct_covariance(nm);
      }
      case ChannelKind::MarkovianReference: {
        Mat2 s = free_propagator(t, b.mass, b.omega0);
        Mat4 S = Mat4::Zero();
        S.block<2, 2>(0, 0) = s;
        S.block<2, 2>(2, 2) = s;
        double e = std::exp(-b.gamma * t);
        Mat4 v = S * (e * v0_.matrix() + (1 - e) * markov_eq_) * S.transpose();
        return CovarianceMatrix(0.5 * (v + v.transpose()), kInf);
      }
    }
    return v0_;
  }

  void record(double t, const State& x) {
    grid_.push_back(t);
    saved_.push_back(x);
  }

  CovarianceMatrix state_at(double t) const override {
    if (!(t >= 0 && t <= t_end_))
      throw Error(ErrorCode::InvalidArgument, "t = " + format_double(t) + " outside the trajectory");
    if (t == 0) return v0_;
    auto it = std::upper_bound(grid_.begin(), grid_.end(), t);
    std::size_t i = static_cast<std::size_t>(it - grid_.begin()) - 1;
    State x = saved_[i];
    double dt = 0;
    advance(x, grid_[i], t, dt);
    return assemble(t, x);
  }

  double stationary_rate() const {
    const BathSpec& b = model_.bath;
    switch (model_.kind) {
      case ChannelKind::TwoReservoir:
        return b.gamma * b.cutoff * b.cutoff / (b.mass * (b.cutoff * b.cutoff + b.omega0 * b.omega0));
      case ChannelKind::CommonModified:
      case ChannelKind::CommonUndampedRel: {
        const BathSpec& h = hpz_bath_;
        double com = h.gamma * h.cutoff * h.cutoff / (h.mass * (h.cutoff * h.cutoff + h.omega0 * h.omega0));
        return model_.kind == ChannelKind::CommonModified ? std::min(com, rel_rate_) : com;
      }
      case ChannelKind::MarkovianReference:
        return b.gamma;
    }
    return 0;
  }

 private:
  ChannelModel model_;
  DynamicsOptions opts_;
  CovarianceMatrix v0_;
  double t_end_;
  BathSpec hpz_bath_;
  std::optional<CoefficientTable> table_;
  double shift_ = 0, transient_end_ = 0, max_step_ = 0;
  SingleModeMoments com0_;
  Mat2 rel0_ = Mat2::Zero(), rel_eq_ = Mat2::Zero();
  double rel_rate_ = 0;
  Mat4 markov_eq_ = Mat4::Zero();
  std::vector<double> grid_;
  std::vector<State> saved_;
};

std::string upper(std::string s) {
  for (auto& ch : s) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  return s;
}

}  // namespace

const char* to_string(ChannelKind k) {
  switch (k) {
    case ChannelKind::TwoReservoir: return "TWO_RESERVOIR";
    case ChannelKind::CommonModified: return "COMMON_MODIFIED";
    case ChannelKind::CommonUndampedRel: return "COMMON_UNDAMPED_REL";
    case ChannelKind::MarkovianReference: return "MARKOVIAN_REFERENCE";
  }
  return "?";
}

ChannelKind parse_channel_kind(const std::string& s) {
  std::string u = upper(s);
  for (auto k : {ChannelKind::TwoReservoir, ChannelKind::CommonModified, ChannelKind::CommonUndampedRel,
                 ChannelKind::MarkovianReference})
    if (u == to_string(k)) return k;
  throw Error(ErrorCode::Config, "model: unknown channel model '" + s + "'");
}

void ChannelModel::validate() const {
  bath.validate();
  if (relative_rate_source == RelativeRateSource::Explicit &&
      !(std::isfinite(explicit_relative_rate) && explicit_relative_rate >= 0))
    throw Error(ErrorCode::InvalidArgument, "explicit relative rate must be >= 0");
}

double ChannelModel::relative_rate() const {
  if (relative_rate_source == RelativeRateSource::Explicit) return explicit_relative_rate;
  double G = bath.cutoff, w0 = bath.omega0;
  return bath.gamma * G * G / (bath.mass * (G * G + w0 * w0));
}

void DynamicsOptions::validate() const {
  if (!(std::isfinite(rel_eq_factor) && rel_eq_factor > 0))
    throw Error(ErrorCode::Config, "dynamics.rel_eq_factor must be > 0");
  if (!(abs_tol > 0) || !(rel_tol > 0)) throw Error(ErrorCode::Config, "dynamics tolerances must be > 0");
  if (!(max_step_scale > 0)) throw Error(ErrorCode::Config, "dynamics.max_step_scale must be > 0");
}

Diagnostics diagnose(const CovarianceMatrix& V) {
  Diagnostics d;
  if (!V.is_positive_definite()) return {kNaN, kNaN, kNaN, kNaN, kNaN, kNaN, kNaN};
  constexpr double loose = 0.5;
  auto guarded = [](auto f) {
    try {
      return f();
    } catch (const Error&) {
      return kNaN;
    }
  };
  d.nu_tilde_minus = unchecked::nu_tilde_minus(V);
  d.EN = std::isfinite(d.nu_tilde_minus) ? std::max(0.0, -std::log(2 * d.nu_tilde_minus)) : kNaN;
  d.S = unchecked::simon_criterion(V);
  PurityTriple p = purities(V, loose);
  d.mu = p.mu;
  d.mu1 = p.mu1;
  d.mu2 = p.mu2;
  d.I = guarded([&] { return mutual_information(V, loose); });
  return d;
}

CovarianceMatrix squeezed_initial_state(double xi) {
  if (!std::isfinite(xi)) throw Error(ErrorCode::InvalidArgument, "xi must be finite");
  StandardFormElements s;
  s.a = s.b = 0.5 * std::cosh(2 * xi);
  s.c_plus = 0.5 * std::sinh(2 * xi);
  s.c_minus = -s.c_plus;
  return CovarianceMatrix::from_standard_form(s);
}

SingleModeMoments hpz_moment_rhs(const SingleModeMoments& s, const HpzCoefficients& c, double m,
                                 double w0) {
  const double om2 = w0 * w0 + c.delta_omega_sq;
  return {2 * s.s_qp / m, s.s_pp / m - m * om2 * s.s_qq - c.gamma_p * s.s_qp + c.d_qp,
          -2 * m * om2 * s.s_qp - 2 * c.gamma_p * s.s_pp + 2 * c.d_p};
}

SingleModeMoments hpz_fixed_point(const HpzCoefficients& c, double m, double w0) {
  const double om2 = w0 * w0 + c.delta_omega_sq;
  if (!(c.gamma_p > 0) || !(om2 > 0))
    throw Error(ErrorCode::NumericDomain, "fixed point needs gamma_p > 0 and a positive frequency");
  SingleModeMoments s;
  s.s_qp = 0;
  s.s_pp = c.d_p / c.gamma_p;
  s.s_qq = (s.s_pp / m + c.d_qp) / (m * om2);
  return s;
}

double lyapunov_residual(const SingleModeMoments& mom, const HpzCoefficients& c, double m, double w0) {
  auto d = hpz_moment_rhs(mom, c, m, w0);
  return std::max({std::abs(d.s_qq), std::abs(d.s_qp), std::abs(d.s_pp)});
}

CovarianceMatrix reconstruct_covariance(const NormalModeState& nm) {
  Mat4 w = Mat4::Zero();
  w(0, 0) = nm.com.s_qq;
  w(0, 1) = w(1, 0) = nm.com.s_qp;
  w(1, 1) = nm.com.s_pp;
  w(2, 2) = nm.rel_xx;
  w(2, 3) = w(3, 2) = nm.rel_xp;
  w(3, 3) = nm.rel_pp;
  Mat4 v = from_normal() * w * from_normal().transpose();
  return CovarianceMatrix(0.5 * (v + v.transpose()), kInf);
}

NormalModeState normal_modes(const CovarianceMatrix& V, double tol) {
  Mat4 w = to_normal() * V.matrix() * to_normal().transpose();
  double scale = std::max(1.0, V.matrix().cwiseAbs().maxCoeff());
  if (w.block<2, 2>(0, 2).cwiseAbs().maxCoeff() > tol * scale)
    throw Error(ErrorCode::InvalidArgument,
                "state correlates center-of-mass and relative coordinates");
  NormalModeState nm;
  nm.com = {w(0, 0), 0.5 * (w(0, 1) + w(1, 0)), w(1, 1)};
  nm.rel_xx = w(2, 2);
  nm.rel_xp = 0.5 * (w(2, 3) + w(3, 2));
  nm.rel_pp = w(3, 3);
  return nm;
}

Trajectory evolve(const ChannelModel& model, const CovarianceMatrix& V0, std::span<const double> t_grid,
                  const QuadratureConfig& qc, const DynamicsOptions& opts) {
  model.validate();
  opts.validate();
  qc.validate();
  if (t_grid.empty() || t_grid[0] != 0.0)
    throw Error(ErrorCode::InvalidArgument, "time grid must start at 0");
  for (std::size_t i = 1; i < t_grid.size(); ++i)
    if (!(t_grid[i] > t_grid[i - 1]) || !std::isfinite(t_grid[i]))
      throw Error(ErrorCode::InvalidArgument, "time grid must be strictly increasing and finite");
  try {
    require_physical(V0);
  } catch (const Error& e) {
    throw Error(ErrorCode::UnphysicalInitial, e.what());
  }

  const double t_end = std::max(t_grid.back(), 1e-300);
  auto prop = std::make_shared<Propagator>(model, V0, t_end, qc, opts);
  const bool strong = model.bath.gamma >= model.bath.omega0;

  Trajectory traj;
  traj.stationary_rate = prop->stationary_rate();
  State x = prop->initial_state();
  double dt = 0;
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    double t = t_grid[i];
    if (i > 0) prop->advance(x, t_grid[i - 1], t, dt);
    prop->record(t, x);
    CovarianceMatrix V = i == 0 ? V0 : prop->assemble(t, x);
    double nu = symplectic_eigenvalues(V)(0);
    if (!(nu >= 0.5 - kWarnTol)) {
      if (!strong)
        throw Error(ErrorCode::UnphysicalState,
                    "state lost physicality at t = " + format_double(t) + " (nu_minus = " + format_double(nu) + ")");
      traj.warnings.push_back({t, nu});
    }
    traj.times.push_back(t);
    traj.diagnostics.push_back(diagnose(V));
    traj.states.push_back(std::move(V));
  }
  traj.dense = prop;
  return traj;
}

MarkovianTimes markovian_times(double xi, double gamma, double T) {
  if (!(gamma > 0) || !std::isfinite(gamma)) throw Error(ErrorCode::InvalidArgument, "gamma must be > 0");
  if (!(T >= 0) || !std::isfinite(T)) throw Error(ErrorCode::InvalidArgument, "T must be >= 0");
  if (!(xi >= 0) || !std::isfinite(xi)) throw Error(ErrorCode::InvalidArgument, "xi must be >= 0");
  double n = thermal_occupation(1.0, T);
  MarkovianTimes r;
  r.xi_c = 0.5 * std::log1p(2 * n);
  if (xi == 0) r.tau1 = 0;
  else if (n == 0) r.tau1 = kInf;
  else r.tau1 = std::log1p(-std::expm1(-2 * xi) / (2 * n)) / gamma;
  double occ = 2 * n + 1;
  if (occ > std::exp(2 * xi)) r.tau2 = std::log((occ - std::exp(-2 * xi)) / (occ - std::exp(2 * xi))) / (2 * gamma);
  return r;
}

std::vector<double> linear_grid(double t_max, int n) {
  if (!(t_max > 0) || !std::isfinite(t_max)) throw Error(ErrorCode::InvalidArgument, "t_max must be > 0");
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "n_points must be >= 2");
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i) g[i] = t_max * i / (n - 1);
  g.back() = t_max;
  return g;
}

std::vector<double> log_grid(double t_max, int n) {
  if (!(t_max > 0) || !std::isfinite(t_max)) throw Error(ErrorCode::InvalidArgument, "t_max must be > 0");
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "n_points must be >= 2");
  std::vector<double> g{0.0};
  double lo = std::log(t_max * 1e-4), hi = std::log(t_max);
  for (int i = 0; i < n - 1; ++i) g.push_back(n == 2 ? t_max : std::exp(lo + (hi - lo) * i / (n - 2)));
  g.back() = t_max;
  return g;
}

namespace {
constexpr int kUpper[10][2] = {{0, 0}, {0, 1}, {0, 2}, {0, 3}, {1, 1}, {1, 2}, {1, 3}, {2, 2}, {2, 3}, {3, 3}};
}

std::vector<std::string> trajectory_csv_header() {
  return {"t",     "EN",    "S",     "mu",    "mu1",   "mu2",   "I",     "nu_tilde_minus", "Vqq1",
          "Vq1p1", "Vq1q2", "Vq1p2", "Vpp1",  "Vp1q2", "Vp1p2", "Vqq2",  "Vq2p2",          "Vpp2"};
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  write_csv_row(out, trajectory_csv_header());
  std::vector<std::string> row;
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    const auto& d = traj.diagnostics[i];
    row = {format_double(traj.times[i]), format_double(d.EN),  format_double(d.S),
           format_double(d.mu),          format_double(d.mu1), format_double(d.mu2),
           format_double(d.I),           format_double(d.nu_tilde_minus)};
    for (auto [r, c] : kUpper) row.push_back(format_double(traj.states[i](r, c)));
    write_csv_row(out, row);
  }
  if (!out) throw Error(ErrorCode::Io, "failed writing trajectory CSV");
}

Trajectory read_trajectory_csv(std::istream& in) {
  CsvTable tab = read_csv(in);
  if (tab.header != trajectory_csv_header())
    throw Error(ErrorCode::InvalidArgument, "not a trajectory CSV (header mismatch)");
  Trajectory traj;
  for (const auto& row : tab.rows) {
    std::vector<double> v;
    for (const auto& f : row) v.push_back(parse_double(f));
    traj.times.push_back(v[0]);
    traj.diagnostics.push_back({v[1], v[2], v[3], v[4], v[5], v[6], v[7]});
    Mat4 m;
    for (int k = 0; k < 10; ++k) {
      auto [r, c] = kUpper[k];
      m(r, c) = m(c, r) = v[8 + k];
    }
    traj.states.emplace_back(m);
  }
  return traj;
}

}  // namespace qbm
