#pragma once

#include <array>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qbm/bath_kernels.hpp"
#include "qbm/gaussian_states.hpp"

namespace qbm {

// ⟨q²⟩, ⟨{q,p}⟩/2, ⟨p²⟩ of one canonical pair.
struct SingleModeMoments {
  double s_qq = 0.5;
  double s_qp = 0.0;
  double s_pp = 0.5;

  double det() const { return s_qq * s_pp - s_qp * s_qp; }
};

// Center of mass (R, P_R) with R = (q1+q2)/2, P_R = p1+p2, and relative
// pair (x, p_x) with x = q1-q2, p_x = (p1-p2)/2.
struct NormalModeState {
  SingleModeMoments com;
  double rel_xx = 1.0;
  double rel_pp = 0.25;
  double rel_xp = 0.0;
};

enum class ChannelKind { TwoReservoir, CommonModified, CommonUndampedRel, MarkovianReference };

const char* to_string(ChannelKind k);
// Accepts TWO_RESERVOIR, COMMON_MODIFIED, COMMON_UNDAMPED_REL, MARKOVIAN_REFERENCE
// (case-insensitive); throws Config otherwise.
ChannelKind parse_channel_kind(const std::string& s);

enum class RelativeRateSource { StationaryGammaP, Explicit };

struct ChannelModel {
  ChannelKind kind = ChannelKind::CommonModified;
  BathSpec bath;  // mass and omega0 are the single-mode values
  RelativeRateSource relative_rate_source = RelativeRateSource::StationaryGammaP;
  double explicit_relative_rate = 0.0;

  void validate() const;
  // Rate at which the relative pair relaxes in COMMON_MODIFIED.
  double relative_rate() const;
};

struct DynamicsOptions {
  bool compensate_shift = false;  // Ω² = ω₀² + δΩ²(t) − δΩ²(∞)
  double rel_eq_factor = 1.0;     // scales ⟨x²⟩_eq
  bool exact_coefficients = false;
  double abs_tol = 1e-10;
  double rel_tol = 1e-8;
  // Multiplies the transient step limit 0.01·min(1/Γ, 1/ω₀).
  double max_step_scale = 1.0;

  void validate() const;
};

struct Diagnostics {
  double EN = 0, S = 0, mu = 1, mu1 = 1, mu2 = 1, I = 0, nu_tilde_minus = 0.5;
};

// NaN entries for states that are not positive definite.
Diagnostics diagnose(const CovarianceMatrix& V);

struct PhysicalityWarning {
  double t = 0;
  double nu_minus = 0;
};

// Re-integrates from stored grid states to arbitrary times within the trajectory.
class DenseEvaluator {
 public:
  virtual ~DenseEvaluator() = default;
  virtual CovarianceMatrix state_at(double t) const = 0;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<CovarianceMatrix> states;
  std::vector<Diagnostics> diagnostics;
  std::vector<PhysicalityWarning> warnings;
  // Rate used for the default stationarity window; 0 if unknown.
  double stationary_rate = 0;
  std::shared_ptr<const DenseEvaluator> dense;
};

CovarianceMatrix squeezed_initial_state(double xi);

SingleModeMoments hpz_moment_rhs(const SingleModeMoments& mom, const HpzCoefficients& coeff,
                                 double mass, double omega0);
// Fixed point of hpz_moment_rhs for constant coefficients.
SingleModeMoments hpz_fixed_point(const HpzCoefficients& coeff, double mass, double omega0);
// max-norm of A V + V Aᵀ + D for one mode.
double lyapunov_residual(const SingleModeMoments& mom, const HpzCoefficients& coeff, double mass,
                         double omega0);

CovarianceMatrix reconstruct_covariance(const NormalModeState& nm);
// Inverse of reconstruct_covariance; throws InvalidArgument if V correlates the
// center-of-mass and relative pairs.
NormalModeState normal_modes(const CovarianceMatrix& V, double tol = 1e-10);

// t_grid must start at 0 and be strictly increasing.
Trajectory evolve(const ChannelModel& model, const CovarianceMatrix& V0, std::span<const double> t_grid,
                  const QuadratureConfig& qc, const DynamicsOptions& opts = {});

struct MarkovianTimes {
  double tau1 = 0;                 // +inf when n̄ = 0
  std::optional<double> tau2;      // empty when 2n̄+1 ≤ e^{2ξ}
  double xi_c = 0;
};

MarkovianTimes markovian_times(double xi, double gamma, double T);

std::vector<double> linear_grid(double t_max, int n_points);
// 0 followed by log-spaced points on [t_max·1e-4, t_max].
std::vector<double> log_grid(double t_max, int n_points);

// t,EN,S,mu,mu1,mu2,I,nu_tilde_minus followed by the 10 upper-triangle entries of V.
std::vector<std::string> trajectory_csv_header();
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);
// Restores times, states and diagnostics; no dense evaluator.
Trajectory read_trajectory_csv(std::istream& in);

}  // namespace qbm
