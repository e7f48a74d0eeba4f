#include "qbm/coefficient_table.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace qbm {

namespace {

constexpr int kDirectNodes = 20;
constexpr double kFreezeRatio = 1e-13;

}  // namespace

CoefficientTable::CoefficientTable(const BathSpec& bath, double t_max, const QuadratureConfig& qc,
                                   bool exact)
    : bath_(bath), qc_(qc), exact_(exact), t_max_(t_max), t_frozen_(t_max) {
  bath_.validate();
  qc_.validate();
  if (!(t_max > 0) || !std::isfinite(t_max))
    throw Error(ErrorCode::InvalidArgument, "coefficient table needs a finite t_max > 0");
  if (exact_ || bath_.gamma == 0) return;

  const double w0 = bath_.omega0, m = bath_.mass;
  h_ = 0.02 / std::max({bath_.cutoff, w0, 2 * std::numbers::pi * bath_.temperature});
  t_direct_ = kDirectNodes * h_;
  if (t_max <= t_direct_) return;

  auto fp = [&](double t, double k) { return k * std::cos(w0 * t); };
  auto fq = [&](double t, double k) { return k * std::sin(w0 * t) / (m * w0); };

  std::size_t n = static_cast<std::size_t>(std::ceil((t_max - t_direct_) / h_)) + 1;
  d_p_.reserve(n + 1);
  d_qp_.reserve(n + 1);
  slope_p_.reserve(n + 1);
  slope_qp_.reserve(n + 1);

  auto c0 = hpz_coefficients(t_direct_, bath_, qc_);
  double k0 = kernel_K(t_direct_, bath_, qc_);
  d_p_.push_back(c0.d_p);
  d_qp_.push_back(c0.d_qp);
  slope_p_.push_back(fp(t_direct_, k0));
  slope_qp_.push_back(fq(t_direct_, k0));

  const double settle = 10.0 / bath_.cutoff;
  const auto window = static_cast<std::size_t>(std::ceil(5.0 / (w0 * h_)));
  std::size_t quiet = 0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    double t0 = t_direct_ + i * h_;
    double tm = t0 + 0.5 * h_, t1 = t0 + h_;
    double km = kernel_K(tm, bath_, qc_), k1 = kernel_K(t1, bath_, qc_);
    double p1 = fp(t1, k1), q1 = fq(t1, k1);
    d_p_.push_back(d_p_[i] + h_ / 6 * (slope_p_[i] + 4 * fp(tm, km) + p1));
    d_qp_.push_back(d_qp_[i] + h_ / 6 * (slope_qp_[i] + 4 * fq(tm, km) + q1));
    slope_p_.push_back(p1);
    slope_qp_.push_back(q1);

    double scale = std::max({std::abs(d_p_.back()), m * w0 * std::abs(d_qp_.back()), 1e-300});
    quiet = (t1 > settle && std::abs(k1) <= kFreezeRatio * scale) ? quiet + 1 : 0;
    if (quiet >= window) {
      t_frozen_ = t1;
      break;
    }
  }
}

HpzCoefficients CoefficientTable::at(double t) const {
  if (!(t >= 0)) throw Error(ErrorCode::InvalidArgument, "coefficient time must be >= 0");
  if (d_p_.empty() || t < t_direct_) return hpz_coefficients(t, bath_, qc_);

  HpzCoefficients c;
  c.gamma_p = hpz_gamma_p(t, bath_);
  c.delta_omega_sq = hpz_delta_omega_sq(t, bath_);
  if (t >= t_frozen_ && t_frozen_ < t_max_) {
    c.d_p = d_p_.back();
    c.d_qp = d_qp_.back();
    return c;
  }
  double x = (t - t_direct_) / h_;
  auto k = static_cast<std::size_t>(x);
  if (k + 1 >= d_p_.size()) {
    if (k + 1 == d_p_.size() && x - k < 1e-9) k = d_p_.size() - 2;
    else
      throw Error(ErrorCode::InvalidArgument,
                  "t = " + std::to_string(t) + " beyond the coefficient table");
  }
  double u = x - k;
  double h00 = (1 + 2 * u) * (1 - u) * (1 - u), h10 = u * (1 - u) * (1 - u);
  double h01 = u * u * (3 - 2 * u), h11 = u * u * (u - 1);
  c.d_p = h00 * d_p_[k] + h10 * h_ * slope_p_[k] + h01 * d_p_[k + 1] + h11 * h_ * slope_p_[k + 1];
  c.d_qp = h00 * d_qp_[k] + h10 * h_ * slope_qp_[k] + h01 * d_qp_[k + 1] + h11 * h_ * slope_qp_[k + 1];
  return c;
}

}  // namespace qbm
