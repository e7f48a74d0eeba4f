#include "qbm/bath_kernels.hpp"

#include <boost/math/special_functions/expint.hpp>
#include <cmath>
#include <numbers>
#include <vector>

namespace qbm {

namespace {

constexpr double kPi = std::numbers::pi;

bool finite_nonneg(double x) { return std::isfinite(x) && x >= 0; }

// (1 - cos(d t)) / (2d) = sin²(d t / 2) / d
double one_minus_cos_over(double d, double t) {
  if (std::abs(d) < 1e-8) return d * t * t / 4.0;
  double s = std::sin(0.5 * d * t);
  return s * s / d;
}

double sin_over(double d, double t) {
  if (std::abs(d) < 1e-8) return t / 2.0;
  return std::sin(d * t) / (2.0 * d);
}

// e^{-z}Ei(z) - e^{z}E1(z)
double vacuum_kernel_combination(double z) {
  if (z > 40.0) {
    // asymptotic: 2 Σ (2k+1)!/z^{2k+2}
    double sum = 0, term = 1.0 / (z * z);
    for (int k = 0; k < 20; ++k) {
      sum += term;
      double next = term * (2 * k + 2) * (2 * k + 3) / (z * z);
      if (next < 1e-18 * sum || next > term) break;
      term = next;
    }
    return 2.0 * sum;
  }
  return std::exp(-z) * boost::math::expint(z) - std::exp(z) * boost::math::expint(1, z);
}

// Lorentzian-like resonance of Im χ: centre and half width.
void resonance(const BathSpec& b, double& center, double& width) {
  double M = b.mass, w0 = b.omega0, g = b.gamma, G = b.cutoff;
  auto X = [&](double w) { return M * (w0 * w0 - w * w) + g * G * w * w / (G * G + w * w); };
  double lo = 0, hi = w0;
  while (X(hi) > 0) hi *= 2;
  for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
    double mid = 0.5 * (lo + hi);
    (X(mid) > 0 ? lo : hi) = mid;
  }
  center = 0.5 * (lo + hi);
  double Y = g * G * G * center / (G * G + center * center);
  width = std::max(Y / (2 * M * center), 1e-9 * w0);
}

std::vector<double> moment_breaks(const BathSpec& b) {
  double c = 0, w = 0;
  resonance(b, c, w);
  std::vector<double> br{c, b.omega0, b.cutoff};
  for (double k : {1.0, 3.0, 10.0, 30.0, 100.0, 300.0}) {
    br.push_back(c - k * w);
    br.push_back(c + k * w);
  }
  if (b.temperature > 0)
    for (double k : {1.0, 10.0, 30.0}) br.push_back(k * b.temperature);
  return br;
}

// coth(ω/2T)·Im χ(ω) / ω · ω, with the ω → 0 limit handled through omega_coth.
double coth_im_chi(double w, const BathSpec& b) {
  double G = b.cutoff, g = b.gamma, M = b.mass, w0 = b.omega0;
  double lor = G * G / (G * G + w * w);
  double X = M * (w0 * w0 - w * w) + g * G * w * w / (G * G + w * w);
  double Y = g * lor * w;
  return omega_coth(w, b.temperature) * (g * lor) / (X * X + Y * Y);
}

}  // namespace

void BathSpec::validate() const {
  if (!finite_nonneg(gamma)) throw Error(ErrorCode::InvalidArgument, "gamma must be >= 0");
  if (!(std::isfinite(cutoff) && cutoff > 0)) throw Error(ErrorCode::InvalidArgument, "Gamma must be > 0");
  if (!finite_nonneg(temperature)) throw Error(ErrorCode::InvalidArgument, "T must be >= 0");
  if (!(std::isfinite(mass) && mass > 0)) throw Error(ErrorCode::InvalidArgument, "mass must be > 0");
  if (!(std::isfinite(omega0) && omega0 > 0)) throw Error(ErrorCode::InvalidArgument, "omega0 must be > 0");
}

double thermal_occupation(double omega, double T) {
  if (T <= 0) return 0.0;
  return 1.0 / std::expm1(omega / T);
}

double omega_coth(double omega, double T) {
  if (T <= 0) return omega;
  double x = omega / (2.0 * T);
  if (x < 5e-5) return 2.0 * T * (1.0 + x * x / 3.0);
  if (x > 20.0) return omega;
  return omega / std::tanh(x);
}

double spectral_density(double omega, const BathSpec& b) {
  double G = b.cutoff;
  return b.gamma * omega * G * G / (omega * omega + G * G);
}

double omega_max(const BathSpec& b, const QuadratureConfig& qc) {
  return qc.omega_max_factor * std::max({b.cutoff, b.omega0, b.temperature});
}

double kernel_L(double t, const BathSpec& b) {
  return 0.5 * b.gamma * b.cutoff * b.cutoff * std::exp(-b.cutoff * t);
}

double kernel_L_quadrature(double t, const BathSpec& b, const QuadratureConfig& qc) {
  if (t <= 0) return 0.0;
  auto f = [&](double w) { return spectral_density(w, b); };
  return fourier_sin(f, t, qc).value / kPi;
}

double kernel_K(double t, const BathSpec& b, const QuadratureConfig& qc) {
  if (!(t > 0)) throw Error(ErrorCode::DivergentAtZero, "K(t) diverges at t = 0");
  double G = b.cutoff, T = b.temperature;
  double vac = -b.gamma * G * G / (2 * kPi) * vacuum_kernel_combination(G * t);
  if (T <= 0 || b.gamma == 0) return vac;
  // (2/π)∫J n cos ωt dω with ω = T s
  auto f = [&](double s) {
    double phi = s < 1e-12 ? 1.0 - 0.5 * s : s / std::expm1(s);
    return b.gamma * T * G * G / (T * T * s * s + G * G) * phi;
  };
  double tau = T * t;
  double th;
  if (tau < 1e-3) {
    auto fc = [&](double s) { return f(s) * std::cos(tau * s); };
    static constexpr double kBreaks[] = {1.0, 5.0, 20.0};
    th = integrate(fc, 0.0, 60.0, qc, kBreaks).value;
  } else {
    th = fourier_cos(f, tau, qc).value;
  }
  return vac + 2.0 * T * th / kPi;
}

double kernel_K_quadrature(double t, const BathSpec& b, const QuadratureConfig& qc) {
  if (!(t > 0)) throw Error(ErrorCode::DivergentAtZero, "K(t) diverges at t = 0");
  double G = b.cutoff;
  auto f = [&](double w) { return b.gamma * G * G / (w * w + G * G) * omega_coth(w, b.temperature); };
  return fourier_cos(f, t, qc).value / kPi;
}

double hpz_gamma_p(double t, const BathSpec& b) {
  double G = b.cutoff, w0 = b.omega0;
  double pre = b.gamma * G * G / (b.mass * (G * G + w0 * w0));
  return pre * (1.0 - std::exp(-G * t) * (std::cos(w0 * t) + (G / w0) * std::sin(w0 * t)));
}

double hpz_delta_omega_sq(double t, const BathSpec& b) {
  double G = b.cutoff, w0 = b.omega0;
  double pre = b.gamma * G * G / (b.mass * (G * G + w0 * w0));
  return b.gamma * G / b.mass -
         pre * (G - std::exp(-G * t) * (G * std::cos(w0 * t) - w0 * std::sin(w0 * t)));
}

HpzCoefficients hpz_coefficients(double t, const BathSpec& b, const QuadratureConfig& qc) {
  if (!(t >= 0)) throw Error(ErrorCode::InvalidArgument, "t must be >= 0");
  HpzCoefficients c;
  c.gamma_p = hpz_gamma_p(t, b);
  c.delta_omega_sq = hpz_delta_omega_sq(t, b);
  if (t == 0 || b.gamma == 0) return c;

  const double w0 = b.omega0, G = b.cutoff, T = b.temperature;
  auto g = [&](double w) { return b.gamma * G * G / (w * w + G * G) * omega_coth(w, T); };
  const double W = omega_max(b, qc);

  std::vector<double> br{w0, w0 - 1.0 / t, w0 + 1.0 / t, G};
  if (T > 0) br.push_back(T);
  double period = 2 * kPi / t;
  double step = std::min(period, W / 8);
  for (double x = step; x < W; x += step) br.push_back(x);

  auto fc = [&](double w) { return g(w) * (sin_over(w - w0, t) + std::sin((w + w0) * t) / (2 * (w + w0))); };
  auto fs = [&](double w) { return g(w) * (one_minus_cos_over(w0 - w, t) + one_minus_cos_over(w0 + w, t)); };
  double ic = integrate(fc, 0.0, W, qc, br).value;
  double is = integrate(fs, 0.0, W, qc, br).value;

  // Tail ω = W + u; phases of the sum and difference frequencies at ω = W.
  double p1 = (W - w0) * t, p2 = (W + w0) * t;
  double c1 = std::cos(p1), s1 = std::sin(p1), c2 = std::cos(p2), s2 = std::sin(p2);
  auto dm = [&](double u) { return 1.0 / (2 * (W + u - w0)); };
  auto dp = [&](double u) { return 1.0 / (2 * (W + u + w0)); };
  auto tc_sin = [&](double u) { return g(W + u) * (c1 * dm(u) + c2 * dp(u)); };
  auto tc_cos = [&](double u) { return g(W + u) * (s1 * dm(u) + s2 * dp(u)); };
  auto ts_cos = [&](double u) { return g(W + u) * (c1 * dm(u) - c2 * dp(u)); };
  auto ts_sin = [&](double u) { return -g(W + u) * (s1 * dm(u) - s2 * dp(u)); };
  auto ts_flat = [&](double w) { return -g(w) * w0 / (w * w - w0 * w0); };
  ic += fourier_sin(tc_sin, t, qc).value + fourier_cos(tc_cos, t, qc).value;
  is += fourier_cos(ts_cos, t, qc).value + fourier_sin(ts_sin, t, qc).value +
        integrate_to_infinity(ts_flat, W, qc).value;

  c.d_p = ic / kPi;
  c.d_qp = is / (kPi * b.mass * w0);
  return c;
}

HpzCoefficients hpz_stationary_coefficients(const BathSpec& b, const QuadratureConfig& qc) {
  const double w0 = b.omega0, G = b.cutoff, T = b.temperature;
  HpzCoefficients c;
  double pre = b.gamma * G * G / (b.mass * (G * G + w0 * w0));
  c.gamma_p = pre;
  c.delta_omega_sq = b.gamma * G * w0 * w0 / (b.mass * (G * G + w0 * w0));
  c.d_p = 0.5 * b.gamma * G * G / (w0 * w0 + G * G) * omega_coth(w0, T);
  if (b.gamma == 0) return c;

  auto g = [&](double w) { return b.gamma * G * G / (w * w + G * G) * omega_coth(w, T); };
  auto h = [&](double w) { return g(w) / (w0 + w); };
  const double h0 = h(w0);
  auto near = [&](double w) { return (h(w) - h0) / (w0 - w); };
  auto far = [&](double w) { return g(w) / (w0 * w0 - w * w); };
  double W = std::max(omega_max(b, qc), 4 * w0);
  double br[] = {w0, G, T > 0 ? T : w0};
  double pv = integrate(near, 0.0, 2 * w0, qc, br).value + integrate(far, 2 * w0, W, qc, br).value +
              integrate_to_infinity(far, W, qc).value;
  c.d_qp = pv / (kPi * b.mass);
  return c;
}

double susceptibility_im(double omega, const BathSpec& b) {
  double G = b.cutoff, g = b.gamma, M = b.mass, w0 = b.omega0;
  double X = M * (w0 * w0 - omega * omega) + g * G * omega * omega / (G * G + omega * omega);
  double Y = g * G * G * omega / (G * G + omega * omega);
  double den = X * X + Y * Y;
  return den > 0 ? Y / den : 0.0;
}

RMoments stationary_R_moments(const BathSpec& b, const QuadratureConfig& qc) {
  b.validate();
  RMoments m;
  const double M = b.mass, w0 = b.omega0;
  if (b.gamma == 0) {
    double cth = omega_coth(w0, b.temperature) / w0;
    m.r2 = cth / (2 * M * w0);
    m.p2 = M * w0 * cth / 2;
    return m;
  }
  auto br = moment_breaks(b);
  double W = omega_max(b, qc);
  auto fr = [&](double w) { return coth_im_chi(w, b); };
  auto fp = [&](double w) { return M * M * w * w * coth_im_chi(w, b); };
  m.r2 = (integrate(fr, 0.0, W, qc, br).value + integrate_to_infinity(fr, W, qc).value) / kPi;
  m.p2 = (integrate(fp, 0.0, W, qc, br).value + integrate_to_infinity(fp, W, qc).value) / kPi;
  return m;
}

double stationary_criterion_integral(const BathSpec& b, const QuadratureConfig& qc) {
  b.validate();
  const double w0 = b.omega0;
  const double occ = omega_coth(w0, b.temperature) / w0;  // 2n̄+1
  if (b.gamma == 0) return w0 * occ * occ / (2 * b.mass * w0);
  auto br = moment_breaks(b);
  double W = omega_max(b, qc);
  auto f = [&](double w) { return occ * coth_im_chi(w, b); };
  return w0 * (integrate(f, 0.0, W, qc, br).value + integrate_to_infinity(f, W, qc).value) / kPi;
}

}  // namespace qbm
