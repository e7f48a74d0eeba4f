#pragma once

#include "qbm/quadrature.hpp"

namespace qbm {

// Drude bath coupled to an oscillator of the given mass and frequency (ħ = k = 1).
struct BathSpec {
  double gamma = 0.0;
  double cutoff = 1.0;  // Γ
  double temperature = 0.0;
  double mass = 1.0;
  double omega0 = 1.0;

  void validate() const;
  BathSpec with_mass(double m) const {
    BathSpec b = *this;
    b.mass = m;
    return b;
  }
};

struct HpzCoefficients {
  double gamma_p = 0;
  double delta_omega_sq = 0;
  double d_qp = 0;
  double d_p = 0;
};

// n̄(ω) = 1/(e^{ω/T} - 1); 0 at T = 0.
double thermal_occupation(double omega, double T);
// ω·coth(ω/2T), with the small-argument series and exact T = 0 limit.
double omega_coth(double omega, double T);

double spectral_density(double omega, const BathSpec& bath);
// ω_max = omega_max_factor · max(Γ, ω₀, T).
double omega_max(const BathSpec& bath, const QuadratureConfig& qc);

double kernel_L(double t, const BathSpec& bath);
// (1/π)∫J(ω) sin ωt dω by Fourier quadrature; t > 0.
double kernel_L_quadrature(double t, const BathSpec& bath, const QuadratureConfig& qc);

// (1/π)∫J(ω) coth(ω/2T) cos ωt dω, t > 0; vacuum part in closed form, thermal part by quadrature.
double kernel_K(double t, const BathSpec& bath, const QuadratureConfig& qc);
// Same integral entirely by Fourier quadrature.
double kernel_K_quadrature(double t, const BathSpec& bath, const QuadratureConfig& qc);

double hpz_gamma_p(double t, const BathSpec& bath);
double hpz_delta_omega_sq(double t, const BathSpec& bath);
// All four coefficients; diffusion terms by the frequency-domain single integrals.
HpzCoefficients hpz_coefficients(double t, const BathSpec& bath, const QuadratureConfig& qc);
// t → ∞ limits.
HpzCoefficients hpz_stationary_coefficients(const BathSpec& bath, const QuadratureConfig& qc);

// Im χ(ω) of the damped oscillator with memory γ(t) = γΓe^{-Γt}, mass bath.mass.
double susceptibility_im(double omega, const BathSpec& bath);

struct RMoments {
  double r2 = 0;
  double p2 = 0;
};

// Stationary ⟨R²⟩ and ⟨P_R²⟩ from the fluctuation-dissipation integrals (bath.mass = M).
RMoments stationary_R_moments(const BathSpec& bath, const QuadratureConfig& qc);
// (ω₀/π)∫(2n̄+1) coth(ω/2T) Im χ dω evaluated as one integral.
double stationary_criterion_integral(const BathSpec& bath, const QuadratureConfig& qc);

}  // namespace qbm
