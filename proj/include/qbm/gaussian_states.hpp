#pragma once

#include <Eigen/Dense>
#include <iosfwd>

namespace qbm {

using Mat2 = Eigen::Matrix2d;
using Mat4 = Eigen::Matrix4d;

// Default tolerance for ν₋ ≥ 1/2 checks.
inline constexpr double kTolPhys = 1e-9;

struct StandardFormElements {
  double a = 0.5;
  double b = 0.5;
  double c_plus = 0.0;
  double c_minus = 0.0;
};

// Second moments of (q1, p1, q2, p2), ħ = 1, vacuum = I/2.
class CovarianceMatrix {
 public:
  CovarianceMatrix();
  // Symmetrizes; throws InvalidArgument if |v - vᵀ| exceeds sym_tol.
  explicit CovarianceMatrix(const Mat4& v, double sym_tol = 1e-9);

  static CovarianceMatrix vacuum();
  static CovarianceMatrix from_standard_form(const StandardFormElements& s);

  const Mat4& matrix() const { return v_; }
  double operator()(int i, int j) const { return v_(i, j); }

  bool is_positive_definite() const;

 private:
  Mat4 v_;
};

struct Blocks {
  Mat2 A, B, C;
  double det_a = 0, det_b = 0, det_c = 0, det_v = 0;
};

struct SymplecticSpectrum {
  double nu_minus = 0, nu_plus = 0;
  double nu_tilde_minus = 0, nu_tilde_plus = 0;
  double delta_v = 0, delta_v_tilde = 0;
};

struct PurityTriple {
  double mu = 1, mu1 = 1, mu2 = 1;
};

enum class PurityRegion { Separable, Coexistence, Entangled, Unphysical };

struct Entropies {
  double total = 0, mode1 = 0, mode2 = 0;
};

struct DuanSum {
  double lhs = 0, rhs = 0;
  bool violated() const { return lhs < rhs; }
};

struct DuanOptimum {
  double a_param = 1;
  double margin = 0;  // min over a of lhs - rhs; negative means violation
};

struct SeparabilityVerdict {
  double simon_S = 0;
  double log_negativity = 0;
  double duan_sum_lhs = 0;
  double duan_product_lhs = 0;
  PurityRegion purity_region = PurityRegion::Separable;
  bool is_entangled_ppt = false;
};

Blocks blocks(const CovarianceMatrix& V);

// Symplectic eigenvalues of V (not its partial transpose); no physicality check.
// Stable for degenerate spectra. NaN if V is not positive definite.
Eigen::Vector2d symplectic_eigenvalues(const CovarianceMatrix& V);

// Throws UnphysicalState unless V > 0 and ν₋ ≥ 1/2 - tol.
void require_physical(const CovarianceMatrix& V, double tol = kTolPhys);
bool is_physical(const CovarianceMatrix& V, double tol = kTolPhys);

double simon_criterion(const CovarianceMatrix& V, double tol = kTolPhys);
SymplecticSpectrum symplectic_spectrum(const CovarianceMatrix& V, double tol = kTolPhys);
double log_negativity(const CovarianceMatrix& V, double tol = kTolPhys);

DuanSum duan_sum(const CovarianceMatrix& V, double a_param);
DuanOptimum duan_sum_optimal(const CovarianceMatrix& V);
double duan_product(const CovarianceMatrix& V, double tol = kTolPhys);

PurityTriple purities(const CovarianceMatrix& V, double tol = kTolPhys);
PurityRegion purity_region(const PurityTriple& p);
const char* to_string(PurityRegion r);

// f(ν) = (ν+½)ln(ν+½) − (ν−½)ln(ν−½), f(½) = 0.
double entropy_function(double nu);
// Same quantity in terms of the single-mode purity μ = 1/(2ν).
double entropy_from_purity(double mu);

Entropies von_neumann_entropies(const CovarianceMatrix& V, double tol = kTolPhys);
double mutual_information(const CovarianceMatrix& V, double tol = kTolPhys);

StandardFormElements standard_form(const CovarianceMatrix& V, double tol = kTolPhys);

SeparabilityVerdict separability_verdict(const CovarianceMatrix& V, double a_param = 1.0,
                                         double tol = kTolPhys);

// Unchecked evaluations used for trajectory diagnostics; NaN where undefined.
namespace unchecked {
double nu_tilde_minus(const CovarianceMatrix& V);
double simon_criterion(const CovarianceMatrix& V);
}  // namespace unchecked

// Plain text: 4 rows of 4 numbers, row-major.
CovarianceMatrix read_covariance(std::istream& in);
void write_covariance(std::ostream& out, const CovarianceMatrix& V);

}  // namespace qbm
