#include "qbm/gaussian_states.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "qbm/csv.hpp"
#include "qbm/errors.hpp"

namespace qbm {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double det2(const Mat2& m) { return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0); }

Mat4 symplectic_form() {
  Mat4 om = Mat4::Zero();
  om(0, 1) = 1;
  om(1, 0) = -1;
  om(2, 3) = 1;
  om(3, 2) = -1;
  return om;
}

// ν̃± from Δ̃ and detV; the small root via Vieta to avoid cancellation.
void tilde_roots(double delta, double det_v, double tol, double& nu_m, double& nu_p) {
  double disc = delta * delta - 4.0 * det_v;
  if (disc < -tol * std::max(1.0, delta * delta))
    throw Error(ErrorCode::NumericDomain, "negative discriminant in symplectic spectrum");
  disc = std::max(disc, 0.0);
  double big = 0.5 * (delta + std::sqrt(disc));
  if (!(big > 0) || !(det_v > 0))
    throw Error(ErrorCode::NumericDomain, "non-positive symplectic invariant");
  nu_p = std::sqrt(big);
  nu_m = std::sqrt(det_v / big);
}

}  // namespace

CovarianceMatrix::CovarianceMatrix() : v_(0.5 * Mat4::Identity()) {}

CovarianceMatrix::CovarianceMatrix(const Mat4& v, double sym_tol) {
  if (!v.allFinite()) throw Error(ErrorCode::InvalidArgument, "covariance matrix has non-finite entries");
  double asym = (v - v.transpose()).cwiseAbs().maxCoeff();
  if (asym > sym_tol)
    throw Error(ErrorCode::InvalidArgument,
                "covariance matrix not symmetric (max asymmetry " + format_double(asym) + ")");
  v_ = 0.5 * (v + v.transpose());
}

CovarianceMatrix CovarianceMatrix::vacuum() { return CovarianceMatrix(); }

CovarianceMatrix CovarianceMatrix::from_standard_form(const StandardFormElements& s) {
  Mat4 v = Mat4::Zero();
  v(0, 0) = v(1, 1) = s.a;
  v(2, 2) = v(3, 3) = s.b;
  v(0, 2) = v(2, 0) = s.c_plus;
  v(1, 3) = v(3, 1) = s.c_minus;
  return CovarianceMatrix(v);
}

bool CovarianceMatrix::is_positive_definite() const {
  Eigen::LLT<Mat4> llt(v_);
  return llt.info() == Eigen::Success;
}

Blocks blocks(const CovarianceMatrix& V) {
  const Mat4& v = V.matrix();
  Blocks b;
  b.A = v.block<2, 2>(0, 0);
  b.B = v.block<2, 2>(2, 2);
  b.C = v.block<2, 2>(0, 2);
  b.det_a = det2(b.A);
  b.det_b = det2(b.B);
  b.det_c = det2(b.C);
  b.det_v = v.partialPivLu().determinant();
  return b;
}

Eigen::Vector2d symplectic_eigenvalues(const CovarianceMatrix& V) {
  const Mat4& v = V.matrix();
  Eigen::SelfAdjointEigenSolver<Mat4> es(v);
  if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() <= 0)
    return {kNaN, kNaN};
  Mat4 root = es.eigenvectors() * es.eigenvalues().cwiseSqrt().asDiagonal() *
              es.eigenvectors().transpose();
  Mat4 om = symplectic_form();
  Mat4 m = root * om.transpose() * v * om * root;
  m = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Mat4> ms(m, Eigen::EigenvaluesOnly);
  auto ev = ms.eigenvalues();
  double lo = 0.5 * (std::max(ev(0), 0.0) + std::max(ev(1), 0.0));
  double hi = 0.5 * (ev(2) + ev(3));
  return {std::sqrt(lo), std::sqrt(hi)};
}

bool is_physical(const CovarianceMatrix& V, double tol) {
  if (!V.is_positive_definite()) return false;
  double nu = symplectic_eigenvalues(V)(0);
  return nu >= 0.5 - tol;
}

void require_physical(const CovarianceMatrix& V, double tol) {
  if (!V.is_positive_definite())
    throw Error(ErrorCode::UnphysicalState, "covariance matrix not positive definite");
  double nu = symplectic_eigenvalues(V)(0);
  if (!(nu >= 0.5 - tol))
    throw Error(ErrorCode::UnphysicalState,
                "smallest symplectic eigenvalue " + format_double(nu) + " below 1/2");
}

double simon_criterion(const CovarianceMatrix& V, double tol) {
  require_physical(V, tol);
  return unchecked::simon_criterion(V);
}

SymplecticSpectrum symplectic_spectrum(const CovarianceMatrix& V, double tol) {
  require_physical(V, tol);
  Blocks b = blocks(V);
  SymplecticSpectrum s;
  s.delta_v = b.det_a + b.det_b + 2.0 * b.det_c;
  s.delta_v_tilde = b.det_a + b.det_b - 2.0 * b.det_c;
  auto nu = symplectic_eigenvalues(V);
  s.nu_minus = nu(0);
  s.nu_plus = nu(1);
  tilde_roots(s.delta_v_tilde, b.det_v, 1e3 * std::numeric_limits<double>::epsilon(),
              s.nu_tilde_minus, s.nu_tilde_plus);
  return s;
}

double log_negativity(const CovarianceMatrix& V, double tol) {
  double nu = symplectic_spectrum(V, tol).nu_tilde_minus;
  return std::max(0.0, -std::log(2.0 * nu));
}

DuanSum duan_sum(const CovarianceMatrix& V, double a_param) {
  if (a_param == 0.0) throw Error(ErrorCode::ZeroParameter, "Duan parameter a must be nonzero");
  const Mat4& v = V.matrix();
  double a2 = a_param * a_param;
  double sg = a_param > 0 ? 1.0 : -1.0;
  double uu = a2 * v(0, 0) + v(2, 2) / a2 + 2.0 * sg * v(0, 2);
  double vv = a2 * v(1, 1) + v(3, 3) / a2 - 2.0 * sg * v(1, 3);
  return {uu + vv, a2 + 1.0 / a2};
}

DuanOptimum duan_sum_optimal(const CovarianceMatrix& V) {
  // lhs - rhs = α a² + β/a² + 2 sgn(a) κ with α, β ≥ 0 for physical marginals.
  const Mat4& v = V.matrix();
  double alpha = v(0, 0) + v(1, 1) - 1.0;
  double beta = v(2, 2) + v(3, 3) - 1.0;
  double kappa = v(0, 2) - v(1, 3);
  double sg = kappa > 0 ? -1.0 : 1.0;
  DuanOptimum o;
  if (alpha > 0 && beta > 0) {
    o.a_param = sg * std::pow(beta / alpha, 0.25);
    o.margin = 2.0 * std::sqrt(alpha * beta) - 2.0 * std::abs(kappa);
  } else {
    o.a_param = sg * (alpha > 0 ? 1e-8 : 1e8);
    o.margin = -2.0 * std::abs(kappa);
  }
  return o;
}

double duan_product(const CovarianceMatrix& V, double tol) {
  require_physical(V, tol);
  const Mat4& v = V.matrix();
  double sum_q = v(0, 0) + v(2, 2) + 2.0 * v(0, 2);
  double dif_q = v(0, 0) + v(2, 2) - 2.0 * v(0, 2);
  double sum_p = v(1, 1) + v(3, 3) + 2.0 * v(1, 3);
  double dif_p = v(1, 1) + v(3, 3) - 2.0 * v(1, 3);
  return std::min(sum_q * dif_p, dif_q * sum_p);
}

PurityTriple purities(const CovarianceMatrix& V, double tol) {
  require_physical(V, tol);
  Blocks b = blocks(V);
  PurityTriple p;
  p.mu = std::min(1.0, 1.0 / (4.0 * std::sqrt(b.det_v)));
  p.mu1 = std::min(1.0, 1.0 / (2.0 * std::sqrt(b.det_a)));
  p.mu2 = std::min(1.0, 1.0 / (2.0 * std::sqrt(b.det_b)));
  return p;
}

PurityRegion purity_region(const PurityTriple& p) {
  constexpr double rel = 1e-12;
  double m1 = p.mu1, m2 = p.mu2, mu = p.mu;
  double prod = m1 * m2;
  if (mu < prod * (1.0 - rel)) return PurityRegion::Unphysical;
  double sep_hi = prod / (m1 + m2 - prod);
  if (mu <= sep_hi * (1.0 + rel)) return PurityRegion::Separable;
  double ent_lo = prod / std::sqrt(m1 * m1 + m2 * m2 - prod * prod);
  if (mu <= ent_lo * (1.0 + rel)) return PurityRegion::Coexistence;
  double den = prod - std::abs(m1 - m2);
  if (m1 != m2 && den > 0 && mu > (prod / den) * (1.0 + rel)) return PurityRegion::Unphysical;
  return PurityRegion::Entangled;
}

const char* to_string(PurityRegion r) {
  switch (r) {
    case PurityRegion::Separable: return "SEPARABLE";
    case PurityRegion::Coexistence: return "COEXISTENCE";
    case PurityRegion::Entangled: return "ENTANGLED";
    case PurityRegion::Unphysical: return "UNPHYSICAL";
  }
  return "?";
}

double entropy_function(double nu) {
  double lo = nu - 0.5;
  if (lo <= 0) return 0.0;
  double hi = nu + 0.5;
  return hi * std::log(hi) - lo * std::log(lo);
}

double entropy_from_purity(double mu) {
  if (mu >= 1.0) return 0.0;
  return ((1.0 + mu) * std::log1p(mu) - (1.0 - mu) * std::log1p(-mu)) / (2.0 * mu) -
         std::log(2.0 * mu);
}

Entropies von_neumann_entropies(const CovarianceMatrix& V, double tol) {
  if (!V.is_positive_definite())
    throw Error(ErrorCode::NumericDomain, "entropy of a non positive definite matrix");
  auto nu = symplectic_eigenvalues(V);
  if (!(nu(0) >= 0.5 - tol))
    throw Error(ErrorCode::NumericDomain,
                "entropy undefined for nu_minus = " + format_double(nu(0)));
  Blocks b = blocks(V);
  Entropies e;
  e.total = entropy_function(nu(0)) + entropy_function(nu(1));
  e.mode1 = entropy_from_purity(std::min(1.0, 1.0 / (2.0 * std::sqrt(b.det_a))));
  e.mode2 = entropy_from_purity(std::min(1.0, 1.0 / (2.0 * std::sqrt(b.det_b))));
  return e;
}

double mutual_information(const CovarianceMatrix& V, double tol) {
  Entropies e = von_neumann_entropies(V, tol);
  return std::max(0.0, e.mode1 + e.mode2 - e.total);
}

StandardFormElements standard_form(const CovarianceMatrix& V, double tol) {
  require_physical(V, tol);
  const Mat4& v = V.matrix();
  bool already = v(0, 1) == 0 && v(2, 3) == 0 && v(0, 3) == 0 && v(1, 2) == 0 &&
                 v(0, 0) == v(1, 1) && v(2, 2) == v(3, 3);
  if (already) return {v(0, 0), v(2, 2), v(0, 2), v(1, 3)};

  Blocks b = blocks(V);
  StandardFormElements s;
  s.a = std::sqrt(b.det_a);
  s.b = std::sqrt(b.det_b);
  double ab = s.a * s.b;
  double dc2 = b.det_c * b.det_c;
  double sum = (ab * ab + dc2 - b.det_v) / ab;
  double disc = sum * sum - 4.0 * dc2;
  if (disc < -1e-9 * std::max(1.0, sum * sum))
    throw Error(ErrorCode::DegenerateForm, "no real standard form");
  disc = std::max(disc, 0.0);
  double x = 0.5 * (sum + std::sqrt(disc));
  double y = x > 0 ? dc2 / x : 0.0;
  s.c_plus = std::sqrt(std::max(x, 0.0));
  s.c_minus = std::sqrt(std::max(y, 0.0));
  if (b.det_c < 0) s.c_minus = -s.c_minus;
  return s;
}

SeparabilityVerdict separability_verdict(const CovarianceMatrix& V, double a_param, double tol) {
  SeparabilityVerdict r;
  SymplecticSpectrum sp = symplectic_spectrum(V, tol);
  r.simon_S = unchecked::simon_criterion(V);
  r.log_negativity = std::max(0.0, -std::log(2.0 * sp.nu_tilde_minus));
  r.is_entangled_ppt = sp.nu_tilde_minus < 0.5;
  r.duan_sum_lhs = duan_sum(V, a_param).lhs;
  r.duan_product_lhs = duan_product(V, tol);
  r.purity_region = purity_region(purities(V, tol));
  return r;
}

namespace unchecked {

double nu_tilde_minus(const CovarianceMatrix& V) {
  if (!V.is_positive_definite()) return kNaN;
  Blocks b = blocks(V);
  double nm = kNaN, np = kNaN;
  try {
    tilde_roots(b.det_a + b.det_b - 2.0 * b.det_c, b.det_v, 1e-6, nm, np);
  } catch (const Error&) {
    return kNaN;
  }
  return nm;
}

double simon_criterion(const CovarianceMatrix& V) {
  Blocks b = blocks(V);
  return b.det_v - 0.25 * (b.det_a + b.det_b + 2.0 * std::abs(b.det_c)) + 1.0 / 16.0;
}

}  // namespace unchecked

CovarianceMatrix read_covariance(std::istream& in) {
  Mat4 v;
  std::string line;
  int row = 0;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::vector<std::string> tok;
    std::string t;
    while (ls >> t) tok.push_back(t);
    if (tok.empty()) continue;
    if (row >= 4 || tok.size() != 4)
      throw Error(ErrorCode::InvalidArgument, "covariance text must be 4 rows of 4 numbers");
    for (int j = 0; j < 4; ++j) v(row, j) = parse_double(tok[j]);
    ++row;
  }
  if (row != 4) throw Error(ErrorCode::InvalidArgument, "covariance text must be 4 rows of 4 numbers");
  CovarianceMatrix V(v, 1e-9);
  require_physical(V);
  return V;
}

void write_covariance(std::ostream& out, const CovarianceMatrix& V) {
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      if (j) out << ' ';
      out << format_double(V(i, j));
    }
    out << '\n';
  }
}

}  // namespace qbm
