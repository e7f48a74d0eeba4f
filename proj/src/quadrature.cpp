#include "qbm/quadrature.hpp"

#include <map>
#include <memory>
#include <mutex>

namespace qbm {

void QuadratureConfig::validate() const {
  if (!(abs_tol > 0)) throw Error(ErrorCode::Config, "quad.abs_tol must be > 0");
  if (!(rel_tol > 0)) throw Error(ErrorCode::Config, "quad.rel_tol must be > 0");
  if (max_subdivisions < 1) throw Error(ErrorCode::Config, "quad.max_subdivisions must be >= 1");
  if (!(omega_max_factor > 1)) throw Error(ErrorCode::Config, "quad.omega_max_factor must be > 1");
}

namespace detail {

namespace {

// Integrators keep lazily grown node tables behind their own mutex; one per tolerance.
template <class T>
T& cached(double rel_tol) {
  static std::mutex mu;
  static std::map<double, std::unique_ptr<T>> cache;
  double tol = std::min(rel_tol, 1e-9);
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[tol];
  if (!slot) slot = std::make_unique<T>(tol, 8);
  return *slot;
}

}  // namespace

boost::math::quadrature::ooura_fourier_cos<double>& ooura_cos(double rel_tol) {
  return cached<boost::math::quadrature::ooura_fourier_cos<double>>(rel_tol);
}

boost::math::quadrature::ooura_fourier_sin<double>& ooura_sin(double rel_tol) {
  return cached<boost::math::quadrature::ooura_fourier_sin<double>>(rel_tol);
}

}  // namespace detail

}  // namespace qbm
