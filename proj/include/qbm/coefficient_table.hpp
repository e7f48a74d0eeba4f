#pragma once

#include <vector>

#include "qbm/bath_kernels.hpp"

namespace qbm {

// HPZ coefficients on [0, t_max]. γ_p and δΩ² are closed forms; D_p and D_qp are
// evaluated directly for t < t_direct and beyond that accumulated from K(t) by
// Simpson's rule on a uniform node grid with cubic Hermite interpolation between
// nodes. Immutable after construction.
class CoefficientTable {
 public:
  CoefficientTable(const BathSpec& bath, double t_max, const QuadratureConfig& qc, bool exact = false);

  HpzCoefficients at(double t) const;

  double t_max() const { return t_max_; }
  double node_spacing() const { return h_; }
  std::size_t node_count() const { return d_p_.size(); }
  // Time after which the kernel has decayed and D_p, D_qp are held constant; t_max if never.
  double frozen_after() const { return t_frozen_; }

 private:
  BathSpec bath_;
  QuadratureConfig qc_;
  bool exact_;
  double t_max_, h_ = 0, t_direct_ = 0, t_frozen_;
  std::vector<double> d_p_, d_qp_, slope_p_, slope_qp_;
};

}  // namespace qbm
