#pragma once

#include <cmath>
#include <random>

#include "qbm/gaussian_states.hpp"

namespace qbm::testing {

inline Mat4 local_op(const Mat2& s1, const Mat2& s2) {
  Mat4 s = Mat4::Zero();
  s.block<2, 2>(0, 0) = s1;
  s.block<2, 2>(2, 2) = s2;
  return s;
}

inline Mat2 rotation(double th) {
  Mat2 r;
  r << std::cos(th), std::sin(th), -std::sin(th), std::cos(th);
  return r;
}

inline Mat2 squeezer(double r) {
  Mat2 s = Mat2::Zero();
  s(0, 0) = std::exp(r);
  s(1, 1) = std::exp(-r);
  return s;
}

inline Mat4 beam_splitter(double phi) {
  double c = std::cos(phi), s = std::sin(phi);
  Mat4 b = Mat4::Zero();
  b(0, 0) = c; b(0, 2) = s; b(2, 0) = -s; b(2, 2) = c;
  b(1, 1) = c; b(1, 3) = s; b(3, 1) = -s; b(3, 3) = c;
  return b;
}

inline Mat4 two_mode_squeezer(double r) {
  double ch = std::cosh(r), sh = std::sinh(r);
  Mat4 t = Mat4::Zero();
  t(0, 0) = t(1, 1) = t(2, 2) = t(3, 3) = ch;
  t(0, 2) = t(2, 0) = sh;
  t(1, 3) = t(3, 1) = -sh;
  return t;
}

class StateSampler {
 public:
  explicit StateSampler(unsigned seed) : rng_(seed) {}

  double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng_); }

  Mat4 random_local() {
    return local_op(rotation(uniform(0, 6.3)) * squeezer(uniform(-1, 1)) * rotation(uniform(0, 6.3)),
                    rotation(uniform(0, 6.3)) * squeezer(uniform(-1, 1)) * rotation(uniform(0, 6.3)));
  }

  // S·diag(ν1,ν1,ν2,ν2)·Sᵀ with S from local ops, a mixing rotation and a two-mode squeezer.
  CovarianceMatrix physical() {
    std::exponential_distribution<double> ex(2.0);
    double n1 = 0.5 + ex(rng_), n2 = 0.5 + ex(rng_);
    Mat4 d = Mat4::Zero();
    d(0, 0) = d(1, 1) = n1;
    d(2, 2) = d(3, 3) = n2;
    Mat4 s = random_local() * beam_splitter(uniform(0, 3.2)) * two_mode_squeezer(uniform(-1.2, 1.2)) *
             random_local();
    Mat4 v = s * d * s.transpose();
    return CovarianceMatrix(0.5 * (v + v.transpose()));
  }

  CovarianceMatrix standard() {
    for (;;) {
      try {
        return CovarianceMatrix::from_standard_form(standard_form(physical()));
      } catch (const std::exception&) {
      }
    }
  }

  // a = b; c+ = -c- when anti is set.
  CovarianceMatrix symmetric_standard(bool anti) {
    for (;;) {
      double a = uniform(0.5, 3.0);
      double cp = uniform(-a, a);
      double cm = anti ? -cp : uniform(-a, a);
      auto v = CovarianceMatrix::from_standard_form({a, a, cp, cm});
      if (is_physical(v, 0.0)) return v;
    }
  }

 private:
  std::mt19937_64 rng_;
};

inline CovarianceMatrix transform(const Mat4& s, const CovarianceMatrix& v) {
  Mat4 m = s * v.matrix() * s.transpose();
  return CovarianceMatrix(0.5 * (m + m.transpose()));
}

}  // namespace qbm::testing
