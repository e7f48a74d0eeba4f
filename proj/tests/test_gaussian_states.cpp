#include <doctest.h>

#include <cmath>
#include <sstream>

#include "qbm/errors.hpp"
#include "qbm/gaussian_states.hpp"
#include "support/random_states.hpp"

using namespace qbm;
using doctest::Approx;

namespace {

CovarianceMatrix tmsv(double xi) {
  double a = std::cosh(2 * xi) / 2, c = std::sinh(2 * xi) / 2;
  return CovarianceMatrix::from_standard_form({a, a, c, -c});
}

CovarianceMatrix thermal_product(double nbar) {
  double a = (2 * nbar + 1) / 2;
  return CovarianceMatrix::from_standard_form({a, a, 0, 0});
}

}  // namespace

TEST_CASE("blocks of vacuum and squeezed vacuum") {
  auto b = blocks(CovarianceMatrix::vacuum());
  CHECK(b.det_a == Approx(0.25));
  CHECK(b.det_b == Approx(0.25));
  CHECK(b.det_c == Approx(0.0));
  CHECK(b.det_v == Approx(1.0 / 16));

  double a = std::cosh(2.0) / 2, c = std::sinh(2.0) / 2;
  auto s = blocks(tmsv(1.0));
  CHECK(s.det_a == Approx(a * a).epsilon(1e-12));
  CHECK(s.det_c == Approx(-c * c).epsilon(1e-12));
  CHECK(s.det_v == Approx(1.0 / 16).epsilon(1e-10));
  CHECK(s.det_a == Approx(3.538530).epsilon(1e-6));
  CHECK(s.det_c == Approx(-3.288532).epsilon(1e-6));
}

TEST_CASE("symmetry is enforced on construction") {
  Mat4 m = 0.5 * Mat4::Identity();
  m(0, 2) = 0.1;
  m(2, 0) = 0.1 + 5e-10;
  CovarianceMatrix v(m);
  CHECK(v(0, 2) == v(2, 0));
  m(2, 0) = 0.2;
  CHECK_THROWS_AS(CovarianceMatrix{m}, Error);
}

TEST_CASE("Simon function values") {
  CHECK(simon_criterion(CovarianceMatrix::vacuum()) == Approx(0.0).epsilon(1e-14));
  CHECK(simon_criterion(tmsv(1.0)) == Approx(0.125 - std::cosh(4.0) / 8).epsilon(1e-10));
  double a = 1.5;
  CHECK(simon_criterion(thermal_product(1.0)) == Approx(std::pow(a * a - 0.25, 2)).epsilon(1e-12));
}

TEST_CASE("unphysical state is rejected") {
  Mat4 m = 0.3 * Mat4::Identity();
  CovarianceMatrix v(m);
  CHECK_THROWS_AS(simon_criterion(v), Error);
  try {
    purities(v);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnphysicalState);
  }
}

TEST_CASE("symplectic spectrum of squeezed vacuum") {
  auto sp = symplectic_spectrum(tmsv(1.0));
  CHECK(sp.nu_tilde_minus == Approx(std::exp(-2.0) / 2).epsilon(1e-12));
  CHECK(sp.nu_tilde_plus == Approx(std::exp(2.0) / 2).epsilon(1e-12));
  CHECK(sp.nu_minus == Approx(0.5).epsilon(1e-10));
  CHECK(sp.nu_plus == Approx(0.5).epsilon(1e-10));
  auto vac = symplectic_spectrum(CovarianceMatrix::vacuum());
  CHECK(vac.nu_tilde_minus == Approx(0.5));
  CHECK(vac.nu_tilde_plus == Approx(0.5));
}

TEST_CASE("log negativity of squeezed vacuum is twice the squeezing") {
  for (double xi : {0.1, 0.5, 1.0, 2.0}) CHECK(std::abs(log_negativity(tmsv(xi)) - 2 * xi) < 1e-10);
  CHECK(log_negativity(CovarianceMatrix::vacuum()) == 0.0);
}

TEST_CASE("Duan sum") {
  auto vac = duan_sum(CovarianceMatrix::vacuum(), 1.0);
  CHECK(vac.lhs == Approx(2.0));
  CHECK(vac.rhs == Approx(2.0));
  // a < 0 selects the (q1 - q2, p1 + p2) pair, which carries the squeezing of this state.
  auto sq = duan_sum(tmsv(1.0), -1.0);
  CHECK(sq.lhs == Approx(2 * std::exp(-2.0)).epsilon(1e-12));
  CHECK(sq.violated());
  CHECK(duan_sum(tmsv(1.0), 1.0).lhs == Approx(2 * std::exp(2.0)).epsilon(1e-12));
  CHECK(duan_sum(thermal_product(1.0), 1.0).lhs == Approx(6.0));
  CHECK_THROWS_AS(duan_sum(vac.lhs > 0 ? CovarianceMatrix::vacuum() : tmsv(1), 0.0), Error);
}

TEST_CASE("Duan product") {
  CHECK(duan_product(CovarianceMatrix::vacuum()) == Approx(1.0));
  CHECK(duan_product(tmsv(1.0)) == Approx(std::exp(-4.0)).epsilon(1e-12));
}

TEST_CASE("purities") {
  auto v = purities(CovarianceMatrix::vacuum());
  CHECK(v.mu == Approx(1.0));
  CHECK(v.mu1 == Approx(1.0));
  auto s = purities(tmsv(1.0));
  CHECK(s.mu == Approx(1.0).epsilon(1e-9));
  CHECK(s.mu1 == Approx(1 / std::cosh(2.0)).epsilon(1e-12));
  auto t = purities(thermal_product(1.0));
  CHECK(t.mu == Approx(1.0 / 9).epsilon(1e-12));
  CHECK(t.mu2 == Approx(1.0 / 3).epsilon(1e-12));
}

TEST_CASE("purity regions") {
  CHECK(purity_region(purities(tmsv(1.0))) == PurityRegion::Entangled);
  CHECK(purity_region(purities(thermal_product(1.0))) == PurityRegion::Separable);
  CHECK(purity_region({0.5 * 0.25, 0.5, 0.5}) == PurityRegion::Unphysical);
}

TEST_CASE("entropies") {
  auto vac = von_neumann_entropies(CovarianceMatrix::vacuum());
  CHECK(vac.total == Approx(0.0));
  CHECK(vac.mode1 == Approx(0.0));
  double ch2 = std::pow(std::cosh(1.0), 2), sh2 = std::pow(std::sinh(1.0), 2);
  double s1 = ch2 * std::log(ch2) - sh2 * std::log(sh2);
  auto sq = von_neumann_entropies(tmsv(1.0));
  CHECK(sq.total == Approx(0.0).epsilon(1e-6));
  CHECK(sq.mode1 == Approx(s1).epsilon(1e-12));
  CHECK(sq.mode2 == Approx(s1).epsilon(1e-12));
  CHECK(s1 == Approx(1.619822).epsilon(1e-6));
  CHECK(entropy_function(1.5) == Approx(2 * std::log(2.0)).epsilon(1e-14));
  CHECK(entropy_function(0.5) == 0.0);
  CHECK(mutual_information(tmsv(1.0)) == Approx(2 * s1).epsilon(1e-6));
  CHECK(mutual_information(CovarianceMatrix::vacuum()) == Approx(0.0));
}

TEST_CASE("standard form") {
  auto s = standard_form(tmsv(1.0));
  CHECK(s.a == Approx(1.881098).epsilon(1e-6));
  CHECK(s.c_plus == Approx(1.813431).epsilon(1e-6));
  CHECK(s.c_minus == Approx(-1.813431).epsilon(1e-6));
  auto v = standard_form(CovarianceMatrix::vacuum());
  CHECK(v.a == 0.5);
  CHECK(v.c_plus == 0.0);

  testing::StateSampler rng(11);
  for (int i = 0; i < 200; ++i) {
    auto V = rng.physical();
    auto st = standard_form(V);
    auto W = CovarianceMatrix::from_standard_form(st);
    auto bv = blocks(V), bw = blocks(W);
    CHECK(bw.det_a == Approx(bv.det_a).epsilon(1e-9));
    CHECK(bw.det_c == Approx(bv.det_c).epsilon(1e-8));
    CHECK(bw.det_v == Approx(bv.det_v).epsilon(1e-8));
    auto again = standard_form(W);
    CHECK(std::abs(again.a - st.a) < 1e-12);
    CHECK(std::abs(again.c_minus - st.c_minus) < 1e-12);
  }
}

TEST_CASE("text round trip") {
  testing::StateSampler rng(3);
  auto V = rng.physical();
  std::stringstream ss;
  write_covariance(ss, V);
  auto W = read_covariance(ss);
  CHECK(W.matrix() == V.matrix());
  std::stringstream bad("1 0 0 0\n0 1 0 0\n0 0 1 0\n");
  CHECK_THROWS_AS(read_covariance(bad), Error);
}

TEST_CASE("PPT forms agree on random states") {
  testing::StateSampler rng(2024);
  int entangled = 0;
  for (int i = 0; i < 10000; ++i) {
    auto V = rng.physical();
    auto sp = symplectic_spectrum(V);
    double S = simon_criterion(V);
    bool by_nu = sp.nu_tilde_minus < 0.5;
    REQUIRE((S < 0) == by_nu);
    REQUIRE((log_negativity(V) > 0) == by_nu);
    auto region = purity_region(purities(V));
    REQUIRE(region != PurityRegion::Unphysical);
    if (by_nu) REQUIRE(region != PurityRegion::Separable);
    else REQUIRE(region != PurityRegion::Entangled);
    entangled += by_nu;
  }
  CHECK(entangled > 1000);
  CHECK(entangled < 9000);
}

TEST_CASE("closed form for partial-transpose eigenvalues") {
  testing::StateSampler rng(5);
  for (int i = 0; i < 500; ++i) {
    auto V = rng.physical();
    auto b = blocks(V);
    auto sp = symplectic_spectrum(V);
    double d = sp.delta_v_tilde;
    double lo2 = sp.nu_tilde_minus * sp.nu_tilde_minus, hi2 = sp.nu_tilde_plus * sp.nu_tilde_plus;
    CHECK(lo2 + hi2 == Approx(d).epsilon(1e-10));
    CHECK(lo2 * hi2 == Approx(b.det_v).epsilon(1e-10));
    double nlo2 = sp.nu_minus * sp.nu_minus, nhi2 = sp.nu_plus * sp.nu_plus;
    CHECK(nlo2 + nhi2 == Approx(sp.delta_v).epsilon(1e-8));
    CHECK(sp.nu_minus <= sp.nu_plus);
    CHECK(sp.nu_tilde_minus <= sp.nu_tilde_plus);
  }
}

TEST_CASE("local symplectic invariance") {
  testing::StateSampler rng(77);
  for (int i = 0; i < 300; ++i) {
    auto V = rng.physical();
    auto W = testing::transform(rng.random_local(), V);
    auto bv = blocks(V), bw = blocks(W);
    CHECK(std::abs(bv.det_a - bw.det_a) < 1e-10 * std::max(1.0, bv.det_a));
    CHECK(std::abs(bv.det_b - bw.det_b) < 1e-10 * std::max(1.0, bv.det_b));
    CHECK(std::abs(bv.det_c - bw.det_c) < 1e-10 * std::max(1.0, std::abs(bv.det_c)));
    CHECK(std::abs(bv.det_v - bw.det_v) < 1e-10 * std::max(1.0, bv.det_v));
    auto sv = symplectic_spectrum(V), sw = symplectic_spectrum(W);
    CHECK(std::abs(sv.nu_tilde_minus - sw.nu_tilde_minus) < 1e-10);
    CHECK(std::abs(sv.nu_tilde_plus - sw.nu_tilde_plus) < 1e-10 * std::max(1.0, sv.nu_tilde_plus));
    CHECK(std::abs(log_negativity(V) - log_negativity(W)) < 1e-10);
    auto pv = purities(V), pw = purities(W);
    CHECK(std::abs(pv.mu - pw.mu) < 1e-10);
    CHECK(std::abs(pv.mu1 - pw.mu1) < 1e-10);
    CHECK(std::abs(pv.mu2 - pw.mu2) < 1e-10);
    CHECK(std::abs(mutual_information(V) - mutual_information(W)) < 1e-10);
  }
}

TEST_CASE("Duan criteria against PPT") {
  testing::StateSampler rng(99);
  int violations = 0;
  for (int i = 0; i < 3000; ++i) {
    auto V = rng.standard();
    bool ppt = symplectic_spectrum(V).nu_tilde_minus < 0.5;
    bool duan = duan_sum_optimal(V).margin < 0;
    if (duan) REQUIRE(ppt);
    violations += duan;
  }
  CHECK(violations > 100);
  for (int i = 0; i < 3000; ++i) {
    auto V = rng.symmetric_standard(true);
    bool ppt = symplectic_spectrum(V).nu_tilde_minus < 0.5;
    auto opt = duan_sum_optimal(V);
    REQUIRE((opt.margin < 0) == ppt);
    auto at = duan_sum(V, opt.a_param);
    CHECK(at.lhs - at.rhs == Approx(opt.margin).epsilon(1e-9).scale(1.0));
  }
  for (int i = 0; i < 3000; ++i) {
    auto V = rng.symmetric_standard(false);
    bool ppt = symplectic_spectrum(V).nu_tilde_minus < 0.5;
    REQUIRE((duan_product(V) < 1.0) == ppt);
  }
}

TEST_CASE("entropy routes agree") {
  testing::StateSampler rng(8);
  for (int i = 0; i < 1000; ++i) {
    auto V = rng.physical();
    auto b = blocks(V);
    auto e = von_neumann_entropies(V);
    CHECK(std::abs(e.mode1 - entropy_function(std::sqrt(b.det_a))) < 1e-9);
    CHECK(std::abs(e.mode2 - entropy_function(std::sqrt(b.det_b))) < 1e-9);
    CHECK(mutual_information(V) >= 0.0);
  }
  for (int i = 0; i < 200; ++i) {
    double a = rng.uniform(0.5, 4), b = rng.uniform(0.5, 4);
    auto V = CovarianceMatrix::from_standard_form({a, b, 0, 0});
    CHECK(mutual_information(V) < 1e-10);
  }
}
