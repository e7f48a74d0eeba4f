#include <doctest.h>

#include <cmath>
#include <sstream>

#include "qbm/coefficient_table.hpp"
#include "qbm/dynamics.hpp"

using namespace qbm;
using doctest::Approx;

namespace {

BathSpec bath(double gamma, double cutoff, double T) {
  BathSpec b;
  b.gamma = gamma;
  b.cutoff = cutoff;
  b.temperature = T;
  return b;
}

ChannelModel channel(ChannelKind kind, double gamma, double cutoff, double T) {
  ChannelModel m;
  m.kind = kind;
  m.bath = bath(gamma, cutoff, T);
  return m;
}

constexpr ChannelKind kAllKinds[] = {ChannelKind::TwoReservoir, ChannelKind::CommonModified,
                                     ChannelKind::CommonUndampedRel, ChannelKind::MarkovianReference};

double max_abs_diff(const CovarianceMatrix& a, const CovarianceMatrix& b) {
  return (a.matrix() - b.matrix()).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("squeezed initial state") {
  auto v = squeezed_initial_state(1.0);
  CHECK(v(0, 0) == Approx(1.881098).epsilon(1e-6));
  CHECK(v(0, 2) == Approx(1.813431).epsilon(1e-6));
  CHECK(v(1, 3) == Approx(-1.813431).epsilon(1e-6));
  CHECK(max_abs_diff(squeezed_initial_state(0.0), CovarianceMatrix::vacuum()) == 0.0);
  auto nm = normal_modes(v);
  CHECK(nm.com.s_qq == Approx(std::exp(2.0) / 4).epsilon(1e-12));
  CHECK(nm.com.s_qq == Approx(1.847264).epsilon(1e-6));
  CHECK(nm.com.s_pp == Approx(std::exp(-2.0)).epsilon(1e-12));
  CHECK(nm.rel_xx == Approx(std::exp(-2.0)).epsilon(1e-12));
  CHECK(nm.rel_pp == Approx(std::exp(2.0) / 4).epsilon(1e-12));
  CHECK(nm.com.det() == Approx(0.25).epsilon(1e-12));
  CHECK(nm.rel_xx * nm.rel_pp == Approx(0.25).epsilon(1e-12));
}

TEST_CASE("normal-mode reconstruction") {
  for (double xi : {0.0, 0.3, 1.0, 2.0}) {
    auto v = squeezed_initial_state(xi);
    CHECK(max_abs_diff(reconstruct_covariance(normal_modes(v)), v) < 1e-12 * std::cosh(2 * xi));
  }
  NormalModeState nm;
  nm.com = {0.3, 0.05, 1.1};
  nm.rel_xx = 1.2;
  nm.rel_pp = 0.4;
  nm.rel_xp = -0.07;
  auto v = reconstruct_covariance(nm);
  CHECK(v(0, 2) == Approx(0.0).scale(1.0));
  CHECK(v(0, 1) == Approx(0.05 / 2 - 0.07 / 2));
  CHECK(v(2, 3) == Approx(0.05 / 2 - 0.07 / 2));
  CHECK(v(0, 3) == Approx(0.05 / 2 + 0.07 / 2));
  CHECK(v(1, 2) == Approx(0.05 / 2 + 0.07 / 2));
  CHECK(v(1, 1) == Approx(1.1 / 4 + 0.4));
  CHECK(v(1, 3) == Approx(1.1 / 4 - 0.4));
  auto back = normal_modes(v);
  CHECK(back.com.s_qp == Approx(0.05));
  CHECK(back.rel_xp == Approx(-0.07));

  Mat4 m = Mat4::Identity() * 0.5;
  m(0, 0) = 0.9;
  CHECK_THROWS_AS(normal_modes(CovarianceMatrix(m)), Error);
}

TEST_CASE("HPZ moment equations") {
  HpzCoefficients zero;
  auto d = hpz_moment_rhs({0.5, 0.0, 0.5}, zero, 1.0, 1.0);
  CHECK(d.s_qq == 0.0);
  CHECK(d.s_qp == 0.0);
  CHECK(d.s_pp == 0.0);

  HpzCoefficients c{0.3, 0.1, -0.02, 0.4};
  SingleModeMoments a{0.7, 0.1, 0.9}, b{0.2, -0.3, 0.5};
  auto da = hpz_moment_rhs(a, c, 2.0, 1.0), db = hpz_moment_rhs(b, c, 2.0, 1.0);
  auto dab = hpz_moment_rhs({a.s_qq + b.s_qq, a.s_qp + b.s_qp, a.s_pp + b.s_pp}, c, 2.0, 1.0);
  auto d0 = hpz_moment_rhs({0, 0, 0}, c, 2.0, 1.0);
  CHECK(dab.s_qq == Approx(da.s_qq + db.s_qq - d0.s_qq));
  CHECK(dab.s_qp == Approx(da.s_qp + db.s_qp - d0.s_qp));
  CHECK(dab.s_pp == Approx(da.s_pp + db.s_pp - d0.s_pp));

  auto fp = hpz_fixed_point(c, 2.0, 1.0);
  CHECK(lyapunov_residual(fp, c, 2.0, 1.0) < 1e-15);
  CHECK(fp.s_qp == 0.0);
  auto c2 = c;
  c2.d_p *= 2;
  CHECK(hpz_fixed_point(c2, 2.0, 1.0).s_pp == Approx(2 * fp.s_pp));
}

TEST_CASE("Markovian closed-form times") {
  double n = 1 / (std::exp(1 / 3.5) - 1);
  auto r = markovian_times(1.0, 0.2, 3.5);
  CHECK(r.tau1 == Approx(5 * std::log(1 + (1 - std::exp(-2.0)) / (2 * n))).epsilon(1e-12));
  CHECK(r.tau1 == Approx(0.668267).epsilon(2e-4));
  CHECK(r.xi_c == Approx(0.5 * std::log(2 * n + 1)).epsilon(1e-12));
  CHECK(r.xi_c == Approx(0.976359).epsilon(1e-4));
  CHECK_FALSE(r.tau2.has_value());
  CHECK(markovian_times(1.0, 0.01, 3.5).tau1 == Approx(13.37).epsilon(1e-3));
  auto h = markovian_times(0.5, 0.2, 3.5);
  REQUIRE(h.tau2.has_value());
  CHECK(*h.tau2 > h.tau1);
  CHECK(std::isinf(markovian_times(1.0, 0.2, 0.0).tau1));
  CHECK(markovian_times(0.0, 0.2, 3.5).tau1 == 0.0);
  CHECK_THROWS_AS(markovian_times(1.0, 0.0, 1.0), Error);
}

TEST_CASE("Markovian reference reaches separability at tau1") {
  auto m = channel(ChannelKind::MarkovianReference, 0.2, 10, 3.5);
  auto grid = linear_grid(2.0, 21);
  QuadratureConfig qc;
  auto traj = evolve(m, squeezed_initial_state(1.0), grid, qc);
  double tau1 = markovian_times(1.0, 0.2, 3.5).tau1;
  auto v = traj.dense->state_at(tau1);
  CHECK(symplectic_spectrum(v).nu_tilde_minus == Approx(0.5).epsilon(1e-10));
  CHECK(traj.diagnostics.back().EN == 0.0);
}

TEST_CASE("initial state is reproduced exactly") {
  QuadratureConfig qc;
  auto v0 = squeezed_initial_state(0.8);
  auto grid = linear_grid(0.05, 3);
  for (auto k : kAllKinds) {
    auto traj = evolve(channel(k, 0.5, 10, 1.0), v0, grid, qc);
    CHECK(traj.states[0].matrix() == v0.matrix());
  }
}

TEST_CASE("free evolution conserves the invariants") {
  QuadratureConfig qc;
  auto v0 = squeezed_initial_state(1.0);
  auto grid = linear_grid(20.0, 81);
  for (auto k : kAllKinds) {
    auto traj = evolve(channel(k, 0.0, 10, 1.0), v0, grid, qc);
    auto d0 = traj.diagnostics[0];
    double det0 = v0.matrix().determinant();
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
      const auto& d = traj.diagnostics[i];
      REQUIRE(std::abs(traj.states[i].matrix().determinant() - det0) < 1e-8);
      REQUIRE(std::abs(d.nu_tilde_minus - d0.nu_tilde_minus) < 1e-8);
      REQUIRE(std::abs(d.EN - d0.EN) < 1e-8);
      REQUIRE(std::abs(d.mu - d0.mu) < 1e-8);
    }
  }
  // TWO_RESERVOIR at γ = 0 is the local free rotation
  auto traj = evolve(channel(ChannelKind::TwoReservoir, 0.0, 10, 1.0), v0, grid, qc);
  double t = traj.times.back();
  Mat4 S = Mat4::Zero();
  Mat2 s;
  s << std::cos(t), std::sin(t), -std::sin(t), std::cos(t);
  S.block<2, 2>(0, 0) = s;
  S.block<2, 2>(2, 2) = s;
  CHECK((traj.states.back().matrix() - S * v0.matrix() * S.transpose()).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("coefficient table matches direct evaluation") {
  QuadratureConfig qc;
  for (double T : {0.0, 1.0, 3.5}) {
    auto b = bath(0.2, 10, T).with_mass(2.0);
    CoefficientTable tab(b, 12.0, qc);
    for (double t : {0.001, 0.05, 0.1234, 0.7, 3.3, 11.9}) {
      auto a = tab.at(t), d = hpz_coefficients(t, b, qc);
      CHECK(a.gamma_p == Approx(d.gamma_p).epsilon(1e-14));
      CHECK(std::abs(a.d_p - d.d_p) < 1e-8);
      CHECK(std::abs(a.d_qp - d.d_qp) < 1e-8);
    }
  }
  CoefficientTable hot(bath(0.2, 10, 3.5), 400.0, qc);
  CHECK(hot.frozen_after() < 10.0);
  auto late = hot.at(399.0);
  auto st = hpz_stationary_coefficients(bath(0.2, 10, 3.5), qc);
  CHECK(late.d_p == Approx(st.d_p).epsilon(1e-8));
  CHECK(late.d_qp == Approx(st.d_qp).epsilon(1e-8));
}

TEST_CASE("tabulated and exact coefficients give the same trajectory") {
  QuadratureConfig qc;
  auto m = channel(ChannelKind::CommonModified, 0.5, 10, 1.0);
  auto grid = linear_grid(1.0, 11);
  DynamicsOptions exact;
  exact.exact_coefficients = true;
  auto a = evolve(m, squeezed_initial_state(1.0), grid, qc);
  auto b = evolve(m, squeezed_initial_state(1.0), grid, qc, exact);
  for (std::size_t i = 0; i < grid.size(); ++i) CHECK(max_abs_diff(a.states[i], b.states[i]) < 1e-7);
}

TEST_CASE("step refinement leaves the diagnostics unchanged") {
  QuadratureConfig qc;
  auto m = channel(ChannelKind::CommonModified, 0.2, 10, 3.5);
  auto grid = linear_grid(10.0, 41);
  DynamicsOptions fine;
  fine.max_step_scale = 0.5;
  fine.abs_tol /= 32;
  fine.rel_tol /= 32;
  auto a = evolve(m, squeezed_initial_state(1.0), grid, qc);
  auto b = evolve(m, squeezed_initial_state(1.0), grid, qc, fine);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto &x = a.diagnostics[i], &y = b.diagnostics[i];
    for (auto [p, q] : {std::pair{x.EN, y.EN}, {x.S, y.S}, {x.mu, y.mu}, {x.mu1, y.mu1}, {x.I, y.I},
                        {x.nu_tilde_minus, y.nu_tilde_minus}})
      REQUIRE(std::abs(p - q) < 1e-6);
  }
}

TEST_CASE("two-reservoir channel: stationary Lyapunov residual") {
  QuadratureConfig qc;
  auto m = channel(ChannelKind::TwoReservoir, 0.5, 5, 1.0);
  auto st = hpz_stationary_coefficients(m.bath, qc);
  double t_end = 200 / st.gamma_p;
  auto traj = evolve(m, squeezed_initial_state(1.0), linear_grid(t_end, 101), qc);
  const auto& V = traj.states.back();
  for (int j : {0, 2}) {
    SingleModeMoments s{V(j, j), V(j, j + 1), V(j + 1, j + 1)};
    CHECK(lyapunov_residual(s, st, 1.0, 1.0) < 1e-6);
  }
  CHECK(std::abs(V(0, 2)) < 1e-10);
  auto fp = hpz_fixed_point(st, 1.0, 1.0);
  CHECK(V(0, 0) == Approx(fp.s_qq).epsilon(1e-7));
  CHECK(V(1, 1) == Approx(fp.s_pp).epsilon(1e-7));
}

TEST_CASE("two-reservoir channel: entanglement and purity are lost") {
  QuadratureConfig qc;
  struct P {
    double g, G, T;
  };
  for (auto p : {P{0.2, 10, 1.0}, P{0.5, 5, 3.5}, P{0.1, 1, 0.5}}) {
    auto traj = evolve(channel(ChannelKind::TwoReservoir, p.g, p.G, p.T), squeezed_initial_state(1.0),
                       linear_grid(60.0, 241), qc);
    CHECK(traj.diagnostics.back().mu < 1.0);
    CHECK(traj.diagnostics.back().EN == 0.0);
    bool hit = false;
    for (const auto& d : traj.diagnostics) hit = hit || d.EN == 0.0;
    CHECK(hit);
  }
}

TEST_CASE("common channel: stationary entanglement decreases with temperature") {
  QuadratureConfig qc;
  double prev = INFINITY;
  for (double T : {1e-3, 0.01, 0.1, 0.5, 1.0, 5.0}) {
    auto traj = evolve(channel(ChannelKind::CommonModified, 1.0, 10, T), squeezed_initial_state(1.0),
                       linear_grid(60.0, 121), qc);
    double en = traj.diagnostics.back().EN;
    REQUIRE(std::isfinite(en));
    CHECK(en <= prev + 1e-9);
    prev = en;
  }
}

TEST_CASE("weak coupling: fixed point against fluctuation integrals") {
  QuadratureConfig qc;
  for (double T : {1e-3, 0.25, 1.0}) {
    auto m = channel(ChannelKind::CommonModified, 0.05, 10, T);
    auto com_bath = m.bath.with_mass(2.0);
    double occ = omega_coth(1.0, T);
    NormalModeState a, b;
    a.rel_xx = b.rel_xx = occ;
    a.rel_pp = b.rel_pp = occ / 4;
    a.com = hpz_fixed_point(hpz_stationary_coefficients(com_bath, qc), 2.0, 1.0);
    auto mom = stationary_R_moments(com_bath, qc);
    b.com = {mom.r2, 0.0, mom.p2};
    auto va = reconstruct_covariance(a), vb = reconstruct_covariance(b);
    double scale = vb.matrix().cwiseAbs().maxCoeff();
    CHECK(max_abs_diff(va, vb) < 5e-2 * scale);
  }
}

TEST_CASE("input validation") {
  QuadratureConfig qc;
  auto grid = linear_grid(1.0, 3);
  Mat4 bad = Mat4::Identity() * 0.3;
  CHECK_THROWS_AS(evolve(channel(ChannelKind::TwoReservoir, 0.2, 10, 1), CovarianceMatrix(bad), grid, qc),
                  Error);
  try {
    evolve(channel(ChannelKind::TwoReservoir, 0.2, 10, 1), CovarianceMatrix(bad), grid, qc);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnphysicalInitial);
  }
  Mat4 corr = Mat4::Identity() * 0.5;
  corr(0, 0) = 0.8;
  CHECK_THROWS_AS(evolve(channel(ChannelKind::CommonModified, 0.2, 10, 1), CovarianceMatrix(corr), grid, qc),
                  Error);
  std::vector<double> shifted{0.5, 1.0};
  CHECK_THROWS_AS(evolve(channel(ChannelKind::TwoReservoir, 0.2, 10, 1), squeezed_initial_state(1), shifted, qc),
                  Error);
  CHECK(parse_channel_kind("common_modified") == ChannelKind::CommonModified);
  CHECK_THROWS_AS(parse_channel_kind("common"), Error);
}

TEST_CASE("trajectory CSV round trip") {
  QuadratureConfig qc;
  auto traj = evolve(channel(ChannelKind::CommonModified, 0.2, 10, 3.5), squeezed_initial_state(1.0),
                     linear_grid(3.0, 13), qc);
  std::stringstream ss;
  write_trajectory_csv(ss, traj);
  std::string text = ss.str();
  CHECK(text.rfind("t,EN,S,mu,mu1,mu2,I,nu_tilde_minus,Vqq1,Vq1p1,", 0) == 0);
  auto back = read_trajectory_csv(ss);
  REQUIRE(back.times.size() == traj.times.size());
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    CHECK(back.times[i] == traj.times[i]);
    CHECK(back.states[i].matrix() == traj.states[i].matrix());
    CHECK(back.diagnostics[i].EN == traj.diagnostics[i].EN);
  }
  std::stringstream again;
  write_trajectory_csv(again, back);
  CHECK(again.str() == text);
}

TEST_CASE("time grids") {
  auto g = linear_grid(2.0, 5);
  CHECK(g == std::vector<double>{0, 0.5, 1.0, 1.5, 2.0});
  auto l = log_grid(10.0, 6);
  CHECK(l.front() == 0.0);
  CHECK(l[1] == Approx(1e-3));
  CHECK(l.back() == 10.0);
  CHECK_THROWS_AS(linear_grid(0.0, 5), Error);
  CHECK_THROWS_AS(linear_grid(1.0, 1), Error);
}
