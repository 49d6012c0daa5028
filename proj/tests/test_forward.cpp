#include "doctest.h"

#include <array>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <numbers>
#include <random>

#include "ctinv/consistency.hpp"
#include "ctinv/ctcore.hpp"
#include "ctinv/forward.hpp"
#include "ctinv/glm.hpp"
#include "ctinv/specfun.hpp"

using namespace ctinv;
using std::numbers::pi;

namespace {

double free_error(int ell, double h) {
  const RegularWave w = integrate_regular(SampledPotential::zero(), ell, {h, 50.0});
  double err = 0.0;
  for (Eigen::Index i = 0; i < w.r.size(); ++i) {
    if (w.r[i] < 10.0) continue;
    err = std::max(err, std::abs(w.phi[i] * std::exp(w.log_scale) - riccati(Order(ell), w.r[i]).u));
  }
  return err;
}

// Adaptive Runge-Kutta-Fehlberg 7(8) from a power-series start, matched to u and v at r_end.
double oracle_phase(const SampledPotential& q, int ell, double r_end) {
  using State = std::array<double, 2>;
  const double r0 = 1e-4;
  State y{std::pow(r0, ell + 1), (ell + 1) * std::pow(r0, ell)};
  auto rhs = [&](const State& s, State& ds, double r) {
    ds[0] = s[1];
    ds[1] = (ell * (ell + 1) / (r * r) - 1.0 + q(r)) * s[0];
  };
  namespace ode = boost::numeric::odeint;
  ode::integrate_adaptive(ode::make_controlled(1e-13, 1e-13, ode::runge_kutta_fehlberg78<State>()), rhs, y, r0,
                          r_end, 1e-3);
  const FunctionPair f = riccati(Order(ell), r_end);
  const double a = y[0] * f.v_prime - y[1] * f.v;
  const double b = y[0] * f.u_prime - y[1] * f.u;
  return reduce_phase(std::atan2(b, a));
}

double square_well_phase(double q0, double a) {
  double t;
  if (q0 < 1.0) {
    const double K = std::sqrt(1.0 - q0);
    t = std::atan2(std::sin(K * a), K * std::cos(K * a));
  } else if (q0 > 1.0) {
    const double k = std::sqrt(q0 - 1.0);
    t = std::atan(std::tanh(k * a) / k);
  } else {
    t = std::atan(a);
  }
  return reduce_phase(t - a);
}

}  // namespace

TEST_CASE("free solution and order of accuracy") {
  for (int ell : {0, 1, 3}) {
    CHECK(free_error(ell, 0.005) < 1e-8);
    const double e1 = free_error(ell, 0.08), e2 = free_error(ell, 0.04), e3 = free_error(ell, 0.02);
    CHECK(e1 / e2 == doctest::Approx(16.0).epsilon(0.12));
    CHECK(e2 / e3 == doctest::Approx(16.0).epsilon(0.12));
  }

  const RegularWave w = integrate_regular(SampledPotential::zero(), 2);
  const PhaseFit f = extract_phase(w);
  CHECK(std::abs(f.delta) < 1e-8);
  CHECK(f.B == doctest::Approx(1.0).epsilon(1e-8));

  const PhaseShiftTable t = phase_table(SampledPotential::zero(), 4);
  REQUIRE(t.complete());
  for (const PhaseEntry& e : t.entries) CHECK(std::abs(e.delta) < 1e-8);
}

TEST_CASE("square well phase shifts") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> depth(-4.0, 6.0), radius(0.3, 6.0);
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const double q0 = depth(rng), a = radius(rng);
    const PhaseFit f = extract_phase(integrate_regular(SampledPotential::square_well(q0, a), 0));
    const double err = std::abs(reduce_phase(f.delta - square_well_phase(q0, a)));
    INFO("q0=" << q0 << " a=" << a);
    CHECK(err < 1e-6);
    worst = std::max(worst, err);
  }
  MESSAGE("worst square-well error " << worst);
}

TEST_CASE("Woods-Saxon against an adaptive integrator") {
  const SampledPotential ws = SampledPotential::woods_saxon(1.0, 1.0, 0.4);
  const PhaseShiftTable t = phase_table(ws, 3);
  REQUIRE(t.complete());
  CHECK(t.find(0)->delta == doctest::Approx(0.4389).epsilon(1e-3));
  CHECK(t.find(1)->delta == doctest::Approx(0.1246).epsilon(1e-3));
  for (int ell = 0; ell <= 3; ++ell) {
    INFO("ell=" << ell);
    CHECK(std::abs(t.find(ell)->delta - oracle_phase(ws, ell, 60.0)) < 1e-8);
  }
  // A single node at most in the well region for the s wave.
  const RegularWave w = integrate_regular(ws, 0, {0.005, 3.0});
  int nodes = 0;
  for (Eigen::Index i = 1; i < w.phi.size(); ++i) nodes += w.phi[i - 1] * w.phi[i] < 0;
  CHECK(nodes <= 1);
}

TEST_CASE("strong barrier is rescaled, not aborted") {
  const double q0 = 1e4, a = 10.0;
  const RegularWave w = integrate_regular(SampledPotential::square_well(q0, a), 0, {0.001, 120.0});
  CHECK(w.rescalings > 0);
  CHECK(w.phi.allFinite());
  const PhaseFit f = extract_phase(w);
  CHECK(std::abs(reduce_phase(f.delta - square_well_phase(q0, a))) < 1e-6);
}

TEST_CASE("window too small") {
  const RegularWave w = integrate_regular(SampledPotential::woods_saxon(1.0, 1.0, 0.4), 0, {0.005, 30.0});
  ExtractOptions eo;
  eo.r_b = 4.0;
  eo.window = 3.0;
  eo.max_residual = 1e-6;
  CHECK_THROWS_AS(extract_phase(w, eo), Error);
}

TEST_CASE("phases of reconstructed potentials") {
  const Eigen::VectorXd S = Eigen::VectorXd::Zero(1);
  Eigen::VectorXd T(1);
  T << -0.4;
  const PotentialProfile p = potential(S, T, RadialGrid(0.005, 400.0));
  const PhaseShiftTable t = phase_table(SampledPotential::from_profile(p), 4);
  REQUIRE(t.complete());
  CHECK(t.find(0)->delta == doctest::Approx(0.2 * pi).epsilon(1e-2));
  // The origin-normalized amplitude differs from the transformed wave by phi(r)/u(r) at the origin.
  CHECK(t.find(0)->B * std::cos(t.find(0)->delta) == doctest::Approx(0.6).epsilon(1e-3));
  for (int ell : {2, 4}) {
    const double want = std::atan(one_shift_phase_formula(-0.4, ell, 0.2 * pi).tan_delta);
    CHECK(std::abs(t.find(ell)->delta - want) < 1e-3);
  }
  for (int ell : {1, 3}) CHECK(std::abs(std::tan(t.find(ell)->delta)) < 1e-3);
}

TEST_CASE("even inputs leave odd waves untouched") {
  const InputSet in({0, 2}, {0.3, 0.1});
  const Selection sel = select_physical(in, solve_T(in).candidates);
  REQUIRE(sel.chosen.has_value());
  const PotentialProfile p = potential(in.ells_real(), *sel.chosen, RadialGrid(0.005, 400.0));
  const PhaseShiftTable t = phase_table(SampledPotential::from_profile(p), 3);
  REQUIRE(t.complete());
  CHECK(std::abs(t.find(0)->delta - 0.3) < 1e-2);
  CHECK(std::abs(t.find(2)->delta - 0.1) < 1e-2);
  CHECK(std::abs(std::tan(t.find(1)->delta)) < 1e-3);
  CHECK(std::abs(std::tan(t.find(3)->delta)) < 1e-3);
}

TEST_CASE("sampled potentials") {
  Eigen::VectorXd r = Eigen::VectorXd::LinSpaced(400, 0.05, 20.0), q(400);
  for (Eigen::Index i = 0; i < r.size(); ++i) q[i] = -std::exp(-r[i] * r[i]);
  const SampledPotential s = SampledPotential::from_samples(r, q);
  CHECK(s(1.234) == doctest::Approx(-std::exp(-1.234 * 1.234)).epsilon(1e-6));
  CHECK(s(25.0) == 0.0);
  CHECK(s.sampled_to() == doctest::Approx(20.0));
  CHECK(std::isfinite(s.at_origin()));
  CHECK(SampledPotential::square_well(-1.0, 2.0).breakpoints().size() == 1);
}
