#include "doctest.h"

#include <algorithm>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <numbers>
#include <random>

#include "ctinv/ctcore.hpp"

using namespace ctinv;
using boost::multiprecision::cpp_bin_float_50;
using std::numbers::pi;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

const Eigen::VectorXd ws_S = vec({0.0, 1.0});
const Eigen::VectorXd ws_T = vec({-0.3056, 0.9295});

}  // namespace

TEST_CASE("expansion coefficients") {
  CHECK(expansion_coeffs(vec({0.0}), vec({-0.4}))[0] == doctest::Approx(0.24).epsilon(1e-15));
  CHECK(std::abs(expansion_coeffs(vec({0.0}), vec({1e-8}))[0]) < 1e-7);

  // Direct 50-digit evaluation of the product formula for S = {0, 1}.
  using M = cpp_bin_float_50;
  const M L1(ws_T[0]), L2(ws_T[1]);
  const M x1 = L1 * (L1 + 1), x2 = L2 * (L2 + 1);
  const M c0 = (M(0) - x1) * (M(0) - x2) / M(-2);
  const M c1 = (M(2) - x1) * (M(2) - x2) / M(2);
  const Eigen::VectorXd c = expansion_coeffs(ws_S, ws_T);
  CHECK(std::abs(c[0] - static_cast<double>(c0)) < 1e-15);
  CHECK(std::abs(c[1] - static_cast<double>(c1)) < 1e-15);

  CHECK_THROWS_AS(expansion_coeffs(vec({0.0}), vec({0.0})), Error);
  CHECK_THROWS_AS(expansion_coeffs(vec({0.0, 1.0}), vec({0.5})), Error);
}

TEST_CASE("coeffs_to_T inverts expansion_coeffs") {
  const ShiftedSet t = coeffs_to_T(vec({0.0}), vec({0.24}));
  REQUIRE(t.size() == 1);
  CHECK(t[0] == doctest::Approx(-0.4).epsilon(1e-12));
  CHECK(std::abs(coeffs_to_T(vec({0.0}), expansion_coeffs(vec({0.0}), vec({-0.4})))[0] + 0.4) < 1e-10);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> d(-0.5, 6.0);
  const Eigen::VectorXd ells = vec({0.0, 2.0, 4.0});
  int tried = 0;
  while (tried < 40) {
    std::vector<double> Ls = {d(rng), d(rng), d(rng)};
    std::sort(Ls.begin(), Ls.end());
    if (Ls[1] - Ls[0] < 0.1 || Ls[2] - Ls[1] < 0.1) continue;
    const Eigen::VectorXd T = Eigen::Map<Eigen::VectorXd>(Ls.data(), 3);
    bool near_s = false;
    for (double l : {0.0, 2.0, 4.0})
      for (double L : Ls) near_s |= std::abs(L - l) < 0.05;
    if (near_s) continue;
    ++tried;
    const ShiftedSet back = coeffs_to_T(ells, expansion_coeffs(ells, T));
    CHECK((back.values() - T).cwiseAbs().maxCoeff() < 1e-8);
  }

  // L(L+1) = 1 has no root above -1/2 once the coefficient is pushed past 1/4.
  CHECK_THROWS_AS(coeffs_to_T(vec({0.0}), vec({0.3})), Error);
}

TEST_CASE("kappa matrices") {
  const double L = -0.4;
  const auto k1 = kappa_matrices(vec({0.0}), vec({L}));
  CHECK(k1.m_cos(0, 0) == doctest::Approx(std::cos(L * pi / 2) / (L * (L + 1))).epsilon(1e-14));
  CHECK_THROWS_AS(kappa_matrices(vec({0.0}), vec({0.0})), Error);

  using M = cpp_bin_float_50;
  const auto km = kappa_matrices(ws_S, ws_T);
  const M half_pi = boost::math::constants::half_pi<M>();
  for (int i = 0; i < 2; ++i)
    for (int k = 0; k < 2; ++k) {
      const M l(ws_S[i]), Lk(ws_T[k]);
      const M den = Lk * (Lk + 1) - l * (l + 1);
      CHECK(std::abs(km.m_sin(i, k) - static_cast<double>(sin((l - Lk) * half_pi) / den)) < 1e-12);
      CHECK(std::abs(km.m_cos(i, k) - static_cast<double>(cos((l - Lk) * half_pi) / den)) < 1e-12);
    }
  CHECK_FALSE(km.ill_conditioned);
}

TEST_CASE("phases from T") {
  for (int ell : {0, 1, 3})
    for (double delta : {-1.2, -0.3, 0.05, 0.7, 1.4}) {
      const auto p = phases_from_T(vec({double(ell)}), vec({ell - 2 * delta / pi}));
      CHECK(p.delta[0] == doctest::Approx(delta).epsilon(1e-12));
    }
  const auto near = phases_from_T(ws_S, ws_S + vec({1e-7, -1e-7}));
  CHECK(near.delta.cwiseAbs().maxCoeff() < 1e-6);

  const auto f3 = phases_from_T(ws_S, ws_T);
  CHECK(f3.delta[0] == doctest::Approx(0.4389).epsilon(2e-4));
  CHECK(f3.delta[1] == doctest::Approx(0.1246).epsilon(2e-4));
  CHECK(f3.imag_residue < 1e-10);
}

TEST_CASE("solve_T for one phase shift") {
  const InputSet S({0}, {0.2 * pi});
  const SolveResult r = solve_T(S);
  std::vector<double> Ls;
  for (const auto& c : r.candidates) Ls.push_back(c[0]);
  for (double want : {-0.4, 1.6, 3.6})
    CHECK(std::any_of(Ls.begin(), Ls.end(), [&](double L) { return std::abs(L - want) < 1e-12; }));
  // Exactly one member of the family is within 1 of ell.
  CHECK(std::count_if(Ls.begin(), Ls.end(), [](double L) { return std::abs(L) <= 1.0; }) == 1);
}

TEST_CASE("uniqueness of the k = 0 branch") {
  for (int ell : {0, 1, 2, 5})
    for (double delta : {-pi / 2 + 1e-6, -0.9, 0.0001, 0.8, pi / 2 - 1e-6}) {
      int inside = 0;
      for (int k = -4; k <= 4; ++k)
        if (std::abs(ell - 2 * delta / pi + 2 * k - ell) <= 1.0) ++inside;
      CHECK(inside == 1);
    }
  // At delta = pi/2 both ell - 1 and ell + 1 sit on the boundary.
  int edge = 0;
  for (int k = -4; k <= 4; ++k)
    if (std::abs(-1.0 + 2 * k) <= 1.0) ++edge;
  CHECK(edge == 2);
}

TEST_CASE("solve_T for two phase shifts") {
  const InputSet S({0, 1}, {0.4389, 0.1246});
  const SolveResult r = solve_T(S);
  auto has = [&](double a, double b) {
    return std::any_of(r.candidates.begin(), r.candidates.end(), [&](const ShiftedSet& t) {
      return std::abs(t[0] - a) < 1e-3 && std::abs(t[1] - b) < 1e-3;
    });
  };
  CHECK(has(-0.3056, 0.9295));
  CHECK(has(1.0650, 1.7016));
  for (const auto& t : r.candidates) {
    const auto p = phases_from_T(S.ells_real(), t.values());
    for (int i = 0; i < 2; ++i) CHECK(std::abs(reduce_phase(p.delta[i] - S.deltas()[i])) < 1e-8);
  }
}

TEST_CASE("all-zero phases give the zero potential") {
  const SolveResult r = solve_T(InputSet({0, 2}, {0.0, 0.0}));
  CHECK(r.zero_potential);
  CHECK(r.candidates.empty());
}

TEST_CASE("input validation") {
  CHECK_THROWS_AS(InputSet({0, 0}, {0.1, 0.2}), Error);
  CHECK_THROWS_AS(InputSet({0}, {0.1, 0.2}), Error);
  CHECK_THROWS_AS(ShiftedSet(vec({-0.6})), Error);
  CHECK_THROWS_AS(ShiftedSet(vec({1.0, 1.0})), Error);
  CHECK(reduce_phase(pi / 2) == doctest::Approx(pi / 2));
  CHECK(reduce_phase(-pi / 2) == doctest::Approx(pi / 2));
  CHECK(reduce_phase(3.0) == doctest::Approx(3.0 - pi));
}

TEST_CASE("asymptotic data") {
  const auto even = asymptotic_data(vec({0.0, 2.0}), vec({-0.3, 1.7}));
  CHECK(even.b.cwiseAbs().maxCoeff() < 1e-12);
  CHECK(even.residual < 1e-10);
  const auto odd = asymptotic_data(vec({1.0, 3.0}), vec({0.5, 2.2}));
  CHECK(odd.a.cwiseAbs().maxCoeff() < 1e-12);
  CHECK(odd.residual < 1e-10);
  const auto mixed = asymptotic_data(ws_S, ws_T);
  CHECK(mixed.residual < 1e-10);

  const auto one = asymptotic_data(vec({0.0}), vec({-0.4}));
  CHECK(one.alpha == doctest::Approx(-0.12).epsilon(1e-10));
}

TEST_CASE("sum rules track the oscillating tail amplitudes") {
  struct Case { std::vector<int> S; Eigen::VectorXd T; };
  for (const Case& c : {Case{{0}, vec({-0.4})}, Case{{0, 2}, vec({-0.3, 1.7})}, Case{{1, 3}, vec({0.5, 2.2})},
                        Case{{0, 2, 4}, vec({-0.2, 1.5, 3.1})}}) {
    const Eigen::VectorXd ells = Eigen::VectorXd::NullaryExpr(
        static_cast<Eigen::Index>(c.S.size()), [&](Eigen::Index i) { return double(c.S[i]); });
    const auto ph = phases_from_T(ells, c.T);
    const InputSet in(c.S, std::vector<double>(ph.delta.data(), ph.delta.data() + ph.delta.size()));
    const auto ad = asymptotic_data(ells, c.T);
    const SumRules sr = sum_rules(in, c.T);
    CHECK(sr.cos_rule == doctest::Approx(-2 * ad.alpha).epsilon(1e-9));
    CHECK(sr.sin_rule == doctest::Approx(-2 * ad.beta).epsilon(1e-9));
    CHECK(std::abs(sr.cos_rule) > 1e-3);
    // B cos delta = 1 turns the cosine rule into sum c up to the parity sign.
    const double sign = in.all_even() ? 1.0 : -1.0;
    CHECK(sr.simplified == doctest::Approx(sign * sr.cos_rule).epsilon(1e-12));
  }
}

TEST_CASE("sum rules vanish where the tail vanishes") {
  // Newton search over T for alpha = beta = 0 with S = {0, 2}.
  const Eigen::VectorXd ells = vec({0.0, 2.0});
  auto F = [&](const Eigen::Vector2d& t) {
    const auto ad = asymptotic_data(ells, Eigen::VectorXd(t));
    return Eigen::Vector2d(ad.alpha, ad.beta);
  };
  std::optional<Eigen::Vector2d> found;
  for (double s1 = -0.4; s1 < 4 && !found; s1 += 0.35)
    for (double s2 = s1 + 0.3; s2 < 5 && !found; s2 += 0.35) {
      Eigen::Vector2d t(s1, s2);
      bool ok = true;
      for (int it = 0; it < 60 && ok; ++it) {
        try {
          const Eigen::Vector2d f = F(t);
          if (f.norm() < 1e-13) break;
          Eigen::Matrix2d J;
          for (int k = 0; k < 2; ++k) {
            Eigen::Vector2d e = Eigen::Vector2d::Zero();
            e[k] = 1e-7;
            J.col(k) = (F(t + e) - F(t - e)) / 2e-7;
          }
          t -= J.fullPivLu().solve(f);
          ok = t.allFinite() && t.minCoeff() > -0.5 && std::abs(t[0] - t[1]) > 1e-3;
        } catch (const Error&) {
          ok = false;
        }
      }
      if (ok && F(t).norm() < 1e-12) found = t;
    }
  REQUIRE(found.has_value());
  const Eigen::VectorXd T = *found;
  const auto ph = phases_from_T(ells, T);
  const SumRules sr = sum_rules(InputSet({0, 2}, {ph.delta[0], ph.delta[1]}), T);
  CHECK(std::abs(sr.cos_rule) < 1e-8);
  CHECK(std::abs(sr.sin_rule) < 1e-8);
  CHECK(std::abs(sr.simplified) < 1e-8);
}

TEST_CASE("closed-form moment") {
  CHECK(moment_closed_form(vec({0.0}), vec({-0.4})) == doctest::Approx(-0.4).epsilon(1e-15));
  CHECK(std::abs(moment_closed_form(vec({0.0, 1.0}), vec({1e-9, 1.0 + 1e-9}))) < 1e-8);
  const Eigen::VectorXd S = vec({0.0, 2.0, 4.0}), T = vec({-0.2, 1.5, 3.1});
  const double m = moment_closed_form(S, T);
  CHECK(moment_closed_form(vec({4.0, 0.0, 2.0}), T) == doctest::Approx(m).epsilon(1e-13));
  CHECK(moment_closed_form(S, vec({3.1, -0.2, 1.5})) == doctest::Approx(m).epsilon(1e-13));
  CHECK(moment_closed_form(S, vec({1.5, 3.1, -0.2})) == doctest::Approx(m).epsilon(1e-13));
}

TEST_CASE("one-shift phase law") {
  CHECK(one_shift_phase_formula(-0.4, 1, 0.2 * pi).tan_delta == 0.0);
  CHECK(one_shift_phase_formula(-0.4, 3, 0.2 * pi).tan_delta == 0.0);
  CHECK(one_shift_phase_formula(-0.4, 0, 0.2 * pi).tan_delta == doctest::Approx(std::tan(0.2 * pi)));
  CHECK(one_shift_phase_formula(-0.4, 2, 0.2 * pi).tan_delta ==
        doctest::Approx(-0.24 / (-0.24 - 6.0) * std::tan(0.2 * pi)).epsilon(1e-14));
  CHECK_THROWS_AS(one_shift_phase_formula(2.0, 2, 0.1), Error);

  const auto b = one_shift_phase_formula(-0.4, 4, 0.2 * pi);
  REQUIRE(b.attractive_bound_holds.has_value());
  CHECK(*b.attractive_bound_holds);
}
