#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "ctinv/consistency.hpp"
#include "ctinv/forward.hpp"
#include "ctinv/glm.hpp"

using namespace ctinv;
using std::numbers::pi;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

Eigen::Index cell_of(const Eigen::VectorXd& axis, double x) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < axis.size(); ++i)
    if (std::abs(axis[i] - x) < std::abs(axis[best] - x)) best = i;
  return best;
}

}  // namespace

TEST_CASE("zero scan on the one-shift examples") {
  const AdmissibilityVerdict blocked = scan_zeros(vec({0.0}), vec({2.0}));
  CHECK_FALSE(blocked.admissible);
  REQUIRE_FALSE(blocked.zeros_found.empty());
  const ZeroLocation& z = blocked.zeros_found.front();
  CHECK(z.hi - z.lo <= 0.05 + 1e-12);
  CHECK(z.lo <= z.r);
  CHECK(z.r <= z.hi);
  CHECK(std::abs(cross_wronskian(Order(2.0), Order(0.0), z.r)) < 1e-8);

  const AdmissibilityVerdict good = scan_zeros(vec({0.0}), vec({-0.4}));
  CHECK(good.admissible);
  CHECK(good.settled);
  CHECK(good.zeros_found.empty());

  CHECK_FALSE(scan_zeros(vec({0.0}), vec({1.6})).admissible);
  CHECK(scan_zeros(vec({0.0}), vec({1.0})).admissible);
}

TEST_CASE("closed one-shift criterion") {
  CHECK(admissible_1d(0, -0.4));
  CHECK_FALSE(admissible_1d(0, 2.0));
  CHECK(admissible_1d(0, 1.0));
  CHECK(admissible_1d(2, 1.0));
  CHECK_FALSE(admissible_1d(2, 0.99));
  CHECK_THROWS_AS(admissible_1d(-0.5, 0.2), Error);
}

TEST_CASE("closed criterion and zero scan agree") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> d(-0.5, 5.0);
  int disagreements = 0, tested = 0;
  while (tested < 200) {
    const double ell = d(rng), L = d(rng);
    if (ell <= -0.5 || L <= -0.5 || std::abs(L - ell) < 1e-6) continue;
    ++tested;
    const AdmissibilityVerdict v = scan_zeros(vec({ell}), vec({L}));
    if (v.admissible != admissible_1d(ell, L)) {
      ++disagreements;
      MESSAGE("ell=" << ell << " L=" << L << " scan=" << v.admissible);
    }
  }
  CHECK(disagreements == 0);
}

TEST_CASE("determinant settles on the asymptotic cosine determinant") {
  for (auto [S, T] : {std::pair{vec({0.0}), vec({-0.4})}, std::pair{vec({0.0, 1.0}), vec({-0.30557, 0.92948})},
                      std::pair{vec({1.0, 3.0}), vec({0.6, 2.4})}}) {
    const AdmissibilityVerdict v = scan_zeros(S, T);
    if (!v.admissible) continue;
    CHECK(v.settled);
    CHECK(v.d_infinity == doctest::Approx(asymptotic_det(S, T)).epsilon(1e-12));
    CHECK(std::abs(fredholm_det(S, T, 3000.0) - asymptotic_det(S, T)) < 1e-3 * std::max(1.0, std::abs(v.d_infinity)));
  }
  CHECK(default_lambda(vec({0.0, 1.0}), vec({-0.3, 0.9})) == doctest::Approx(60.0));
}

TEST_CASE("selection among solver candidates") {
  const InputSet one_shift({0}, {0.2 * pi});
  const Selection s1 = select_physical(one_shift, solve_T(one_shift).candidates);
  REQUIRE(s1.chosen.has_value());
  CHECK((*s1.chosen)[0] == doctest::Approx(-0.4).epsilon(1e-12));
  CHECK_FALSE(s1.ambiguous);
  for (const CandidateReport& r : s1.reports)
    if (std::abs(r.Ls[0] - 1.6) < 1e-9) {
      CHECK_FALSE(r.verdict.admissible);
      CHECK_FALSE(r.verdict.zeros_found.empty());
      CHECK_FALSE(r.disagreement);
    }

  const InputSet ws_pair({0, 1}, {0.4389, 0.1246});
  const Selection s3 = select_physical(ws_pair, solve_T(ws_pair).candidates);
  REQUIRE(s3.chosen.has_value());
  CHECK((*s3.chosen)[0] == doctest::Approx(-0.3056).epsilon(1e-3));
  CHECK((*s3.chosen)[1] == doctest::Approx(0.9295).epsilon(1e-3));
  CHECK(s3.admissible.size() == 1);

  const Selection none = select_physical(ws_pair, {});
  CHECK_FALSE(none.chosen.has_value());
  CHECK(none.reports.empty());
}

TEST_CASE("admissible configurations give integrable potentials") {
  // Every admissible verdict must survive the kernel solve and give a finite moment.
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> d(-0.45, 4.0);
  int admissible = 0;
  for (int k = 0; k < 12; ++k) {
    const Eigen::VectorXd S = vec({0.0, 2.0});
    Eigen::VectorXd T = vec({d(rng), d(rng)});
    if (std::abs(T[0] - T[1]) < 0.05 || (T.array() - 0.0).abs().minCoeff() < 0.05 ||
        (T.array() - 2.0).abs().minCoeff() < 0.05)
      continue;
    const AdmissibilityVerdict v = scan_zeros(S, T);
    if (!v.admissible) continue;
    ++admissible;
    const PotentialProfile p = potential(S, T, RadialGrid(0.005, 200.0));
    CHECK(p.q.allFinite());
    CHECK(std::isfinite(moment_numeric(p)));
  }
  CHECK(admissible > 0);
}

TEST_CASE("admissibility map of S = {1, 3}") {
  MapBox box;
  box.resolution = 0.25;
  const AdmissibilityMap m = admissibility_map(vec({1.0, 3.0}), box, {}, 4);
  REQUIRE(m.cells.rows() == m.axis1.size());
  REQUIRE(m.cells.cols() == m.axis2.size());
  CHECK(m.errors == 0);
  CHECK(m.cells == m.cells.transpose());
  for (Eigen::Index i = 0; i < m.axis1.size(); ++i) CHECK(m.cells(i, i) == 0);

  // Admissible next to S, forbidden far from it.
  CHECK(m.cells(cell_of(m.axis1, 0.6), cell_of(m.axis2, 2.6)) == 1);
  CHECK(m.cells(cell_of(m.axis1, 5.5), cell_of(m.axis2, 5.9)) == 0);
  CHECK(m.cells.cast<int>().sum() > 0);
  CHECK(m.cells.cast<int>().sum() < m.cells.size() / 2);

  // Cell order and thread count do not matter.
  const AdmissibilityMap serial = admissibility_map(vec({1.0, 3.0}), box, {}, 1);
  CHECK(serial.cells == m.cells);
}

TEST_CASE("admissibility map of S = {1, 2} contains the selected solution") {
  const PhaseShiftTable t = phase_table(SampledPotential::woods_saxon(1.0, 1.0, 0.4), 2);
  const InputSet S({1, 2}, {t.find(1)->delta, t.find(2)->delta});
  const Selection sel = select_physical(S, solve_T(S).candidates);
  REQUIRE(sel.chosen.has_value());

  MapBox box;
  box.resolution = 0.1;
  const AdmissibilityMap m = admissibility_map(vec({1.0, 2.0}), box, {}, 4);
  const Eigen::VectorXd& T = *sel.chosen;
  CHECK(m.cells(cell_of(m.axis1, T[0]), cell_of(m.axis2, T[1])) == 1);
}

TEST_CASE("coarse map with a single cell") {
  MapBox box{0.2, 0.6, 2.2, 2.6, 5.0};
  const AdmissibilityMap m = admissibility_map(vec({1.0, 3.0}), box);
  CHECK(m.cells.size() == 1);
}
