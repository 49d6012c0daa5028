#pragma once

// Algebra of the Cox-Thompson construction that needs no radial grid: the
// input set S, the shifted set T, expansion coefficients, the nonlinear map
// between T and the phase shifts, asymptotic coefficients and sum rules.

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "ctinv/errors.hpp"

namespace ctinv {

/// Tolerance below which an element of T is considered to coincide with S.
inline constexpr double kCollisionTol = 1e-9;

/// Physical angular momenta S with one phase shift per entry.
class InputSet {
public:
  InputSet(std::vector<int> ells, std::vector<double> deltas);

  const std::vector<int>& ells() const noexcept { return ells_; }
  const Eigen::VectorXd& deltas() const noexcept { return deltas_; }
  /// S as a real vector, the form every formula consumes.
  Eigen::VectorXd ells_real() const;
  Eigen::Index size() const noexcept { return deltas_.size(); }
  int max_ell() const;
  bool all_even() const;
  bool all_odd() const;

private:
  std::vector<int> ells_;
  Eigen::VectorXd deltas_;
};

/// Shifted angular momenta T: distinct reals, each > -1/2, kept sorted ascending.
class ShiftedSet {
public:
  explicit ShiftedSet(Eigen::VectorXd Ls);
  const Eigen::VectorXd& values() const noexcept { return Ls_; }
  Eigen::Index size() const noexcept { return Ls_.size(); }
  double operator[](Eigen::Index i) const { return Ls_[i]; }

private:
  Eigen::VectorXd Ls_;
};

/// Principal branch (-pi/2, pi/2] of a phase defined modulo pi.
double reduce_phase(double delta);

/// Throws ErrorKind::Singular if S and T share an element or sizes differ.
template <typename DS, typename DT>
void require_disjoint(const Eigen::MatrixBase<DS>& ells, const Eigen::MatrixBase<DT>& Ls) {
  using std::abs;
  if (ells.size() != Ls.size()) throw Error(ErrorKind::Singular, "|S| and |T| differ");
  for (Eigen::Index i = 0; i < ells.size(); ++i)
    for (Eigen::Index k = 0; k < Ls.size(); ++k)
      if (abs(ells[i] - Ls[k]) < kCollisionTol)
        throw Error(ErrorKind::Singular, "S and T intersect at " + std::to_string(static_cast<double>(ells[i])));
}

/// c_ell = prod_L (ell(ell+1) - L(L+1)) / prod_{ell' != ell} (ell(ell+1) - ell'(ell'+1)).
template <typename DS, typename DT>
Eigen::Matrix<typename DS::Scalar, Eigen::Dynamic, 1> expansion_coeffs(const Eigen::MatrixBase<DS>& ells,
                                                                     const Eigen::MatrixBase<DT>& Ls) {
  using Scalar = typename DS::Scalar;
  require_disjoint(ells, Ls);
  const Eigen::Index n = ells.size();
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> c(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Scalar xi = ells[i] * (ells[i] + Scalar(1));
    Scalar num(1), den(1);
    for (Eigen::Index k = 0; k < n; ++k) num *= xi - Scalar(Ls[k]) * (Scalar(Ls[k]) + Scalar(1));
    for (Eigen::Index k = 0; k < n; ++k)
      if (k != i) den *= xi - ells[k] * (ells[k] + Scalar(1));
    c[i] = num / den;
  }
  return c;
}

/// Sine and cosine Cauchy-like matrices, rows indexed by S and columns by T.
template <typename Scalar>
struct KappaMatrices {
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> m_sin, m_cos;
  double condition = 1.0;   // 2-norm condition estimate of m_cos
  bool ill_conditioned = false;
};

template <typename DS, typename DT>
KappaMatrices<typename DS::Scalar> kappa_matrices(const Eigen::MatrixBase<DS>& ells, const Eigen::MatrixBase<DT>& Ls) {
  using Scalar = typename DS::Scalar;
  using std::cos;
  using std::sin;
  require_disjoint(ells, Ls);
  const Eigen::Index n = ells.size();
  const Scalar half_pi = Scalar(std::numbers::pi) / Scalar(2);
  KappaMatrices<Scalar> km;
  km.m_sin.resize(n, n);
  km.m_cos.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index k = 0; k < n; ++k) {
      const Scalar L = Scalar(Ls[k]);
      const Scalar den = L * (L + Scalar(1)) - ells[i] * (ells[i] + Scalar(1));
      const Scalar arg = (ells[i] - L) * half_pi;
      km.m_sin(i, k) = sin(arg) / den;
      km.m_cos(i, k) = cos(arg) / den;
    }
  Eigen::MatrixXd mc(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index k = 0; k < n; ++k) mc(i, k) = static_cast<double>(km.m_cos(i, k));
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(mc);
  const auto& sv = svd.singularValues();
  km.condition = sv[n - 1] > 0 ? sv[0] / sv[n - 1] : std::numeric_limits<double>::infinity();
  km.ill_conditioned = km.condition > 1e12;
  return km;
}

/// Phase shifts generated by a shifted set, with the imaginary residue of the log as health metric.
struct PhaseEvaluation {
  Eigen::VectorXd delta;
  double imag_residue = 0.0;
};

PhaseEvaluation phases_from_T(const Eigen::VectorXd& ells, const Eigen::VectorXd& Ls);

/// Inverse of expansion_coeffs: recovers T from the coefficients via the monic
/// polynomial with roots L(L+1).
ShiftedSet coeffs_to_T(const Eigen::VectorXd& ells, const Eigen::VectorXd& c);

struct SolveOptions {
  /// |S| = 1: candidates L = ell - 2 delta / pi + 2k for |k| <= k_range.
  int k_range = 3;
  /// |S| >= 2: multistart seeds per axis over (-0.5, max(S) + 3).
  int seeds_per_axis = 12;
  double box_lo = -0.5;
  std::optional<double> box_hi;
  int max_newton_iter = 100;
  int max_halvings = 20;
  double residual_tol = 1e-10;
  double step_tol = 1e-12;
  double accept_tol = 1e-9;
  double dedupe_tol = 1e-6;
  int threads = 1;
};

struct SeedDiagnostic {
  Eigen::VectorXd seed;
  Eigen::VectorXd end;
  double residual = 0.0;
  bool converged = false;
};

struct SolveResult {
  std::vector<ShiftedSet> candidates;
  /// Every delta vanished; the answer is q == 0 and no T is needed.
  bool zero_potential = false;
  std::vector<SeedDiagnostic> diagnostics;
};

SolveResult solve_T(const InputSet& S, const SolveOptions& options = {});

/// Coefficients of the large-r form A_L(r) ~ a_L cos r + b_L sin r and the
/// amplitudes of K(r,r) ~ alpha sin 2r + beta cos 2r + gamma.
struct AsymptoticData {
  Eigen::VectorXd a, b;
  double alpha = 0.0, beta = 0.0;
  double residual = 0.0;
};

AsymptoticData asymptotic_data(const Eigen::VectorXd& ells, const Eigen::VectorXd& Ls);

struct SumRules {
  double cos_rule = 0.0;    // sum (-1)^ell c_ell B_ell cos delta_ell
  double sin_rule = 0.0;    // sum (-1)^ell c_ell B_ell sin delta_ell
  double simplified = 0.0;  // sum c_ell
};

/// When B is absent and S has a single parity, B_ell cos delta_ell = 1 is used.
SumRules sum_rules(const InputSet& S, const Eigen::VectorXd& Ls, const std::optional<Eigen::VectorXd>& B = std::nullopt);

/// sum_{L in T} prod_{ell in S} (L - ell) / prod_{L' != L} (L - L').
template <typename DS, typename DT>
typename DS::Scalar moment_closed_form(const Eigen::MatrixBase<DS>& ells, const Eigen::MatrixBase<DT>& Ls) {
  using Scalar = typename DS::Scalar;
  using std::abs;
  const Eigen::Index n = Ls.size();
  Scalar total(0);
  for (Eigen::Index k = 0; k < n; ++k) {
    Scalar num(1), den(1);
    for (Eigen::Index i = 0; i < ells.size(); ++i) num *= Scalar(Ls[k]) - ells[i];
    for (Eigen::Index m = 0; m < n; ++m) {
      if (m == k) continue;
      if (abs(Ls[k] - Ls[m]) < kCollisionTol) throw Error(ErrorKind::Singular, "repeated element in T");
      den *= Scalar(Ls[k]) - Scalar(Ls[m]);
    }
    total += num / den;
  }
  return total;
}

struct OneShiftPhase {
  double tan_delta = 0.0;
  /// Attractive input (delta0 > 0): whether tan delta_ell <= 4/(15 ell^2) tan delta0 for even ell > 0,
  /// or tan delta_ell <= 0 for odd ell.
  std::optional<bool> attractive_bound_holds;
};

/// Phase law of the single-input (S = {0}) potential for partial wave ell.
OneShiftPhase one_shift_phase_formula(double L, int ell, double delta0);

}  // namespace ctinv
