#pragma once

// Algebraic form of the GLM-type equation on a radial grid: kernel
// coefficients A_L(r), the diagonal K(r,r), the potential and the Fredholm
// determinant.

#include <Eigen/Dense>
#include <optional>

#include "ctinv/specfun.hpp"

namespace ctinv {

/// Uniform grid r_i = (i + 1) h, i = 0..n-1, covering (0, r_max].
class RadialGrid {
public:
  RadialGrid(double h, double r_max);
  double h() const noexcept { return h_; }
  double r_min() const noexcept { return h_; }
  double r_max() const noexcept { return h_ * static_cast<double>(n_); }
  Eigen::Index size() const noexcept { return n_; }
  double r(Eigen::Index i) const noexcept { return h_ * static_cast<double>(i + 1); }
  Eigen::VectorXd points() const;
  /// Index of the first point with r >= value (clamped to the grid).
  Eigen::Index index_at(double value) const;

private:
  double h_;
  Eigen::Index n_;
};

/// Entries [u_L v_ell' - u_L' v_ell] / (ell(ell+1) - L(L+1)); rows S, columns T.
Eigen::MatrixXd glm_matrix(const Eigen::VectorXd& ells, const Eigen::VectorXd& Ls, double r);

/// Row-wise derivative of glm_matrix: u_L(r) v_ell(r) / r^2.
Eigen::MatrixXd glm_matrix_derivative(const Eigen::VectorXd& ells, const Eigen::VectorXd& Ls, double r);

/// det glm_matrix(S, T, r).
double fredholm_det(const Eigen::VectorXd& ells, const Eigen::VectorXd& Ls, double r);

/// det / prod(row norms), a scale-free measure in [-1, 1].
double fredholm_det_normalized(const Eigen::VectorXd& ells, const Eigen::VectorXd& Ls, double r);

struct KernelSolution {
  RadialGrid grid;
  Eigen::VectorXd ells, Ls;
  Eigen::MatrixXd A, A_prime;  // n x |T|
  Eigen::VectorXd K, K_prime;  // K(r,r) and d/dr K(r,r)
  Eigen::VectorXd D;           // Fredholm determinant
  // Free solutions on the grid, reused by the wave and series evaluations.
  Eigen::MatrixXd u_S, up_S, v_S, vp_S;  // n x |S|
  Eigen::MatrixXd u_T, up_T;             // n x |T|
  double max_residual = 0.0;             // relative residual of the linear solves
};

struct KernelOptions {
  int threads = 1;
  /// When false, points where the determinant vanishes are solved anyway
  /// (used to study the divergence of inadmissible potentials).
  bool require_admissible = true;
};

/// Solves the algebraic system and its r-derivative at every grid point.
/// Throws ErrorKind::Inadmissible when the normalized determinant drops below 1e-12.
KernelSolution solve_kernel(const Eigen::VectorXd& ells, const Eigen::VectorXd& Ls, const RadialGrid& grid,
                            const KernelOptions& options = {});

/// Least-squares amplitudes of K(r,r) ~ alpha sin 2r + beta cos 2r + gamma.
/// The fit also carries the 1/r corrections (sin 2r, cos 2r, 1) / r, which
/// otherwise leak into alpha and beta at the 1e-4 level.
struct TailParams {
  double alpha = 0.0, beta = 0.0, gamma = 0.0;
  double alpha1 = 0.0, beta1 = 0.0, gamma1 = 0.0;
  double r_from = 0.0, r_to = 0.0;
  /// q(r) ~ 4 (beta sin 2r - alpha cos 2r) / r^2.
  double q(double r) const;
};

TailParams fit_tail(const KernelSolution& kernel, double fraction = 0.25);

struct PotentialProfile {
  RadialGrid grid;
  Eigen::VectorXd r, q;
  double q0 = 0.0;  // quadratic extrapolation to r = 0 with q'(0) = 0
  std::optional<TailParams> tail;
  Eigen::VectorXd ells, Ls;
};

/// q(r) = -(2/r) d/dr (K(r,r)/r) from the analytic derivative of the kernel.
PotentialProfile potential(const KernelSolution& kernel);
PotentialProfile potential(const Eigen::VectorXd& ells, const Eigen::VectorXd& Ls, const RadialGrid& grid,
                           const KernelOptions& options = {});

/// phi_j = u_j - sum_L A_L (u_L u_j' - u_L' u_j) / (j(j+1) - L(L+1)).
/// Valid for any partial wave j, not only the members of S.
Eigen::VectorXd transformed_wave(const KernelSolution& kernel, double j);

/// K(r,r) = sum_ell c_ell phi_ell v_ell; columns of `waves` follow the order of S.
Eigen::VectorXd kernel_diag_series(const KernelSolution& kernel, const Eigen::MatrixXd& waves);

/// int_0^inf r q dr: grid quadrature on (0, r_max] plus the analytic integral of the fitted tail.
double moment_numeric(const PotentialProfile& profile);

/// Partial moment int_0^x r q dr on the profile grid (trapezoid).
double partial_moment(const PotentialProfile& profile, double x);

}  // namespace ctinv
