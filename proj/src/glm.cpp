#include "ctinv/glm.hpp"

#include <cmath>
#include <sstream>
#include <vector>

#include "ctinv/ctcore.hpp"
#include "ctinv/errors.hpp"
#include "ctinv/parallel.hpp"
#include "tail_integrals.hpp"

namespace ctinv {

RadialGrid::RadialGrid(double h, double r_max) : h_(h) {
  if (!(h > 0.0) || !(r_max > h)) throw Error(ErrorKind::Domain, "RadialGrid: need 0 < h < r_max");
  n_ = static_cast<Eigen::Index>(std::floor(r_max / h + 1e-9));
}

Eigen::VectorXd RadialGrid::points() const {
  Eigen::VectorXd out(n_);
  for (Eigen::Index i = 0; i < n_; ++i) out[i] = r(i);
  return out;
}

Eigen::Index RadialGrid::index_at(double value) const {
  const auto i = static_cast<Eigen::Index>(std::ceil(value / h_ - 1.0 - 1e-9));
  return std::clamp<Eigen::Index>(i, 0, n_ - 1);
}

namespace {

struct PointFunctions {
  Eigen::VectorXd uS, upS, vS, vpS, uT, upT;
};

PointFunctions evaluate(const Eigen::VectorXd& ells, const Eigen::VectorXd& Ls, double r) {
  PointFunctions f;
  const Eigen::Index n = ells.size(), m = Ls.size();
  f.uS.resize(n);
  f.upS.resize(n);
  f.vS.resize(n);
  f.vpS.resize(n);
  f.uT.resize(m);
  f.upT.resize(m);
  for (Eigen::Index i = 0; i < n; ++i) {
    const FunctionPair p = riccati(Order(ells[i]), r);
    f.uS[i] = p.u;
    f.upS[i] = p.u_prime;
    f.vS[i] = p.v;
    f.vpS[i] = p.v_prime;
  }
  for (Eigen::Index k = 0; k < m; ++k) {
    const FunctionPair p = riccati(Order(Ls[k]), r);
    f.uT[k] = p.u;
    f.upT[k] = p.u_prime;
  }
  return f;
}

Eigen::MatrixXd assemble(const Eigen::VectorXd& ells, const Eigen::VectorXd& Ls, const PointFunctions& f) {
  const Eigen::Index n = ells.size();
  Eigen::MatrixXd M(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index k = 0; k < n; ++k) {
      const double den = ells[i] * (ells[i] + 1) - Ls[k] * (Ls[k] + 1);
      M(i, k) = (f.uT[k] * f.vpS[i] - f.upT[k] * f.vS[i]) / den;
    }
  return M;
}

double normalized(const Eigen::MatrixXd& M, double det) {
  const double norms = M.rowwise().norm().prod();
  return norms > 0 ? det / norms : 0.0;
}

}  // namespace

Eigen::MatrixXd glm_matrix(const Eigen::VectorXd& ells, const Eigen::VectorXd& Ls, double r) {
  require_disjoint(ells, Ls);
  return assemble(ells, Ls, evaluate(ells, Ls, r));
}

Eigen::MatrixXd glm_matrix_derivative(const Eigen::VectorXd& ells, const Eigen::VectorXd& Ls, double r) {
  require_disjoint(ells, Ls);
  const PointFunctions f = evaluate(ells, Ls, r);
  return f.vS * f.uT.transpose() / (r * r);
}

double fredholm_det(const Eigen::VectorXd& ells, const Eigen::VectorXd& Ls, double r) {
  return glm_matrix(ells, Ls, r).determinant();
}

double fredholm_det_normalized(const Eigen::VectorXd& ells, const Eigen::VectorXd& Ls, double r) {
  const Eigen::MatrixXd M = glm_matrix(ells, Ls, r);
  return normalized(M, M.determinant());
}

KernelSolution solve_kernel(const Eigen::VectorXd& ells, const Eigen::VectorXd& Ls, const RadialGrid& grid,
                            const KernelOptions& options) {
  require_disjoint(ells, Ls);
  const Eigen::Index n = grid.size(), s = ells.size();
  KernelSolution ks{grid, ells, Ls, {}, {}, {}, {}, {}, {}, {}, {}, {}, {}, {}, 0.0};
  ks.A.resize(n, s);
  ks.A_prime.resize(n, s);
  ks.K.resize(n);
  ks.K_prime.resize(n);
  ks.D.resize(n);
  ks.u_S.resize(n, s);
  ks.up_S.resize(n, s);
  ks.v_S.resize(n, s);
  ks.vp_S.resize(n, s);
  ks.u_T.resize(n, s);
  ks.up_T.resize(n, s);
  std::vector<double> residuals(static_cast<std::size_t>(n), 0.0);

  parallel_for(static_cast<std::size_t>(n), options.threads, [&](std::size_t idx) {
    const auto i = static_cast<Eigen::Index>(idx);
    const double r = grid.r(i);
    const PointFunctions f = evaluate(ells, Ls, r);
    const Eigen::MatrixXd M = assemble(ells, Ls, f);
    // d/dr of each entry follows from the Riccati equation: u_L v_ell / r^2.
    const Eigen::MatrixXd Mp = f.vS * f.uT.transpose() / (r * r);
    const Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
    const double det = lu.determinant();
    if (options.require_admissible && std::abs(normalized(M, det)) < 1e-12) {
      std::ostringstream os;
      os << "solve_kernel: determinant vanishes at r = " << r;
      throw Error(ErrorKind::Inadmissible, os.str());
    }
    const Eigen::VectorXd A = lu.solve(f.vS);
    const Eigen::VectorXd Ap = lu.solve(f.vpS - Mp * A);
    ks.A.row(i) = A.transpose();
    ks.A_prime.row(i) = Ap.transpose();
    ks.K[i] = A.dot(f.uT);
    ks.K_prime[i] = Ap.dot(f.uT) + A.dot(f.upT);
    ks.D[i] = det;
    ks.u_S.row(i) = f.uS.transpose();
    ks.up_S.row(i) = f.upS.transpose();
    ks.v_S.row(i) = f.vS.transpose();
    ks.vp_S.row(i) = f.vpS.transpose();
    ks.u_T.row(i) = f.uT.transpose();
    ks.up_T.row(i) = f.upT.transpose();
    const double vn = f.vS.norm();
    residuals[idx] = vn > 0 ? (M * A - f.vS).norm() / vn : 0.0;
  });
  for (double r : residuals) ks.max_residual = std::max(ks.max_residual, r);
  if (options.require_admissible)
    for (Eigen::Index i = 1; i < n; ++i)
      if (ks.D[i - 1] * ks.D[i] < 0) {
        std::ostringstream os;
        os << "solve_kernel: determinant changes sign on [" << grid.r(i - 1) << ", " << grid.r(i) << "]";
        throw Error(ErrorKind::Inadmissible, os.str());
      }
  return ks;
}

double TailParams::q(double r) const { return 4.0 * (beta * std::sin(2 * r) - alpha * std::cos(2 * r)) / (r * r); }

TailParams fit_tail(const KernelSolution& kernel, double fraction) {
  const Eigen::Index n = kernel.grid.size();
  const Eigen::Index first = std::clamp<Eigen::Index>(
      static_cast<Eigen::Index>(std::floor((1.0 - fraction) * static_cast<double>(n))), 0, n - 3);
  const Eigen::Index m = n - first;
  Eigen::MatrixXd basis(m, 6);
  Eigen::VectorXd rhs(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    const double r = kernel.grid.r(first + k);
    const double s2 = std::sin(2 * r), c2 = std::cos(2 * r);
    basis.row(k) << s2, c2, 1.0, s2 / r, c2 / r, 1.0 / r;
    rhs[k] = kernel.K[first + k];
  }
  const Eigen::VectorXd coef = basis.colPivHouseholderQr().solve(rhs);
  TailParams tp;
  tp.alpha = coef[0];
  tp.beta = coef[1];
  tp.gamma = coef[2];
  tp.alpha1 = coef[3];
  tp.beta1 = coef[4];
  tp.gamma1 = coef[5];
  tp.r_from = kernel.grid.r(first);
  tp.r_to = kernel.grid.r(n - 1);
  return tp;
}

PotentialProfile potential(const KernelSolution& kernel) {
  const RadialGrid& grid = kernel.grid;
  PotentialProfile prof{grid, grid.points(), {}, 0.0, std::nullopt, kernel.ells, kernel.Ls};
  const Eigen::ArrayXd r = prof.r.array();
  prof.q = (-2.0 / r * (kernel.K_prime.array() / r - kernel.K.array() / (r * r))).matrix();
  if (grid.size() >= 2) {
    const double r1 = r[0], r2 = r[1];
    prof.q0 = (r2 * r2 * prof.q[0] - r1 * r1 * prof.q[1]) / (r2 * r2 - r1 * r1);
  }
  if (grid.r_max() >= 20.0) prof.tail = fit_tail(kernel);
  return prof;
}

PotentialProfile potential(const Eigen::VectorXd& ells, const Eigen::VectorXd& Ls, const RadialGrid& grid,
                           const KernelOptions& options) {
  return potential(solve_kernel(ells, Ls, grid, options));
}

Eigen::VectorXd transformed_wave(const KernelSolution& kernel, double j) {
  const Order oj(j);
  const double xj = oj.eigenvalue();
  const Eigen::Index n = kernel.grid.size();
  const Eigen::Index m = kernel.Ls.size();
  Eigen::VectorXd den(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    den[k] = xj - kernel.Ls[k] * (kernel.Ls[k] + 1);
    if (std::abs(kernel.Ls[k] - j) < kCollisionTol) throw Error(ErrorKind::Singular, "transformed_wave: j belongs to T");
  }

  // Reuse the cached free solutions when j is a member of S.
  Eigen::Index cached = -1;
  for (Eigen::Index i = 0; i < kernel.ells.size(); ++i)
    if (kernel.ells[i] == j) cached = i;

  Eigen::VectorXd phi(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double uj, upj;
    if (cached >= 0) {
      uj = kernel.u_S(i, cached);
      upj = kernel.up_S(i, cached);
    } else {
      const FunctionPair p = riccati(oj, kernel.grid.r(i));
      uj = p.u;
      upj = p.u_prime;
    }
    double sum = 0.0;
    for (Eigen::Index k = 0; k < m; ++k)
      sum += kernel.A(i, k) * (kernel.u_T(i, k) * upj - kernel.up_T(i, k) * uj) / den[k];
    phi[i] = uj - sum;
  }
  return phi;
}

Eigen::VectorXd kernel_diag_series(const KernelSolution& kernel, const Eigen::MatrixXd& waves) {
  const Eigen::VectorXd c = expansion_coeffs(kernel.ells, kernel.Ls);
  if (waves.cols() != c.size() || waves.rows() != kernel.grid.size())
    throw Error(ErrorKind::Domain, "kernel_diag_series: one wave column per ell on the kernel grid required");
  return (waves.array() * kernel.v_S.array()).matrix() * c;
}

double partial_moment(const PotentialProfile& profile, double x) {
  const Eigen::Index n = profile.r.size();
  // Segment (0, r_0]: r q vanishes at the origin.
  double sum = 0.5 * profile.r[0] * profile.r[0] * profile.q[0];
  for (Eigen::Index i = 1; i < n && profile.r[i] <= x + 1e-12; ++i)
    sum += 0.5 * (profile.r[i] - profile.r[i - 1]) * (profile.r[i] * profile.q[i] + profile.r[i - 1] * profile.q[i - 1]);
  return sum;
}

double moment_numeric(const PotentialProfile& profile) {
  if (!profile.tail)
    throw Error(ErrorKind::Unfitted, "moment_numeric: potential tail not fitted; increase the grid cutoff");
  const double lambda = profile.r[profile.r.size() - 1];
  const double body = partial_moment(profile, lambda);
  // int_L^inf 4 (beta sin 2r - alpha cos 2r) / r dr with t = 2r.
  double st, ct;
  detail::sin_cos_tail(2.0 * lambda, st, ct);
  return body + 4.0 * (profile.tail->beta * st - profile.tail->alpha * ct);
}

}  // namespace ctinv
