#include "ctinv/ctcore.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <atomic>
#include <numbers>
#include <set>
#include <sstream>
#include <thread>

namespace ctinv {

namespace {
constexpr double kPi = std::numbers::pi;
}

InputSet::InputSet(std::vector<int> ells, std::vector<double> deltas) : ells_(std::move(ells)) {
  if (ells_.size() != deltas.size()) throw Error(ErrorKind::Domain, "InputSet: one phase shift per ell required");
  std::set<int> seen;
  for (int l : ells_) {
    if (l < 0) throw Error(ErrorKind::Domain, "InputSet: ell must be non-negative");
    if (!seen.insert(l).second) throw Error(ErrorKind::Domain, "InputSet: duplicate ell " + std::to_string(l));
  }
  // Keep S sorted; deltas follow their ells.
  std::vector<std::size_t> order(ells_.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return ells_[a] < ells_[b]; });
  std::vector<int> sorted(ells_.size());
  deltas_.resize(static_cast<Eigen::Index>(deltas.size()));
  for (std::size_t i = 0; i < order.size(); ++i) {
    sorted[i] = ells_[order[i]];
    const double d = deltas[order[i]];
    if (!std::isfinite(d) || std::abs(d) > kPi / 2 + 1e-12)
      throw Error(ErrorKind::Domain, "InputSet: phase shift outside [-pi/2, pi/2]");
    deltas_[static_cast<Eigen::Index>(i)] = reduce_phase(d);
  }
  ells_ = std::move(sorted);
}

Eigen::VectorXd InputSet::ells_real() const {
  Eigen::VectorXd out(static_cast<Eigen::Index>(ells_.size()));
  for (std::size_t i = 0; i < ells_.size(); ++i) out[static_cast<Eigen::Index>(i)] = ells_[i];
  return out;
}

int InputSet::max_ell() const { return ells_.empty() ? 0 : *std::max_element(ells_.begin(), ells_.end()); }

bool InputSet::all_even() const {
  return !ells_.empty() && std::all_of(ells_.begin(), ells_.end(), [](int l) { return l % 2 == 0; });
}

bool InputSet::all_odd() const {
  return !ells_.empty() && std::all_of(ells_.begin(), ells_.end(), [](int l) { return l % 2 == 1; });
}

ShiftedSet::ShiftedSet(Eigen::VectorXd Ls) : Ls_(std::move(Ls)) {
  std::sort(Ls_.begin(), Ls_.end());
  for (Eigen::Index i = 0; i < Ls_.size(); ++i) {
    if (!(Ls_[i] > -0.5)) throw Error(ErrorKind::Domain, "ShiftedSet: every L must exceed -1/2");
    if (i > 0 && Ls_[i] - Ls_[i - 1] < kCollisionTol) throw Error(ErrorKind::Singular, "ShiftedSet: repeated L");
  }
}

double reduce_phase(double delta) {
  double d = std::remainder(delta, kPi);  // [-pi/2, pi/2]
  if (d <= -kPi / 2) d += kPi;
  return d;
}

PhaseEvaluation phases_from_T(const Eigen::VectorXd& ells, const Eigen::VectorXd& Ls) {
  using cd = std::complex<double>;
  const auto km = kappa_matrices(ells, Ls);
  const Eigen::Index n = ells.size();
  const Eigen::MatrixXd P = km.m_sin * km.m_cos.partialPivLu().inverse();

  PhaseEvaluation out;
  out.delta.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    cd kp(0, 0), km_(0, 0);
    for (Eigen::Index j = 0; j < n; ++j) {
      const double arg = (ells[i] - ells[j]) * kPi / 2;
      kp += P(i, j) * std::polar(1.0, arg);
      km_ += P(i, j) * std::polar(1.0, -arg);
    }
    const cd I(0, 1);
    const cd z = (1.0 + I * kp) / (1.0 - I * km_);
    // (1/2i) log z = arg(z)/2 - i log|z|/2
    out.delta[i] = reduce_phase(0.5 * std::arg(z));
    out.imag_residue = std::max(out.imag_residue, std::abs(0.5 * std::log(std::abs(z))));
  }
  if (out.imag_residue > 1e-6) {
    std::ostringstream os;
    os << "phases_from_T: imaginary residue " << out.imag_residue << " exceeds 1e-6";
    throw Error(ErrorKind::Inconsistent, os.str());
  }
  return out;
}

ShiftedSet coeffs_to_T(const Eigen::VectorXd& ells, const Eigen::VectorXd& c) {
  const Eigen::Index n = ells.size();
  if (c.size() != n) throw Error(ErrorKind::Domain, "coeffs_to_T: one coefficient per ell required");
  const Eigen::ArrayXd x = ells.array() * (ells.array() + 1.0);

  // p(x) = prod_{l'} (x - x_l') + sum_l c_l prod_{l' != l} (x - x_l'), ascending powers.
  auto mul_linear = [](const Eigen::VectorXd& poly, double root) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(poly.size() + 1);
    out.tail(poly.size()) += poly;
    out.head(poly.size()) -= root * poly;
    return out;
  };
  Eigen::VectorXd p = Eigen::VectorXd::Ones(1);
  for (Eigen::Index k = 0; k < n; ++k) p = mul_linear(p, x[k]);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::VectorXd basis = Eigen::VectorXd::Ones(1);
    for (Eigen::Index k = 0; k < n; ++k)
      if (k != i) basis = mul_linear(basis, x[k]);
    p.head(basis.size()) += c[i] * basis;
  }

  Eigen::VectorXcd roots(n);
  if (n == 1) {
    roots[0] = -p[0];
  } else {
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(n, n);
    companion.block(1, 0, n - 1, n - 1).setIdentity();
    companion.col(n - 1) = -p.head(n);
    roots = Eigen::EigenSolver<Eigen::MatrixXd>(companion, false).eigenvalues();
  }

  auto eval = [&](double t, double& dp) {
    double v = 0;
    dp = 0;
    for (Eigen::Index k = p.size() - 1; k >= 0; --k) {
      dp = dp * t + v;
      v = v * t + p[k];
    }
    return v;
  };

  Eigen::VectorXd Ls(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double scale = 1.0 + std::abs(roots[k]);
    if (std::abs(roots[k].imag()) > 1e-8 * scale) {
      std::ostringstream os;
      os << "coeffs_to_T: complex root " << roots[k] << " of the L(L+1) polynomial";
      throw Error(ErrorKind::NoValidT, os.str());
    }
    double X = roots[k].real();
    for (int it = 0; it < 3; ++it) {
      double dp;
      const double v = eval(X, dp);
      if (dp == 0.0) break;
      X -= v / dp;
    }
    if (!(X > -0.25)) {
      std::ostringstream os;
      os << "coeffs_to_T: root L(L+1) = " << X << " has no branch with L > -1/2";
      throw Error(ErrorKind::NoValidT, os.str());
    }
    Ls[k] = 0.5 * (-1.0 + std::sqrt(1.0 + 4.0 * X));
  }
  return ShiftedSet(Ls);
}

namespace {

// Residual of the nonlinear system, wrapped to the phase branch.
bool residual(const Eigen::VectorXd& ells, const Eigen::VectorXd& target, const Eigen::VectorXd& Ls,
              Eigen::VectorXd& out) {
  try {
    const PhaseEvaluation pe = phases_from_T(ells, Ls);
    out.resize(target.size());
    for (Eigen::Index i = 0; i < target.size(); ++i) out[i] = reduce_phase(pe.delta[i] - target[i]);
    return true;
  } catch (const Error&) {
    return false;
  }
}

bool admissible_point(const Eigen::VectorXd& ells, const Eigen::VectorXd& Ls) {
  for (Eigen::Index k = 0; k < Ls.size(); ++k) {
    if (!(Ls[k] > -0.5)) return false;
    for (Eigen::Index i = 0; i < ells.size(); ++i)
      if (std::abs(Ls[k] - ells[i]) < 1e-6) return false;
    for (Eigen::Index m = 0; m < k; ++m)
      if (std::abs(Ls[k] - Ls[m]) < 1e-6) return false;
  }
  return true;
}

SeedDiagnostic newton(const Eigen::VectorXd& ells, const Eigen::VectorXd& target, Eigen::VectorXd seed,
                      const SolveOptions& opt) {
  SeedDiagnostic diag;
  diag.seed = seed;
  Eigen::VectorXd T = std::move(seed);
  Eigen::VectorXd F;
  if (!residual(ells, target, T, F)) {
    diag.end = T;
    diag.residual = std::numeric_limits<double>::infinity();
    return diag;
  }
  const Eigen::Index n = T.size();
  double fnorm = F.norm();
  for (int it = 0; it < opt.max_newton_iter && fnorm > opt.residual_tol; ++it) {
    Eigen::MatrixXd J(n, n);
    bool ok = true;
    for (Eigen::Index k = 0; k < n && ok; ++k) {
      const double h = 1e-7 * std::max(1.0, std::abs(T[k]));
      Eigen::VectorXd tp = T, tm = T, fp, fm;
      tp[k] += h;
      tm[k] -= h;
      ok = residual(ells, target, tp, fp) && residual(ells, target, tm, fm);
      if (ok) {
        for (Eigen::Index i = 0; i < n; ++i) J(i, k) = reduce_phase(fp[i] - fm[i]) / (2 * h);
      }
    }
    if (!ok) break;
    const Eigen::VectorXd step = -J.colPivHouseholderQr().solve(F);
    if (!step.allFinite()) break;

    double lambda = 1.0;
    bool accepted = false;
    for (int half = 0; half <= opt.max_halvings; ++half, lambda *= 0.5) {
      const Eigen::VectorXd trial = T + lambda * step;
      Eigen::VectorXd Ft;
      if (!admissible_point(ells, trial) || !residual(ells, target, trial, Ft)) continue;
      if (Ft.norm() < fnorm) {
        T = trial;
        F = Ft;
        fnorm = Ft.norm();
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    if ((lambda * step).norm() < opt.step_tol) break;
  }
  diag.end = T;
  diag.residual = fnorm;
  diag.converged = fnorm < opt.accept_tol;
  return diag;
}

}  // namespace

SolveResult solve_T(const InputSet& S, const SolveOptions& opt) {
  SolveResult result;
  const Eigen::VectorXd ells = S.ells_real();
  const Eigen::VectorXd& target = S.deltas();
  const Eigen::Index n = S.size();
  if (n == 0) throw Error(ErrorKind::Domain, "solve_T: empty input set");

  if ((target.array().abs() < 1e-12).all()) {
    result.zero_potential = true;
    return result;
  }

  if (n == 1) {
    const double base = ells[0] - 2.0 * target[0] / kPi;
    for (int k = -opt.k_range; k <= opt.k_range; ++k) {
      const double L = base + 2.0 * k;
      if (L > -0.5 && std::abs(L - ells[0]) >= kCollisionTol) result.candidates.emplace_back(Eigen::VectorXd::Constant(1, L));
    }
    return result;
  }

  const double lo = opt.box_lo;
  const double hi = opt.box_hi.value_or(S.max_ell() + 3.0);
  const int m = opt.seeds_per_axis;
  std::vector<double> axis(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) axis[static_cast<std::size_t>(i)] = lo + (i + 0.5) * (hi - lo) / m;

  // Strictly increasing index tuples: T is a set, so ordering removes duplicates.
  std::vector<Eigen::VectorXd> seeds;
  std::vector<int> idx(static_cast<std::size_t>(n));
  for (Eigen::Index k = 0; k < n; ++k) idx[static_cast<std::size_t>(k)] = static_cast<int>(k);
  while (true) {
    if (idx.back() >= m) break;
    Eigen::VectorXd s(n);
    for (Eigen::Index k = 0; k < n; ++k) s[k] = axis[static_cast<std::size_t>(idx[static_cast<std::size_t>(k)])];
    if (admissible_point(ells, s)) seeds.push_back(s);
    // next combination
    Eigen::Index k = n - 1;
    while (k >= 0 && idx[static_cast<std::size_t>(k)] == m - static_cast<int>(n - k)) --k;
    if (k < 0) break;
    ++idx[static_cast<std::size_t>(k)];
    for (Eigen::Index j = k + 1; j < n; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
  }

  result.diagnostics.resize(seeds.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < seeds.size(); i = next++) result.diagnostics[i] = newton(ells, target, seeds[i], opt);
  };
  const int threads = std::max(1, opt.threads);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  // Sequential, seed-ordered deduplication keeps the output deterministic.
  for (const auto& d : result.diagnostics) {
    if (!d.converged) continue;
    Eigen::VectorXd sorted = d.end;
    std::sort(sorted.begin(), sorted.end());
    const bool dup = std::any_of(result.candidates.begin(), result.candidates.end(), [&](const ShiftedSet& c) {
      return (c.values() - sorted).cwiseAbs().maxCoeff() < opt.dedupe_tol;
    });
    if (!dup) result.candidates.emplace_back(sorted);
  }
  std::sort(result.candidates.begin(), result.candidates.end(), [](const ShiftedSet& a, const ShiftedSet& b) {
    return std::lexicographical_compare(a.values().begin(), a.values().end(), b.values().begin(), b.values().end());
  });
  return result;
}

AsymptoticData asymptotic_data(const Eigen::VectorXd& ells, const Eigen::VectorXd& Ls) {
  const auto km = kappa_matrices(ells, Ls);
  const Eigen::Index n = ells.size();
  Eigen::VectorXd rc(n), rs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    rc[i] = std::cos(ells[i] * kPi / 2);
    rs[i] = std::sin(ells[i] * kPi / 2);
  }
  const auto lu = km.m_cos.fullPivLu();
  if (!lu.isInvertible()) throw Error(ErrorKind::Singular, "asymptotic_data: singular cosine matrix");
  AsymptoticData out;
  out.a = lu.solve(rc);
  out.b = lu.solve(rs);
  out.residual = std::max((km.m_cos * out.a - rc).cwiseAbs().maxCoeff(), (km.m_cos * out.b - rs).cwiseAbs().maxCoeff());
  for (Eigen::Index k = 0; k < n; ++k) {
    const double c = std::cos(Ls[k] * kPi / 2), s = std::sin(Ls[k] * kPi / 2);
    out.alpha += 0.5 * (out.a[k] * c - out.b[k] * s);
    out.beta += -0.5 * (out.a[k] * s + out.b[k] * c);
  }
  return out;
}

SumRules sum_rules(const InputSet& S, const Eigen::VectorXd& Ls, const std::optional<Eigen::VectorXd>& B) {
  const Eigen::VectorXd ells = S.ells_real();
  const Eigen::VectorXd c = expansion_coeffs(ells, Ls);
  const Eigen::VectorXd& d = S.deltas();
  Eigen::VectorXd norm;
  if (B) {
    if (B->size() != S.size()) throw Error(ErrorKind::InsufficientData, "sum_rules: one B per ell required");
    norm = *B;
  } else if (S.all_even() || S.all_odd()) {
    norm = d.array().cos().inverse();
  } else {
    throw Error(ErrorKind::InsufficientData, "sum_rules: normalization constants needed for mixed-parity S");
  }
  SumRules out;
  for (Eigen::Index i = 0; i < S.size(); ++i) {
    const double sign = (S.ells()[static_cast<std::size_t>(i)] % 2 == 0) ? 1.0 : -1.0;
    out.cos_rule += sign * c[i] * norm[i] * std::cos(d[i]);
    out.sin_rule += sign * c[i] * norm[i] * std::sin(d[i]);
    out.simplified += c[i];
  }
  return out;
}

OneShiftPhase one_shift_phase_formula(double L, int ell, double delta0) {
  if (ell < 0) throw Error(ErrorKind::Domain, "one_shift_phase_formula: ell must be non-negative");
  OneShiftPhase out;
  const double t0 = std::tan(delta0);
  if (ell % 2 == 1) {
    out.tan_delta = 0.0;
  } else {
    const double XL = L * (L + 1.0);
    const double den = XL - ell * (ell + 1.0);
    if (std::abs(den) < 1e-12) throw Error(ErrorKind::Resonant, "one_shift_phase_formula: L(L+1) = ell(ell+1)");
    out.tan_delta = XL / den * t0;
  }
  if (delta0 > 0 && ell > 0) {
    const double bound = (ell % 2 == 1) ? 0.0 : 4.0 / (15.0 * ell * ell) * t0;
    out.attractive_bound_holds = out.tan_delta <= bound + 1e-15;
  }
  return out;
}

}  // namespace ctinv
