#include "ctinv/consistency.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

#include "ctinv/errors.hpp"
#include "ctinv/glm.hpp"
#include "ctinv/parallel.hpp"

namespace ctinv {

namespace {

struct Sample {
  double r, d, dn;  // determinant and its row-norm normalized value
};

using DetFn = std::function<Sample(double)>;

Sample direct_sample(const Eigen::VectorXd& ells, const Eigen::VectorXd& Ls, double r) {
  const Eigen::MatrixXd M = glm_matrix(ells, Ls, r);
  const double d = M.determinant();
  const double norms = M.rowwise().norm().prod();
  return {r, d, norms > 0 ? d / norms : 0.0};
}

double bisect_zero(const DetFn& f, double lo, double hi, double dlo) {
  for (int it = 0; it < 200 && hi - lo > 1e-10; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double dm = f(mid).d;
    if (dm == 0.0) return mid;
    if ((dm > 0) == (dlo > 0)) {
      lo = mid;
      dlo = dm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Minimum of |dn| on [lo, hi] by golden section.
Sample golden_min(const DetFn& f, double lo, double hi) {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
  Sample s1 = f(x1), s2 = f(x2);
  for (int it = 0; it < 80 && hi - lo > 1e-12; ++it) {
    if (std::abs(s1.dn) < std::abs(s2.dn)) {
      hi = x2;
      x2 = x1;
      s2 = s1;
      x1 = hi - g * (hi - lo);
      s1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      s1 = s2;
      x2 = lo + g * (hi - lo);
      s2 = f(x2);
    }
  }
  return std::abs(s1.dn) < std::abs(s2.dn) ? s1 : s2;
}

// Sign changes and tangential dips among samples[first..]. The first sample
// of the range is compared against its predecessor when there is one.
void find_zeros(const std::vector<Sample>& s, std::size_t first, const DetFn& f, const ScanOptions& opt,
                bool stop_at_first, std::vector<ZeroLocation>& out) {
  const std::size_t start = std::max<std::size_t>(first, 1);
  for (std::size_t i = start; i < s.size(); ++i) {
    const Sample &a = s[i - 1], &b = s[i];
    if (a.d == 0.0 || (a.d > 0) != (b.d > 0)) {
      const double r = a.d == 0.0 ? a.r : (opt.refine ? bisect_zero(f, a.r, b.r, a.d) : 0.5 * (a.r + b.r));
      out.push_back({r, a.r, b.r, false});
      if (stop_at_first) return;
      continue;
    }
    // Local minimum of |dn| without a sign change: possibly a double zero.
    if (i + 1 < s.size()) {
      const Sample& c = s[i + 1];
      const bool no_change = (b.d > 0) == (c.d > 0);
      if (no_change && std::abs(b.dn) < 1e-3 && std::abs(b.dn) <= std::abs(a.dn) && std::abs(b.dn) <= std::abs(c.dn)) {
        const Sample m = golden_min(f, a.r, c.r);
        if (std::abs(m.dn) < opt.dip_tol) {
          out.push_back({m.r, a.r, c.r, true});
          if (stop_at_first) return;
        }
      }
    }
  }
}

struct Settlement {
  bool settled = false;
  double spread = 0.0;
  std::optional<double> horizon;  // largest r at which the model still allows a zero
};

// Fits D - D_inf ~ C1/r + (C2 + P sin 2r + Q cos 2r)/r^2 over the last 10% of the
// samples and asks whether a zero can still occur beyond the last sample.
Settlement settle(const std::vector<Sample>& s, double dinf) {
  Settlement out;
  const double lambda = s.back().r;
  std::size_t first = s.size() - 1;
  while (first > 0 && s[first - 1].r >= 0.9 * lambda) --first;
  const std::size_t m = s.size() - first;
  for (std::size_t i = first; i < s.size(); ++i) out.spread = std::max(out.spread, std::abs(s[i].d - s.back().d));
  if (m < 8) return out;

  Eigen::MatrixXd basis(static_cast<Eigen::Index>(m), 4);
  Eigen::VectorXd y(static_cast<Eigen::Index>(m));
  for (std::size_t k = 0; k < m; ++k) {
    const double r = s[first + k].r;
    const auto row = static_cast<Eigen::Index>(k);
    basis.row(row) << 1.0 / r, 1.0 / (r * r), std::sin(2 * r) / (r * r), std::cos(2 * r) / (r * r);
    y[row] = s[first + k].d - dinf;
  }
  const Eigen::VectorXd coef = basis.colPivHouseholderQr().solve(y);
  const double max_res = (basis * coef - y).cwiseAbs().maxCoeff();
  const double c1 = coef[0];
  // Everything beyond the 1/r law, bounded generously.
  const double e = 2.0 * (std::abs(coef[1]) + std::hypot(coef[2], coef[3]) + max_res * lambda * lambda);
  const double scale = std::abs(s.back().dn) > 0 ? std::abs(s.back().d / s.back().dn) : 1.0;

  double horizon = 0.0;
  if (std::abs(dinf) < 1e-10 * scale) {
    if (std::abs(c1) < 1e-14 * scale) return out;  // nothing decides the sign at infinity
    horizon = e / std::abs(c1);
  } else {
    // Largest root of dinf r^2 + c1 r -/+ e = 0.
    for (double sign : {1.0, -1.0}) {
      const double disc = c1 * c1 + 4.0 * dinf * sign * e;
      if (disc < 0) continue;
      for (double root : {(-c1 + std::sqrt(disc)) / (2 * dinf), (-c1 - std::sqrt(disc)) / (2 * dinf)})
        horizon = std::max(horizon, root);
    }
  }
  if (horizon <= lambda) {
    out.settled = true;
  } else {
    out.horizon = horizon;
  }
  return out;
}

void append_samples(std::vector<Sample>& s, const DetFn& f, double step, double to) {
  auto i = static_cast<long>(std::llround(s.empty() ? 0.0 : s.back().r / step));
  const auto n = static_cast<long>(std::floor(to / step + 1e-9));
  for (++i; i <= n; ++i) s.push_back(f(static_cast<double>(i) * step));
}

}  // namespace

double default_lambda(const Eigen::VectorXd& ells, const Eigen::VectorXd& Ls) {
  const double top = std::max(ells.size() ? ells.maxCoeff() : 0.0, Ls.size() ? Ls.maxCoeff() : 0.0);
  return 50.0 + 10.0 * std::max(top, 0.0);
}

double asymptotic_det(const Eigen::VectorXd& ells, const Eigen::VectorXd& Ls) {
  require_disjoint(ells, Ls);
  const Eigen::Index n = ells.size();
  Eigen::MatrixXd C(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index k = 0; k < n; ++k)
      C(i, k) = std::cos((ells[i] - Ls[k]) * std::numbers::pi / 2) / (ells[i] * (ells[i] + 1) - Ls[k] * (Ls[k] + 1));
  return C.determinant();
}

AdmissibilityVerdict scan_zeros(const Eigen::VectorXd& ells, const Eigen::VectorXd& Ls, const ScanOptions& options) {
  require_disjoint(ells, Ls);
  if (!(options.step > 0)) throw Error(ErrorKind::Domain, "scan_zeros: step must be positive");
  AdmissibilityVerdict v;
  v.d_infinity = asymptotic_det(ells, Ls);
  double lambda = options.lambda.value_or(default_lambda(ells, Ls));
  const DetFn f = [&](double r) { return direct_sample(ells, Ls, r); };

  std::vector<Sample> samples;
  std::size_t scanned = 0;
  for (int ext = 0;; ++ext) {
    append_samples(samples, f, options.step, lambda);
    find_zeros(samples, scanned, f, options, false, v.zeros_found);
    scanned = samples.size();
    const Settlement st = settle(samples, v.d_infinity);
    v.settled = st.settled;
    v.tail_spread = st.spread;
    v.predicted_zero = st.horizon;
    if (st.settled || !v.zeros_found.empty() || ext >= options.max_extensions) break;
    lambda = std::max(2.0 * lambda, std::min(1.25 * st.horizon.value_or(0.0), 4.0 * lambda));
  }
  v.lambda_used = samples.back().r;
  v.d_lambda = samples.back().d;
  v.admissible = v.zeros_found.empty() && v.settled;
  return v;
}

bool admissible_1d(double ell, double L) {
  if (!(ell > -0.5) || !(L > -0.5)) throw Error(ErrorKind::Domain, "admissible_1d: both indices must exceed -1/2");
  return std::abs(L - ell) <= 1.0 + 1e-12;
}

Selection select_physical(const InputSet& S, const std::vector<ShiftedSet>& candidates, const ScanOptions& options) {
  Selection sel;
  const Eigen::VectorXd ells = S.ells_real();
  for (const ShiftedSet& cand : candidates) {
    CandidateReport rep;
    rep.Ls = cand.values();
    rep.verdict = scan_zeros(ells, rep.Ls, options);
    bool ok = rep.verdict.admissible;
    if (ells.size() == 1) {
      rep.closed_form = admissible_1d(ells[0], rep.Ls[0]);
      rep.disagreement = *rep.closed_form != rep.verdict.admissible;
      ok = *rep.closed_form;
    }
    if (ok) sel.admissible.push_back(rep.Ls);
    sel.reports.push_back(std::move(rep));
  }
  if (sel.admissible.size() == 1) sel.chosen = sel.admissible.front();
  sel.ambiguous = sel.admissible.size() > 1;
  return sel;
}

AdmissibilityMap admissibility_map(const Eigen::VectorXd& ells, const MapBox& box, const ScanOptions& options,
                                   int threads) {
  if (ells.size() != 2) throw Error(ErrorKind::Domain, "admissibility_map: S must have two elements");
  if (!(box.resolution > 0) || !(box.hi1 > box.lo1) || !(box.hi2 > box.lo2) || box.lo1 < -0.5 || box.lo2 < -0.5)
    throw Error(ErrorKind::Domain, "admissibility_map: invalid box");

  auto centres = [&](double lo, double hi) {
    const auto n = std::max<Eigen::Index>(1, static_cast<Eigen::Index>(std::floor((hi - lo) / box.resolution + 1e-9)));
    const double w = (hi - lo) / static_cast<double>(n);
    Eigen::VectorXd c(n);
    for (Eigen::Index i = 0; i < n; ++i) c[i] = lo + (static_cast<double>(i) + 0.5) * w;
    return c;
  };

  AdmissibilityMap map;
  map.ells = ells;
  map.axis1 = centres(box.lo1, box.hi1);
  map.axis2 = centres(box.lo2, box.hi2);
  const Eigen::Index n1 = map.axis1.size(), n2 = map.axis2.size();
  map.cells.setZero(n1, n2);
  const bool same_axes = n1 == n2 && map.axis1 == map.axis2;

  map.lambda = options.lambda.value_or(default_lambda(ells, Eigen::VectorXd::Constant(1, std::max(box.hi1, box.hi2))));
  const double step = options.step;
  const auto nr = static_cast<Eigen::Index>(std::floor(map.lambda / step + 1e-9));

  // Free solutions on the shared radial samples.
  Eigen::MatrixXd v(nr, 2), vp(nr, 2);
  for (Eigen::Index k = 0; k < nr; ++k)
    for (int a = 0; a < 2; ++a) {
      const FunctionPair p = riccati(Order(ells[a]), static_cast<double>(k + 1) * step);
      v(k, a) = p.v;
      vp(k, a) = p.v_prime;
    }
  auto tabulate = [&](const Eigen::VectorXd& axis, Eigen::MatrixXd& u, Eigen::MatrixXd& up) {
    u.resize(nr, axis.size());
    up.resize(nr, axis.size());
    parallel_for(static_cast<std::size_t>(axis.size()), threads, [&](std::size_t j) {
      const auto c = static_cast<Eigen::Index>(j);
      const Order o(axis[c]);
      for (Eigen::Index k = 0; k < nr; ++k) {
        const FunctionPair p = riccati(o, static_cast<double>(k + 1) * step);
        u(k, c) = p.u;
        up(k, c) = p.u_prime;
      }
    });
  };
  Eigen::MatrixXd u1, up1, u2, up2;
  tabulate(map.axis1, u1, up1);
  if (same_axes) {
    u2 = u1;
    up2 = up1;
  } else {
    tabulate(map.axis2, u2, up2);
  }

  std::vector<int> unsettled(static_cast<std::size_t>(n1), 0), errors(static_cast<std::size_t>(n1), 0);
  ScanOptions cell_opt = options;
  cell_opt.refine = false;

  parallel_for(static_cast<std::size_t>(n1), threads, [&](std::size_t row) {
    const auto i = static_cast<Eigen::Index>(row);
    for (Eigen::Index j = same_axes ? i + 1 : 0; j < n2; ++j) {
      const double L1 = map.axis1[i], L2 = map.axis2[j];
      bool collides = std::abs(L1 - L2) < kCollisionTol;
      for (int a = 0; a < 2; ++a)
        collides = collides || std::abs(L1 - ells[a]) < kCollisionTol || std::abs(L2 - ells[a]) < kCollisionTol;
      if (collides) continue;
      const Eigen::Vector2d Ls(L1, L2);
      try {
        const double den[2][2] = {{ells[0] * (ells[0] + 1) - L1 * (L1 + 1), ells[0] * (ells[0] + 1) - L2 * (L2 + 1)},
                                  {ells[1] * (ells[1] + 1) - L1 * (L1 + 1), ells[1] * (ells[1] + 1) - L2 * (L2 + 1)}};
        std::vector<Sample> s(static_cast<std::size_t>(nr));
        for (Eigen::Index k = 0; k < nr; ++k) {
          double m[2][2];
          for (int a = 0; a < 2; ++a) {
            m[a][0] = (u1(k, i) * vp(k, a) - up1(k, i) * v(k, a)) / den[a][0];
            m[a][1] = (u2(k, j) * vp(k, a) - up2(k, j) * v(k, a)) / den[a][1];
          }
          const double d = m[0][0] * m[1][1] - m[0][1] * m[1][0];
          const double norms = std::hypot(m[0][0], m[0][1]) * std::hypot(m[1][0], m[1][1]);
          s[static_cast<std::size_t>(k)] = {static_cast<double>(k + 1) * step, d, norms > 0 ? d / norms : 0.0};
        }
        const DetFn f = [&](double r) { return direct_sample(ells, Ls, r); };
        std::vector<ZeroLocation> zeros;
        find_zeros(s, 0, f, cell_opt, true, zeros);
        bool ok = false;
        if (zeros.empty()) {
          const Settlement st = settle(s, asymptotic_det(ells, Ls));
          if (st.settled) {
            ok = true;
          } else {
            // Rare: let the full scan extend Lambda for this cell.
            const AdmissibilityVerdict vd = scan_zeros(ells, Ls, cell_opt);
            ok = vd.admissible;
            if (!vd.settled && vd.zeros_found.empty()) ++unsettled[row];
          }
        }
        map.cells(i, j) = ok ? 1 : 0;
        if (same_axes) map.cells(j, i) = map.cells(i, j);
      } catch (const Error&) {
        ++errors[row];
      }
    }
  });
  for (std::size_t r = 0; r < unsettled.size(); ++r) {
    map.unsettled += unsettled[r];
    map.errors += errors[r];
  }
  return map;
}

}  // namespace ctinv
