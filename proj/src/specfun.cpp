#include "ctinv/specfun.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "ctinv/errors.hpp"

namespace ctinv {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kFpMin = std::numeric_limits<double>::min() / kEps;
constexpr int kMaxIter = 100000;

// Taylor coefficients of 1/Gamma(z) = sum_k c_k z^k, k = 1..26.
constexpr std::array<double, 26> kRecipGamma = {
    1.0000000000000000,  0.5772156649015329,  -0.6558780715202538, -0.0420026350340952,
    0.1665386113822915,  -0.0421977345555443, -0.0096219715278770, 0.0072189432466630,
    -0.0011651675918591, -0.0002152416741149, 0.0001280502823882,  -0.0000201348547807,
    -0.0000012504934821, 0.0000011330272320,  -0.0000002056338417, 0.0000000061160950,
    0.0000000050020075,  -0.0000000011812746, 0.0000000001043427,  0.0000000000077823,
    -0.0000000000036968, 0.0000000000005100,  -0.0000000000000206, -0.0000000000000054,
    0.0000000000000014,  0.0000000000000001};

// Temme's auxiliary functions for |mu| <= 1/2:
//   gam1 = (1/Gamma(1-mu) - 1/Gamma(1+mu)) / (2 mu),  gam2 = (1/Gamma(1-mu) + 1/Gamma(1+mu)) / 2.
void temme_gammas(double mu, double& gam1, double& gam2) {
  // 1/Gamma(1+z) = sum_k c_{k+1} z^k; split into even and odd parts in mu.
  const double mu2 = mu * mu;
  double even = 0, odd = 0, p = 1;
  for (std::size_t k = 0; k + 1 < kRecipGamma.size(); k += 2) {
    even += kRecipGamma[k] * p;
    odd += kRecipGamma[k + 1] * p;
    p *= mu2;
  }
  gam2 = even;
  gam1 = -odd;
}

// Hankel expansion of J_mu and Y_mu; valid for x well beyond mu^2.
void hankel(double mu, double x, double& jv, double& yv) {
  const double m = 4.0 * mu * mu;
  const double inv8x = 1.0 / (8.0 * x);
  double p = 1.0, q = 0.0;
  double term = 1.0;
  double prev = std::numeric_limits<double>::infinity();
  for (int k = 1; k < 200; ++k) {
    const double odd = 2.0 * k - 1.0;
    term *= (m - odd * odd) * inv8x / k;
    const double mag = std::abs(term);
    if (mag > prev && k > mu + 1) break;  // asymptotic series started to diverge
    prev = mag;
    // a_k enters P for even k and Q for odd k with alternating signs.
    const int r = k % 4;
    if (r == 1) q += term;
    else if (r == 2) p -= term;
    else if (r == 3) q -= term;
    else p += term;
    if (mag < 1e-17 * std::max(std::abs(p), 1.0)) break;
  }
  const double chi = x - (0.5 * mu + 0.25) * kPi;
  const double amp = std::sqrt(2.0 / (kPi * x));
  const double c = std::cos(chi), s = std::sin(chi);
  jv = amp * (p * c - q * s);
  yv = amp * (p * s + q * c);
}

double hankel_threshold(double nu) { return std::max(25.0, (nu + 1.0) * (nu + 1.0)); }

// Temme / Steed evaluation (Numerical Recipes "bessjy" scheme).
BesselJY bessel_jy_steed(double nu, double x) {
  constexpr double kXMin = 2.0;
  const int nl = x < kXMin ? static_cast<int>(nu + 0.5) : std::max(0, static_cast<int>(nu - x + 1.5));
  const double xmu = nu - nl;
  const double xmu2 = xmu * xmu;
  const double xi = 1.0 / x;
  const double xi2 = 2.0 * xi;
  const double w = xi2 / kPi;

  // CF1: J'_nu / J_nu by modified Lentz.
  int isign = 1;
  double h = nu * xi;
  if (h < kFpMin) h = kFpMin;
  double b = xi2 * nu, d = 0.0, c = h;
  int i = 0;
  for (; i < kMaxIter; ++i) {
    b += xi2;
    d = b - d;
    if (std::abs(d) < kFpMin) d = kFpMin;
    c = b - 1.0 / c;
    if (std::abs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    const double del = c * d;
    h *= del;
    if (d < 0.0) isign = -isign;
    if (std::abs(del - 1.0) <= kEps) break;
  }
  if (i >= kMaxIter) throw Error(ErrorKind::Domain, "bessel_jy: CF1 failed to converge");

  double rjl = isign * kFpMin;
  double rjpl = h * rjl;
  const double rjl1 = rjl, rjp1 = rjpl;
  double fact = nu * xi;
  for (int l = nl - 1; l >= 0; --l) {
    const double rjtemp = fact * rjl + rjpl;
    fact -= xi;
    rjpl = fact * rjtemp - rjl;
    rjl = rjtemp;
  }
  if (rjl == 0.0) rjl = kEps;
  const double f = rjpl / rjl;

  double rjmu, rymu, rymup, ry1;
  if (x < kXMin) {
    const double x2 = 0.5 * x;
    const double pimu = kPi * xmu;
    const double fct = std::abs(pimu) < kEps ? 1.0 : pimu / std::sin(pimu);
    double dd = -std::log(x2);
    double e = xmu * dd;
    const double fct2 = std::abs(e) < kEps ? 1.0 : std::sinh(e) / e;
    double gam1, gam2;
    temme_gammas(xmu, gam1, gam2);
    const double gampl = gam2 - xmu * gam1;  // 1/Gamma(1+mu)
    const double gammi = gam2 + xmu * gam1;  // 1/Gamma(1-mu)
    double ff = 2.0 / kPi * fct * (gam1 * std::cosh(e) + gam2 * fct2 * dd);
    e = std::exp(e);
    double p = e / (gampl * kPi);
    double q = 1.0 / (e * kPi * gammi);
    const double pimu2 = 0.5 * pimu;
    const double fct3 = std::abs(pimu2) < kEps ? 1.0 : std::sin(pimu2) / pimu2;
    const double r = kPi * pimu2 * fct3 * fct3;
    double cc = 1.0;
    dd = -x2 * x2;
    double sum = ff + r * q, sum1 = p;
    int k = 1;
    for (; k <= kMaxIter; ++k) {
      ff = (k * ff + p + q) / (k * k - xmu2);
      cc *= dd / k;
      p /= k - xmu;
      q /= k + xmu;
      const double del = cc * (ff + r * q);
      sum += del;
      const double del1 = cc * p - k * del;
      sum1 += del1;
      if (std::abs(del) < (1.0 + std::abs(sum)) * kEps) break;
    }
    if (k > kMaxIter) throw Error(ErrorKind::Domain, "bessel_jy: Temme series failed to converge");
    rymu = -sum;
    ry1 = -sum1 * xi2;
    rymup = xmu * xi * rymu - ry1;
    rjmu = w / (rymup - f * rymu);
  } else {
    // CF2: p + i q = (J' + i Y') / (J + i Y) by Steed's method.
    double a = 0.25 - xmu2;
    double p = -0.5 * xi, q = 1.0;
    const double br = 2.0 * x;
    double bi = 2.0;
    double fct = a * xi / (p * p + q * q);
    double cr = br + q * fct, ci = bi + p * fct;
    double den = br * br + bi * bi;
    double dr = br / den, di = -bi / den;
    double dlr = cr * dr - ci * di, dli = cr * di + ci * dr;
    double temp = p * dlr - q * dli;
    q = p * dli + q * dlr;
    p = temp;
    int k = 1;
    for (; k < kMaxIter; ++k) {
      a += 2 * k;
      bi += 2.0;
      dr = a * dr + br;
      di = a * di + bi;
      if (std::abs(dr) + std::abs(di) < kFpMin) dr = kFpMin;
      fct = a / (cr * cr + ci * ci);
      cr = br + cr * fct;
      ci = bi - ci * fct;
      if (std::abs(cr) + std::abs(ci) < kFpMin) cr = kFpMin;
      den = dr * dr + di * di;
      dr /= den;
      di /= -den;
      dlr = cr * dr - ci * di;
      dli = cr * di + ci * dr;
      temp = p * dlr - q * dli;
      q = p * dli + q * dlr;
      p = temp;
      if (std::abs(dlr - 1.0) + std::abs(dli) <= kEps) break;
    }
    if (k >= kMaxIter) throw Error(ErrorKind::Domain, "bessel_jy: CF2 failed to converge");
    const double gam = (p - f) / q;
    rjmu = std::sqrt(w / ((p - f) * gam + q));
    rjmu = std::copysign(rjmu, rjl);
    rymu = rjmu * gam;
    rymup = rymu * (p + q / gam);
    ry1 = xmu * xi * rymu - rymup;
  }

  const double scale = rjmu / rjl;
  BesselJY out;
  out.j = rjl1 * scale;
  out.jp = rjp1 * scale;
  for (int k = 1; k <= nl; ++k) {
    const double rytemp = (xmu + k) * xi2 * ry1 - rymu;
    rymu = ry1;
    ry1 = rytemp;
  }
  out.y = rymu;
  out.yp = nu * xi * rymu - ry1;
  if (!std::isfinite(out.y) || !std::isfinite(out.yp)) {
    constexpr double big = std::numeric_limits<double>::max();
    out.y = std::isnan(out.y) ? -big : std::clamp(out.y, -big, big);
    out.yp = std::isnan(out.yp) ? big : std::clamp(out.yp, -big, big);
    out.saturated = true;
  }
  return out;
}

}  // namespace

Order::Order(double lambda) : lambda_(lambda) {
  if (!(lambda > -0.5)) {
    std::ostringstream os;
    os << "order lambda must exceed -1/2, got " << lambda;
    throw Error(ErrorKind::Domain, os.str());
  }
}

BesselJY bessel_jy(double nu, double x) {
  if (!(x > 0.0)) throw Error(ErrorKind::Domain, "bessel_jy: argument must be positive");
  if (!(nu >= 0.0)) throw Error(ErrorKind::Domain, "bessel_jy: order must be non-negative");
  if (x < hankel_threshold(nu)) return bessel_jy_steed(nu, x);

  BesselJY out;
  double j1, y1;
  hankel(nu, x, out.j, out.y);
  hankel(nu + 1.0, x, j1, y1);
  out.jp = nu / x * out.j - j1;
  out.yp = nu / x * out.y - y1;
  return out;
}

FunctionPair riccati(Order order, double x) {
  const double nu = order.nu();
  const BesselJY b = bessel_jy(nu, x);
  const double s = std::sqrt(kPi * x / 2.0);
  // d/dx [sqrt(pi x/2) Z(x)] = sqrt(pi x/2) (Z/(2x) + Z').
  FunctionPair fp;
  fp.u = s * b.j;
  fp.v = s * b.y;
  fp.u_prime = s * (0.5 * b.j / x + b.jp);
  fp.v_prime = s * (0.5 * b.y / x + b.yp);
  return fp;
}

double cross_wronskian(Order L, Order ell, double x) {
  const FunctionPair a = riccati(L, x);
  const FunctionPair b = riccati(ell, x);
  return a.u * b.v_prime - a.u_prime * b.v;
}

namespace {

struct ZeroEval {
  double value, slope;
};

ZeroEval zero_function(ZeroKind kind, double nu, double x) {
  const BesselJY b = bessel_jy(nu, x);
  // Second derivative from Bessel's equation: Z'' = -Z'/x - (1 - nu^2/x^2) Z.
  const double g = 1.0 - nu * nu / (x * x);
  switch (kind) {
    case ZeroKind::J: return {b.j, b.jp};
    case ZeroKind::Y: return {b.y, b.yp};
    case ZeroKind::JPrime: return {b.jp, -b.jp / x - g * b.j};
    case ZeroKind::YPrime: return {b.yp, -b.yp / x - g * b.y};
  }
  return {0, 0};
}

const char* kind_name(ZeroKind kind) {
  switch (kind) {
    case ZeroKind::J: return "J";
    case ZeroKind::Y: return "Y";
    case ZeroKind::JPrime: return "J'";
    case ZeroKind::YPrime: return "Y'";
  }
  return "?";
}

}  // namespace

std::vector<double> positive_zeros(ZeroKind kind, double nu, int count) {
  if (count < 1) throw Error(ErrorKind::Domain, "positive_zeros: count must be positive");
  if (!(nu >= 0.0)) throw Error(ErrorKind::Domain, "positive_zeros: order must be non-negative");

  const double step = kPi / 2.0;
  const double start = std::max(nu, 0.1);
  // Consecutive zeros are at least ~pi/2 apart, so this bound is generous.
  const double limit = start + 4.0 * (count + 2) * kPi + 10.0 * nu + 50.0;

  std::vector<double> zeros;
  zeros.reserve(count);
  double a = start;
  double fa = zero_function(kind, nu, a).value;
  while (static_cast<int>(zeros.size()) < count) {
    if (a > limit) {
      std::ostringstream os;
      os << "positive_zeros: bracketing failed for " << kind_name(kind) << "_" << nu << " on [" << start
         << ", " << limit << "] after " << zeros.size() << " zeros";
      throw Error(ErrorKind::Bracketing, os.str());
    }
    const double b = a + step;
    const double fb = zero_function(kind, nu, b).value;
    if (fa == 0.0) {
      zeros.push_back(a);
    } else if (fa * fb < 0.0) {
      double lo = a, hi = b, flo = fa;
      while (hi - lo > 1e-13 * std::max(1.0, lo)) {
        const double mid = 0.5 * (lo + hi);
        const double fm = zero_function(kind, nu, mid).value;
        if (fm == 0.0) {
          lo = hi = mid;
          break;
        }
        if ((fm < 0.0) == (flo < 0.0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      double root = 0.5 * (lo + hi);
      const ZeroEval e = zero_function(kind, nu, root);
      if (e.slope != 0.0) {
        const double polished = root - e.value / e.slope;
        if (std::abs(polished - root) < 1e-9) root = polished;
      }
      zeros.push_back(root);
    }
    a = b;
    fa = fb;
  }
  return zeros;
}

InterlacingResult interlacing_check(double nu, double eps, int depth) {
  if (depth < 2) throw Error(ErrorKind::Domain, "interlacing_check: depth must be at least 2");
  if (!(eps > 0.0)) throw Error(ErrorKind::Domain, "interlacing_check: eps must be positive");

  std::vector<double> jp = positive_zeros(ZeroKind::JPrime, nu, depth + 1);
  // For nu = 0 the origin counts as the first zero of J_0'.
  if (nu == 0.0) {
    jp.insert(jp.begin(), 0.0);
    jp.pop_back();
  }
  const auto y = positive_zeros(ZeroKind::Y, nu, depth);
  const auto ye = positive_zeros(ZeroKind::Y, nu + eps, depth);
  const auto yp = positive_zeros(ZeroKind::YPrime, nu, depth);
  const auto j = positive_zeros(ZeroKind::J, nu, depth);
  const auto je = positive_zeros(ZeroKind::J, nu + eps, depth);

  InterlacingResult result;
  if (!(nu <= jp[0])) {
    result.holds = false;
    result.violated_at = 1;
    result.detail = "nu > j'_{nu,1}";
    return result;
  }
  for (int s = 0; s < depth; ++s) {
    const std::array<std::pair<const char*, double>, 7> chain = {{{"j'_nu", jp[s]},
                                                                  {"y_nu", y[s]},
                                                                  {"y_nu+eps", ye[s]},
                                                                  {"y'_nu", yp[s]},
                                                                  {"j_nu", j[s]},
                                                                  {"j_nu+eps", je[s]},
                                                                  {"j'_nu(next)", jp[s + 1]}}};
    for (std::size_t k = 0; k + 1 < chain.size(); ++k) {
      // Links leaving a shifted-order zero may close to equality: at nu = 0, eps = 1 they are identities.
      const bool closed = k == 2 || k == 5;
      const double tol = closed ? 1e-10 * std::max(1.0, chain[k + 1].second) : 0.0;
      if (!(chain[k].second < chain[k + 1].second + tol)) {
        std::ostringstream os;
        os << chain[k].first << "," << s + 1 << " = " << chain[k].second << " >= " << chain[k + 1].first << ","
           << s + 1 << " = " << chain[k + 1].second;
        result.holds = false;
        result.violated_at = s + 1;
        result.detail = os.str();
        return result;
      }
    }
  }
  return result;
}

}  // namespace ctinv
