#pragma once

// Semi-infinite integrals of oscillating power-law tails.

#include <cmath>
#include <complex>
#include <numbers>

namespace ctinv::detail {

/// int_x^inf exp(i omega s) s^-n ds for omega x >> n, by repeated integration by parts.
inline std::complex<double> exp_power_tail(double omega, double x, int n) {
  const std::complex<double> i_over_w(0.0, 1.0 / omega);
  std::complex<double> sum(0.0, 0.0), factor(1.0, 0.0);
  double prev = INFINITY;
  for (int k = 0; k < 40; ++k) {
    const int m = n + k;
    const std::complex<double> term = factor * i_over_w * std::pow(x, -m);
    const double mag = std::abs(term);
    if (mag > prev) break;
    sum += term;
    prev = mag;
    if (mag < 1e-18 * std::abs(sum)) break;
    factor *= -i_over_w * static_cast<double>(m);
  }
  return std::polar(1.0, omega * x) * sum;
}

/// Si(z) and Ci(z) by their power series; adequate for z below ~20.
inline void sici_series(double z, double& si, double& ci) {
  constexpr double euler = 0.57721566490153286;
  si = 0.0;
  ci = 0.0;
  double term = z;  // z^(2k+1)/(2k+1)! with alternating sign
  for (int k = 0; k < 200; ++k) {
    si += term / (2 * k + 1);
    const double t2 = -term * z / (2 * k + 2);  // (-1)^(k+1) z^(2k+2)/(2k+2)!
    ci += t2 / (2 * k + 2);
    term = t2 * z / (2 * k + 3);
    if (std::abs(term) < 1e-18 && k > 2) break;
  }
  ci += euler + std::log(z);
}

/// Returns int_z^inf sin t / t dt and int_z^inf cos t / t dt.
inline void sin_cos_tail(double z, double& sin_tail, double& cos_tail) {
  if (z < 20.0) {
    double si, ci;
    sici_series(z, si, ci);
    sin_tail = std::numbers::pi / 2 - si;
    cos_tail = -ci;
    return;
  }
  const auto e = exp_power_tail(1.0, z, 1);
  cos_tail = e.real();
  sin_tail = e.imag();
}

}  // namespace ctinv::detail
