#pragma once

#include <optional>
#include <string>
#include <vector>

namespace ctinv {

/// Angular-momentum-like index lambda > -1/2. The associated Bessel order is lambda + 1/2.
class Order {
public:
  explicit Order(double lambda);
  double lambda() const noexcept { return lambda_; }
  double nu() const noexcept { return lambda_ + 0.5; }
  /// lambda (lambda + 1), the centrifugal eigenvalue.
  double eigenvalue() const noexcept { return lambda_ * (lambda_ + 1.0); }

private:
  double lambda_;
};

struct BesselJY {
  double j = 0, y = 0, jp = 0, yp = 0;
  /// Y or Y' overflowed and was clamped to +-max.
  bool saturated = false;
};

/// J_nu(x), Y_nu(x) and their derivatives for real nu >= 0 and x > 0.
///
/// Temme series (x < 2) or Steed's continued fraction (x >= 2) at the reduced
/// order, recurrence to nu, and the Hankel expansion once x is far beyond the
/// turning point. Throws ErrorKind::Domain for x <= 0 or nu < 0.
BesselJY bessel_jy(double nu, double x);

/// Riccati-Bessel pair u = sqrt(pi x/2) J, v = sqrt(pi x/2) Y and derivatives.
struct FunctionPair {
  double u = 0, u_prime = 0, v = 0, v_prime = 0;
};

FunctionPair riccati(Order order, double x);

/// W(u_L, v_ell)(x) = u_L v_ell' - u_L' v_ell.
double cross_wronskian(Order L, Order ell, double x);

enum class ZeroKind { J, JPrime, Y, YPrime };

/// First `count` positive zeros of the chosen Bessel function, strictly increasing.
std::vector<double> positive_zeros(ZeroKind kind, double nu, int count);

struct InterlacingResult {
  bool holds = true;
  /// 1-based zero index s of the first broken inequality.
  std::optional<int> violated_at;
  std::string detail;
};

/// Checks nu <= j'_{nu,1} < y_{nu,1} < y_{nu+eps,1} < y'_{nu,1} < j_{nu,1} < j_{nu+eps,1} < j'_{nu,2} < ...
/// through zero index `depth`.
InterlacingResult interlacing_check(double nu, double eps, int depth);

}  // namespace ctinv
