#pragma once

// Forward problem: regular solutions of the radial equation
//   phi'' = [l(l+1)/r^2 - 1 + q(r)] phi
// for a given potential, and their asymptotic phases and amplitudes.

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "ctinv/glm.hpp"

namespace ctinv {

/// A potential known either in closed form or by samples on (0, r_max].
class SampledPotential {
public:
  static SampledPotential zero();
  /// q(r) = -depth / (1 + exp((r - R) / a)).
  static SampledPotential woods_saxon(double depth, double R, double a);
  /// q(r) = q0 on (0, a), 0 beyond.
  static SampledPotential square_well(double q0, double a);
  /// Samples with 4-point Lagrange interpolation. Past the last sample the
  /// fitted tail is used when present, else zero.
  static SampledPotential from_samples(Eigen::VectorXd r, Eigen::VectorXd q, std::optional<TailParams> tail = {},
                                       std::optional<double> q0 = {});
  static SampledPotential from_profile(const PotentialProfile& profile);

  double operator()(double r) const;
  double at_origin() const;
  /// Points where q jumps; the integrator puts them on grid nodes.
  const std::vector<double>& breakpoints() const noexcept { return breaks_; }
  const std::optional<TailParams>& tail() const noexcept { return tail_; }
  /// Last sampled radius, or 0 for closed forms.
  double sampled_to() const;
  const std::string& name() const noexcept { return name_; }
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }

private:
  enum class Kind { Zero, WoodsSaxon, SquareWell, Samples };
  Kind kind_ = Kind::Zero;
  std::string name_ = "zero";
  double p1_ = 0.0, p2_ = 0.0, p3_ = 0.0;
  Eigen::VectorXd r_, q_;
  double q0_ = 0.0;
  std::optional<TailParams> tail_;
  std::vector<double> breaks_;
  std::vector<std::string> warnings_;
};

struct RegularWave {
  int ell = 0;
  double h = 0.0;
  Eigen::VectorXd r, phi;  // phi(r) ~ r^(l+1) / (2l+1)!! at the origin
  int rescalings = 0;      // times the solution was scaled down to avoid overflow
  double log_scale = 0.0;  // true phi = phi * exp(log_scale)
};

struct IntegrationOptions {
  double h = 0.005;
  double r_max = 100.0;
};

/// Series start near the origin, RK4 in ln r through the centrifugal region,
/// then Numerov on the uniform grid r_i = (i + 1) h.
RegularWave integrate_regular(const SampledPotential& q, int ell, const IntegrationOptions& options = {});

struct PhaseFit {
  double delta = 0.0;     // (-pi/2, pi/2]
  double B = 0.0;         // signed so that phi ~ B sin(r - l pi/2 + delta)
  double residual = 0.0;  // rms misfit over the window, relative to |B|
  double tail_shift = 0.0;
  double r_a = 0.0, r_b = 0.0;
};

struct ExtractOptions {
  std::optional<double> r_b;  // default: end of the wave
  std::optional<double> window;  // default: max(20 pi, r_b / 4)
  const TailParams* tail = nullptr;  // enables the r^-2 tail correction
  double max_residual = 1e-3;
};

/// Least squares phi ~ a u_l - b v_l over [r_b - window, r_b]; delta = atan(b/a).
PhaseFit extract_phase(const RegularWave& wave, const ExtractOptions& options = {});

struct PhaseEntry {
  int ell = 0;
  double delta = 0.0, B = 0.0, residual = 0.0;
  std::optional<std::string> error;
};

struct PhaseShiftTable {
  std::vector<PhaseEntry> entries;
  const PhaseEntry* find(int ell) const;
  bool complete() const;
};

struct ForwardOptions {
  double h = 0.005;
  std::optional<double> r_max;  // default: 100 for closed forms, the last sample otherwise
  std::optional<double> window;
  int threads = 1;
};

PhaseShiftTable phase_table(const SampledPotential& q, int ell_max, const ForwardOptions& options = {});

}  // namespace ctinv
