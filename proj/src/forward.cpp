#include "ctinv/forward.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include "ctinv/ctcore.hpp"
#include "ctinv/errors.hpp"
#include "ctinv/parallel.hpp"

namespace ctinv {

SampledPotential SampledPotential::zero() { return {}; }

SampledPotential SampledPotential::woods_saxon(double depth, double R, double a) {
  if (!(a > 0)) throw Error(ErrorKind::Domain, "woods_saxon: diffuseness must be positive");
  SampledPotential p;
  p.kind_ = Kind::WoodsSaxon;
  p.p1_ = depth;
  p.p2_ = R;
  p.p3_ = a;
  std::ostringstream os;
  os << "ws depth=" << depth << " R=" << R << " a=" << a;
  p.name_ = os.str();
  return p;
}

SampledPotential SampledPotential::square_well(double q0, double a) {
  if (!(a > 0)) throw Error(ErrorKind::Domain, "square_well: radius must be positive");
  SampledPotential p;
  p.kind_ = Kind::SquareWell;
  p.p1_ = q0;
  p.p2_ = a;
  p.breaks_ = {a};
  std::ostringstream os;
  os << "square q0=" << q0 << " a=" << a;
  p.name_ = os.str();
  return p;
}

SampledPotential SampledPotential::from_samples(Eigen::VectorXd r, Eigen::VectorXd q, std::optional<TailParams> tail,
                                                std::optional<double> q0) {
  if (r.size() != q.size() || r.size() < 4) throw Error(ErrorKind::Domain, "from_samples: need at least 4 (r, q) pairs");
  if (!(r[0] > 0)) throw Error(ErrorKind::Domain, "from_samples: radii must be positive");
  for (Eigen::Index i = 1; i < r.size(); ++i)
    if (!(r[i] > r[i - 1])) throw Error(ErrorKind::Domain, "from_samples: radii must increase");
  for (Eigen::Index i = 0; i < q.size(); ++i)
    if (!std::isfinite(q[i])) throw Error(ErrorKind::Domain, "from_samples: non-finite potential value");
  SampledPotential p;
  p.kind_ = Kind::Samples;
  p.name_ = "samples";
  const double r1 = r[0], r2 = r[1];
  p.q0_ = q0.value_or((r2 * r2 * q[0] - r1 * r1 * q[1]) / (r2 * r2 - r1 * r1));
  p.r_ = std::move(r);
  p.q_ = std::move(q);
  p.tail_ = tail;
  if (!tail) p.warnings_.push_back("no tail fitted; q taken as zero beyond the last sample");
  return p;
}

SampledPotential SampledPotential::from_profile(const PotentialProfile& profile) {
  SampledPotential p = from_samples(profile.r, profile.q, profile.tail, profile.q0);
  p.name_ = "ct";
  return p;
}

double SampledPotential::sampled_to() const { return kind_ == Kind::Samples ? r_[r_.size() - 1] : 0.0; }

double SampledPotential::at_origin() const {
  switch (kind_) {
    case Kind::Zero: return 0.0;
    case Kind::WoodsSaxon: return -p1_ / (1.0 + std::exp(-p2_ / p3_));
    case Kind::SquareWell: return p1_;
    case Kind::Samples: return q0_;
  }
  return 0.0;
}

double SampledPotential::operator()(double r) const {
  switch (kind_) {
    case Kind::Zero: return 0.0;
    case Kind::WoodsSaxon: {
      const double x = (r - p2_) / p3_;
      return x > 700 ? 0.0 : -p1_ / (1.0 + std::exp(x));
    }
    case Kind::SquareWell: return r < p2_ ? p1_ : 0.0;
    case Kind::Samples: break;
  }
  const Eigen::Index n = r_.size();
  if (r < r_[0]) {
    const double t = r / r_[0];
    return q0_ + (q_[0] - q0_) * t * t;
  }
  if (r > r_[n - 1]) return tail_ ? tail_->q(r) : 0.0;
  const auto it = std::upper_bound(r_.data(), r_.data() + n, r);
  const Eigen::Index k = std::clamp<Eigen::Index>((it - r_.data()) - 2, 0, n - 4);
  double sum = 0.0;
  for (Eigen::Index i = k; i < k + 4; ++i) {
    double w = 1.0;
    for (Eigen::Index j = k; j < k + 4; ++j)
      if (j != i) w *= (r - r_[j]) / (r_[i] - r_[j]);
    sum += w * q_[i];
  }
  return sum;
}

namespace {

// d/ds of (phi, r phi') / r^(l+1) with s = ln r.
std::array<double, 2> log_rhs(const SampledPotential& q, int ell, double r, const std::array<double, 2>& w) {
  const double ll = ell * (ell + 1.0);
  return {w[1] - (ell + 1.0) * w[0], -ell * w[1] + (ll + r * r * (q(r) - 1.0)) * w[0]};
}

void rk4_log(const SampledPotential& q, int ell, double r_from, double r_to, std::array<double, 2>& w) {
  const double span = std::log(r_to / r_from);
  const int steps = std::max(1, static_cast<int>(std::ceil(span / 0.01)));
  const double ds = span / steps;
  double s = std::log(r_from);
  for (int k = 0; k < steps; ++k) {
    auto at = [&](double sv, const std::array<double, 2>& y) { return log_rhs(q, ell, std::exp(sv), y); };
    const auto k1 = at(s, w);
    const auto k2 = at(s + ds / 2, {w[0] + ds / 2 * k1[0], w[1] + ds / 2 * k1[1]});
    const auto k3 = at(s + ds / 2, {w[0] + ds / 2 * k2[0], w[1] + ds / 2 * k2[1]});
    const auto k4 = at(s + ds, {w[0] + ds * k3[0], w[1] + ds * k3[1]});
    w[0] += ds / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]);
    w[1] += ds / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]);
    s += ds;
  }
}

}  // namespace

RegularWave integrate_regular(const SampledPotential& q, int ell, const IntegrationOptions& options) {
  if (ell < 0) throw Error(ErrorKind::Domain, "integrate_regular: ell must be >= 0");
  if (!(options.h > 0) || !(options.r_max > 50 * options.h))
    throw Error(ErrorKind::Domain, "integrate_regular: need h > 0 and r_max well beyond h");
  double h = options.h;
  // Put the first jump of q on a node.
  for (double b : q.breakpoints())
    if (b > 0 && b < options.r_max) {
      h = b / std::ceil(b / h - 1e-9);
      break;
    }
  const auto n = static_cast<Eigen::Index>(std::floor(options.r_max / h + 1e-9));
  const Eigen::Index i0 = std::min<Eigen::Index>(20 + 40 * ell, n - 2);

  RegularWave wave;
  wave.ell = ell;
  wave.h = h;
  wave.r.resize(n);
  wave.phi.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) wave.r[i] = h * static_cast<double>(i + 1);

  // Near the origin phi = r^(l+1) w(r) with w(0) = 1 (the 1/(2l+1)!! goes into log_scale).
  const double r_start = std::min(1e-4, 0.5 * h);
  const double z2 = (1.0 - q.at_origin()) * r_start * r_start;
  double term = 1.0, w1 = 0.0, rw1p = 0.0;
  for (int k = 0; k < 30; ++k) {
    w1 += term;
    rw1p += 2.0 * k * term;
    term *= -z2 / (2.0 * (k + 1) * (2.0 * ell + 2.0 * k + 3.0));
  }
  std::array<double, 2> w{w1, (ell + 1.0) * w1 + rw1p};
  double log_df = 0.0;
  for (int k = 3; k <= 2 * ell + 1; k += 2) log_df += std::log(static_cast<double>(k));
  const double r_ref = wave.r[i0];
  wave.log_scale = (ell + 1.0) * std::log(r_ref) - log_df;

  double r_prev = r_start;
  for (Eigen::Index i = 0; i <= i0; ++i) {
    rk4_log(q, ell, r_prev, wave.r[i], w);
    r_prev = wave.r[i];
    wave.phi[i] = w[0] * std::pow(wave.r[i] / r_ref, ell + 1.0);
  }

  const double ll = ell * (ell + 1.0), h12 = h * h / 12.0;
  // One-sided values of g = l(l+1)/r^2 - 1 + q; they differ only on a jump node.
  Eigen::VectorXd gl(n), gr(n);
  for (Eigen::Index i = 0; i < n; ++i) gl[i] = gr[i] = ll / (wave.r[i] * wave.r[i]) - 1.0 + q(wave.r[i]);
  for (double b : q.breakpoints()) {
    const auto k = static_cast<Eigen::Index>(std::llround(b / h)) - 1;
    if (k < 1 || k >= n || std::abs(wave.r[k] - b) > 1e-9 * b) continue;
    const double centrifugal = ll / (b * b) - 1.0;
    gl[k] = centrifugal + q(b * (1 - 1e-12));
    gr[k] = centrifugal + q(b * (1 + 1e-12));
  }
  for (Eigen::Index i = i0; i + 1 < n; ++i) {
    const double gc = 0.5 * (gl[i] + gr[i]);
    double next = 2.0 * wave.phi[i] * (1.0 + 5.0 * h12 * gc) - wave.phi[i - 1] * (1.0 - h12 * gr[i - 1]);
    if (gl[i] != gr[i]) {
      // The three-point formula misses the jump of phi''' at the node.
      const double dphi = (wave.phi[i] - wave.phi[i - 1]) / h + 0.5 * h * gl[i] * wave.phi[i];
      next += h * h12 * (gr[i] - gl[i]) * dphi;
    }
    wave.phi[i + 1] = next / (1.0 - h12 * gl[i + 1]);
    if (std::abs(wave.phi[i + 1]) > 1e200) {
      wave.phi.head(i + 2) *= 1e-200;
      wave.log_scale += 200.0 * std::log(10.0);
      ++wave.rescalings;
    }
  }
  const double peak = wave.phi.cwiseAbs().maxCoeff();
  if (std::isfinite(peak * std::exp(wave.log_scale)) && peak * std::exp(wave.log_scale) > 1e-300) {
    wave.phi *= std::exp(wave.log_scale);
    wave.log_scale = 0.0;
  }
  return wave;
}

PhaseFit extract_phase(const RegularWave& wave, const ExtractOptions& options) {
  const Eigen::Index n = wave.r.size();
  PhaseFit fit;
  fit.r_b = options.r_b.value_or(wave.r[n - 1]);
  const double window = options.window.value_or(std::max(20.0 * std::numbers::pi, 0.25 * fit.r_b));
  fit.r_a = fit.r_b - window;
  if (fit.r_a <= wave.r[0] || fit.r_b > wave.r[n - 1] + 1e-9) {
    std::ostringstream os;
    os << "extract_phase: window [" << fit.r_a << ", " << fit.r_b << "] does not fit the wave; increase r_max";
    throw Error(ErrorKind::WindowTooSmall, os.str());
  }
  std::vector<Eigen::Index> idx;
  for (Eigen::Index i = 0; i < n; ++i)
    if (wave.r[i] >= fit.r_a && wave.r[i] <= fit.r_b + 1e-12) idx.push_back(i);
  const std::size_t stride = std::max<std::size_t>(1, idx.size() / 4000);
  std::vector<Eigen::Index> use;
  for (std::size_t k = 0; k < idx.size(); k += stride) use.push_back(idx[k]);
  if (use.size() < 8) throw Error(ErrorKind::WindowTooSmall, "extract_phase: too few points in the window");

  const auto m = static_cast<Eigen::Index>(use.size());
  Eigen::MatrixXd basis(m, 2);
  Eigen::VectorXd y(m);
  const Order o(wave.ell);
  for (Eigen::Index k = 0; k < m; ++k) {
    const FunctionPair p = riccati(o, wave.r[use[static_cast<std::size_t>(k)]]);
    basis(k, 0) = p.u;
    basis(k, 1) = -p.v;
    y[k] = wave.phi[use[static_cast<std::size_t>(k)]];
  }
  const Eigen::Vector2d ab = basis.colPivHouseholderQr().solve(y);
  const double a = ab[0], b = ab[1];
  fit.delta = a == 0.0 ? std::numbers::pi / 2 : std::atan(b / a);
  fit.B = std::abs(std::cos(fit.delta)) > 0.5 ? a / std::cos(fit.delta) : b / std::sin(fit.delta);
  fit.residual = std::sqrt((basis * ab - y).squaredNorm() / static_cast<double>(m)) / std::abs(fit.B);

  if (options.tail) {
    // First-order effect of the tail beyond each window point, averaged over the window.
    const double inv_r = std::log(fit.r_b / fit.r_a) / (fit.r_b - fit.r_a);
    const double phi0 = 2.0 * fit.delta - wave.ell * std::numbers::pi;
    const double al = options.tail->alpha, be = options.tail->beta;
    fit.tail_shift = -(be * std::sin(phi0) + al * std::cos(phi0)) * inv_r;
    fit.B *= std::exp((be * std::cos(phi0) - al * std::sin(phi0)) * inv_r);
    const double shifted = fit.delta + fit.tail_shift;
    fit.delta = reduce_phase(shifted);
    if (std::abs(fit.delta - shifted) > 1.0) fit.B = -fit.B;
  }
  if (fit.residual > options.max_residual) {
    std::ostringstream os;
    os << "extract_phase: fit residual " << fit.residual << " exceeds " << options.max_residual
       << "; move the window further out";
    throw Error(ErrorKind::WindowTooSmall, os.str());
  }
  return fit;
}

const PhaseEntry* PhaseShiftTable::find(int ell) const {
  for (const PhaseEntry& e : entries)
    if (e.ell == ell) return &e;
  return nullptr;
}

bool PhaseShiftTable::complete() const {
  return std::none_of(entries.begin(), entries.end(), [](const PhaseEntry& e) { return e.error.has_value(); });
}

PhaseShiftTable phase_table(const SampledPotential& q, int ell_max, const ForwardOptions& options) {
  if (ell_max < 0) throw Error(ErrorKind::Domain, "phase_table: ell_max must be >= 0");
  IntegrationOptions io;
  io.h = options.h;
  io.r_max = options.r_max.value_or(q.sampled_to() > 0 ? q.sampled_to() : 100.0);
  PhaseShiftTable table;
  table.entries.resize(static_cast<std::size_t>(ell_max + 1));
  parallel_for(table.entries.size(), options.threads, [&](std::size_t k) {
    PhaseEntry& e = table.entries[k];
    e.ell = static_cast<int>(k);
    try {
      const RegularWave wave = integrate_regular(q, e.ell, io);
      ExtractOptions xo;
      xo.window = options.window;
      if (q.tail()) xo.tail = &*q.tail();
      const PhaseFit fit = extract_phase(wave, xo);
      e.delta = fit.delta;
      e.B = fit.B;
      e.residual = fit.residual;
    } catch (const Error& err) {
      e.error = err.what();
    }
  });
  return table;
}

}  // namespace ctinv
