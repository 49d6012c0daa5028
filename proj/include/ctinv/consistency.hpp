#pragma once

// Admissibility of a shifted set: zeros of the Fredholm determinant on
// (0, Lambda], the one-shift closed criterion, selection among the solver's
// candidates and two-dimensional admissibility maps.

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ctinv/ctcore.hpp"

namespace ctinv {

struct ZeroLocation {
  double r;
  double lo, hi;            // bracketing interval
  bool tangential = false;  // found as a dip of |D| rather than a sign change
};

struct AdmissibilityVerdict {
  bool admissible = false;
  std::vector<ZeroLocation> zeros_found;
  double lambda_used = 0.0;
  bool settled = false;
  double d_infinity = 0.0;   // det of the asymptotic cosine matrix
  double d_lambda = 0.0;     // D at the last sample
  double tail_spread = 0.0;  // max |D(r) - D(Lambda)| over the last 10%
  std::optional<double> predicted_zero;  // beyond the scanned range, from the 1/r model
};

struct ScanOptions {
  std::optional<double> lambda;  // default 50 + 10 max(S u T)
  double step = 0.05;
  int max_extensions = 2;        // each at least doubles Lambda
  double dip_tol = 1e-10;        // on the row-norm normalized determinant
  bool refine = true;            // bisect brackets down to 1e-10
};

/// 50 + 10 max(S u T).
double default_lambda(const Eigen::VectorXd& ells, const Eigen::VectorXd& Ls);

/// det [cos((ell-L) pi/2) / (ell(ell+1) - L(L+1))], the large-r limit of D.
double asymptotic_det(const Eigen::VectorXd& ells, const Eigen::VectorXd& Ls);

AdmissibilityVerdict scan_zeros(const Eigen::VectorXd& ells, const Eigen::VectorXd& Ls, const ScanOptions& options = {});

/// |L - ell| <= 1.
bool admissible_1d(double ell, double L);

struct CandidateReport {
  Eigen::VectorXd Ls;
  AdmissibilityVerdict verdict;
  std::optional<bool> closed_form;  // admissible_1d, for |S| = 1
  bool disagreement = false;        // closed form and scan differ
};

struct Selection {
  std::optional<Eigen::VectorXd> chosen;
  std::vector<Eigen::VectorXd> admissible;
  bool ambiguous = false;
  std::vector<CandidateReport> reports;
};

Selection select_physical(const InputSet& S, const std::vector<ShiftedSet>& candidates,
                          const ScanOptions& options = {});

struct MapBox {
  double lo1 = -0.5, hi1 = 6.0, lo2 = -0.5, hi2 = 6.0;
  double resolution = 0.02;
};

struct AdmissibilityMap {
  Eigen::VectorXd axis1, axis2;  // cell centres
  Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> cells;  // 1 admissible
  Eigen::VectorXd ells;
  double lambda = 0.0;
  int unsettled = 0;
  int errors = 0;
};

AdmissibilityMap admissibility_map(const Eigen::VectorXd& ells, const MapBox& box, const ScanOptions& options = {},
                                   int threads = 1);

}  // namespace ctinv
