#pragma once

// Orchestration shared by the command-line tool and the end-to-end tests.

#include <optional>
#include <string>

#include "json.hpp"

#include "ctinv/consistency.hpp"
#include "ctinv/ctcore.hpp"
#include "ctinv/forward.hpp"
#include "ctinv/glm.hpp"
#include "ctinv/io.hpp"

namespace ctinv {

using Json = nlohmann::ordered_json;

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitUsage = 2,
  kExitParse = 3,
  kExitNoAdmissible = 4,
  kExitUnsettled = 5,
};

int exit_code_for(ErrorKind kind);

struct JobConfig {
  // Inversion grid.
  double h = 0.005;
  double lambda = 400.0;
  // Solver.
  int k_range = 3;
  int seeds_per_axis = 12;
  double accept_tol = 1e-9;
  // Admissibility scan; an unset scan_lambda means 50 + 10 max(S u T).
  double scan_step = 0.05;
  std::optional<double> scan_lambda;
  // Forward problem.
  double forward_h = 0.005;
  double forward_rmax = 100.0;  // closed-form potentials only
  std::optional<double> window;
  // Maps.
  MapBox box;
  int threads = 1;

  /// Reads the keys h, lambda, k_range, seeds, accept_tol, scan_step,
  /// scan_lambda, forward_h, forward_rmax, window, box, res, threads.
  static JobConfig from(const Config& cfg);
  void validate() const;
  SolveOptions solve_options() const;
  ScanOptions scan_options() const;
  ForwardOptions forward_options() const;
  Json to_json() const;
};

struct InvertOutcome {
  SolveResult solve;
  Selection selection;
  std::optional<Eigen::VectorXd> chosen;
  bool ambiguous = false;
  std::optional<PotentialProfile> profile;
  Json report;
};

/// solve_T, select_physical, kernel and potential for the chosen T.
/// With several admissible candidates the one closest to S is used and the
/// report says so.
InvertOutcome run_invert(const InputSet& S, const JobConfig& cfg);

struct RoundtripOutcome {
  InvertOutcome invert;
  PhaseShiftTable table;
  double closure = 0.0;                // max |delta_in - delta_out| over S
  std::optional<double> leakage;       // max |tan delta| of the other parity
  Json report;
};

RoundtripOutcome run_roundtrip(const InputSet& S, const JobConfig& cfg);

struct CheckOutcome {
  AdmissibilityVerdict verdict;
  Json report;
};

/// Verdict, asymptotics, sum rules and moments for an explicit T.
CheckOutcome run_check(const Eigen::VectorXd& ells, const Eigen::VectorXd& Ls, const JobConfig& cfg);

Json verdict_json(const AdmissibilityVerdict& v);

}  // namespace ctinv
