#include "ctinv/pipeline.hpp"

#include <chrono>
#include <cmath>

#include "ctinv/errors.hpp"

namespace ctinv {

namespace {

Json vec(const Eigen::VectorXd& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool integral_values(const Eigen::VectorXd& ells) {
  for (Eigen::Index i = 0; i < ells.size(); ++i)
    if (ells[i] != std::floor(ells[i]) || ells[i] < 0) return false;
  return true;
}

Json moments_json(const PotentialProfile& profile) {
  Json m;
  m["closed_form"] = moment_closed_form(profile.ells, profile.Ls);
  if (profile.tail) {
    m["numeric"] = moment_numeric(profile);
  } else {
    m["numeric"] = nullptr;
  }
  return m;
}

Json tail_json(const Eigen::VectorXd& ells, const Eigen::VectorXd& Ls, const std::optional<TailParams>& tail) {
  const AsymptoticData ad = asymptotic_data(ells, Ls);
  Json j;
  j["alpha"] = ad.alpha;
  j["beta"] = ad.beta;
  j["a"] = vec(ad.a);
  j["b"] = vec(ad.b);
  if (tail) {
    j["fit_alpha"] = tail->alpha;
    j["fit_beta"] = tail->beta;
    j["fit_gamma"] = tail->gamma;
  }
  return j;
}

Json sum_rules_json(const InputSet& S, const Eigen::VectorXd& Ls) {
  if (!S.all_even() && !S.all_odd()) return nullptr;
  const SumRules sr = sum_rules(S, Ls);
  Json j;
  j["cos_rule"] = sr.cos_rule;
  j["sin_rule"] = sr.sin_rule;
  j["simplified"] = sr.simplified;
  return j;
}

PotentialProfile zero_profile(const JobConfig& cfg, const Eigen::VectorXd& ells) {
  const RadialGrid grid(cfg.h, cfg.lambda);
  PotentialProfile p{grid, grid.points(), Eigen::VectorXd::Zero(grid.size()), 0.0, TailParams{}, ells, Eigen::VectorXd()};
  p.tail->r_to = grid.r_max();
  return p;
}

}  // namespace

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Parse: return kExitParse;
    case ErrorKind::Usage: return kExitUsage;
    case ErrorKind::Inadmissible:
    case ErrorKind::NoValidT: return kExitNoAdmissible;
    default: return kExitFailure;
  }
}

JobConfig JobConfig::from(const Config& cfg) {
  JobConfig j;
  if (auto v = cfg.get_double("h")) j.h = *v;
  if (auto v = cfg.get_double("lambda")) j.lambda = *v;
  if (auto v = cfg.get_int("k_range")) j.k_range = *v;
  if (auto v = cfg.get_int("seeds")) j.seeds_per_axis = *v;
  if (auto v = cfg.get_double("accept_tol")) j.accept_tol = *v;
  if (auto v = cfg.get_double("scan_step")) j.scan_step = *v;
  if (auto v = cfg.get_double("scan_lambda")) j.scan_lambda = *v;
  if (auto v = cfg.get_double("forward_h")) j.forward_h = *v;
  if (auto v = cfg.get_double("forward_rmax")) j.forward_rmax = *v;
  if (auto v = cfg.get_double("window")) j.window = *v;
  if (auto v = cfg.get_double("res")) j.box.resolution = *v;
  if (auto v = cfg.get_int("threads")) j.threads = *v;
  if (auto v = cfg.get("box")) {
    const auto b = parse_list(*v, "box");
    if (b.size() != 4) throw Error(ErrorKind::Parse, "config key 'box': expected four numbers");
    j.box = MapBox{b[0], b[1], b[2], b[3], j.box.resolution};
  }
  return j;
}

void JobConfig::validate() const {
  auto need = [](bool ok, const char* msg) {
    if (!ok) throw Error(ErrorKind::Usage, msg);
  };
  need(h > 0 && h <= 0.1, "h must lie in (0, 0.1]");
  need(lambda > 10, "lambda must exceed 10");
  need(k_range >= 0, "k_range must be >= 0");
  need(seeds_per_axis >= 2, "seeds must be >= 2");
  need(accept_tol > 0, "accept_tol must be positive");
  need(scan_step > 0, "scan_step must be positive");
  need(!scan_lambda || *scan_lambda > 10, "scan_lambda must exceed 10");
  need(forward_h > 0 && forward_h <= 0.1, "forward_h must lie in (0, 0.1]");
  need(forward_rmax > 10, "forward_rmax must exceed 10");
  need(!window || *window > 0, "window must be positive");
  need(box.resolution > 0, "res must be positive");
  need(threads >= 1, "threads must be >= 1");
}

SolveOptions JobConfig::solve_options() const {
  SolveOptions o;
  o.k_range = k_range;
  o.seeds_per_axis = seeds_per_axis;
  o.accept_tol = accept_tol;
  o.threads = threads;
  return o;
}

ScanOptions JobConfig::scan_options() const {
  ScanOptions o;
  o.step = scan_step;
  o.lambda = scan_lambda;
  return o;
}

ForwardOptions JobConfig::forward_options() const {
  ForwardOptions o;
  o.h = forward_h;
  o.window = window;
  o.threads = threads;
  return o;
}

Json JobConfig::to_json() const {
  Json j;
  j["h"] = h;
  j["lambda"] = lambda;
  j["k_range"] = k_range;
  j["seeds"] = seeds_per_axis;
  j["scan_step"] = scan_step;
  j["scan_lambda"] = scan_lambda ? Json(*scan_lambda) : Json(nullptr);
  j["forward_h"] = forward_h;
  return j;
}

Json verdict_json(const AdmissibilityVerdict& v) {
  Json j;
  j["admissible"] = v.admissible;
  j["settled"] = v.settled;
  j["lambda_used"] = v.lambda_used;
  j["d_infinity"] = v.d_infinity;
  j["d_lambda"] = v.d_lambda;
  j["tail_spread"] = v.tail_spread;
  Json zeros = Json::array();
  for (const ZeroLocation& z : v.zeros_found) {
    Json zj;
    zj["r"] = z.r;
    zj["bracket"] = {z.lo, z.hi};
    zj["tangential"] = z.tangential;
    zeros.push_back(zj);
  }
  j["zeros"] = zeros;
  if (v.predicted_zero) j["zero_horizon"] = *v.predicted_zero;
  return j;
}

InvertOutcome run_invert(const InputSet& S, const JobConfig& cfg) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  InvertOutcome out;
  const Eigen::VectorXd ells = S.ells_real();
  Json& rep = out.report;
  rep["tool"] = std::string("ctinv ") + kVersion;
  rep["command"] = "invert";
  rep["input"] = {{"S", vec(ells)}, {"delta", vec(S.deltas())}};
  rep["config"] = cfg.to_json();

  out.solve = solve_T(S, cfg.solve_options());
  rep["zero_potential"] = out.solve.zero_potential;
  if (out.solve.zero_potential) {
    out.profile = zero_profile(cfg, ells);
    rep["candidates"] = Json::array();
    rep["chosen"] = Json::array();
    rep["timing"] = {{"elapsed_s", seconds_since(t0)}};
    return out;
  }

  out.selection = select_physical(S, out.solve.candidates, cfg.scan_options());
  Json cands = Json::array();
  for (const CandidateReport& c : out.selection.reports) {
    Json cj;
    cj["T"] = vec(c.Ls);
    cj["verdict"] = verdict_json(c.verdict);
    cj["closed_form"] = c.closed_form ? Json(*c.closed_form) : Json(nullptr);
    if (c.disagreement) cj["disagreement"] = true;
    cands.push_back(cj);
  }
  rep["candidates"] = cands;
  if (out.solve.candidates.empty()) {
    int converged = 0;
    for (const SeedDiagnostic& d : out.solve.diagnostics) converged += d.converged;
    rep["solver"] = {{"seeds", out.solve.diagnostics.size()}, {"converged", converged}};
  }

  out.ambiguous = out.selection.ambiguous;
  out.chosen = out.selection.chosen;
  if (!out.chosen && out.ambiguous) {
    double best = INFINITY;
    for (const Eigen::VectorXd& Ls : out.selection.admissible) {
      const double dist = (Ls - ells).cwiseAbs().sum();
      if (dist < best) {
        best = dist;
        out.chosen = Ls;
      }
    }
  }
  rep["ambiguous"] = out.ambiguous;
  rep["chosen"] = out.chosen ? vec(*out.chosen) : Json(nullptr);
  if (!out.chosen) {
    rep["timing"] = {{"elapsed_s", seconds_since(t0)}};
    return out;
  }

  KernelOptions ko;
  ko.threads = cfg.threads;
  const KernelSolution ks = solve_kernel(ells, *out.chosen, RadialGrid(cfg.h, cfg.lambda), ko);
  out.profile = potential(ks);
  rep["kernel_residual"] = ks.max_residual;
  rep["q0"] = out.profile->q0;
  rep["asymptotics"] = tail_json(ells, *out.chosen, out.profile->tail);
  rep["sum_rules"] = sum_rules_json(S, *out.chosen);
  rep["moment"] = moments_json(*out.profile);
  rep["timing"] = {{"elapsed_s", seconds_since(t0)}};
  return out;
}

RoundtripOutcome run_roundtrip(const InputSet& S, const JobConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  RoundtripOutcome out;
  out.invert = run_invert(S, cfg);
  out.report = out.invert.report;
  out.report["command"] = "roundtrip";
  if (!out.invert.profile) return out;

  const bool single_parity = S.all_even() || S.all_odd();
  const int ell_max = S.max_ell() + (single_parity ? 3 : 0);
  out.table = phase_table(SampledPotential::from_profile(*out.invert.profile), ell_max, cfg.forward_options());

  Json rows = Json::array();
  for (Eigen::Index i = 0; i < S.size(); ++i) {
    const int ell = S.ells()[static_cast<std::size_t>(i)];
    const PhaseEntry* e = out.table.find(ell);
    if (!e || e->error) throw Error(ErrorKind::WindowTooSmall, "roundtrip: no forward phase for l = " + std::to_string(ell));
    // Phases are defined modulo pi.
    const double diff = std::abs(reduce_phase(e->delta - S.deltas()[i]));
    out.closure = std::max(out.closure, diff);
    rows.push_back({{"l", ell}, {"delta_in", S.deltas()[i]}, {"delta_out", e->delta}, {"B", e->B}, {"diff", diff}});
  }
  out.report["closure"] = {{"per_l", rows}, {"max_abs_diff", out.closure}};
  if (single_parity) {
    const int parity = S.ells().front() % 2;
    double leak = 0.0;
    Json lj = Json::array();
    for (const PhaseEntry& e : out.table.entries) {
      if (e.ell % 2 == parity || e.error) continue;
      leak = std::max(leak, std::abs(std::tan(e.delta)));
      lj.push_back({{"l", e.ell}, {"delta", e.delta}});
    }
    out.leakage = leak;
    out.report["leakage"] = {{"per_l", lj}, {"max_abs_tan", leak}};
  }
  out.report["timing"] = {{"elapsed_s", seconds_since(t0)}};
  return out;
}

CheckOutcome run_check(const Eigen::VectorXd& ells, const Eigen::VectorXd& Ls, const JobConfig& cfg) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  CheckOutcome out;
  require_disjoint(ells, Ls);
  ShiftedSet T(Ls);  // validates L > -1/2 and distinct elements
  Json& rep = out.report;
  rep["tool"] = std::string("ctinv ") + kVersion;
  rep["command"] = "check";
  rep["S"] = vec(ells);
  rep["T"] = vec(T.values());

  out.verdict = scan_zeros(ells, T.values(), cfg.scan_options());
  rep["verdict"] = verdict_json(out.verdict);
  if (ells.size() == 1) rep["closed_form_admissible"] = admissible_1d(ells[0], T[0]);

  const PhaseEvaluation pe = phases_from_T(ells, T.values());
  rep["phases"] = vec(pe.delta);
  rep["expansion_coeffs"] = vec(expansion_coeffs(ells, T.values()));

  std::optional<TailParams> tail;
  if (out.verdict.admissible) {
    KernelOptions ko;
    ko.threads = cfg.threads;
    const PotentialProfile prof = potential(ells, T.values(), RadialGrid(cfg.h, cfg.lambda), ko);
    tail = prof.tail;
    rep["moment"] = moments_json(prof);
  } else {
    rep["moment"] = {{"closed_form", moment_closed_form(ells, T.values())}, {"numeric", nullptr}};
  }
  rep["asymptotics"] = tail_json(ells, T.values(), tail);
  if (integral_values(ells)) {
    std::vector<int> li;
    std::vector<double> dl;
    for (Eigen::Index i = 0; i < ells.size(); ++i) {
      li.push_back(static_cast<int>(ells[i]));
      dl.push_back(pe.delta[i]);
    }
    rep["sum_rules"] = sum_rules_json(InputSet(li, dl), T.values());
  }
  rep["timing"] = {{"elapsed_s", seconds_since(t0)}};
  return out;
}

}  // namespace ctinv
