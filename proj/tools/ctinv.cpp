// Command-line front end: invert, forward, roundtrip, map, check, specfun.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <type_traits>
#include <string>

#include "CLI11.hpp"

#include "ctinv/pipeline.hpp"

using namespace ctinv;

namespace {

// Flags given on the command line override the config file.
struct Overrides {
  std::optional<double> lambda, step, scan_step, scan_lambda, res;
  std::optional<int> k_range, seeds, threads;

  void apply(Config& cfg) const {
    auto put = [&](const char* key, const auto& v) {
      if (!v) return;
      if constexpr (std::is_integral_v<std::decay_t<decltype(*v)>>) {
        cfg.set(key, std::to_string(*v));
      } else {
        std::ostringstream os;
        os.precision(17);
        os << *v;
        cfg.set(key, os.str());
      }
    };
    put("lambda", lambda);
    put("h", step);
    put("scan_step", scan_step);
    put("scan_lambda", scan_lambda);
    put("res", res);
    put("k_range", k_range);
    put("seeds", seeds);
    put("threads", threads);
  }
};

Config base_config(const std::string& path) {
  if (!path.empty()) return load_config(path);
  if (const char* env = std::getenv("CTINV_CONFIG"); env && *env) return load_config(env);
  return {};
}

void emit_json(const Json& j, const std::string& path) {
  if (path.empty()) {
    std::cout << j.dump(2) << "\n";
    return;
  }
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Usage, "cannot write " + path);
  out << j.dump(2) << "\n";
}

void emit_csv(const CsvTable& t, const std::string& path) {
  if (path.empty()) {
    write_csv(std::cout, t);
    return;
  }
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Usage, "cannot write " + path);
  write_csv(out, t);
}

Eigen::VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

int unselected_code(const InvertOutcome& inv) {
  for (const CandidateReport& c : inv.selection.reports)
    if (c.verdict.zeros_found.empty() && !c.verdict.settled) return kExitUnsettled;
  return kExitNoAdmissible;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cox-Thompson inverse scattering at fixed energy"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "key=value config file (default: $CTINV_CONFIG)");
  Overrides ov;

  std::string phases, out_path, report_path;
  auto* invert = app.add_subcommand("invert", "reconstruct q(r) from phase shifts");
  invert->add_option("--phases", phases, "file with lines 'l delta'")->required();
  invert->add_option("--lambda", ov.lambda, "grid cutoff");
  invert->add_option("--step", ov.step, "grid step");
  invert->add_option("--k-range", ov.k_range, "branch range for a single phase shift");
  invert->add_option("--seeds", ov.seeds, "multistart seeds per axis");
  invert->add_option("--threads", ov.threads);
  invert->add_option("--out", out_path, "potential CSV");
  invert->add_option("--report", report_path, "JSON report (default stdout)");

  std::string potential_path, ws;
  int ell_max = 0;
  auto* forward = app.add_subcommand("forward", "phase shifts of a potential");
  auto* pot_opt = forward->add_option("--potential", potential_path, "CSV with columns r,q");
  auto* ws_opt = forward->add_option("--ws", ws, "Woods-Saxon depth,R,a");
  pot_opt->excludes(ws_opt);
  forward->add_option("--ellmax", ell_max)->required()->check(CLI::NonNegativeNumber);
  forward->add_option("--threads", ov.threads);
  forward->add_option("--out", out_path, "phase table CSV (default stdout)");

  auto* roundtrip = app.add_subcommand("roundtrip", "invert, then recompute the phase shifts");
  roundtrip->add_option("--phases", phases)->required();
  roundtrip->add_option("--lambda", ov.lambda);
  roundtrip->add_option("--step", ov.step);
  roundtrip->add_option("--threads", ov.threads);
  roundtrip->add_option("--report", report_path);

  std::string ells_text, box_text, T_text;
  auto* map = app.add_subcommand("map", "admissibility map over (L1, L2)");
  map->add_option("--ells", ells_text, "l1,l2")->required();
  map->add_option("--box", box_text, "L1min,L1max,L2min,L2max");
  map->add_option("--res", ov.res);
  map->add_option("--scan-step", ov.scan_step);
  map->add_option("--scan-lambda", ov.scan_lambda);
  map->add_option("--threads", ov.threads);
  map->add_option("--out", out_path, "lattice CSV (default stdout)");

  auto* check = app.add_subcommand("check", "admissibility and asymptotics of an explicit T");
  check->add_option("--ells", ells_text)->required();
  check->add_option("--T", T_text)->required();
  check->add_option("--lambda", ov.lambda);
  check->add_option("--scan-lambda", ov.scan_lambda);
  check->add_option("--report", report_path);

  double nu = 0.0, x = 1.0;
  auto* specfun = app.add_subcommand("specfun", "evaluate Bessel and Riccati-Bessel functions");
  specfun->add_option("--nu", nu)->required();
  specfun->add_option("--x", x)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    Config cfg = base_config(config_path);
    ov.apply(cfg);
    JobConfig job = JobConfig::from(cfg);
    if (!box_text.empty()) {
      const auto b = parse_list(box_text, "--box");
      if (b.size() != 4) throw Error(ErrorKind::Usage, "--box needs four numbers");
      job.box = MapBox{b[0], b[1], b[2], b[3], job.box.resolution};
    }
    job.validate();

    if (*invert) {
      const InvertOutcome inv = run_invert(load_phases(phases), job);
      if (inv.profile && !out_path.empty()) emit_csv(profile_table(*inv.profile), out_path);
      emit_json(inv.report, report_path);
      return inv.profile ? kExitOk : unselected_code(inv);
    }
    if (*forward) {
      SampledPotential q = SampledPotential::zero();
      ForwardOptions fo = job.forward_options();
      if (!ws.empty()) {
        const auto p = parse_list(ws, "--ws");
        if (p.size() != 3) throw Error(ErrorKind::Usage, "--ws needs depth,R,a");
        q = SampledPotential::woods_saxon(p[0], p[1], p[2]);
        fo.r_max = job.forward_rmax;
      } else if (!potential_path.empty()) {
        q = load_potential(potential_path);
        for (const auto& w : q.warnings()) std::cerr << "warning: " << w << "\n";
      } else {
        fo.r_max = job.forward_rmax;
      }
      const PhaseShiftTable table = phase_table(q, ell_max, fo);
      emit_csv(phase_table_csv(table, q.name()), out_path);
      return table.complete() ? kExitOk : kExitFailure;
    }
    if (*roundtrip) {
      const RoundtripOutcome rt = run_roundtrip(load_phases(phases), job);
      emit_json(rt.report, report_path);
      return rt.invert.profile ? kExitOk : unselected_code(rt.invert);
    }
    if (*map) {
      const AdmissibilityMap m =
          admissibility_map(to_vector(parse_list(ells_text, "--ells")), job.box, job.scan_options(), job.threads);
      emit_csv(map_table(m), out_path);
      return m.unsettled > 0 ? kExitUnsettled : kExitOk;
    }
    if (*check) {
      const CheckOutcome c =
          run_check(to_vector(parse_list(ells_text, "--ells")), to_vector(parse_list(T_text, "--T")), job);
      emit_json(c.report, report_path);
      if (c.verdict.admissible) return kExitOk;
      return c.verdict.zeros_found.empty() ? kExitUnsettled : kExitNoAdmissible;
    }
    if (*specfun) {
      const BesselJY b = bessel_jy(nu, x);
      Json j;
      j["nu"] = nu;
      j["x"] = x;
      j["J"] = b.j;
      j["Y"] = b.y;
      j["Jp"] = b.jp;
      j["Yp"] = b.yp;
      j["saturated"] = b.saturated;
      if (nu > 0) {
        const FunctionPair p = riccati(Order(nu - 0.5), x);
        j["u"] = p.u;
        j["u_prime"] = p.u_prime;
        j["v"] = p.v;
        j["v_prime"] = p.v_prime;
      }
      std::cout << j.dump(2) << "\n";
      return kExitOk;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}
