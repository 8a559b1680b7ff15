// Command-line driver: validate configs, run the simulator, audit recorded
// runs against the tracked inequalities, evaluate the weak-solution
// criteria, and sweep the regularization ladder.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "taxisim/config.hpp"
#include "taxisim/diagnostics.hpp"
#include "taxisim/io.hpp"
#include "taxisim/model.hpp"
#include "taxisim/stepper.hpp"
#include "taxisim/weakform.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace taxisim;

namespace {

struct LoadedConfig {
  RunConfig raw;
  GridSpec grid;
  ModelConfig model;
  ResupplySpec resupply;
  InitialData data;
};

LoadedConfig load_all(const std::string& path) {
  LoadedConfig lc;
  lc.raw = load_config(path);
  lc.grid = make_grid(lc.raw);
  lc.model = make_model(lc.raw);
  lc.resupply = make_resupply(lc.raw);
  lc.data = make_initial(lc.raw, lc.grid);
  return lc;
}

int run_validation(const LoadedConfig& lc, bool print) {
  const ValidationReport init = validate_initial_data(lc.data);
  const ResupplyReport res =
      validate_resupply(lc.resupply, lc.grid, 1.0, lc.model.t_final);
  if (print) {
    std::printf("initial data: %s\n", init.summary().c_str());
    std::printf("  u0: min %.6g max %.6g integral %.6g\n", init.min_u,
                init.max_u, init.int_u);
    std::printf("  v0: min %.6g max %.6g integral %.6g\n", init.min_v,
                init.max_v, init.int_v);
    std::printf("  w0: min %.6g max %.6g integral %.6g\n", init.min_w,
                init.max_w, init.int_w);
    std::printf("resupply: %s (r_star %.6g, windowed grad-root sup %.6g)\n",
                res.message.c_str(), res.r_star, res.windowed_gradroot_sup);
  }
  return (init.pass && res.admissible) ? 0 : 1;
}

int cmd_validate(const std::string& config_path) {
  LoadedConfig lc = load_all(config_path);
  return run_validation(lc, true);
}

json monitor_to_json(const SeriesMonitor& m) {
  return json{{"max_full", m.max_full},
              {"max_final_half", m.max_final_half},
              {"mean_q2", m.mean_q2},
              {"mean_q4", m.mean_q4},
              {"no_growth", m.no_growth}};
}

int cmd_run(const std::string& config_path) {
  LoadedConfig lc = load_all(config_path);
  if (run_validation(lc, true) != 0) {
    std::fprintf(stderr, "run: configuration failed validation\n");
    return 1;
  }

  const fs::path dir(lc.raw.output.directory);
  fs::create_directories(dir);

  RunSchedule sched;
  sched.snapshot_stride = lc.raw.output.snapshot_stride;
  sched.lambda = lc.raw.audit.lambda;

  Trajectory traj = run(lc.model, lc.resupply, lc.data, sched);

  write_diagnostics_csv((dir / "diagnostics.csv").string(), traj.diagnostics);
  std::ofstream((dir / "config_used.ini").string(), std::ios::binary)
      << emit_config(lc.raw);

  std::vector<ManifestEntry> manifest;
  for (std::size_t k = 0; k < traj.snapshots.size(); ++k) {
    const SimState& s = traj.snapshots[k];
    const char* names[3] = {"u", "v", "w"};
    const ScalarField* fields[3] = {&s.u, &s.v, &s.w};
    for (int f = 0; f < 3; ++f) {
      char fname[64];
      std::snprintf(fname, sizeof fname, "%s_%06zu.bin", names[f], k);
      write_snapshot((dir / fname).string(), names[f], *fields[f], s.t);
      manifest.push_back({fname, names[f], s.t, static_cast<int>(k)});
    }
  }
  write_manifest((dir / "manifest.txt").string(), manifest);

  json report;
  report["grid"] = {{"nx", lc.grid.nx},
                    {"ny", lc.grid.ny},
                    {"lx", lc.grid.lx},
                    {"ly", lc.grid.ly},
                    {"area", lc.grid.area()}};
  report["w0_sup"] = field_max(lc.data.w0);
  report["r_star"] = lc.resupply.r_star();
  report["steps"] = traj.steps;
  report["final_t"] = traj.final_state.t;
  report["aborted"] = traj.aborted;
  report["abort_reason"] = traj.abort_reason;

  int clipped = 0;
  double worst_clip = 0.0;
  for (const auto& sr : traj.step_reports) {
    clipped += sr.clipped_cells;
    worst_clip = std::max(worst_clip, sr.worst_clip);
  }
  report["clipped_cells_total"] = clipped;
  report["worst_clip"] = worst_clip;

  const CheckReport mass =
      check_mass_conservation(traj.diagnostics, lc.raw.audit.mass_tol);
  const CheckReport wbound =
      check_w_bound(traj.diagnostics, field_max(lc.data.w0),
                    lc.resupply.r_star(), lc.raw.audit.w_bound_tol);
  report["mass_conservation"] = {{"pass", mass.pass},
                                 {"worst_rel_drift", mass.worst},
                                 {"at_t", mass.worst_t}};
  report["w_bound"] = {{"pass", wbound.pass},
                       {"worst_overshoot", wbound.worst},
                       {"at_t", wbound.worst_t}};

  if (!traj.aborted && traj.diagnostics.size() >= 8) {
    const BoundednessReport mon = boundedness_monitor(traj.diagnostics);
    json jm;
    for (const auto& [name, m] : mon.monitors) jm[name] = monitor_to_json(m);
    report["monitors"] = jm;
    report["all_no_growth"] = mon.all_no_growth;
  }

  std::ofstream((dir / "run_report.json").string(), std::ios::binary)
      << report.dump(2) << "\n";

  std::printf("run: %d steps to t=%.6g, %s\n", traj.steps, traj.final_state.t,
              traj.aborted ? ("ABORTED: " + traj.abort_reason).c_str() : "ok");
  std::printf("  mass conservation: %s (%s)\n", mass.pass ? "pass" : "FAIL",
              mass.message.c_str());
  std::printf("  w bound:           %s (%s)\n", wbound.pass ? "pass" : "FAIL",
              wbound.message.c_str());
  if (report.contains("all_no_growth"))
    std::printf("  boundedness:       %s\n",
                report["all_no_growth"].get<bool>() ? "no growth" : "GROWTH");
  return traj.aborted ? 2 : 0;
}

struct AuditOptions {
  double C = -1.0, M = -1.0, delta = -1.0, lambda = -1.0;
  double a = -1.0, b = -1.0, c = -1.0, slack = -2.0;
  bool bisect = false;
};

int cmd_audit(const std::string& run_dir, const AuditOptions& opt) {
  const fs::path dir(run_dir);
  const DiagnosticsSeries series =
      read_diagnostics_csv((dir / "diagnostics.csv").string());

  json run_report;
  {
    std::ifstream in((dir / "run_report.json").string());
    if (!in) throw IoError("cannot open run_report.json in " + run_dir);
    in >> run_report;
  }
  const double area = run_report["grid"]["area"].get<double>();
  const double w0_sup = run_report["w0_sup"].get<double>();
  const double r_star = run_report["r_star"].get<double>();

  RunConfig rc;
  {
    const fs::path cfg_path = dir / "config_used.ini";
    if (fs::exists(cfg_path)) rc = load_config(cfg_path.string());
  }

  AuditConstants k;
  k.C = opt.C >= 0.0 ? opt.C : rc.audit.C;
  k.M = opt.M >= 0.0 ? opt.M : (rc.audit.M > 0.0 ? rc.audit.M : w0_sup + r_star);
  k.delta = opt.delta > 0.0 ? opt.delta : rc.audit.delta;

  json report;
  bool all_pass = true;

  const CheckReport mass = check_mass_conservation(series, rc.audit.mass_tol);
  report["mass_conservation"] = {{"pass", mass.pass},
                                 {"worst_rel_drift", mass.worst},
                                 {"at_t", mass.worst_t}};
  all_pass = all_pass && mass.pass;
  std::printf("mass conservation: %s (%s)\n", mass.pass ? "pass" : "FAIL",
              mass.message.c_str());

  // the bound constant M defaults to ||w0||_inf + r_* but is overridable,
  // so a planted misconfiguration is catchable
  const CheckReport wb = check_w_bound(series, k.M, 0.0, rc.audit.w_bound_tol);
  report["w_bound"] = {{"pass", wb.pass},
                       {"worst_overshoot", wb.worst},
                       {"at_t", wb.worst_t}};
  all_pass = all_pass && wb.pass;
  std::printf("w bound:           %s (%s)\n", wb.pass ? "pass" : "FAIL",
              wb.message.c_str());

  // gradient inequality
  if (opt.bisect) {
    const BisectionResult bi =
        bisect_feasible_C(series, AuditLemma::lemma31, k.M, k.delta, area);
    report["lemma_gradient"] = {{"bisected", true},
                                {"feasible", bi.feasible},
                                {"C", bi.C},
                                {"worst_residual", bi.audit.worst},
                                {"frac_nonneg", bi.audit.frac_nonneg}};
    all_pass = all_pass && bi.feasible;
    std::printf("gradient ineq:     %s (bisected C = %.6g, frac >= 0: %.4f)\n",
                bi.feasible ? "pass" : "FAIL", bi.C, bi.audit.frac_nonneg);
  } else {
    const AuditResult a31 = audit_inequality(series, AuditLemma::lemma31, k, area);
    report["lemma_gradient"] = {{"bisected", false},
                                {"C", k.C},
                                {"pass", a31.pass},
                                {"worst_residual", a31.worst},
                                {"frac_nonneg", a31.frac_nonneg}};
    all_pass = all_pass && a31.pass;
    std::printf("gradient ineq:     %s (C = %.6g, worst residual %.6g)\n",
                a31.pass ? "pass" : "FAIL", k.C, a31.worst);
  }

  // quasi-energy inequality
  if (opt.bisect) {
    const BisectionResult bi =
        bisect_feasible_C(series, AuditLemma::lemma32, k.M, k.delta, area);
    report["lemma_energy"] = {{"bisected", true},
                              {"feasible", bi.feasible},
                              {"C", bi.C},
                              {"worst_residual", bi.audit.worst},
                              {"frac_nonneg", bi.audit.frac_nonneg}};
    all_pass = all_pass && bi.feasible;
    std::printf("energy ineq:       %s (bisected C = %.6g, frac >= 0: %.4f)\n",
                bi.feasible ? "pass" : "FAIL", bi.C, bi.audit.frac_nonneg);
  } else {
    const AuditResult a32 = audit_inequality(series, AuditLemma::lemma32, k, area);
    report["lemma_energy"] = {{"bisected", false},
                              {"C", k.C},
                              {"pass", a32.pass},
                              {"worst_residual", a32.worst},
                              {"frac_nonneg", a32.frac_nonneg}};
    all_pass = all_pass && a32.pass;
    std::printf("energy ineq:       %s (C = %.6g, worst residual %.6g)\n",
                a32.pass ? "pass" : "FAIL", k.C, a32.worst);
  }

  // ODE comparison on the combined functional, re-assembled from the
  // recorded columns so --lambda can re-weight the gradient term:
  // y = ∫(u ln u + 1/e) + (1/2)∫|∇w|^2/w + lambda ∫|∇w|^2
  //   = energy_F + area/e + lambda * grad_w_sq
  {
    const double lambda = opt.lambda >= 0.0 ? opt.lambda : rc.audit.lambda;
    std::vector<double> t, y, z;
    for (const auto& r : series) {
      t.push_back(r.t);
      y.push_back(r.energy_F + area / M_E + lambda * r.grad_w_sq);
      z.push_back(k.C * r.v_sq + 2.0 * r.gradroot_r + k.C);
    }
    const double a = opt.a > 0.0 ? opt.a : rc.audit.gronwall_a;
    const double theta = std::min(1.0, (t.back() - t.front()) / 2.0);
    const double b =
        opt.b > 0.0 ? opt.b : windowed(t, y, theta).max_value() * (1 + 1e-12);
    const double c =
        opt.c > 0.0 ? opt.c : windowed(t, z, theta).max_value() * (1 + 1e-12);
    double slack = opt.slack > -1.5 ? opt.slack : rc.audit.gronwall_slack;
    if (slack < 0.0) {
      double m = 0.0;
      for (std::size_t i = 0; i < t.size(); ++i)
        m = std::max(m, a * y[i] * z[i]);
      slack = 0.05 * m;
    }
    const GronwallReport gr =
        gronwall_check(GronwallInputs::make(t, y, z, a, b, c, slack));
    report["gronwall"] = {{"a", a},
                          {"b", b},
                          {"c", c},
                          {"slack", slack},
                          {"hypotheses_hold", gr.hypotheses_hold},
                          {"bound", gr.bound},
                          {"max_y", gr.max_y},
                          {"conclusion_holds", gr.conclusion_holds}};
    all_pass = all_pass && gr.conclusion_holds;
    std::printf("ode comparison:    %s (%s)\n",
                gr.conclusion_holds ? "pass" : "FAIL", gr.message.c_str());
  }

  report["all_pass"] = all_pass;
  std::ofstream((dir / "audit_report.json").string(), std::ios::binary)
      << report.dump(2) << "\n";
  return all_pass ? 0 : 1;
}

int cmd_weak(const std::string& config_path, int n_bumps, std::uint64_t seed) {
  LoadedConfig lc = load_all(config_path);
  if (lc.model.beta != 2.0) {
    std::fprintf(stderr, "weak: requires a beta = 2 configuration\n");
    return 1;
  }
  if (run_validation(lc, false) != 0) {
    std::fprintf(stderr, "weak: configuration failed validation\n");
    return 1;
  }

  RunSchedule sched;
  sched.snapshot_stride = 1;  // weak-form quadrature wants every step
  sched.lambda = lc.raw.audit.lambda;
  Trajectory traj = run(lc.model, lc.resupply, lc.data, sched);
  if (traj.aborted) {
    std::fprintf(stderr, "weak: run aborted: %s\n", traj.abort_reason.c_str());
    return 2;
  }

  json report;
  const VMassReport vm =
      v_mass_inequality(traj.diagnostics, lc.raw.audit.v_mass_tol);
  report["v_mass"] = {{"pass", vm.pass},
                      {"worst_excess", vm.worst},
                      {"at_t", vm.worst_t}};
  std::printf("v-mass inequality: %s (%s)\n", vm.pass ? "pass" : "FAIL",
              vm.message.c_str());
  bool all_pass = vm.pass;

  Rng rng(seed);
  json bumps = json::array();
  const double horizon = traj.final_state.t;
  for (int i = 0; i < n_bumps; ++i) {
    TestFunction phi = make_random_bump(lc.grid, horizon, rng, false);
    TestFunction psi = phi;
    psi.nonneg = true;
    const double ru = weak_residual_u(traj, lc.model, phi);
    const double rw = weak_residual_w(traj, lc.model, lc.resupply, phi);
    const double sl = weak_slack_v(traj, psi);
    const bool ru_ok = std::abs(ru) <= lc.raw.audit.residual_tol;
    const bool rw_ok = std::abs(rw) <= lc.raw.audit.residual_tol;
    const bool sl_ok = sl >= -lc.raw.audit.slack_tol;
    all_pass = all_pass && ru_ok && rw_ok && sl_ok;
    bumps.push_back({{"cx", phi.cx},
                     {"cy", phi.cy},
                     {"ct", phi.ct},
                     {"rx", phi.rx},
                     {"ry", phi.ry},
                     {"rt", phi.rt},
                     {"amplitude", phi.amplitude},
                     {"residual_u", ru},
                     {"residual_w", rw},
                     {"slack_v", sl},
                     {"residual_u_pass", ru_ok},
                     {"residual_w_pass", rw_ok},
                     {"slack_v_pass", sl_ok}});
    std::printf("bump %2d: residual_u %+.3e %s  residual_w %+.3e %s  slack_v "
                "%+.3e %s\n",
                i, ru, ru_ok ? "ok" : "FAIL", rw, rw_ok ? "ok" : "FAIL", sl,
                sl_ok ? "ok" : "FAIL");
  }
  report["bumps"] = bumps;
  report["seed"] = seed;
  report["all_pass"] = all_pass;

  const fs::path dir(lc.raw.output.directory);
  fs::create_directories(dir);
  std::ofstream((dir / "weak_report.json").string(), std::ios::binary)
      << report.dump(2) << "\n";
  return all_pass ? 0 : 1;
}

int cmd_sweep(const std::string& config_path, std::vector<double> eps) {
  LoadedConfig lc = load_all(config_path);
  if (lc.model.beta != 2.0) {
    std::fprintf(stderr, "sweep: requires a beta = 2 configuration\n");
    return 1;
  }
  if (eps.empty()) {
    std::fprintf(stderr, "sweep: --eps list must not be empty\n");
    return 1;
  }

  EpsLadder ladder;
  ladder.eps_values = std::move(eps);
  ladder.base = lc.model;
  ladder.resupply = lc.resupply;
  ladder.data = lc.data;

  const EpsRefinementTable table = eps_refinement(ladder);

  const fs::path dir(lc.raw.output.directory);
  fs::create_directories(dir);
  {
    std::ofstream out((dir / "sweep_distances.csv").string(), std::ios::binary);
    out << "eps_hi,eps_lo,dist_u,dist_v,dist_w\n";
    char buf[256];
    for (std::size_t i = 0; i < table.dist_u.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g\n",
                    table.eps_values[i], table.eps_values[i + 1],
                    table.dist_u[i], table.dist_v[i], table.dist_w[i]);
      out << buf;
    }
  }

  json report;
  report["eps"] = table.eps_values;
  report["dist_u"] = table.dist_u;
  report["dist_v"] = table.dist_v;
  report["dist_w"] = table.dist_w;
  report["cauchy"] = table.cauchy;
  report["failures"] = table.failures;
  std::ofstream((dir / "sweep_report.json").string(), std::ios::binary)
      << report.dump(2) << "\n";

  bool any_failure = false;
  for (const auto& f : table.failures) any_failure = any_failure || !f.empty();
  for (std::size_t i = 0; i < table.dist_u.size(); ++i)
    std::printf("eps %.6g -> %.6g: |du| %.6e  |dv| %.6e  |dw| %.6e\n",
                table.eps_values[i], table.eps_values[i + 1], table.dist_u[i],
                table.dist_v[i], table.dist_w[i]);
  std::printf("cauchy: %s\n", table.cauchy ? "yes" : "no");
  return any_failure ? 2 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"structured-grid simulator and verification harness for the "
               "cascaded forager-scrounger taxis system"};
  app.require_subcommand(1);

  std::string config_path, run_dir;
  AuditOptions audit_opt;
  int n_bumps = 10;
  std::uint64_t seed = 1;
  std::vector<double> eps;

  CLI::App* validate = app.add_subcommand("validate", "check a configuration");
  validate->add_option("config", config_path, "config file")->required();

  CLI::App* runc = app.add_subcommand("run", "run a simulation");
  runc->add_option("config", config_path, "config file")->required();

  CLI::App* audit = app.add_subcommand("audit", "audit a recorded run");
  audit->add_option("run_dir", run_dir, "run output directory")->required();
  audit->add_flag("--bisect-C", audit_opt.bisect,
                  "bisect for the smallest feasible C");
  audit->add_option("--C", audit_opt.C, "inequality constant C");
  audit->add_option("--M", audit_opt.M, "sup bound M");
  audit->add_option("--delta", audit_opt.delta, "Young splitting delta");
  audit->add_option("--lambda", audit_opt.lambda, "combined functional weight");
  audit->add_option("--a", audit_opt.a, "ODE comparison constant a");
  audit->add_option("--b", audit_opt.b, "windowed y bound b");
  audit->add_option("--c", audit_opt.c, "windowed z bound c");
  audit->add_option("--slack", audit_opt.slack, "derivative slack");

  CLI::App* weak = app.add_subcommand("weak", "weak-solution criteria");
  weak->add_option("config", config_path, "config file")->required();
  weak->add_option("--n", n_bumps, "number of random test bumps");
  weak->add_option("--seed", seed, "bump family seed");

  CLI::App* sweep = app.add_subcommand("sweep", "epsilon refinement study");
  sweep->add_option("config", config_path, "config file")->required();
  sweep->add_option("--eps", eps, "epsilon ladder (non-increasing)")
      ->required()
      ->delimiter(',');

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate->parsed()) return cmd_validate(config_path);
    if (runc->parsed()) return cmd_run(config_path);
    if (audit->parsed()) return cmd_audit(run_dir, audit_opt);
    if (weak->parsed()) return cmd_weak(config_path, n_bumps, seed);
    if (sweep->parsed()) return cmd_sweep(config_path, eps);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
