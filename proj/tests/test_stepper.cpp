#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "oracles.hpp"
#include "taxisim/random.hpp"
#include "taxisim/stepper.hpp"

using namespace taxisim;

namespace {

ModelConfig base_cfg(double beta = 3.0, double eps = 0.0) {
  ModelConfig c;
  c.beta = beta;
  c.epsilon = eps;
  c.t_final = 1.0;
  c.dt_init = 1e-3;
  return c;
}

SimState uniform_state(const GridSpec& g, double u, double v, double w) {
  SimState s;
  s.u = ScalarField(g, u);
  s.v = ScalarField(g, v);
  s.w = ScalarField(g, w);
  return s;
}

double mode_eigenvalue(const GridSpec& g, int k) {
  return 2.0 / (g.h * g.h) * (1.0 - std::cos(k * M_PI * g.h / g.lx));
}

}  // namespace

TEST_CASE("helmholtz solve: constant rhs is reproduced exactly") {
  GridSpec g(16, 16, 1.0, 1.0);
  ScalarField rhs(g, 2.5);
  for (double coeff : {1e-4, 1e-2, 1.0}) {
    ScalarField x = solve_helmholtz(rhs, coeff, 1e-12, 1000);
    for (double v : x.values) CHECK(v == 2.5);
  }
}

TEST_CASE("helmholtz solve: cos mode is damped by the discrete eigenvalue") {
  GridSpec g(64, 1, 1.0, 1.0 / 64);
  ScalarField f = sample_field(g, [&](double x, double) {
    return std::cos(M_PI * x / g.lx);
  });
  const double coeff = 3e-3;
  const double lambda = mode_eigenvalue(g, 1);
  ScalarField x = solve_helmholtz(f, coeff, 1e-12, 5000);
  for (int i = 0; i < g.cells(); ++i)
    CHECK(x.values[i] ==
          Catch::Approx(f.values[i] / (1.0 + coeff * lambda)).margin(1e-10));
}

TEST_CASE("helmholtz solve preserves the integral") {
  GridSpec g(24, 24, 1.0, 1.0);
  Rng rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    ScalarField rhs(g);
    for (double& v : rhs.values) v = rng.uniform(0.5, 2.0);
    const double coeff = std::exp(rng.uniform(std::log(1e-4), std::log(1.0)));
    ScalarField x = solve_helmholtz(rhs, coeff, 1e-10, 5000);
    CHECK(std::abs(integrate(x) - integrate(rhs)) <=
          1e-10 * std::abs(integrate(rhs)));
  }
}

TEST_CASE("helmholtz solve aborts when the iteration cap is hit") {
  GridSpec g(32, 32, 1.0, 1.0);
  Rng rng(78);
  ScalarField rhs(g);
  for (double& v : rhs.values) v = rng.uniform(-1.0, 1.0);
  CHECK_THROWS_AS(solve_helmholtz(rhs, 10.0, 1e-14, 2), SolverFailure);
}

TEST_CASE("uniform state: taxis vanishes and the scalar maps are exact") {
  GridSpec g(12, 12, 1.0, 1.0);
  ModelConfig cfg = base_cfg(3.0);
  const double dt = 5e-3;
  SimState s = uniform_state(g, 0.8, 1.0, 2.0);
  ResupplySpec r = ResupplySpec::constant(0.3);

  auto [next, rep] = step(s, cfg, r, dt);
  const double w_expect =
      (2.0 + dt * 0.3) /
      (1.0 + dt * (f_eval(0.8, cfg) + f_eval(1.0, cfg) + 1.0));
  for (int i = 0; i < g.cells(); ++i) {
    CHECK(next.u.values[i] == 0.8);
    CHECK(next.v.values[i] == 1.0);  // logistic fixed point is exact
    CHECK(next.w.values[i] == w_expect);
  }
  CHECK(rep.clipped_cells == 0);
}

TEST_CASE("pure absorption decays at the first-order rate") {
  GridSpec g(8, 8, 1.0, 1.0);
  ModelConfig cfg = base_cfg(3.0);
  const double dt = 1e-3;
  SimState s = uniform_state(g, 0.0, 0.0, 1.0);
  ResupplySpec r = ResupplySpec::zero();
  int n = 0;
  while (s.t < 1.0 - 1e-12) {
    s = step(s, cfg, r, dt).first;
    ++n;
  }
  const double exact = std::exp(-1.0);
  const double numeric = s.w.values[0];
  CHECK(std::abs(numeric - exact) <= dt);  // w' = -w oracle, O(dt) accuracy
  CHECK(numeric == Catch::Approx(std::pow(1.0 + dt, -n)));
}

TEST_CASE("u mass is conserved over a thousand random-data steps") {
  GridSpec g(16, 16, 1.0, 1.0);
  ModelConfig cfg = base_cfg(3.0);
  cfg.dt_init = 2e-3;
  Rng rng(13);
  SimState s;
  s.u = ScalarField(g);
  s.v = ScalarField(g);
  s.w = ScalarField(g);
  for (double& v : s.u.values) v = rng.uniform(0.5, 1.5);
  for (double& v : s.v.values) v = rng.uniform(0.2, 1.2);
  for (double& v : s.w.values) v = rng.uniform(0.5, 2.0);
  ResupplySpec r = ResupplySpec::constant(0.2);

  const double m0 = integrate(s.u);
  double prev = m0;
  for (int k = 0; k < 1000; ++k) {
    const double dt = adapt_dt(s, cfg);
    auto [next, rep] = step(s, cfg, r, dt);
    const double m = integrate(next.u);
    CHECK(std::abs(m - prev) <= 1e-13 * prev);  // per-step conservation
    prev = m;
    s = std::move(next);
  }
  CHECK(std::abs(integrate(s.u) - m0) <= 1e-12 * m0);
}

TEST_CASE("nonnegativity and the w sup bound hold along random steps") {
  GridSpec g(16, 16, 1.0, 1.0);
  ModelConfig cfg = base_cfg(3.0);
  cfg.dt_init = 2e-3;
  Rng rng(29);
  SimState s;
  s.u = ScalarField(g);
  s.v = ScalarField(g);
  s.w = ScalarField(g);
  for (double& v : s.u.values) v = rng.uniform(0.0, 2.0);
  for (double& v : s.v.values) v = rng.uniform(0.0, 1.5);
  for (double& v : s.w.values) v = rng.uniform(0.1, 2.0);
  const double r_star = 0.4;
  ResupplySpec r = ResupplySpec::constant(r_star);

  for (int k = 0; k < 200; ++k) {
    const double sup_w_old = field_max(s.w);
    const double dt = adapt_dt(s, cfg);
    auto [next, rep] = step(s, cfg, r, dt);
    CHECK(rep.min_u >= 0.0);
    CHECK(rep.min_v >= 0.0);
    CHECK(rep.min_w >= 0.0);
    CHECK(field_max(next.w) <=
          std::max(sup_w_old, r_star) + cfg.solver_tol * sup_w_old);
    s = std::move(next);
  }
}

TEST_CASE("adapt_dt caps") {
  GridSpec g(10, 10, 1.0, 1.0);
  ModelConfig cfg = base_cfg(3.0);
  SECTION("uniform state returns dt_init") {
    SimState s = uniform_state(g, 1.0, 1.0, 1.0);
    CHECK(adapt_dt(s, cfg) == cfg.dt_init);
  }
  SECTION("reaction cap kicks in at large v") {
    SimState s = uniform_state(g, 1.0, 4.0, 1.0);
    cfg.dt_init = 1.0;
    cfg.t_final = 2.0;
    cfg.cfl_react = 0.5;
    CHECK(adapt_dt(s, cfg) == Catch::Approx(0.5 / 16.0));  // 0.03125
  }
  SECTION("doubling the w gradient halves the advective cap") {
    cfg.dt_init = 10.0;
    cfg.t_final = 20.0;
    cfg.cfl_react = 1e6;
    auto make = [&](double slope) {
      SimState s = uniform_state(g, 1.0, 0.0, 0.0);
      s.w = sample_field(g, [&](double x, double) { return slope * x; });
      return s;
    };
    const double dt1 = adapt_dt(make(1.0), cfg);
    const double dt2 = adapt_dt(make(2.0), cfg);
    CHECK(dt1 == Catch::Approx(2.0 * dt2));
    CHECK(dt1 == Catch::Approx(cfg.cfl_advect * g.h / 1.0));
  }
}

TEST_CASE("run: zero t_final yields the initial state only") {
  GridSpec g(8, 8, 1.0, 1.0);
  ModelConfig cfg = base_cfg(3.0);
  cfg.t_final = 0.0;
  InitialData data{ScalarField(g, 1.0), ScalarField(g, 0.5), ScalarField(g, 1.0)};
  Trajectory traj = run(cfg, ResupplySpec::zero(), data);
  CHECK(traj.steps == 0);
  CHECK(traj.snapshots.size() == 1);
  CHECK(traj.diagnostics.size() == 1);
  CHECK_FALSE(traj.aborted);
}

TEST_CASE("run: uniform logistic endpoint matches the ODE reference") {
  GridSpec g(8, 8, 1.0, 1.0);
  ModelConfig cfg = base_cfg(3.0);
  cfg.t_final = 5.0;
  cfg.dt_init = 1e-2;
  cfg.cfl_react = 10.0;  // let dt_init bind exactly
  InitialData data{ScalarField(g, 0.8), ScalarField(g, 0.5), ScalarField(g, 2.0)};
  ResupplySpec r = ResupplySpec::constant(0.3);
  Trajectory traj = run(cfg, r, data, {});
  REQUIRE_FALSE(traj.aborted);

  oracles::UniformOde ode{0.8, cfg.beta, cfg.epsilon, 0.3};
  auto [v_ref, w_ref] = oracles::rk4_uniform(ode, 0.5, 2.0, traj.final_state.t);
  CHECK(std::abs(traj.final_state.v.values[0] - v_ref) <= 5.0 * cfg.dt_init);
  CHECK(std::abs(traj.final_state.w.values[0] - w_ref) <= 5.0 * cfg.dt_init);

  // and the full 2D evolution agrees with the exact scalar iteration
  double v = 0.5, w = 2.0;
  for (int k = 0; k < traj.steps; ++k) {
    auto [vn, wn] = oracles::scalar_step(ode, v, w, 1e-2);
    v = vn;
    w = wn;
  }
  CHECK(traj.final_state.v.values[0] == Catch::Approx(v).epsilon(1e-13));
  CHECK(traj.final_state.w.values[0] == Catch::Approx(w).epsilon(1e-13));
}

TEST_CASE("run returns a partial trajectory on abort") {
  GridSpec g(8, 8, 1.0, 1.0);
  ModelConfig cfg = base_cfg(3.0);
  cfg.t_final = 1.0;
  cfg.dt_init = 1e-3;
  cfg.solver_max_iter = 1;  // force a solver failure mid-run
  InitialData data{ScalarField(g, 1.0), ScalarField(g, 0.5), ScalarField(g, 1.0)};
  data.u0(2, 2) = 1.5;  // non-constant so the solve actually iterates
  Trajectory traj = run(cfg, ResupplySpec::zero(), data);
  CHECK(traj.aborted);
  CHECK_FALSE(traj.abort_reason.empty());
  CHECK(traj.diagnostics.size() >= 1);
}
