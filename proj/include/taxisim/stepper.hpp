// IMEX time integration of the regularized system: explicit upwinded taxis,
// implicit diffusion via conjugate gradients, semi-implicit
// positivity-preserving reactions.
#pragma once

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "taxisim/diagnostics.hpp"
#include "taxisim/grid.hpp"
#include "taxisim/model.hpp"
#include "taxisim/state.hpp"

namespace taxisim {

struct SolverFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct StepAbort : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

// y <- (I - coeff * Lap_N) x, mirrored-ghost Neumann stencil.
inline void apply_helmholtz(const GridSpec& g, double coeff,
                            const std::vector<double>& x,
                            std::vector<double>& y) {
  const int nx = g.nx, ny = g.ny;
  const double s = coeff / (g.h * g.h);
  for (int iy = 0; iy < ny; ++iy) {
    const int row = iy * nx;
    for (int ix = 0; ix < nx; ++ix) {
      const int i = row + ix;
      const double c = x[i];
      double lap = 0.0;
      if (ix + 1 < nx) lap += x[i + 1] - c;
      if (ix > 0) lap += x[i - 1] - c;
      if (iy + 1 < ny) lap += x[i + nx] - c;
      if (iy > 0) lap += x[i - nx] - c;
      y[i] = c - s * lap;
    }
  }
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace detail

// Solves (I - coeff * Lap_N) x = rhs by conjugate gradients, started from
// rhs itself. The Neumann operator has zero column sums, so every Krylov
// update preserves the entry sum; a final mean shift pins integrate(x) to
// integrate(rhs) at roundoff level regardless of the stopping tolerance.
inline ScalarField solve_helmholtz(const ScalarField& rhs, double coeff,
                                   double tol, int max_iter,
                                   int* iters_out = nullptr) {
  require(coeff > 0.0, "solve_helmholtz: coeff must be positive");
  require(rhs.finite(), "solve_helmholtz: rhs must be finite");
  const GridSpec& g = rhs.grid;
  const std::size_t n = rhs.values.size();

  ScalarField x = rhs;
  std::vector<double> r(n), p(n), ap(n);
  detail::apply_helmholtz(g, coeff, x.values, ap);
  for (std::size_t i = 0; i < n; ++i) r[i] = rhs.values[i] - ap[i];

  const double bnorm = std::sqrt(detail::dot(rhs.values, rhs.values));
  const double target = tol * (bnorm > 0.0 ? bnorm : 1.0);
  double rs = detail::dot(r, r);
  int iters = 0;
  if (std::sqrt(rs) > target) {
    p = r;
    for (iters = 1; iters <= max_iter; ++iters) {
      detail::apply_helmholtz(g, coeff, p, ap);
      const double alpha = rs / detail::dot(p, ap);
      for (std::size_t i = 0; i < n; ++i) {
        x.values[i] += alpha * p[i];
        r[i] -= alpha * ap[i];
      }
      const double rs_new = detail::dot(r, r);
      if (std::sqrt(rs_new) <= target) {
        rs = rs_new;
        break;
      }
      const double beta = rs_new / rs;
      for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
      rs = rs_new;
      if (iters == max_iter) {
        std::ostringstream os;
        os << "solve_helmholtz: no convergence in " << max_iter
           << " iterations (residual " << std::sqrt(rs) << ", target " << target
           << ", coeff " << coeff << ")";
        throw SolverFailure(os.str());
      }
    }
  }

  const double shift =
      (kahan_sum(rhs.values) - kahan_sum(x.values)) / static_cast<double>(n);
  for (double& v : x.values) v += shift;

  if (iters_out) *iters_out = iters;
  return x;
}

inline ScalarField solve_helmholtz(const ScalarField& rhs, double coeff,
                                   const ModelConfig& cfg,
                                   int* iters_out = nullptr) {
  return solve_helmholtz(rhs, coeff, cfg.solver_tol, cfg.solver_max_iter,
                         iters_out);
}

namespace detail {

// Face velocity of the forager taxis: face average of F'(u) times the face
// gradient of w. Splitting the mobility this way keeps the face speed bound
// |vel| <= |grad w| used by the dt cap.
inline FluxField taxis_velocity_u(const SimState& s, const ModelConfig& cfg) {
  const GridSpec& g = s.grid();
  FluxField vel = face_gradient(s.w);
  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 1; ix < g.nx; ++ix)
      vel.fx(ix, iy) *= 0.5 * (f_prime(s.u(ix - 1, iy), cfg) + f_prime(s.u(ix, iy), cfg));
  for (int iy = 1; iy < g.ny; ++iy)
    for (int ix = 0; ix < g.nx; ++ix)
      vel.fy(ix, iy) *= 0.5 * (f_prime(s.u(ix, iy - 1), cfg) + f_prime(s.u(ix, iy), cfg));
  return vel;
}

inline double max_abs_face(const FluxField& f) {
  double m = 0.0;
  for (double v : f.xflux) m = std::max(m, std::abs(v));
  for (double v : f.yflux) m = std::max(m, std::abs(v));
  return m;
}

// Clips sub-tolerance negative undershoots to zero; anything larger aborts,
// since silent clipping would mask an instability.
inline void enforce_nonnegative(ScalarField& f, const char* name,
                                StepReport& rep) {
  const double sup = field_max(f);
  const double tol = 1e-12 * std::max(sup, 0.0) + 1e-300;
  for (double& v : f.values) {
    if (v < 0.0) {
      if (v < -tol) {
        std::ostringstream os;
        os << "step: " << name << " dropped to " << v
           << " (beyond clip tolerance " << -tol << ")";
        throw StepAbort(os.str());
      }
      rep.worst_clip = std::max(rep.worst_clip, -v);
      v = 0.0;
      ++rep.clipped_cells;
    }
  }
}

}  // namespace detail

// Largest stable step: the explicit upwind taxis restricts dt to
// cfl_advect * h / max face speed, and the logistic reaction to
// cfl_react / max(1, sup(v)^(beta-1)). Never below 1e-12.
inline double adapt_dt(const SimState& state, const ModelConfig& cfg) {
  double dt = cfg.dt_init;
  const double speed_u = detail::max_abs_face(detail::taxis_velocity_u(state, cfg));
  const double speed_v = detail::max_abs_face(face_gradient(state.u));
  const double speed = std::max(speed_u, speed_v);
  if (speed > 0.0) dt = std::min(dt, cfg.cfl_advect * state.grid().h / speed);
  const double sup_v = field_max(state.v);
  dt = std::min(dt, cfg.cfl_react / std::max(1.0, std::pow(sup_v, cfg.beta - 1.0)));
  if (dt < 1e-12)
    throw StepAbort("adapt_dt: step size collapsed below 1e-12 (instability)");
  return dt;
}

// One first-order IMEX update: (a) u taxis + implicit diffusion (mass
// conserving by construction), (b) v taxis + diffusion + semi-implicit
// logistic, (c) w implicit diffusion + semi-implicit absorption.
inline std::pair<SimState, StepReport> step(const SimState& state,
                                            const ModelConfig& cfg,
                                            const ResupplySpec& spec,
                                            double dt) {
  const GridSpec& g = state.grid();
  StepReport rep;
  rep.dt_used = dt;
  SimState next;
  next.t = state.t + dt;

  {  // u
    FluxField vel = detail::taxis_velocity_u(state, cfg);
    FluxField flux = upwind_advective_flux(state.u, vel);
    ScalarField div = flux_divergence(flux);
    ScalarField star = state.u;
    for (std::size_t i = 0; i < star.values.size(); ++i)
      star.values[i] -= dt * div.values[i];
    detail::enforce_nonnegative(star, "u (post-taxis)", rep);
    next.u = solve_helmholtz(star, dt, cfg, &rep.solver_iters_u);
    detail::enforce_nonnegative(next.u, "u (post-diffusion)", rep);
  }

  {  // v
    FluxField vel = face_gradient(state.u);
    FluxField flux = upwind_advective_flux(state.v, vel);
    ScalarField div = flux_divergence(flux);
    ScalarField star = state.v;
    for (std::size_t i = 0; i < star.values.size(); ++i)
      star.values[i] -= dt * div.values[i];
    detail::enforce_nonnegative(star, "v (post-taxis)", rep);
    ScalarField diff = solve_helmholtz(star, dt, cfg, &rep.solver_iters_v);
    detail::enforce_nonnegative(diff, "v (post-diffusion)", rep);
    next.v = diff;
    for (double& v : next.v.values)
      v = v * (1.0 + dt) / (1.0 + dt * std::pow(v, cfg.beta - 1.0));
  }

  {  // w
    ScalarField diff = solve_helmholtz(state.w, dt, cfg, &rep.solver_iters_w);
    detail::enforce_nonnegative(diff, "w (post-diffusion)", rep);
    ScalarField r = resupply_field(spec, g, next.t);
    next.w = diff;
    for (std::size_t i = 0; i < next.w.values.size(); ++i) {
      const double absorb = f_eval(next.u.values[i], cfg) +
                            f_eval(next.v.values[i], cfg) + 1.0;
      next.w.values[i] =
          (diff.values[i] + dt * r.values[i]) / (1.0 + dt * absorb);
    }
  }

  if (!next.finite()) throw StepAbort("step: non-finite state");
  rep.min_u = field_min(next.u);
  rep.min_v = field_min(next.v);
  rep.min_w = field_min(next.w);
  return {std::move(next), rep};
}

struct RunSchedule {
  int snapshot_stride = 0;  // 0: initial + final only; k>0: every k-th step
  double lambda = 1.0;      // combined-functional weight
};

struct Trajectory {
  std::vector<SimState> snapshots;
  DiagnosticsSeries diagnostics;
  std::vector<StepReport> step_reports;
  SimState final_state;
  int steps = 0;
  bool aborted = false;
  std::string abort_reason;
};

// Drives step() with adapt_dt from t=0 to t_final. Diagnostics are recorded
// every step; snapshots on the schedule. On abort the partial trajectory is
// returned for post-mortem.
inline Trajectory run(const ModelConfig& cfg, const ResupplySpec& spec,
                      const InitialData& data, const RunSchedule& sched = {}) {
  cfg.validate();
  Trajectory traj;
  SimState state;
  state.t = 0.0;
  state.u = data.u0;
  state.v = data.v0;
  state.w = data.w0;

  traj.diagnostics.push_back(record(state, cfg, spec, sched.lambda));
  traj.snapshots.push_back(state);

  const double t_end = cfg.t_final;
  const double eps_end = 1e-12 * std::max(1.0, t_end);
  try {
    while (state.t < t_end - eps_end) {
      double dt = adapt_dt(state, cfg);
      dt = std::min(dt, t_end - state.t);
      auto [next, rep] = step(state, cfg, spec, dt);
      state = std::move(next);
      ++traj.steps;
      DiagnosticsRecord r = record(state, cfg, spec, sched.lambda);
      r.dt_used = rep.dt_used;
      traj.diagnostics.push_back(r);
      traj.step_reports.push_back(rep);
      const bool last = state.t >= t_end - eps_end;
      if ((sched.snapshot_stride > 0 && traj.steps % sched.snapshot_stride == 0) ||
          last)
        traj.snapshots.push_back(state);
    }
  } catch (const std::exception& e) {
    traj.aborted = true;
    traj.abort_reason = e.what();
    if (traj.snapshots.empty() || traj.snapshots.back().t != state.t)
      traj.snapshots.push_back(state);
  }
  traj.final_state = state;
  return traj;
}

}  // namespace taxisim
