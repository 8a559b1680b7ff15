// Generalized-solution criteria evaluated on computed trajectories: the two
// weak identities, the supersolution inequality for v, the v-mass
// inequality, and the epsilon-refinement Cauchy study.
#pragma once

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "taxisim/grid.hpp"
#include "taxisim/model.hpp"
#include "taxisim/random.hpp"
#include "taxisim/stepper.hpp"

namespace taxisim {

// Smooth compactly supported tensor bump
//   phi(x,y,t) = A b((x-cx)/rx) b((y-cy)/ry) b((t-ct)/rt),
// with the mollifier profile b(s) = exp(-1/(1-s^2)) on |s|<1, 0 outside.
// Support is strictly inside the domain in space and may touch t = 0.
struct TestFunction {
  double cx = 0.5, cy = 0.5, ct = 0.5;
  double rx = 0.25, ry = 0.25, rt = 0.25;
  double amplitude = 1.0;
  bool nonneg = false;

  static double profile(double s) {
    const double q = 1.0 - s * s;
    return q > 0.0 ? std::exp(-1.0 / q) : 0.0;
  }

  static double profile_deriv(double s) {
    const double q = 1.0 - s * s;
    if (q <= 0.0) return 0.0;
    return profile(s) * (-2.0 * s / (q * q));
  }

  double value(double x, double y, double t) const {
    return amplitude * profile((x - cx) / rx) * profile((y - cy) / ry) *
           profile((t - ct) / rt);
  }

  double dt(double x, double y, double t) const {
    return amplitude * profile((x - cx) / rx) * profile((y - cy) / ry) *
           profile_deriv((t - ct) / rt) / rt;
  }

  double dx(double x, double y, double t) const {
    return amplitude * profile_deriv((x - cx) / rx) / rx *
           profile((y - cy) / ry) * profile((t - ct) / rt);
  }

  double dy(double x, double y, double t) const {
    return amplitude * profile((x - cx) / rx) *
           profile_deriv((y - cy) / ry) / ry * profile((t - ct) / rt);
  }

  double t_end() const { return ct + rt; }
};

// Seeded family of admissible bumps: support inside the domain, time support
// ending before the horizon.
inline TestFunction make_random_bump(const GridSpec& g, double t_horizon,
                                     Rng& rng, bool nonneg) {
  TestFunction f;
  f.rx = rng.uniform(0.18, 0.32) * g.lx;
  f.ry = rng.uniform(0.18, 0.32) * g.ly;
  f.cx = rng.uniform(f.rx * 1.02, g.lx - f.rx * 1.02);
  f.cy = rng.uniform(f.ry * 1.02, g.ly - f.ry * 1.02);
  f.rt = rng.uniform(0.25, 0.45) * t_horizon;
  f.ct = rng.uniform(0.0, t_horizon - f.rt);
  f.amplitude = rng.uniform(0.5, 2.0);
  f.nonneg = nonneg;
  return f;
}

namespace detail {

// Cell-centered gradient: face differences averaged back to centers
// (boundary faces are zero, matching the no-flux condition).
inline void center_gradient(const ScalarField& f, ScalarField& gx,
                            ScalarField& gy) {
  const GridSpec& g = f.grid;
  FluxField fg = face_gradient(f);
  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 0; ix < g.nx; ++ix) {
      gx(ix, iy) = 0.5 * (fg.fx(ix, iy) + fg.fx(ix + 1, iy));
      gy(ix, iy) = 0.5 * (fg.fy(ix, iy) + fg.fy(ix, iy + 1));
    }
}

inline std::vector<double> trapezoid_weights(const std::vector<double>& t) {
  std::vector<double> w(t.size(), 0.0);
  for (std::size_t k = 0; k + 1 < t.size(); ++k) {
    const double half = 0.5 * (t[k + 1] - t[k]);
    w[k] += half;
    w[k + 1] += half;
  }
  return w;
}

template <class Phi>
void check_support(const Trajectory& traj, const Phi& phi) {
  require(traj.snapshots.size() >= 2, "weak residual: need >= 2 snapshots");
  const double t_end = traj.snapshots.back().t;
  require(phi.t_end() <= t_end + 1e-12 * std::max(1.0, t_end),
          "weak residual: test-function support exceeds trajectory range");
}

}  // namespace detail

// Residual of the weak identity for u:
//   -∫∫ u phi_t - ∫ u0 phi(.,0) + ∫∫ grad u . grad phi
//     - ∫∫ u F'(u) grad w . grad phi,
// zero for an exact solution. Quadrature is cell centers in space and
// trapezoid over the snapshot times.
template <class Phi>
double weak_residual_u(const Trajectory& traj, const ModelConfig& cfg,
                       const Phi& phi) {
  detail::check_support(traj, phi);
  const GridSpec& g = traj.snapshots.front().grid();
  std::vector<double> times;
  for (const auto& s : traj.snapshots) times.push_back(s.t);
  const std::vector<double> tw = detail::trapezoid_weights(times);

  double acc = 0.0;
  ScalarField gux(g), guy(g), gwx(g), gwy(g);
  std::vector<double> cell(g.cells());
  for (std::size_t k = 0; k < traj.snapshots.size(); ++k) {
    const SimState& s = traj.snapshots[k];
    detail::center_gradient(s.u, gux, guy);
    detail::center_gradient(s.w, gwx, gwy);
    for (int iy = 0; iy < g.ny; ++iy)
      for (int ix = 0; ix < g.nx; ++ix) {
        const double x = g.xc(ix), y = g.yc(iy);
        const double u = s.u(ix, iy);
        const double px = phi.dx(x, y, s.t), py = phi.dy(x, y, s.t);
        double term = -u * phi.dt(x, y, s.t);
        term += gux(ix, iy) * px + guy(ix, iy) * py;
        term -= u * f_prime(u, cfg) * (gwx(ix, iy) * px + gwy(ix, iy) * py);
        cell[g.idx(ix, iy)] = term;
      }
    acc += tw[k] * g.cell_area() * kahan_sum(cell);
  }

  const SimState& s0 = traj.snapshots.front();
  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 0; ix < g.nx; ++ix)
      cell[g.idx(ix, iy)] = s0.u(ix, iy) * phi.value(g.xc(ix), g.yc(iy), s0.t);
  acc -= g.cell_area() * kahan_sum(cell);
  return acc;
}

// Residual of the weak identity for w, including the resupply term:
//   -∫∫ w phi_t - ∫ w0 phi(.,0) + ∫∫ grad w . grad phi
//     - ∫∫ (-(F(u)+F(v))w - w + r) phi.
template <class Phi>
double weak_residual_w(const Trajectory& traj, const ModelConfig& cfg,
                       const ResupplySpec& spec, const Phi& phi) {
  detail::check_support(traj, phi);
  const GridSpec& g = traj.snapshots.front().grid();
  std::vector<double> times;
  for (const auto& s : traj.snapshots) times.push_back(s.t);
  const std::vector<double> tw = detail::trapezoid_weights(times);

  double acc = 0.0;
  ScalarField gwx(g), gwy(g);
  std::vector<double> cell(g.cells());
  for (std::size_t k = 0; k < traj.snapshots.size(); ++k) {
    const SimState& s = traj.snapshots[k];
    detail::center_gradient(s.w, gwx, gwy);
    ScalarField r = resupply_field(spec, g, s.t);
    for (int iy = 0; iy < g.ny; ++iy)
      for (int ix = 0; ix < g.nx; ++ix) {
        const double x = g.xc(ix), y = g.yc(iy);
        const double w = s.w(ix, iy);
        const double pv = phi.value(x, y, s.t);
        double term = -w * phi.dt(x, y, s.t);
        term += gwx(ix, iy) * phi.dx(x, y, s.t) + gwy(ix, iy) * phi.dy(x, y, s.t);
        const double reaction = -(f_eval(s.u(ix, iy), cfg) +
                                  f_eval(s.v(ix, iy), cfg)) *
                                    w -
                                w + r(ix, iy);
        term -= reaction * pv;
        cell[g.idx(ix, iy)] = term;
      }
    acc += tw[k] * g.cell_area() * kahan_sum(cell);
  }

  const SimState& s0 = traj.snapshots.front();
  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 0; ix < g.nx; ++ix)
      cell[g.idx(ix, iy)] = s0.w(ix, iy) * phi.value(g.xc(ix), g.yc(iy), s0.t);
  acc -= g.cell_area() * kahan_sum(cell);
  return acc;
}

// Slack of the supersolution inequality for v against a nonnegative psi:
//   LHS = -∫∫ ln(v+1) psi_t - ∫ ln(v0+1) psi(.,0)
//   RHS = ∫∫ |grad ln(v+1)|^2 psi - ∫∫ grad ln(v+1) . grad psi
//         - ∫∫ (v/(v+1)) (grad u . grad ln(v+1)) psi
//         + ∫∫ (v/(v+1)) grad u . grad psi + ∫∫ ((v-v^2)/(v+1)) psi.
// A generalized solution satisfies slack = LHS - RHS >= 0 up to
// discretization. Gradients of ln(v+1) are face differences of ln(v+1).
template <class Psi>
double weak_slack_v(const Trajectory& traj, const Psi& psi) {
  require(psi.nonneg && psi.amplitude >= 0.0,
          "weak_slack_v: psi must be nonnegative");
  detail::check_support(traj, psi);
  const GridSpec& g = traj.snapshots.front().grid();
  std::vector<double> times;
  for (const auto& s : traj.snapshots) times.push_back(s.t);
  const std::vector<double> tw = detail::trapezoid_weights(times);

  double acc = 0.0;
  ScalarField lnv(g), glx(g), gly(g), gux(g), guy(g);
  std::vector<double> cell(g.cells());
  for (std::size_t k = 0; k < traj.snapshots.size(); ++k) {
    const SimState& s = traj.snapshots[k];
    for (int i = 0; i < g.cells(); ++i)
      lnv.values[i] = std::log1p(s.v.values[i]);
    detail::center_gradient(lnv, glx, gly);
    detail::center_gradient(s.u, gux, guy);
    for (int iy = 0; iy < g.ny; ++iy)
      for (int ix = 0; ix < g.nx; ++ix) {
        const double x = g.xc(ix), y = g.yc(iy);
        const double v = s.v(ix, iy);
        const double pv = psi.value(x, y, s.t);
        const double px = psi.dx(x, y, s.t), py = psi.dy(x, y, s.t);
        const double lx = glx(ix, iy), ly = gly(ix, iy);
        const double frac = v / (v + 1.0);
        double term = -lnv(ix, iy) * psi.dt(x, y, s.t);  // LHS pieces
        term -= (lx * lx + ly * ly) * pv;                // -RHS from here on
        term += lx * px + ly * py;
        term += frac * (gux(ix, iy) * lx + guy(ix, iy) * ly) * pv;
        term -= frac * (gux(ix, iy) * px + guy(ix, iy) * py);
        term -= (v - v * v) / (v + 1.0) * pv;
        cell[g.idx(ix, iy)] = term;
      }
    acc += tw[k] * g.cell_area() * kahan_sum(cell);
  }

  const SimState& s0 = traj.snapshots.front();
  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 0; ix < g.nx; ++ix)
      cell[g.idx(ix, iy)] =
          std::log1p(s0.v(ix, iy)) * psi.value(g.xc(ix), g.yc(iy), s0.t);
  acc -= g.cell_area() * kahan_sum(cell);
  return acc;
}

struct VMassReport {
  bool pass = false;
  double worst = 0.0;   // largest violation of the inequality
  double worst_t = 0.0;
  std::string message;
};

// mass_v(t) <= mass_v(0) + ∫_0^t (∫v - ∫v^2) ds + tolerance at every sample,
// with the time integral by trapezoid on the recorded series.
inline VMassReport v_mass_inequality(const DiagnosticsSeries& series,
                                     double tolerance = 1e-5) {
  require(!series.empty(), "v_mass_inequality: empty series");
  VMassReport rep;
  double cum = 0.0;
  const double m0 = series.front().mass_v;
  for (std::size_t k = 0; k < series.size(); ++k) {
    if (k > 0) {
      const double dt = series[k].t - series[k - 1].t;
      const double fa = series[k - 1].mass_v - series[k - 1].v_sq;
      const double fb = series[k].mass_v - series[k].v_sq;
      cum += 0.5 * (fa + fb) * dt;
    }
    const double violation = series[k].mass_v - (m0 + cum);
    if (violation > rep.worst) {
      rep.worst = violation;
      rep.worst_t = series[k].t;
    }
  }
  rep.pass = rep.worst <= tolerance;
  std::ostringstream os;
  os << "worst v-mass excess " << rep.worst << " at t=" << rep.worst_t
     << " (tolerance " << tolerance << ")";
  rep.message = os.str();
  return rep;
}

struct EpsLadder {
  std::vector<double> eps_values;  // strictly decreasing, all > 0
  ModelConfig base;                // beta = 2; epsilon is overridden per run
  ResupplySpec resupply;
  InitialData data;

  // non-increasing: duplicates are allowed and exercise determinism
  void validate() const {
    require(base.beta == 2.0, "EpsLadder: beta = 2 required");
    require(!eps_values.empty(), "EpsLadder: empty ladder");
    for (double e : eps_values) require(e > 0.0, "EpsLadder: eps must be > 0");
    for (std::size_t i = 1; i < eps_values.size(); ++i)
      require(eps_values[i] <= eps_values[i - 1],
              "EpsLadder: eps values must not increase");
  }
};

struct EpsRefinementTable {
  std::vector<double> eps_values;
  // one row per consecutive pair (eps_j, eps_{j+1})
  std::vector<double> dist_u, dist_v, dist_w;
  std::vector<std::string> failures;  // per-eps abort reasons, empty if clean
  bool cauchy = false;  // every distance column non-increasing
};

namespace detail {

// Space-time L2 distance over Omega x (0, t_final) between two snapshot
// series on a shared grid and time ladder.
inline double spacetime_l2(const std::vector<SimState>& a,
                           const std::vector<SimState>& b,
                           ScalarField SimState::*field) {
  require(a.size() == b.size(), "spacetime_l2: snapshot counts differ "
                                "(ladder runs must share the dt policy)");
  std::vector<double> times;
  for (const auto& s : a) times.push_back(s.t);
  for (std::size_t k = 0; k < b.size(); ++k)
    require(std::abs(b[k].t - times[k]) <= 1e-10 * std::max(1.0, times.back()),
            "spacetime_l2: snapshot times differ between ladder runs");
  const std::vector<double> tw = trapezoid_weights(times);
  const GridSpec& g = a.front().grid();
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const std::vector<double>& fa = (a[k].*field).values;
    const std::vector<double>& fb = (b[k].*field).values;
    double s = 0.0;
    for (std::size_t i = 0; i < fa.size(); ++i) {
      const double d = fa[i] - fb[i];
      s += d * d;
    }
    acc += tw[k] * g.cell_area() * s;
  }
  return std::sqrt(acc);
}

}  // namespace detail

// Runs the regularized system once per ladder entry and reports the
// consecutive-pair space-time L2 distances for u, v, w. The Cauchy flag is
// set when every column is non-increasing down the ladder.
inline EpsRefinementTable eps_refinement(const EpsLadder& ladder) {
  ladder.validate();
  EpsRefinementTable table;
  table.eps_values = ladder.eps_values;
  table.failures.assign(ladder.eps_values.size(), "");

  RunSchedule sched;
  sched.snapshot_stride = 1;

  std::vector<SimState> prev;
  bool prev_ok = false;
  for (std::size_t j = 0; j < ladder.eps_values.size(); ++j) {
    ModelConfig cfg = ladder.base;
    cfg.epsilon = ladder.eps_values[j];
    Trajectory traj = run(cfg, ladder.resupply, ladder.data, sched);
    if (traj.aborted) {
      table.failures[j] = traj.abort_reason;
      prev_ok = false;
      continue;
    }
    if (prev_ok) {
      table.dist_u.push_back(
          detail::spacetime_l2(prev, traj.snapshots, &SimState::u));
      table.dist_v.push_back(
          detail::spacetime_l2(prev, traj.snapshots, &SimState::v));
      table.dist_w.push_back(
          detail::spacetime_l2(prev, traj.snapshots, &SimState::w));
    }
    prev = std::move(traj.snapshots);
    prev_ok = true;
  }

  auto non_increasing = [](const std::vector<double>& d) {
    for (std::size_t i = 1; i < d.size(); ++i)
      if (d[i] > d[i - 1] * (1.0 + 1e-12)) return false;
    return true;
  };
  table.cauchy = non_increasing(table.dist_u) && non_increasing(table.dist_v) &&
                 non_increasing(table.dist_w);
  return table;
}

}  // namespace taxisim
