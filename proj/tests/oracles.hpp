// Test-only reference computations, independent of the library code paths
// they check: a high-order integrator for the uniform-state ODE reduction
// and the exact per-step scalar maps of the splitting scheme.
#pragma once

#include <cmath>
#include <utility>

namespace oracles {

// Uniform-state reduction: with all gradients zero the system collapses to
//   v' = v (1 - v^(beta-1)),   w' = -(F(u0) + F(v) + 1) w + r0,
// with u frozen at u0. F = id for beta > 2, s/(1+eps s) for beta = 2.
struct UniformOde {
  double u0 = 0.8;
  double beta = 3.0;
  double epsilon = 0.0;
  double r0 = 0.3;

  double F(double s) const {
    return beta > 2.0 ? s : s / (1.0 + epsilon * s);
  }

  void rhs(double v, double w, double& dv, double& dw) const {
    dv = v * (1.0 - std::pow(v, beta - 1.0));
    dw = -(F(u0) + F(v) + 1.0) * w + r0;
  }
};

// Classic RK4 at a fixed fine step; reference for first-order endpoint checks.
inline std::pair<double, double> rk4_uniform(const UniformOde& ode, double v0,
                                             double w0, double t_end,
                                             double dt = 1e-4) {
  double v = v0, w = w0, t = 0.0;
  while (t < t_end - 1e-14) {
    const double h = std::min(dt, t_end - t);
    double k1v, k1w, k2v, k2w, k3v, k3w, k4v, k4w;
    ode.rhs(v, w, k1v, k1w);
    ode.rhs(v + 0.5 * h * k1v, w + 0.5 * h * k1w, k2v, k2w);
    ode.rhs(v + 0.5 * h * k2v, w + 0.5 * h * k2w, k3v, k3w);
    ode.rhs(v + h * k3v, w + h * k3w, k4v, k4w);
    v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    w += h / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w);
    t += h;
  }
  return {v, w};
}

// The exact scalar maps of one IMEX step on a spatially uniform state
// (diffusion and taxis act as the identity there).
inline std::pair<double, double> scalar_step(const UniformOde& ode, double v,
                                             double w, double dt) {
  const double v_new = v * (1.0 + dt) / (1.0 + dt * std::pow(v, ode.beta - 1.0));
  const double absorb = ode.F(ode.u0) + ode.F(v_new) + 1.0;
  const double w_new = (w + dt * ode.r0) / (1.0 + dt * absorb);
  return {v_new, w_new};
}

}  // namespace oracles
