// Model parameters, the response function F and its bounded regularization,
// resupply fields with their admissibility checks, and initial-data
// validation.
#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "taxisim/grid.hpp"

namespace taxisim {

struct ModelConfig {
  double beta = 3.0;
  double epsilon = 0.0;  // regularization; > 0 required iff beta == 2
  double t_final = 1.0;
  double dt_init = 1e-3;
  double cfl_advect = 0.2;
  double cfl_react = 0.5;
  double w_floor = 1e-10;  // floor for 1/w-weighted functionals
  double u_floor = 1e-10;  // floor for 1/u-weighted functionals
  double solver_tol = 1e-10;
  int solver_max_iter = 20000;

  // Throws on any violated invariant. beta in (1,2) is out of the covered
  // parameter range and rejected rather than silently simulated.
  void validate() const {
    require(beta >= 2.0, "ModelConfig: beta must be >= 2");
    if (beta > 2.0)
      require(epsilon == 0.0,
              "ModelConfig: epsilon must be 0 when beta > 2 (no "
              "regularization in the identity-response regime)");
    else
      require(epsilon > 0.0,
              "ModelConfig: beta = 2 requires epsilon > 0 (bounded "
              "regularized response)");
    require(dt_init > 0.0, "ModelConfig: dt_init must be positive");
    require(t_final >= 0.0, "ModelConfig: t_final must be nonnegative");
    require(t_final == 0.0 || t_final > dt_init,
            "ModelConfig: t_final must exceed dt_init");
    require(cfl_advect > 0.0 && cfl_advect <= 1.0,
            "ModelConfig: cfl_advect must lie in (0,1]");
    require(cfl_react > 0.0, "ModelConfig: cfl_react must be positive");
    require(w_floor > 0.0 && u_floor > 0.0,
            "ModelConfig: positivity floors must be positive");
    require(solver_tol > 0.0, "ModelConfig: solver_tol must be positive");
    require(solver_max_iter > 0, "ModelConfig: solver_max_iter must be positive");
  }

  bool regularized() const { return beta == 2.0; }
};

// Response F: identity for beta > 2, s/(1+eps*s) for beta = 2.
// Satisfies 0 <= F(s) <= s, and F(s) <= 1/eps on the regularized branch.
inline double f_eval(double s, const ModelConfig& cfg) {
  require(s >= 0.0, "f_eval: s must be nonnegative");
  if (!cfg.regularized()) return s;
  return s / (1.0 + cfg.epsilon * s);
}

// dF/ds; lies in [0,1] on both branches.
inline double f_prime(double s, const ModelConfig& cfg) {
  require(s >= 0.0, "f_prime: s must be nonnegative");
  if (!cfg.regularized()) return 1.0;
  const double d = 1.0 + cfg.epsilon * s;
  return 1.0 / (d * d);
}

enum class ResupplyKind { zero, constant, separable };

// Nutrient resupply r(x,t) >= 0. The representable class is
// {0, constant, g(x)*s(t)} with g a Gaussian bump and s in {1, exp(-rate t)};
// separable structure keeps the windowed gradient-root admissibility check
// computable by quadrature.
struct ResupplySpec {
  ResupplyKind kind = ResupplyKind::zero;
  double r0 = 0.0;  // constant value

  // separable part: g(x,y) = g_amp * exp(-((x-cx)^2+(y-cy)^2)/(2 sigma^2))
  double g_amp = 0.0;
  double g_cx = 0.5;
  double g_cy = 0.5;
  double g_sigma = 0.1;
  bool s_decay = false;  // s(t) = exp(-s_rate t) if set, else s == 1
  double s_rate = 0.0;

  static ResupplySpec zero() { return ResupplySpec{}; }

  static ResupplySpec constant(double value) {
    require(value >= 0.0, "ResupplySpec: constant resupply must be >= 0");
    ResupplySpec s;
    s.kind = ResupplyKind::constant;
    s.r0 = value;
    return s;
  }

  static ResupplySpec separable(double amp, double cx, double cy, double sigma,
                                bool decay = false, double rate = 0.0) {
    require(amp >= 0.0, "ResupplySpec: separable amplitude must be >= 0");
    require(sigma > 0.0, "ResupplySpec: separable sigma must be positive");
    require(rate >= 0.0, "ResupplySpec: decay rate must be >= 0");
    ResupplySpec s;
    s.kind = ResupplyKind::separable;
    s.g_amp = amp;
    s.g_cx = cx;
    s.g_cy = cy;
    s.g_sigma = sigma;
    s.s_decay = decay;
    s.s_rate = rate;
    return s;
  }

  double g_at(double x, double y) const {
    const double dx = x - g_cx, dy = y - g_cy;
    return g_amp * std::exp(-(dx * dx + dy * dy) / (2.0 * g_sigma * g_sigma));
  }

  double s_at(double t) const { return s_decay ? std::exp(-s_rate * t) : 1.0; }

  // sup over space-time; s(t) <= 1 for both temporal profiles.
  double r_star() const {
    switch (kind) {
      case ResupplyKind::zero: return 0.0;
      case ResupplyKind::constant: return r0;
      case ResupplyKind::separable: return g_amp;
    }
    return 0.0;
  }
};

inline ScalarField resupply_field(const ResupplySpec& spec, const GridSpec& g,
                                  double t) {
  require(t >= 0.0, "resupply_field: t must be nonnegative");
  switch (spec.kind) {
    case ResupplyKind::zero: return ScalarField(g, 0.0);
    case ResupplyKind::constant: return ScalarField(g, spec.r0);
    case ResupplyKind::separable: {
      const double st = spec.s_at(t);
      return sample_field(g, [&](double x, double y) { return spec.g_at(x, y) * st; });
    }
  }
  return ScalarField(g, 0.0);
}

struct ResupplyReport {
  double r_star = 0.0;
  double windowed_gradroot_sup = 0.0;
  bool admissible = false;
  std::string message;
};

// Instantaneous ∫|∇√r|^2 at time t; √ is floored at 1e-14 inside so exact
// zeros of r do not differentiate the root singularity (they contribute 0
// analytically).
inline double gradroot_integral(const ResupplySpec& spec, const GridSpec& g,
                                double t) {
  ScalarField r = resupply_field(spec, g, t);
  ScalarField root(g);
  for (int i = 0; i < g.cells(); ++i) {
    require(r.values[i] >= -0.0, "gradroot_integral: negative resupply sample");
    root.values[i] = std::sqrt(r.values[i] + 1e-14);
  }
  return dirichlet_integral(root);
}

// Samples sup_t of the windowed integral ∫_t^{t+window} ∫|∇√r|^2 on a
// t-ladder of spacing window/10 up to horizon. Admissible when both r_star
// and the windowed sup are finite and every sample of r is nonnegative.
inline ResupplyReport validate_resupply(const ResupplySpec& spec,
                                        const GridSpec& g, double window = 1.0,
                                        double horizon = 10.0) {
  require(window > 0.0, "validate_resupply: window must be positive");
  ResupplyReport rep;
  rep.r_star = spec.r_star();

  // temporal quadrature nodes inside one window
  const int nsub = 20;
  const double dt = window / nsub;
  const double ladder_step = window / 10.0;

  double sup = 0.0;
  bool negative = false;
  for (double t0 = 0.0; t0 <= horizon; t0 += ladder_step) {
    // trapezoid over [t0, t0+window]
    double acc = 0.0;
    for (int k = 0; k <= nsub; ++k) {
      const double t = t0 + k * dt;
      double val = 0.0;
      try {
        val = gradroot_integral(spec, g, t);
      } catch (const std::invalid_argument&) {
        negative = true;
        break;
      }
      const double wq = (k == 0 || k == nsub) ? 0.5 : 1.0;
      acc += wq * dt * val;
    }
    if (negative) break;
    sup = std::max(sup, acc);
    if (spec.kind != ResupplyKind::separable) break;  // time-invariant cases
  }
  rep.windowed_gradroot_sup = sup;
  rep.admissible = !negative && std::isfinite(rep.r_star) && std::isfinite(sup);
  if (negative)
    rep.message = "resupply has negative samples";
  else if (!rep.admissible)
    rep.message = "resupply bounds are not finite";
  else
    rep.message = "admissible";
  return rep;
}

struct InitialData {
  ScalarField u0;
  ScalarField v0;
  ScalarField w0;
};

struct ValidationReport {
  bool pass = true;
  std::vector<std::string> violations;
  double min_u = 0, max_u = 0, int_u = 0;
  double min_v = 0, max_v = 0, int_v = 0;
  double min_w = 0, max_w = 0, int_w = 0;

  std::string summary() const {
    if (pass) return "initial data valid";
    std::ostringstream os;
    os << "initial data invalid:";
    for (const auto& v : violations) os << " [" << v << "]";
    return os.str();
  }
};

// u0, v0 nonnegative and not identically zero; w0 strictly positive.
inline ValidationReport validate_initial_data(const InitialData& data) {
  ValidationReport rep;
  require(data.u0.grid == data.v0.grid && data.u0.grid == data.w0.grid,
          "validate_initial_data: fields must share one grid");
  rep.min_u = field_min(data.u0);
  rep.max_u = field_max(data.u0);
  rep.int_u = integrate(data.u0);
  rep.min_v = field_min(data.v0);
  rep.max_v = field_max(data.v0);
  rep.int_v = integrate(data.v0);
  rep.min_w = field_min(data.w0);
  rep.max_w = field_max(data.w0);
  rep.int_w = integrate(data.w0);

  if (!data.u0.finite() || !data.v0.finite() || !data.w0.finite()) {
    rep.violations.push_back("initial fields contain non-finite entries");
  }
  if (rep.min_u < 0.0) rep.violations.push_back("u0 has negative entries");
  if (rep.int_u <= 0.0) rep.violations.push_back("u0 identically zero");
  if (rep.min_v < 0.0) rep.violations.push_back("v0 has negative entries");
  if (rep.int_v <= 0.0) rep.violations.push_back("v0 identically zero");
  if (rep.min_w <= 0.0)
    rep.violations.push_back("w0 not strictly positive everywhere");
  rep.pass = rep.violations.empty();
  return rep;
}

}  // namespace taxisim
