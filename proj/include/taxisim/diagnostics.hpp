// Functionals tracked along a run, a-priori bound checks, differential
// inequality audits, the windowed-integral helpers, and the ODE comparison
// checker.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "taxisim/grid.hpp"
#include "taxisim/model.hpp"
#include "taxisim/state.hpp"

namespace taxisim {

// One time sample of every monitored functional.
struct DiagnosticsRecord {
  double t = 0.0;
  double mass_u = 0.0;     // ∫u
  double mass_v = 0.0;     // ∫v
  double sup_u = 0.0;
  double sup_v = 0.0;
  double sup_w = 0.0;
  double grad_w_sq = 0.0;  // ∫|∇w|^2
  double lap_w_sq = 0.0;   // ∫|Δw|^2
  double dirichlet_u = 0.0;  // ∫|∇u|^2/u
  double entropy_u = 0.0;    // ∫(u ln u + 1/e)
  double energy_F = 0.0;     // ∫u ln u + (1/2)∫|∇w|^2/w
  double combined_y = 0.0;   // entropy_u + (1/2)∫|∇w|^2/w + lambda ∫|∇w|^2
  double v_beta = 0.0;       // ∫v^beta
  double v_sq = 0.0;         // ∫v^2
  double u_sq = 0.0;         // ∫u^2 (windowed in the boundedness monitor)
  double gradroot_r = 0.0;   // ∫|∇√r|^2
  double dt_used = 0.0;
};

using DiagnosticsSeries = std::vector<DiagnosticsRecord>;

inline double xlogx(double s) { return s > 0.0 ? s * std::log(s) : 0.0; }

inline DiagnosticsRecord record(const SimState& state, const ModelConfig& cfg,
                                const ResupplySpec& spec, double lambda = 1.0) {
  const GridSpec& g = state.grid();
  DiagnosticsRecord r;
  r.t = state.t;
  r.mass_u = integrate(state.u);
  r.mass_v = integrate(state.v);
  r.sup_u = field_max(state.u);
  r.sup_v = field_max(state.v);
  r.sup_w = field_max(state.w);
  r.grad_w_sq = dirichlet_integral(state.w);

  ScalarField lap = laplacian_neumann(state.w);
  std::vector<double> sq(lap.values.size());
  for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = lap.values[i] * lap.values[i];
  r.lap_w_sq = g.cell_area() * kahan_sum(sq);

  r.dirichlet_u = dirichlet_quotient(state.u, state.u, cfg.u_floor);

  std::vector<double> ent(state.u.values.size());
  std::vector<double> ulnu(state.u.values.size());
  for (std::size_t i = 0; i < ent.size(); ++i) {
    ulnu[i] = xlogx(state.u.values[i]);
    ent[i] = ulnu[i] + 1.0 / M_E;
  }
  r.entropy_u = g.cell_area() * kahan_sum(ent);
  const double int_ulnu = g.cell_area() * kahan_sum(ulnu);
  const double half_weighted = 0.5 * dirichlet_quotient(state.w, state.w, cfg.w_floor);
  r.energy_F = int_ulnu + half_weighted;
  r.combined_y = r.entropy_u + half_weighted + lambda * r.grad_w_sq;

  std::vector<double> vb(state.v.values.size()), vs(state.v.values.size()),
      us(state.u.values.size());
  for (std::size_t i = 0; i < vb.size(); ++i) {
    const double v = state.v.values[i];
    vb[i] = std::pow(v, cfg.beta);
    vs[i] = v * v;
    const double u = state.u.values[i];
    us[i] = u * u;
  }
  r.v_beta = g.cell_area() * kahan_sum(vb);
  r.v_sq = g.cell_area() * kahan_sum(vs);
  r.u_sq = g.cell_area() * kahan_sum(us);

  r.gradroot_r = gradroot_integral(spec, g, state.t);

  require(std::isfinite(r.mass_u) && std::isfinite(r.energy_F) &&
              std::isfinite(r.combined_y) && std::isfinite(r.lap_w_sq),
          "record: non-finite functional value");
  return r;
}

struct CheckReport {
  bool pass = false;
  double worst = 0.0;
  double worst_t = 0.0;
  std::string message;
};

// Relative drift of ∫u against its initial value.
inline CheckReport check_mass_conservation(const DiagnosticsSeries& series,
                                           double tol = 1e-10) {
  require(!series.empty(), "check_mass_conservation: empty series");
  const double m0 = series.front().mass_u;
  require(m0 > 0.0, "check_mass_conservation: initial u-mass must be positive");
  CheckReport rep;
  for (const auto& r : series) {
    const double dev = std::abs(r.mass_u - m0) / m0;
    if (dev > rep.worst) {
      rep.worst = dev;
      rep.worst_t = r.t;
    }
  }
  rep.pass = rep.worst <= tol;
  std::ostringstream os;
  os << "max relative u-mass drift " << rep.worst << " at t=" << rep.worst_t;
  rep.message = os.str();
  return rep;
}

// sup_w(t) <= ||w0||_inf + r_* at every sample.
inline CheckReport check_w_bound(const DiagnosticsSeries& series, double w0_sup,
                                 double r_star, double tol = 1e-8) {
  require(!series.empty(), "check_w_bound: empty series");
  const double bound = w0_sup + r_star + tol;
  CheckReport rep;
  rep.worst = -std::numeric_limits<double>::infinity();
  for (const auto& r : series) {
    const double overshoot = r.sup_w - bound;
    if (overshoot > rep.worst) {
      rep.worst = overshoot;
      rep.worst_t = r.t;
    }
  }
  rep.pass = rep.worst <= 0.0;
  std::ostringstream os;
  os << "sup_w " << (rep.pass ? "respects" : "violates") << " bound "
     << w0_sup + r_star << " (worst overshoot " << rep.worst
     << " at t=" << rep.worst_t << ")";
  rep.message = os.str();
  return rep;
}

// Windowed integrals ∫_t^{t+tau} base(s) ds of a sampled series, trapezoid
// in time (exact for the piecewise-linear interpolant). Defined for start
// times with t + tau inside the sampled span.
struct WindowedSeries {
  double tau = 0.0;
  std::vector<double> t0;
  std::vector<double> values;

  double max_value() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, v);
    return m;
  }
};

namespace detail {

// Integral of the piecewise-linear interpolant of (t, f) from t.front() to x.
inline double plin_cumint(const std::vector<double>& t,
                          const std::vector<double>& f,
                          const std::vector<double>& cum, double x) {
  const std::size_t n = t.size();
  if (x <= t.front()) return 0.0;
  if (x >= t.back()) return cum.back();
  std::size_t k = static_cast<std::size_t>(
      std::upper_bound(t.begin(), t.end(), x) - t.begin());
  k = std::min(std::max<std::size_t>(k, 1), n - 1) - 1;
  const double dt = t[k + 1] - t[k];
  const double s = (x - t[k]) / dt;
  const double fa = f[k], fb = f[k + 1];
  // ∫_{t_k}^{x} of the linear segment
  return cum[k] + dt * (fa * s + 0.5 * (fb - fa) * s * s);
}

inline std::vector<double> plin_cum(const std::vector<double>& t,
                                    const std::vector<double>& f) {
  std::vector<double> cum(t.size(), 0.0);
  for (std::size_t k = 1; k < t.size(); ++k)
    cum[k] = cum[k - 1] + 0.5 * (f[k] + f[k - 1]) * (t[k] - t[k - 1]);
  return cum;
}

}  // namespace detail

inline WindowedSeries windowed(const std::vector<double>& times,
                               const std::vector<double>& base, double tau) {
  require(times.size() == base.size() && times.size() >= 2,
          "windowed: series needs matching times and at least 2 samples");
  const double span = times.back() - times.front();
  require(tau > 0.0 && tau <= span, "windowed: tau must lie in (0, T]");
  WindowedSeries out;
  out.tau = tau;
  const std::vector<double> cum = detail::plin_cum(times, base);
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (times[k] + tau > times.back() + 1e-12 * span) break;
    const double a = detail::plin_cumint(times, base, cum, times[k]);
    const double b = detail::plin_cumint(times, base, cum, times[k] + tau);
    out.t0.push_back(times[k]);
    out.values.push_back(b - a);
  }
  return out;
}

// Inputs for the ODE comparison check: y' <= a y z with windowed bounds
// ∫_t^{t+theta} y <= b and ∫_t^{t+theta} z <= c yields
// y(t) <= max{y(0), b} e^{2ac}.
struct GronwallInputs {
  std::vector<double> t;
  std::vector<double> y;
  std::vector<double> z;
  double a = 1.0;
  double b = 1.0;
  double c = 1.0;
  double theta = 1.0;          // min(1, T/2)
  double derivative_slack = 0.0;  // discretization allowance for y' <= ayz

  static GronwallInputs make(std::vector<double> times, std::vector<double> ys,
                             std::vector<double> zs, double a, double b,
                             double c, double slack = 0.0) {
    require(times.size() == ys.size() && times.size() == zs.size(),
            "GronwallInputs: series sizes must match");
    require(times.size() >= 3, "GronwallInputs: need at least 3 samples");
    for (std::size_t k = 1; k < times.size(); ++k)
      require(times[k] > times[k - 1], "GronwallInputs: times must increase");
    require(a > 0.0 && b > 0.0 && c > 0.0,
            "GronwallInputs: constants must be positive");
    GronwallInputs in;
    in.t = std::move(times);
    in.y = std::move(ys);
    in.z = std::move(zs);
    in.a = a;
    in.b = b;
    in.c = c;
    in.theta = std::min(1.0, (in.t.back() - in.t.front()) / 2.0);
    in.derivative_slack = slack;
    return in;
  }
};

struct GronwallReport {
  bool hypotheses_hold = false;
  bool ode_bound_holds = false;       // (i)  y' <= a y z + slack
  bool windowed_y_holds = false;      // (ii) windowed y <= b
  bool windowed_z_holds = false;      // (iii) windowed z <= c
  double bound = 0.0;                 // max{y(0), b} e^{2ac}
  double max_y = 0.0;
  bool conclusion_holds = false;      // only asserted when hypotheses hold
  std::string message;
};

inline GronwallReport gronwall_check(const GronwallInputs& in) {
  GronwallReport rep;

  rep.ode_bound_holds = true;
  for (std::size_t k = 0; k + 1 < in.t.size(); ++k) {
    const double dydt = (in.y[k + 1] - in.y[k]) / (in.t[k + 1] - in.t[k]);
    if (dydt > in.a * in.y[k] * in.z[k] + in.derivative_slack) {
      rep.ode_bound_holds = false;
      break;
    }
  }

  const double wig = 1.0 + 1e-12;
  rep.windowed_y_holds = windowed(in.t, in.y, in.theta).max_value() <= in.b * wig;
  rep.windowed_z_holds = windowed(in.t, in.z, in.theta).max_value() <= in.c * wig;
  rep.hypotheses_hold =
      rep.ode_bound_holds && rep.windowed_y_holds && rep.windowed_z_holds;

  rep.bound = std::max(in.y.front(), in.b) * std::exp(2.0 * in.a * in.c);
  rep.max_y = *std::max_element(in.y.begin(), in.y.end());
  rep.conclusion_holds =
      rep.hypotheses_hold && rep.max_y <= rep.bound * (1.0 + 1e-9);

  std::ostringstream os;
  if (!rep.hypotheses_hold)
    os << "hypotheses violated (ode=" << rep.ode_bound_holds
       << " windowed_y=" << rep.windowed_y_holds
       << " windowed_z=" << rep.windowed_z_holds
       << "); conclusion not asserted";
  else
    os << "max y " << rep.max_y << (rep.conclusion_holds ? " <= " : " > ")
       << "bound " << rep.bound;
  rep.message = os.str();
  return rep;
}

enum class AuditLemma { lemma31, lemma32 };

struct AuditConstants {
  double C = 1.0;
  double M = 1.0;
  double delta = 0.25;
};

struct AuditResult {
  std::vector<double> t;         // interior sample times
  std::vector<double> residual;  // RHS - LHS, >= 0 when the inequality holds
  double worst = 0.0;
  double frac_nonneg = 0.0;      // fraction with residual >= -tolerance
  bool pass = false;
};

// Residuals of the two differential inequalities on a recorded series.
// Time derivatives are centered differences; the endpoints are dropped.
// area = |Ω|, needed for the additive |Ω|/e constant in the entropy bracket.
inline AuditResult audit_inequality(const DiagnosticsSeries& series,
                                    AuditLemma which, const AuditConstants& k,
                                    double area, double tolerance = 1e-9) {
  require(series.size() >= 3, "audit_inequality: need at least 3 samples");
  AuditResult res;
  res.worst = std::numeric_limits<double>::infinity();
  int nonneg = 0;
  for (std::size_t i = 1; i + 1 < series.size(); ++i) {
    const auto& prev = series[i - 1];
    const auto& cur = series[i];
    const auto& next = series[i + 1];
    const double dt2 = next.t - prev.t;
    double lhs = 0.0, rhs = 0.0;
    if (which == AuditLemma::lemma31) {
      const double ddt = (next.grad_w_sq - prev.grad_w_sq) / dt2;
      lhs = 0.5 * ddt + cur.grad_w_sq + 0.25 * cur.lap_w_sq;
      rhs = k.C * cur.dirichlet_u + k.M * k.M * cur.v_sq + k.C;
    } else {
      // bracket of the quasi-energy inequality: ∫(u ln u + 1/e) + (1/2)∫|∇w|^2/w
      // equals energy_F + |Ω|/e
      const double bracket_prev = prev.energy_F + area / M_E;
      const double bracket_cur = cur.energy_F + area / M_E;
      const double bracket_next = next.energy_F + area / M_E;
      const double ddt = (bracket_next - bracket_prev) / dt2;
      lhs = ddt + bracket_cur + 0.5 * cur.dirichlet_u;
      rhs = k.delta * cur.lap_w_sq + cur.v_sq / (4.0 * k.delta) +
            2.0 * cur.gradroot_r + k.C;
    }
    const double r = rhs - lhs;
    res.t.push_back(cur.t);
    res.residual.push_back(r);
    res.worst = std::min(res.worst, r);
    if (r >= -tolerance) ++nonneg;
  }
  res.frac_nonneg = res.residual.empty()
                        ? 0.0
                        : static_cast<double>(nonneg) / res.residual.size();
  res.pass = res.frac_nonneg >= 0.99;
  return res;
}

struct BisectionResult {
  bool feasible = false;
  double C = 0.0;
  AuditResult audit;
};

// Residuals are monotone increasing in C, so feasibility bisects cleanly.
// Finds a C <= C_max with frac_nonneg >= 0.99, then tightens it.
inline BisectionResult bisect_feasible_C(const DiagnosticsSeries& series,
                                         AuditLemma which, double M,
                                         double delta, double area,
                                         double C_max = 1e6,
                                         double tolerance = 1e-9) {
  BisectionResult out;
  AuditConstants k{C_max, M, delta};
  AuditResult top = audit_inequality(series, which, k, area, tolerance);
  if (!top.pass) {
    out.audit = top;
    return out;
  }
  double lo = 0.0, hi = C_max;
  for (int it = 0; it < 80 && (hi - lo) > 1e-6 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    k.C = mid;
    if (audit_inequality(series, which, k, area, tolerance).pass)
      hi = mid;
    else
      lo = mid;
  }
  k.C = hi;
  out.feasible = true;
  out.C = hi;
  out.audit = audit_inequality(series, which, k, area, tolerance);
  return out;
}

struct SeriesMonitor {
  double max_full = 0.0;
  double max_final_half = 0.0;
  double mean_q2 = 0.0;  // time-mean over [T/4, T/2]
  double mean_q4 = 0.0;  // time-mean over [3T/4, T]
  bool no_growth = false;
};

namespace detail {

inline double plin_mean(const std::vector<double>& t,
                        const std::vector<double>& f, double a, double b) {
  const std::vector<double> cum = plin_cum(t, f);
  const double ia = plin_cumint(t, f, cum, a);
  const double ib = plin_cumint(t, f, cum, b);
  return (ib - ia) / (b - a);
}

}  // namespace detail

inline SeriesMonitor monitor_series(const std::vector<double>& t,
                                    const std::vector<double>& f) {
  require(t.size() == f.size() && t.size() >= 4,
          "monitor_series: need at least 4 samples");
  SeriesMonitor m;
  const double t0 = t.front(), T = t.back();
  const double span = T - t0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    m.max_full = std::max(m.max_full, f[k]);
    if (t[k] >= t0 + 0.5 * span) m.max_final_half = std::max(m.max_final_half, f[k]);
  }
  m.mean_q2 = detail::plin_mean(t, f, t0 + 0.25 * span, t0 + 0.5 * span);
  m.mean_q4 = detail::plin_mean(t, f, t0 + 0.75 * span, T);
  m.no_growth = (m.max_final_half <= m.max_full) &&
                (m.mean_q4 <= 1.05 * m.mean_q2 + 1e-14);
  return m;
}

struct BoundednessReport {
  std::map<std::string, SeriesMonitor> monitors;
  bool all_no_growth = false;
};

// Long-run boundedness flags for every series the global-boundedness result
// controls, including the windowed v^beta and u^2 integrals with
// tau = min(1, T/2).
inline BoundednessReport boundedness_monitor(const DiagnosticsSeries& series) {
  require(series.size() >= 8, "boundedness_monitor: series too short");
  std::vector<double> t, grad, comb, mv, su, sv, sw, vb, usq;
  for (const auto& r : series) {
    t.push_back(r.t);
    grad.push_back(r.grad_w_sq);
    comb.push_back(r.combined_y);
    mv.push_back(r.mass_v);
    su.push_back(r.sup_u);
    sv.push_back(r.sup_v);
    sw.push_back(r.sup_w);
    vb.push_back(r.v_beta);
    usq.push_back(r.u_sq);
  }
  const double span = t.back() - t.front();
  const double tau = std::min(1.0, span / 2.0);

  BoundednessReport rep;
  rep.monitors["grad_w_sq"] = monitor_series(t, grad);
  rep.monitors["combined_y"] = monitor_series(t, comb);
  rep.monitors["mass_v"] = monitor_series(t, mv);
  rep.monitors["sup_u"] = monitor_series(t, su);
  rep.monitors["sup_v"] = monitor_series(t, sv);
  rep.monitors["sup_w"] = monitor_series(t, sw);

  WindowedSeries wvb = windowed(t, vb, tau);
  WindowedSeries wus = windowed(t, usq, tau);
  rep.monitors["windowed_v_beta"] = monitor_series(wvb.t0, wvb.values);
  rep.monitors["windowed_u_sq"] = monitor_series(wus.t0, wus.values);

  rep.all_no_growth = true;
  for (const auto& [name, mon] : rep.monitors)
    rep.all_no_growth = rep.all_no_growth && mon.no_growth;
  return rep;
}

}  // namespace taxisim
