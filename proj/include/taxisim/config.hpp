// Run configuration: flat sectioned key-value files, preset initial data,
// and construction of the model/resupply/grid objects from a parsed config.
#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "taxisim/grid.hpp"
#include "taxisim/model.hpp"
#include "taxisim/random.hpp"

namespace taxisim {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  struct Domain {
    int nx = 32, ny = 32;
    double lx = 1.0, ly = 1.0;
    bool operator==(const Domain&) const = default;
  } domain;

  struct Model {
    double beta = 3.0;
    double epsilon = 0.0;
    bool operator==(const Model&) const = default;
  } model;

  struct Initial {
    std::string preset = "uniform";  // uniform | gaussian_bump | perturbed_uniform
    double u0 = 1.0, v0 = 0.5, w0 = 1.0;
    double amplitude = 0.0;   // perturbed_uniform relative amplitude
    std::uint64_t seed = 0;
    int modes = 3;            // max cos-mode number per axis
    double bump_amp_u = 0.0, bump_amp_v = 0.0, bump_amp_w = 0.0;
    double bump_cx = 0.5, bump_cy = 0.5, bump_sigma = 0.12;
    bool operator==(const Initial&) const = default;
  } initial;

  struct Resupply {
    std::string kind = "zero";  // zero | constant | separable
    double r0 = 0.0;
    double g_amp = 0.0, g_cx = 0.5, g_cy = 0.5, g_sigma = 0.1;
    std::string s_kind = "one";  // one | exp_decay
    double s_rate = 0.0;
    bool operator==(const Resupply&) const = default;
  } resupply;

  struct Time {
    double t_final = 1.0;
    double dt_init = 1e-3;
    double cfl_advect = 0.2;
    double cfl_react = 0.5;
    bool operator==(const Time&) const = default;
  } time;

  struct Output {
    std::string directory = "out";
    int snapshot_stride = 0;
    bool operator==(const Output&) const = default;
  } output;

  struct Audit {
    double C = 1.0;
    double M = 0.0;  // 0: derive as ||w0||_inf + r_* at audit time
    double delta = 0.25;
    double lambda = 1.0;
    double mass_tol = 1e-10;
    double w_bound_tol = 1e-8;
    double v_mass_tol = 1e-5;
    double slack_tol = 1e-3;     // weak_slack_v pass threshold
    double residual_tol = 0.05;  // weak residual magnitude pass threshold
    double gronwall_a = 3.0;
    double gronwall_slack = -1.0;  // < 0: auto (5% of max a*y*z)
    double solver_tol = 1e-10;
    int solver_max_iter = 20000;
    double w_floor = 1e-10;
    double u_floor = 1e-10;
    bool operator==(const Audit&) const = default;
  } audit;

  bool operator==(const RunConfig&) const = default;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

struct KeyValue {
  std::string section, key, value;
  int line = 0;
};

inline double parse_double(const KeyValue& kv, const std::string& file) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(kv.value, &pos);
    if (pos != kv.value.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(file + ":" + std::to_string(kv.line) +
                      ": invalid number '" + kv.value + "' for key '" +
                      kv.key + "'");
  }
}

inline long long parse_int(const KeyValue& kv, const std::string& file) {
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(kv.value, &pos);
    if (pos != kv.value.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(file + ":" + std::to_string(kv.line) +
                      ": invalid integer '" + kv.value + "' for key '" +
                      kv.key + "'");
  }
}

}  // namespace detail

// Parses the sectioned key = value format. Unknown sections or keys and
// malformed lines are reported with file:line locations.
inline RunConfig parse_config(std::istream& in, const std::string& filename) {
  RunConfig cfg;
  std::string line, section;
  int lineno = 0;
  bool seed_seen = false;

  auto fail = [&](const std::string& msg) {
    throw ConfigError(filename + ":" + std::to_string(lineno) + ": " + msg);
  };

  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') fail("unterminated section header");
      section = detail::trim(line.substr(1, line.size() - 2));
      if (section != "domain" && section != "model" && section != "initial" &&
          section != "resupply" && section != "time" && section != "output" &&
          section != "audit")
        fail("unknown section '" + section + "'");
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos) fail("expected 'key = value'");
    detail::KeyValue kv;
    kv.section = section;
    kv.key = detail::trim(line.substr(0, eq));
    kv.value = detail::trim(line.substr(eq + 1));
    kv.line = lineno;
    if (kv.key.empty()) fail("empty key");
    if (section.empty()) fail("key '" + kv.key + "' outside any section");

    auto d = [&] { return detail::parse_double(kv, filename); };
    auto i = [&] { return detail::parse_int(kv, filename); };
    bool known = true;

    if (section == "domain") {
      if (kv.key == "nx") cfg.domain.nx = static_cast<int>(i());
      else if (kv.key == "ny") cfg.domain.ny = static_cast<int>(i());
      else if (kv.key == "lx") cfg.domain.lx = d();
      else if (kv.key == "ly") cfg.domain.ly = d();
      else known = false;
    } else if (section == "model") {
      if (kv.key == "beta") cfg.model.beta = d();
      else if (kv.key == "epsilon") cfg.model.epsilon = d();
      else known = false;
    } else if (section == "initial") {
      if (kv.key == "preset") cfg.initial.preset = kv.value;
      else if (kv.key == "u0") cfg.initial.u0 = d();
      else if (kv.key == "v0") cfg.initial.v0 = d();
      else if (kv.key == "w0") cfg.initial.w0 = d();
      else if (kv.key == "amplitude") cfg.initial.amplitude = d();
      else if (kv.key == "seed") {
        cfg.initial.seed = static_cast<std::uint64_t>(i());
        seed_seen = true;
      } else if (kv.key == "modes") cfg.initial.modes = static_cast<int>(i());
      else if (kv.key == "bump_amp_u") cfg.initial.bump_amp_u = d();
      else if (kv.key == "bump_amp_v") cfg.initial.bump_amp_v = d();
      else if (kv.key == "bump_amp_w") cfg.initial.bump_amp_w = d();
      else if (kv.key == "bump_cx") cfg.initial.bump_cx = d();
      else if (kv.key == "bump_cy") cfg.initial.bump_cy = d();
      else if (kv.key == "bump_sigma") cfg.initial.bump_sigma = d();
      else known = false;
    } else if (section == "resupply") {
      if (kv.key == "kind") cfg.resupply.kind = kv.value;
      else if (kv.key == "r0") cfg.resupply.r0 = d();
      else if (kv.key == "g_amp") cfg.resupply.g_amp = d();
      else if (kv.key == "g_cx") cfg.resupply.g_cx = d();
      else if (kv.key == "g_cy") cfg.resupply.g_cy = d();
      else if (kv.key == "g_sigma") cfg.resupply.g_sigma = d();
      else if (kv.key == "s_kind") cfg.resupply.s_kind = kv.value;
      else if (kv.key == "s_rate") cfg.resupply.s_rate = d();
      else known = false;
    } else if (section == "time") {
      if (kv.key == "t_final") cfg.time.t_final = d();
      else if (kv.key == "dt_init") cfg.time.dt_init = d();
      else if (kv.key == "cfl_advect") cfg.time.cfl_advect = d();
      else if (kv.key == "cfl_react") cfg.time.cfl_react = d();
      else known = false;
    } else if (section == "output") {
      if (kv.key == "directory") cfg.output.directory = kv.value;
      else if (kv.key == "snapshot_stride")
        cfg.output.snapshot_stride = static_cast<int>(i());
      else known = false;
    } else if (section == "audit") {
      if (kv.key == "C") cfg.audit.C = d();
      else if (kv.key == "M") cfg.audit.M = d();
      else if (kv.key == "delta") cfg.audit.delta = d();
      else if (kv.key == "lambda") cfg.audit.lambda = d();
      else if (kv.key == "mass_tol") cfg.audit.mass_tol = d();
      else if (kv.key == "w_bound_tol") cfg.audit.w_bound_tol = d();
      else if (kv.key == "v_mass_tol") cfg.audit.v_mass_tol = d();
      else if (kv.key == "slack_tol") cfg.audit.slack_tol = d();
      else if (kv.key == "residual_tol") cfg.audit.residual_tol = d();
      else if (kv.key == "gronwall_a") cfg.audit.gronwall_a = d();
      else if (kv.key == "gronwall_slack") cfg.audit.gronwall_slack = d();
      else if (kv.key == "solver_tol") cfg.audit.solver_tol = d();
      else if (kv.key == "solver_max_iter")
        cfg.audit.solver_max_iter = static_cast<int>(i());
      else if (kv.key == "w_floor") cfg.audit.w_floor = d();
      else if (kv.key == "u_floor") cfg.audit.u_floor = d();
      else known = false;
    }
    if (!known) fail("unknown key '" + kv.key + "' in [" + section + "]");
  }

  if (cfg.initial.preset == "perturbed_uniform" && !seed_seen)
    throw ConfigError(filename +
                      ": preset perturbed_uniform requires an explicit seed "
                      "in [initial]");
  return cfg;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(in, path);
}

namespace detail {

inline std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

// Canonical re-emission; parse(emit(parse(f))) == parse(f).
inline std::string emit_config(const RunConfig& c) {
  using detail::fmt_double;
  std::ostringstream os;
  os << "[domain]\n"
     << "nx = " << c.domain.nx << "\nny = " << c.domain.ny
     << "\nlx = " << fmt_double(c.domain.lx)
     << "\nly = " << fmt_double(c.domain.ly) << "\n\n";
  os << "[model]\n"
     << "beta = " << fmt_double(c.model.beta)
     << "\nepsilon = " << fmt_double(c.model.epsilon) << "\n\n";
  os << "[initial]\n"
     << "preset = " << c.initial.preset << "\nu0 = " << fmt_double(c.initial.u0)
     << "\nv0 = " << fmt_double(c.initial.v0)
     << "\nw0 = " << fmt_double(c.initial.w0)
     << "\namplitude = " << fmt_double(c.initial.amplitude)
     << "\nseed = " << c.initial.seed << "\nmodes = " << c.initial.modes
     << "\nbump_amp_u = " << fmt_double(c.initial.bump_amp_u)
     << "\nbump_amp_v = " << fmt_double(c.initial.bump_amp_v)
     << "\nbump_amp_w = " << fmt_double(c.initial.bump_amp_w)
     << "\nbump_cx = " << fmt_double(c.initial.bump_cx)
     << "\nbump_cy = " << fmt_double(c.initial.bump_cy)
     << "\nbump_sigma = " << fmt_double(c.initial.bump_sigma) << "\n\n";
  os << "[resupply]\n"
     << "kind = " << c.resupply.kind << "\nr0 = " << fmt_double(c.resupply.r0)
     << "\ng_amp = " << fmt_double(c.resupply.g_amp)
     << "\ng_cx = " << fmt_double(c.resupply.g_cx)
     << "\ng_cy = " << fmt_double(c.resupply.g_cy)
     << "\ng_sigma = " << fmt_double(c.resupply.g_sigma)
     << "\ns_kind = " << c.resupply.s_kind
     << "\ns_rate = " << fmt_double(c.resupply.s_rate) << "\n\n";
  os << "[time]\n"
     << "t_final = " << fmt_double(c.time.t_final)
     << "\ndt_init = " << fmt_double(c.time.dt_init)
     << "\ncfl_advect = " << fmt_double(c.time.cfl_advect)
     << "\ncfl_react = " << fmt_double(c.time.cfl_react) << "\n\n";
  os << "[output]\n"
     << "directory = " << c.output.directory
     << "\nsnapshot_stride = " << c.output.snapshot_stride << "\n\n";
  os << "[audit]\n"
     << "C = " << fmt_double(c.audit.C) << "\nM = " << fmt_double(c.audit.M)
     << "\ndelta = " << fmt_double(c.audit.delta)
     << "\nlambda = " << fmt_double(c.audit.lambda)
     << "\nmass_tol = " << fmt_double(c.audit.mass_tol)
     << "\nw_bound_tol = " << fmt_double(c.audit.w_bound_tol)
     << "\nv_mass_tol = " << fmt_double(c.audit.v_mass_tol)
     << "\nslack_tol = " << fmt_double(c.audit.slack_tol)
     << "\nresidual_tol = " << fmt_double(c.audit.residual_tol)
     << "\ngronwall_a = " << fmt_double(c.audit.gronwall_a)
     << "\ngronwall_slack = " << fmt_double(c.audit.gronwall_slack)
     << "\nsolver_tol = " << fmt_double(c.audit.solver_tol)
     << "\nsolver_max_iter = " << c.audit.solver_max_iter
     << "\nw_floor = " << fmt_double(c.audit.w_floor)
     << "\nu_floor = " << fmt_double(c.audit.u_floor) << "\n";
  return os.str();
}

inline GridSpec make_grid(const RunConfig& c) {
  return GridSpec(c.domain.nx, c.domain.ny, c.domain.lx, c.domain.ly);
}

inline ModelConfig make_model(const RunConfig& c) {
  ModelConfig m;
  m.beta = c.model.beta;
  m.epsilon = c.model.beta > 2.0 ? 0.0 : c.model.epsilon;
  m.t_final = c.time.t_final;
  m.dt_init = c.time.dt_init;
  m.cfl_advect = c.time.cfl_advect;
  m.cfl_react = c.time.cfl_react;
  m.w_floor = c.audit.w_floor;
  m.u_floor = c.audit.u_floor;
  m.solver_tol = c.audit.solver_tol;
  m.solver_max_iter = c.audit.solver_max_iter;
  m.validate();
  return m;
}

inline ResupplySpec make_resupply(const RunConfig& c) {
  if (c.resupply.kind == "zero") return ResupplySpec::zero();
  if (c.resupply.kind == "constant") return ResupplySpec::constant(c.resupply.r0);
  if (c.resupply.kind == "separable")
    return ResupplySpec::separable(c.resupply.g_amp, c.resupply.g_cx,
                                   c.resupply.g_cy, c.resupply.g_sigma,
                                   c.resupply.s_kind == "exp_decay",
                                   c.resupply.s_rate);
  throw ConfigError("unknown resupply kind '" + c.resupply.kind + "'");
}

namespace detail {

// Smooth seeded perturbation: a normalized mix of low-order cos modes, so
// sup|p| <= 1, p is grid-transferable, and the samples satisfy the discrete
// Neumann compatibility.
inline ScalarField fourier_perturbation(const GridSpec& g, int max_mode,
                                        Rng& rng) {
  struct Mode {
    int kx, ky;
    double coeff;
  };
  std::vector<Mode> modes;
  double norm = 0.0;
  const int draws = 6;
  for (int m = 0; m < draws; ++m) {
    Mode mo;
    mo.kx = rng.uniform_int(0, max_mode);
    mo.ky = rng.uniform_int(0, max_mode);
    if (mo.kx == 0 && mo.ky == 0) mo.kx = 1;
    mo.coeff = rng.uniform(-1.0, 1.0);
    norm += std::abs(mo.coeff);
    modes.push_back(mo);
  }
  return sample_field(g, [&](double x, double y) {
    double p = 0.0;
    for (const auto& mo : modes)
      p += mo.coeff * std::cos(mo.kx * M_PI * x / g.lx) *
           std::cos(mo.ky * M_PI * y / g.ly);
    return p / norm;
  });
}

}  // namespace detail

inline InitialData make_initial(const RunConfig& c, const GridSpec& g) {
  const auto& ic = c.initial;
  InitialData data;
  if (ic.preset == "uniform") {
    data.u0 = ScalarField(g, ic.u0);
    data.v0 = ScalarField(g, ic.v0);
    data.w0 = ScalarField(g, ic.w0);
  } else if (ic.preset == "gaussian_bump") {
    auto bump = [&](double x, double y) {
      const double dx = x - ic.bump_cx, dy = y - ic.bump_cy;
      return std::exp(-(dx * dx + dy * dy) / (2.0 * ic.bump_sigma * ic.bump_sigma));
    };
    data.u0 = sample_field(g, [&](double x, double y) {
      return ic.u0 * (1.0 + ic.bump_amp_u * bump(x, y));
    });
    data.v0 = sample_field(g, [&](double x, double y) {
      return ic.v0 * (1.0 + ic.bump_amp_v * bump(x, y));
    });
    data.w0 = sample_field(g, [&](double x, double y) {
      return ic.w0 * (1.0 + ic.bump_amp_w * bump(x, y));
    });
  } else if (ic.preset == "perturbed_uniform") {
    require(ic.amplitude >= 0.0 && ic.amplitude < 1.0,
            "perturbed_uniform: amplitude must lie in [0,1)");
    Rng rng(ic.seed);
    ScalarField pu = detail::fourier_perturbation(g, ic.modes, rng);
    ScalarField pv = detail::fourier_perturbation(g, ic.modes, rng);
    ScalarField pw = detail::fourier_perturbation(g, ic.modes, rng);
    data.u0 = ScalarField(g);
    data.v0 = ScalarField(g);
    data.w0 = ScalarField(g);
    for (int i = 0; i < g.cells(); ++i) {
      data.u0.values[i] = ic.u0 * (1.0 + ic.amplitude * pu.values[i]);
      data.v0.values[i] = ic.v0 * (1.0 + ic.amplitude * pv.values[i]);
      data.w0.values[i] = ic.w0 * (1.0 + ic.amplitude * pw.values[i]);
    }
  } else {
    throw ConfigError("unknown initial preset '" + ic.preset + "'");
  }
  return data;
}

}  // namespace taxisim
