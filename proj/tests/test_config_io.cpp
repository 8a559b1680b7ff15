#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "taxisim/config.hpp"
#include "taxisim/io.hpp"
#include "taxisim/random.hpp"
#include "taxisim/stepper.hpp"

using namespace taxisim;
namespace fs = std::filesystem;

namespace {

const char* kSample = R"(# sample configuration
[domain]
nx = 16
ny = 16
lx = 1.0
ly = 1.0

[model]
beta = 3.0
epsilon = 0.0

[initial]
preset = perturbed_uniform
u0 = 1.0
v0 = 0.5
w0 = 2.0
amplitude = 0.05
seed = 42

[resupply]
kind = constant
r0 = 0.3

[time]
t_final = 0.5
dt_init = 0.002

[output]
directory = out
snapshot_stride = 10

[audit]
lambda = 1.0
)";

RunConfig parse_str(const std::string& text, const std::string& name = "test.ini") {
  std::istringstream in(text);
  return parse_config(in, name);
}

fs::path temp_dir() {
  fs::path p = fs::temp_directory_path() / "taxisim_test";
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("config parsing of the sample file") {
  RunConfig c = parse_str(kSample);
  CHECK(c.domain.nx == 16);
  CHECK(c.model.beta == 3.0);
  CHECK(c.initial.preset == "perturbed_uniform");
  CHECK(c.initial.seed == 42);
  CHECK(c.resupply.r0 == 0.3);
  CHECK(c.time.dt_init == 0.002);
  CHECK(c.output.snapshot_stride == 10);
  CHECK(c.audit.mass_tol == 1e-10);  // default survives partial sections
}

TEST_CASE("config errors carry file and line locations") {
  auto check_throws_with = [](const std::string& text, const std::string& needle) {
    try {
      parse_str(text);
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      INFO(e.what());
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
    }
  };
  check_throws_with("[domain]\nnx = 16\nbogus_key = 1\n", "test.ini:3");
  check_throws_with("[domain]\nnx = sixteen\n", "test.ini:2");
  check_throws_with("[nosuch]\n", "unknown section");
  check_throws_with("nx = 16\n", "outside any section");
  check_throws_with("[domain]\nnx 16\n", "key = value");
  check_throws_with(
      "[initial]\npreset = perturbed_uniform\namplitude = 0.1\n",
      "requires an explicit seed");
}

TEST_CASE("config round-trips through emit") {
  RunConfig c = parse_str(kSample);
  RunConfig c2 = parse_str(emit_config(c), "emitted.ini");
  CHECK(c == c2);
  // and emit is a fixed point after one round
  CHECK(emit_config(c) == emit_config(c2));
}

TEST_CASE("model construction honors the regularization case split") {
  RunConfig c = parse_str(kSample);
  c.model.beta = 2.0;
  c.model.epsilon = 0.0;
  CHECK_THROWS(make_model(c));  // beta = 2 needs epsilon > 0
  c.model.epsilon = 0.05;
  CHECK(make_model(c).epsilon == 0.05);
  c.model.beta = 1.5;
  CHECK_THROWS(make_model(c));
  c.model.beta = 3.0;
  c.model.epsilon = 0.25;  // forced back to zero on the identity branch
  CHECK(make_model(c).epsilon == 0.0);
}

TEST_CASE("initial presets") {
  RunConfig c = parse_str(kSample);
  GridSpec g = make_grid(c);
  SECTION("uniform fills constants") {
    c.initial.preset = "uniform";
    InitialData d = make_initial(c, g);
    CHECK(field_min(d.u0) == 1.0);
    CHECK(field_max(d.u0) == 1.0);
    CHECK(field_min(d.w0) == 2.0);
  }
  SECTION("perturbed_uniform is seed-deterministic and amplitude-bounded") {
    InitialData a = make_initial(c, g);
    InitialData b = make_initial(c, g);
    CHECK(a.u0.values == b.u0.values);
    CHECK(a.w0.values == b.w0.values);
    c.initial.seed = 43;
    InitialData other = make_initial(c, g);
    CHECK(a.u0.values != other.u0.values);
    for (int i = 0; i < g.cells(); ++i) {
      CHECK(a.u0.values[i] >= 1.0 * (1 - 0.05));
      CHECK(a.u0.values[i] <= 1.0 * (1 + 0.05));
      CHECK(a.w0.values[i] >= 2.0 * (1 - 0.05));
      CHECK(a.w0.values[i] <= 2.0 * (1 + 0.05));
    }
    CHECK(validate_initial_data(a).pass);
  }
  SECTION("gaussian_bump peaks at the center") {
    c.initial.preset = "gaussian_bump";
    c.initial.bump_amp_u = 0.5;
    InitialData d = make_initial(c, g);
    CHECK(field_max(d.u0) <= 1.5 + 1e-12);
    CHECK(field_max(d.u0) > 1.4);  // center cell close to the peak
    CHECK(field_min(d.u0) >= 1.0);
  }
  SECTION("unknown preset is rejected") {
    c.initial.preset = "nope";
    CHECK_THROWS(make_initial(c, g));
  }
}

TEST_CASE("snapshot round trip is bit exact") {
  GridSpec g(9, 7, 0.9, 0.7);
  Rng rng(3);
  ScalarField f(g);
  for (double& v : f.values) v = rng.uniform(-10, 10);
  f.values[5] = 0.0;
  f.values[6] = 1e-300;

  const fs::path path = temp_dir() / "snap_u.bin";
  write_snapshot(path.string(), "u", f, 1.25);
  Snapshot s = read_snapshot(path.string(), g);
  CHECK(s.field == "u");
  CHECK(s.t == 1.25);
  CHECK(s.data.values == f.values);
}

TEST_CASE("diagnostics csv round trip") {
  DiagnosticsSeries series;
  Rng rng(17);
  for (int k = 0; k < 5; ++k) {
    DiagnosticsRecord r;
    r.t = 0.1 * k;
    r.mass_u = rng.uniform(0.5, 2.0);
    r.mass_v = rng.uniform(0.1, 1.0);
    r.sup_u = rng.uniform(1, 3);
    r.sup_v = rng.uniform(0, 2);
    r.sup_w = rng.uniform(0, 2);
    r.grad_w_sq = rng.uniform(0, 1);
    r.lap_w_sq = rng.uniform(0, 1);
    r.dirichlet_u = rng.uniform(0, 1);
    r.entropy_u = rng.uniform(0, 1);
    r.energy_F = rng.uniform(-1, 1);
    r.combined_y = rng.uniform(0, 2);
    r.v_beta = rng.uniform(0, 1);
    r.v_sq = rng.uniform(0, 1);
    r.gradroot_r = rng.uniform(0, 1);
    r.dt_used = 1e-3;
    series.push_back(r);
  }
  const fs::path path = temp_dir() / "diag.csv";
  write_diagnostics_csv(path.string(), series);
  DiagnosticsSeries back = read_diagnostics_csv(path.string());
  REQUIRE(back.size() == series.size());
  for (std::size_t k = 0; k < series.size(); ++k) {
    CHECK(back[k].t == series[k].t);
    CHECK(back[k].mass_u == series[k].mass_u);
    CHECK(back[k].energy_F == series[k].energy_F);
    CHECK(back[k].gradroot_r == series[k].gradroot_r);
    CHECK(back[k].dt_used == series[k].dt_used);
  }
}

TEST_CASE("manifest round trip") {
  std::vector<ManifestEntry> entries = {
      {"u_000000.bin", "u", 0.0, 0}, {"w_000003.bin", "w", 0.375, 3}};
  const fs::path path = temp_dir() / "manifest.txt";
  write_manifest(path.string(), entries);
  auto back = read_manifest(path.string());
  REQUIRE(back.size() == 2);
  CHECK(back[0].file == "u_000000.bin");
  CHECK(back[1].t == 0.375);
  CHECK(back[1].step == 3);
}

TEST_CASE("identical config and seed give byte-identical diagnostics") {
  RunConfig c = parse_str(kSample);
  c.domain.nx = c.domain.ny = 8;
  c.time.t_final = 0.05;
  GridSpec g = make_grid(c);
  ModelConfig m = make_model(c);
  ResupplySpec r = make_resupply(c);

  auto run_once = [&](const fs::path& csv) {
    InitialData d = make_initial(c, g);
    Trajectory traj = run(m, r, d, {});
    REQUIRE_FALSE(traj.aborted);
    write_diagnostics_csv(csv.string(), traj.diagnostics);
  };
  const fs::path a = temp_dir() / "det_a.csv";
  const fs::path b = temp_dir() / "det_b.csv";
  run_once(a);
  run_once(b);

  std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
  std::stringstream sa, sb;
  sa << fa.rdbuf();
  sb << fb.rdbuf();
  CHECK(sa.str() == sb.str());
  CHECK_FALSE(sa.str().empty());
}
