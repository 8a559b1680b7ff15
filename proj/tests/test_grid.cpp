#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "taxisim/grid.hpp"
#include "taxisim/random.hpp"

using namespace taxisim;

namespace {

ScalarField random_field(const GridSpec& g, Rng& rng, double lo = -1.0,
                         double hi = 1.0) {
  ScalarField f(g);
  for (double& v : f.values) v = rng.uniform(lo, hi);
  return f;
}

// discrete Neumann eigenvalue of the cos(k pi x / lx) mode
double discrete_eigenvalue(const GridSpec& g, int k) {
  return 2.0 / (g.h * g.h) * (1.0 - std::cos(k * M_PI * g.h / g.lx));
}

}  // namespace

TEST_CASE("GridSpec enforces square cells and positive extents") {
  CHECK_NOTHROW(GridSpec(4, 4, 1.0, 1.0));
  CHECK_NOTHROW(GridSpec(4, 1, 1.0, 0.25));
  CHECK_THROWS(GridSpec(4, 4, 1.0, 2.0));   // rectangular cells
  CHECK_THROWS(GridSpec(1, 1, 1.0, 1.0));   // nx too small
  CHECK_THROWS(GridSpec(4, 4, -1.0, -1.0));
  GridSpec g(8, 4, 2.0, 1.0);
  CHECK(g.h == Catch::Approx(0.25));
  CHECK(g.area() == Catch::Approx(g.cells() * g.cell_area()));
}

TEST_CASE("laplacian of a constant field is zero") {
  GridSpec g(8, 8, 1.0, 1.0);
  ScalarField f(g, 3.7);
  ScalarField lap = laplacian_neumann(f);
  for (double v : lap.values) CHECK(v == 0.0);
}

TEST_CASE("cos modes are eigenvectors of the Neumann laplacian") {
  GridSpec g(64, 1, 1.0, 1.0 / 64);
  for (int k : {1, 3}) {
    ScalarField f = sample_field(g, [&](double x, double) {
      return std::cos(k * M_PI * x / g.lx);
    });
    const double lambda = discrete_eigenvalue(g, k);
    ScalarField lap = laplacian_neumann(f);
    for (int i = 0; i < g.cells(); ++i)
      CHECK(lap.values[i] ==
            Catch::Approx(-lambda * f.values[i]).margin(1e-9 * lambda));
  }
}

TEST_CASE("laplacian integrates to zero for random fields") {
  GridSpec g(16, 12, 4.0, 3.0);
  Rng rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    ScalarField f = random_field(g, rng);
    ScalarField lap = laplacian_neumann(f);
    double scale = 0.0;
    for (double v : lap.values) scale = std::max(scale, std::abs(v));
    CHECK(std::abs(integrate(lap)) <= 1e-13 * std::max(1.0, scale));
  }
}

TEST_CASE("face gradient basics") {
  GridSpec g(3, 1, 3.0, 1.0);
  SECTION("constant field gives zero fluxes") {
    FluxField fg = face_gradient(ScalarField(g, 5.0));
    for (double v : fg.xflux) CHECK(v == 0.0);
    for (double v : fg.yflux) CHECK(v == 0.0);
  }
  SECTION("linear 1D field gives unit interior gradients") {
    ScalarField f(g);
    f.values = {0.0, g.h, 2.0 * g.h};
    FluxField fg = face_gradient(f);
    CHECK(fg.fx(0, 0) == 0.0);
    CHECK(fg.fx(1, 0) == Catch::Approx(1.0));
    CHECK(fg.fx(2, 0) == Catch::Approx(1.0));
    CHECK(fg.fx(3, 0) == 0.0);
  }
  SECTION("gradient is antisymmetric under negation") {
    GridSpec g2(9, 6, 3.0, 2.0);
    Rng rng(11);
    ScalarField f = random_field(g2, rng);
    ScalarField neg = f;
    for (double& v : neg.values) v = -v;
    FluxField a = face_gradient(f), b = face_gradient(neg);
    for (std::size_t i = 0; i < a.xflux.size(); ++i)
      CHECK(a.xflux[i] == -b.xflux[i]);
    for (std::size_t i = 0; i < a.yflux.size(); ++i)
      CHECK(a.yflux[i] == -b.yflux[i]);
  }
}

TEST_CASE("upwind flux picks the donor cell") {
  GridSpec g(2, 1, 2.0, 1.0);
  ScalarField d(g);
  d.values = {1.0, 2.0};
  FluxField vel(g);
  SECTION("zero velocity gives zero flux") {
    FluxField flux = upwind_advective_flux(d, vel);
    for (double v : flux.xflux) CHECK(v == 0.0);
  }
  SECTION("positive velocity takes the left value") {
    vel.fx(1, 0) = 3.0;
    FluxField flux = upwind_advective_flux(d, vel);
    CHECK(flux.fx(1, 0) == Catch::Approx(3.0));
  }
  SECTION("negative velocity takes the right value") {
    vel.fx(1, 0) = -3.0;
    FluxField flux = upwind_advective_flux(d, vel);
    CHECK(flux.fx(1, 0) == Catch::Approx(-6.0));
  }
}

TEST_CASE("flux divergence telescopes to zero integral") {
  GridSpec g(12, 10, 1.2, 1.0);
  Rng rng(3);
  SECTION("zero flux maps to zero field") {
    ScalarField div = flux_divergence(FluxField(g));
    for (double v : div.values) CHECK(v == 0.0);
  }
  SECTION("random interior fluxes integrate to zero") {
    for (int trial = 0; trial < 50; ++trial) {
      FluxField flux(g);
      for (int iy = 0; iy < g.ny; ++iy)
        for (int ix = 1; ix < g.nx; ++ix) flux.fx(ix, iy) = rng.uniform(-2, 2);
      for (int iy = 1; iy < g.ny; ++iy)
        for (int ix = 0; ix < g.nx; ++ix) flux.fy(ix, iy) = rng.uniform(-2, 2);
      ScalarField div = flux_divergence(flux);
      double scale = 0.0;
      for (double v : div.values) scale = std::max(scale, std::abs(v));
      CHECK(std::abs(integrate(div)) <= 1e-13 * std::max(1.0, scale));
    }
  }
  SECTION("nonzero boundary faces are rejected") {
    FluxField flux(g);
    flux.fx(0, 2) = 1.0;
    CHECK_THROWS(flux_divergence(flux));
  }
}

TEST_CASE("divergence of face gradient equals the laplacian exactly") {
  GridSpec g(17, 9, 1.7, 0.9);
  Rng rng(19);
  for (int trial = 0; trial < 20; ++trial) {
    ScalarField f = random_field(g, rng, -5.0, 5.0);
    ScalarField a = laplacian_neumann(f);
    ScalarField b = flux_divergence(face_gradient(f));
    for (int i = 0; i < g.cells(); ++i) CHECK(a.values[i] == b.values[i]);
  }
}

TEST_CASE("conservation of upwinded transport") {
  GridSpec g(14, 14, 1.0, 1.0);
  Rng rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    ScalarField d = random_field(g, rng, 0.0, 3.0);
    FluxField vel(g);
    for (int iy = 0; iy < g.ny; ++iy)
      for (int ix = 1; ix < g.nx; ++ix) vel.fx(ix, iy) = rng.uniform(-1, 1);
    for (int iy = 1; iy < g.ny; ++iy)
      for (int ix = 0; ix < g.nx; ++ix) vel.fy(ix, iy) = rng.uniform(-1, 1);
    FluxField flux = upwind_advective_flux(d, vel);
    double fscale = 0.0;
    for (double v : flux.xflux) fscale = std::max(fscale, std::abs(v));
    for (double v : flux.yflux) fscale = std::max(fscale, std::abs(v));
    CHECK(std::abs(integrate(flux_divergence(flux))) <=
          1e-13 * std::max(1.0, fscale));
  }
}

TEST_CASE("integrate quadrature") {
  GridSpec g(10, 10, 1.0, 1.0);
  CHECK(integrate(ScalarField(g, 1.0)) == Catch::Approx(1.0).epsilon(1e-14));
  CHECK(integrate(ScalarField(g, 0.0)) == 0.0);
  ScalarField ind(g);
  ind(3, 7) = 1.0;
  CHECK(integrate(ind) == Catch::Approx(g.cell_area()).epsilon(1e-14));
}

TEST_CASE("dirichlet quotient") {
  SECTION("constant field gives zero for any weight") {
    GridSpec g(6, 6, 1.0, 1.0);
    Rng rng(31);
    ScalarField w = random_field(g, rng, 0.1, 2.0);
    CHECK(dirichlet_quotient(ScalarField(g, 4.2), w, 1e-10) == 0.0);
  }
  SECTION("linear 1D slope against unit weight, hand-summed") {
    GridSpec g(4, 1, 1.0, 0.25);
    ScalarField f = sample_field(g, [](double x, double) { return x; });
    // 3 interior faces, each contributing h^2 * 1^2 / 1
    CHECK(dirichlet_quotient(f, ScalarField(g, 1.0), 1e-10) ==
          Catch::Approx(0.1875).epsilon(1e-13));
  }
  SECTION("weight below the floor clamps to dirichlet/floor") {
    GridSpec g(8, 8, 1.0, 1.0);
    Rng rng(37);
    ScalarField f = random_field(g, rng);
    const double floor = 0.5;
    ScalarField tiny(g, 1e-12);
    CHECK(dirichlet_quotient(f, tiny, floor) ==
          Catch::Approx(dirichlet_integral(f) / floor).epsilon(1e-12));
  }
}
