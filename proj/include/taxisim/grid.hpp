// Uniform cell-centered rectangular grid with homogeneous Neumann boundary
// handling: scalar fields, face flux fields, and the discrete operators
// (Laplacian, face gradient, upwind flux, divergence, quadratures) the
// stepper and diagnostics are built from.
#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace taxisim {

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

// Uniform grid of square cells on [0,lx] x [0,ly]. Cell (ix,iy) has its
// center at ((ix+0.5)h, (iy+0.5)h); fields are sampled at cell centers.
struct GridSpec {
  int nx = 0;
  int ny = 0;
  double lx = 0.0;
  double ly = 0.0;
  double h = 0.0;

  GridSpec() = default;

  GridSpec(int nx_, int ny_, double lx_, double ly_)
      : nx(nx_), ny(ny_), lx(lx_), ly(ly_) {
    require(nx >= 2, "GridSpec: nx must be >= 2");
    require(ny >= 1, "GridSpec: ny must be >= 1");
    require(lx > 0.0 && ly > 0.0, "GridSpec: domain lengths must be positive");
    const double hx = lx / nx;
    const double hy = ly / ny;
    require(std::abs(hx - hy) <= 1e-12 * std::max(hx, hy),
            "GridSpec: cells must be square (lx/nx == ly/ny)");
    h = hx;
  }

  int cells() const { return nx * ny; }
  double cell_area() const { return h * h; }
  double area() const { return lx * ly; }
  double xc(int ix) const { return (ix + 0.5) * h; }
  double yc(int iy) const { return (iy + 0.5) * h; }
  int idx(int ix, int iy) const { return iy * nx + ix; }

  bool operator==(const GridSpec& o) const {
    return nx == o.nx && ny == o.ny && lx == o.lx && ly == o.ly;
  }
};

// One scalar unknown (u, v, w or r) as a row-major array of cell values.
struct ScalarField {
  GridSpec grid;
  std::vector<double> values;

  ScalarField() = default;
  explicit ScalarField(const GridSpec& g, double fill = 0.0)
      : grid(g), values(static_cast<std::size_t>(g.cells()), fill) {}

  double& operator()(int ix, int iy) { return values[grid.idx(ix, iy)]; }
  double operator()(int ix, int iy) const { return values[grid.idx(ix, iy)]; }

  bool finite() const {
    for (double v : values)
      if (!std::isfinite(v)) return false;
    return true;
  }
};

template <class F>
ScalarField sample_field(const GridSpec& g, F&& f) {
  ScalarField out(g);
  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 0; ix < g.nx; ++ix) out(ix, iy) = f(g.xc(ix), g.yc(iy));
  return out;
}

inline double field_min(const ScalarField& f) {
  double m = f.values.empty() ? 0.0 : f.values[0];
  for (double v : f.values) m = std::min(m, v);
  return m;
}

inline double field_max(const ScalarField& f) {
  double m = f.values.empty() ? 0.0 : f.values[0];
  for (double v : f.values) m = std::max(m, v);
  return m;
}

// Face-centered flux/velocity data. x faces sit between cells (ix-1,iy) and
// (ix,iy); entries on the domain boundary stay exactly zero so that the
// discrete no-flux condition is structural rather than approximate.
struct FluxField {
  GridSpec grid;
  std::vector<double> xflux;  // (nx+1)*ny, index iy*(nx+1)+ix
  std::vector<double> yflux;  // nx*(ny+1), index iy*nx+ix

  FluxField() = default;
  explicit FluxField(const GridSpec& g)
      : grid(g),
        xflux(static_cast<std::size_t>((g.nx + 1) * g.ny), 0.0),
        yflux(static_cast<std::size_t>(g.nx * (g.ny + 1)), 0.0) {}

  double& fx(int ix, int iy) { return xflux[iy * (grid.nx + 1) + ix]; }
  double fx(int ix, int iy) const { return xflux[iy * (grid.nx + 1) + ix]; }
  double& fy(int ix, int iy) { return yflux[iy * grid.nx + ix]; }
  double fy(int ix, int iy) const { return yflux[iy * grid.nx + ix]; }

  bool boundary_faces_zero() const {
    const int nx = grid.nx, ny = grid.ny;
    for (int iy = 0; iy < ny; ++iy)
      if (fx(0, iy) != 0.0 || fx(nx, iy) != 0.0) return false;
    for (int ix = 0; ix < nx; ++ix)
      if (fy(ix, 0) != 0.0 || fy(ix, ny) != 0.0) return false;
    return true;
  }
};

// 5-point Laplacian with mirrored ghost cells (zero normal derivative).
// Arithmetic is arranged as the divergence of face gradients so that it is
// bitwise identical to flux_divergence(face_gradient(f)).
inline ScalarField laplacian_neumann(const ScalarField& f) {
  const GridSpec& g = f.grid;
  ScalarField out(g);
  const double h = g.h;
  for (int iy = 0; iy < g.ny; ++iy) {
    for (int ix = 0; ix < g.nx; ++ix) {
      const double c = f(ix, iy);
      const double ge = (ix + 1 < g.nx) ? (f(ix + 1, iy) - c) / h : 0.0;
      const double gw = (ix > 0) ? (c - f(ix - 1, iy)) / h : 0.0;
      const double gn = (iy + 1 < g.ny) ? (f(ix, iy + 1) - c) / h : 0.0;
      const double gs = (iy > 0) ? (c - f(ix, iy - 1)) / h : 0.0;
      out(ix, iy) = (ge - gw) / h + (gn - gs) / h;
    }
  }
  return out;
}

// Face-centered gradient, zero on boundary faces.
inline FluxField face_gradient(const ScalarField& f) {
  const GridSpec& g = f.grid;
  FluxField out(g);
  const double h = g.h;
  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 1; ix < g.nx; ++ix)
      out.fx(ix, iy) = (f(ix, iy) - f(ix - 1, iy)) / h;
  for (int iy = 1; iy < g.ny; ++iy)
    for (int ix = 0; ix < g.nx; ++ix)
      out.fy(ix, iy) = (f(ix, iy) - f(ix, iy - 1)) / h;
  return out;
}

// First-order donor upwind flux: each interior face carries velocity times
// the density of the cell the flow leaves. Boundary faces stay zero.
inline FluxField upwind_advective_flux(const ScalarField& density,
                                       const FluxField& velocity) {
  const GridSpec& g = density.grid;
  require(g == velocity.grid, "upwind_advective_flux: grid mismatch");
  FluxField out(g);
  for (int iy = 0; iy < g.ny; ++iy) {
    for (int ix = 1; ix < g.nx; ++ix) {
      const double vel = velocity.fx(ix, iy);
      const double d = vel > 0.0 ? density(ix - 1, iy) : density(ix, iy);
      out.fx(ix, iy) = vel * d;
    }
  }
  for (int iy = 1; iy < g.ny; ++iy) {
    for (int ix = 0; ix < g.nx; ++ix) {
      const double vel = velocity.fy(ix, iy);
      const double d = vel > 0.0 ? density(ix, iy - 1) : density(ix, iy);
      out.fy(ix, iy) = vel * d;
    }
  }
  return out;
}

// Divergence of a face flux field; integrates to zero by telescoping.
inline ScalarField flux_divergence(const FluxField& flux) {
  require(flux.boundary_faces_zero(),
          "flux_divergence: boundary faces must be zero");
  const GridSpec& g = flux.grid;
  ScalarField out(g);
  const double h = g.h;
  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 0; ix < g.nx; ++ix)
      out(ix, iy) = (flux.fx(ix + 1, iy) - flux.fx(ix, iy)) / h +
                    (flux.fy(ix, iy + 1) - flux.fy(ix, iy)) / h;
  return out;
}

// Compensated sum; quadratures feed long accumulation loops in the
// diagnostics and the mass-conservation checks sit at 1e-13 per step.
inline double kahan_sum(const std::vector<double>& xs) {
  double s = 0.0, c = 0.0;
  for (double x : xs) {
    const double y = x - c;
    const double t = s + y;
    c = (t - s) - y;
    s = t;
  }
  return s;
}

// Midpoint quadrature: h^2 * sum of cell values.
inline double integrate(const ScalarField& f) {
  return f.grid.cell_area() * kahan_sum(f.values);
}

// Weighted Dirichlet integral over faces: sum of h^2 (df/h)^2 / weight with
// the weight taken as the face average of the adjacent cells, clamped below.
// Realizes the 1/w- and 1/u-weighted gradient functionals.
inline double dirichlet_quotient(const ScalarField& f,
                                 const ScalarField& weight, double floor) {
  const GridSpec& g = f.grid;
  require(g == weight.grid, "dirichlet_quotient: grid mismatch");
  require(floor > 0.0, "dirichlet_quotient: floor must be positive");
  const double h = g.h;
  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(2 * g.cells()));
  for (int iy = 0; iy < g.ny; ++iy) {
    for (int ix = 1; ix < g.nx; ++ix) {
      const double d = (f(ix, iy) - f(ix - 1, iy)) / h;
      const double w = std::max(0.5 * (weight(ix, iy) + weight(ix - 1, iy)), floor);
      terms.push_back(d * d / w);
    }
  }
  for (int iy = 1; iy < g.ny; ++iy) {
    for (int ix = 0; ix < g.nx; ++ix) {
      const double d = (f(ix, iy) - f(ix, iy - 1)) / h;
      const double w = std::max(0.5 * (weight(ix, iy) + weight(ix, iy - 1)), floor);
      terms.push_back(d * d / w);
    }
  }
  return g.cell_area() * kahan_sum(terms);
}

// Unweighted Dirichlet integral ∫|∇f|^2 with the same face quadrature.
inline double dirichlet_integral(const ScalarField& f) {
  const GridSpec& g = f.grid;
  const double h = g.h;
  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(2 * g.cells()));
  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 1; ix < g.nx; ++ix) {
      const double d = (f(ix, iy) - f(ix - 1, iy)) / h;
      terms.push_back(d * d);
    }
  for (int iy = 1; iy < g.ny; ++iy)
    for (int ix = 0; ix < g.nx; ++ix) {
      const double d = (f(ix, iy) - f(ix, iy - 1)) / h;
      terms.push_back(d * d);
    }
  return g.cell_area() * kahan_sum(terms);
}

}  // namespace taxisim
