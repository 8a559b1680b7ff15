// The simulation state triple and the per-step report.
#pragma once

#include "taxisim/grid.hpp"

namespace taxisim {

// (u, v, w) at time t: forager density, scrounger density, nutrient
// concentration. All nonnegative entrywise for a valid state.
struct SimState {
  double t = 0.0;
  ScalarField u;
  ScalarField v;
  ScalarField w;

  const GridSpec& grid() const { return u.grid; }

  bool finite() const { return u.finite() && v.finite() && w.finite(); }
};

struct StepReport {
  double dt_used = 0.0;
  int solver_iters_u = 0;
  int solver_iters_v = 0;
  int solver_iters_w = 0;
  double min_u = 0.0;
  double min_v = 0.0;
  double min_w = 0.0;
  int clipped_cells = 0;           // sub-tolerance negativity clips applied
  double worst_clip = 0.0;         // largest clip magnitude this step
};

}  // namespace taxisim
